#include "neosleep/dataio.hpp"

#include "neosleep/errors.hpp"
#include "neosleep/seeding.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <string_view>
#include <system_error>
#include <utility>

namespace neosleep {

namespace {

constexpr double kEpochBlockSeconds = 30.0; // synthetic stage-span alignment

std::string read_whole_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string content;
  in.seekg(0, std::ios::end);
  content.resize(static_cast<std::size_t>(in.tellg()));
  in.seekg(0);
  in.read(content.data(), static_cast<std::streamsize>(content.size()));
  return content;
}

void write_whole_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failed for " + path);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t'))
    s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  return s;
}

double parse_double(std::string_view token, const std::string& path,
                    std::size_t line) {
  const std::string_view t = trim(token);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc{} || ptr != t.data() + t.size())
    throw ParseError(path, line,
                     "expected a number, got '" + std::string(t) + "'");
  return value;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

void append_double(std::string& out, double value, int precision) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value,
                                 std::chars_format::fixed, precision);
  out.append(buf, res.ptr);
}

void append_double_shortest(std::string& out, double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, res.ptr);
}

// Total length of the union of [start,end) intervals clipped to [lo,hi).
double union_overlap(std::vector<std::pair<double, double>> spans, double lo,
                     double hi) {
  double total = 0.0;
  std::sort(spans.begin(), spans.end());
  double cur_start = 0.0, cur_end = -1.0;
  bool open = false;
  for (auto [s, e] : spans) {
    s = std::max(s, lo);
    e = std::min(e, hi);
    if (e <= s) continue;
    if (!open) {
      cur_start = s;
      cur_end = e;
      open = true;
    } else if (s <= cur_end) {
      cur_end = std::max(cur_end, e);
    } else {
      total += cur_end - cur_start;
      cur_start = s;
      cur_end = e;
    }
  }
  if (open) total += cur_end - cur_start;
  return total;
}

} // namespace

std::string to_string(Stage s) {
  return s == Stage::Wake ? "wake" : "sleep";
}

std::string to_string(AnnotationKind k) {
  switch (k) {
    case AnnotationKind::Wake: return "wake";
    case AnnotationKind::Sleep: return "sleep";
    default: return "artifact";
  }
}

Stage stage_from_string(const std::string& s) {
  const std::string l = lower(s);
  if (l == "wake") return Stage::Wake;
  if (l == "sleep") return Stage::Sleep;
  throw ParameterError("unknown stage '" + s + "'");
}

std::vector<Annotation> load_annotations(const std::string& path,
                                         double duration_s) {
  const std::string content = read_whole_file(path);
  std::vector<Annotation> annotations;
  std::vector<std::size_t> stage_lines; // for overlap diagnostics

  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos <= content.size()) {
    const std::size_t eol = content.find('\n', pos);
    const std::string_view raw(content.data() + pos,
                               (eol == std::string::npos ? content.size()
                                                         : eol) -
                                   pos);
    pos = (eol == std::string::npos) ? content.size() + 1 : eol + 1;
    ++line_no;
    const std::string_view lview = trim(raw);
    if (lview.empty()) continue;

    if (!header_seen) {
      if (lower(lview) != "start_s,end_s,kind")
        throw ParseError(path, line_no,
                         "expected header 'start_s,end_s,kind'");
      header_seen = true;
      continue;
    }

    const std::size_t c1 = lview.find(',');
    const std::size_t c2 =
        c1 == std::string_view::npos ? std::string_view::npos
                                     : lview.find(',', c1 + 1);
    if (c1 == std::string_view::npos || c2 == std::string_view::npos)
      throw ParseError(path, line_no, "expected 'start_s,end_s,kind'");

    Annotation ann;
    ann.start_s = parse_double(lview.substr(0, c1), path, line_no);
    ann.end_s = parse_double(lview.substr(c1 + 1, c2 - c1 - 1), path, line_no);
    const std::string kind = lower(trim(lview.substr(c2 + 1)));
    if (kind == "wake")
      ann.kind = AnnotationKind::Wake;
    else if (kind == "sleep")
      ann.kind = AnnotationKind::Sleep;
    else if (kind == "artifact")
      ann.kind = AnnotationKind::Artifact;
    else
      throw ParseError(path, line_no, "unknown kind '" + kind + "'");

    if (!(ann.start_s < ann.end_s))
      throw ParseError(path, line_no, "interval has non-positive length");
    if (ann.start_s < 0.0)
      throw ParseError(path, line_no, "interval starts before 0");
    if (ann.end_s > duration_s + 1e-9)
      throw ParseError(path, line_no,
                       "interval ends after the record duration");

    annotations.push_back(ann);
    if (ann.kind != AnnotationKind::Artifact)
      stage_lines.push_back(line_no);
  }

  // Wake/Sleep spans may not overlap each other (touching endpoints are fine).
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < annotations.size(); ++i)
    if (annotations[i].kind != AnnotationKind::Artifact) order.push_back(i);
  std::vector<std::size_t> stage_idx_line(annotations.size(), 0);
  for (std::size_t j = 0, s = 0; j < annotations.size(); ++j)
    if (annotations[j].kind != AnnotationKind::Artifact)
      stage_idx_line[j] = stage_lines[s++];
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return annotations[a].start_s < annotations[b].start_s;
  });
  for (std::size_t j = 1; j < order.size(); ++j) {
    const Annotation& prev = annotations[order[j - 1]];
    const Annotation& cur = annotations[order[j]];
    if (cur.start_s < prev.end_s - 1e-12)
      throw ParseError(path, stage_idx_line[order[j]],
                       "wake/sleep annotations overlap");
  }

  return annotations;
}

EegRecord load_record(const std::string& record_path,
                      const std::string& annotation_path) {
  const std::string content = read_whole_file(record_path);
  EegRecord record;
  record.record_id = std::filesystem::path(record_path).stem().string();

  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos <= content.size()) {
    const std::size_t eol = content.find('\n', pos);
    const std::string_view raw(content.data() + pos,
                               (eol == std::string::npos ? content.size()
                                                         : eol) -
                                   pos);
    pos = (eol == std::string::npos) ? content.size() + 1 : eol + 1;
    ++line_no;
    const std::string_view lview = trim(raw);
    if (lview.empty()) continue;

    if (!header_seen) {
      if (lview.substr(0, 3) != "fs=")
        throw ParseError(record_path, line_no, "expected 'fs=<float>' header");
      record.fs = parse_double(lview.substr(3), record_path, line_no);
      if (!(record.fs > 0.0))
        throw ParseError(record_path, line_no, "fs must be positive");
      header_seen = true;
      continue;
    }
    record.samples.push_back(parse_double(lview, record_path, line_no));
  }
  if (!header_seen)
    throw ParseError(record_path, 1, "missing 'fs=<float>' header");

  if (!annotation_path.empty())
    record.annotations = load_annotations(annotation_path,
                                          record.duration_s());
  return record;
}

EegRecord load_record(const std::string& record_path) {
  std::filesystem::path ann(record_path);
  ann.replace_extension(".ann");
  std::error_code ec;
  if (std::filesystem::exists(ann, ec))
    return load_record(record_path, ann.string());
  return load_record(record_path, "");
}

void save_record(const EegRecord& record, const std::string& record_path,
                 const std::string& annotation_path) {
  std::string out;
  out.reserve(record.samples.size() * 10 + 32);
  out += "fs=";
  append_double_shortest(out, record.fs);
  out += '\n';
  for (double v : record.samples) {
    append_double(out, v, 3);
    out += '\n';
  }
  write_whole_file(record_path, out);

  std::string ann;
  ann.reserve(record.annotations.size() * 32 + 32);
  ann += "start_s,end_s,kind\n";
  for (const Annotation& a : record.annotations) {
    append_double_shortest(ann, a.start_s);
    ann += ',';
    append_double_shortest(ann, a.end_s);
    ann += ',';
    ann += to_string(a.kind);
    ann += '\n';
  }
  write_whole_file(annotation_path, ann);
}

std::vector<Epoch> segment(const EegRecord& record, double epoch_seconds) {
  if (!(epoch_seconds > 0.0))
    throw ParameterError("epoch_seconds must be positive");
  if (record.samples.empty()) return {};
  if (!(record.fs > 0.0)) throw ParameterError("record fs must be positive");

  const auto epoch_len =
      static_cast<std::size_t>(std::llround(record.fs * epoch_seconds));
  if (epoch_len < 2)
    throw ParameterError("fs * epoch_seconds must be at least 2 samples");

  const std::size_t n_epochs = record.samples.size() / epoch_len;
  std::vector<Epoch> epochs;
  epochs.reserve(n_epochs);
  for (std::size_t i = 0; i < n_epochs; ++i) {
    Epoch e;
    e.record_id = record.record_id;
    e.index = static_cast<int>(i);
    e.samples.assign(record.samples.begin() + i * epoch_len,
                     record.samples.begin() + (i + 1) * epoch_len);
    epochs.push_back(std::move(e));
  }
  return epochs;
}

std::vector<Epoch> label_and_filter(const std::vector<Epoch>& epochs,
                                    const EegRecord& record,
                                    double artifact_threshold,
                                    LabelStats* stats) {
  if (!(artifact_threshold > 0.0 && artifact_threshold <= 1.0))
    throw ParameterError("artifact_threshold must be in (0,1]");

  std::vector<std::pair<double, double>> artifact_spans;
  std::vector<std::pair<double, double>> wake_spans;
  std::vector<std::pair<double, double>> sleep_spans;
  for (const Annotation& a : record.annotations) {
    switch (a.kind) {
      case AnnotationKind::Artifact:
        artifact_spans.emplace_back(a.start_s, a.end_s);
        break;
      case AnnotationKind::Wake:
        wake_spans.emplace_back(a.start_s, a.end_s);
        break;
      case AnnotationKind::Sleep:
        sleep_spans.emplace_back(a.start_s, a.end_s);
        break;
    }
  }

  std::vector<Epoch> kept;
  for (const Epoch& e : epochs) {
    const double span_s = static_cast<double>(e.samples.size()) / record.fs;
    const double t0 = static_cast<double>(e.index) * span_s;
    const double t1 = t0 + span_s;

    const double artifact = union_overlap(artifact_spans, t0, t1);
    if (artifact / span_s >= artifact_threshold) {
      if (stats) ++stats->excluded_artifact;
      continue;
    }

    const double wake = union_overlap(wake_spans, t0, t1);
    const double sleep = union_overlap(sleep_spans, t0, t1);
    std::optional<Stage> label;
    if (wake > 0.5 * span_s)
      label = Stage::Wake;
    else if (sleep > 0.5 * span_s)
      label = Stage::Sleep;
    if (!label) {
      if (stats) ++stats->excluded_no_majority;
      continue;
    }

    Epoch out = e;
    out.label = label;
    kept.push_back(std::move(out));
  }
  return kept;
}

namespace {

void validate_synth_config(const SynthConfig& cfg) {
  if (cfg.n_records < 1) throw ParameterError("n_records must be positive");
  if (!(cfg.record_seconds > 0.0))
    throw ParameterError("record_seconds must be positive");
  if (!(cfg.fs > 0.0)) throw ParameterError("fs must be positive");
  if (!(cfg.wake_fraction >= 0.0 && cfg.wake_fraction <= 1.0))
    throw ParameterError("wake_fraction must be in [0,1]");
  if (cfg.noise_level < 0.0)
    throw ParameterError("noise_level must be non-negative");
}

} // namespace

EegRecord generate_synthetic_record(const SynthConfig& cfg, int record_index,
                                    std::vector<Stage>* labels_out) {
  validate_synth_config(cfg);
  if (record_index < 0 || record_index >= cfg.n_records)
    throw ParameterError("record_index out of range");

  std::mt19937_64 rng(
      derive_seed(cfg.seed, "record", static_cast<std::uint64_t>(record_index)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const auto n_samples =
      static_cast<std::size_t>(std::llround(cfg.record_seconds * cfg.fs));
  const auto epoch_len =
      static_cast<std::size_t>(std::llround(kEpochBlockSeconds * cfg.fs));
  const std::size_t n_epochs =
      epoch_len > 0 ? n_samples / epoch_len : 0;

  // Exact class balance: round(wake_fraction * n_epochs) wake epochs at
  // shuffled positions.
  const auto n_wake = static_cast<std::size_t>(
      std::llround(cfg.wake_fraction * static_cast<double>(n_epochs)));
  std::vector<Stage> labels(n_epochs, Stage::Sleep);
  std::fill(labels.begin(), labels.begin() + std::min(n_wake, n_epochs),
            Stage::Wake);
  std::shuffle(labels.begin(), labels.end(), rng);

  EegRecord record;
  char id[32];
  std::snprintf(id, sizeof(id), "record_%03d", record_index);
  record.record_id = id;
  record.fs = cfg.fs;
  record.samples.assign(n_samples, 0.0);

  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double noise_sd = 10.0 * cfg.noise_level;
  constexpr int n_components = 3;
  constexpr double wake_broadband_sd = 3.0;

  for (std::size_t e = 0; e < n_epochs; ++e) {
    const bool wake = labels[e] == Stage::Wake;
    double freq[n_components], amp[n_components], phase[n_components];
    for (int j = 0; j < n_components; ++j) {
      if (wake) {
        freq[j] = 5.0 + 23.0 * unit(rng);  // 5-28 Hz
        amp[j] = 12.0 + 10.0 * unit(rng);  // lower amplitude, fast
      } else {
        freq[j] = 0.7 + 2.8 * unit(rng);   // 0.7-3.5 Hz
        amp[j] = 25.0 + 20.0 * unit(rng);  // high-amplitude slow waves
      }
      phase[j] = two_pi * unit(rng);
    }
    for (std::size_t k = e * epoch_len; k < (e + 1) * epoch_len; ++k) {
      const double t = static_cast<double>(k) / cfg.fs;
      double v = 0.0;
      for (int j = 0; j < n_components; ++j)
        v += amp[j] * std::sin(two_pi * freq[j] * t + phase[j]);
      if (wake) v += wake_broadband_sd * gauss(rng);
      if (noise_sd > 0.0) v += noise_sd * gauss(rng);
      record.samples[k] = v;
    }
  }
  // Trailing partial block (dropped at segmentation) is plain background.
  for (std::size_t k = n_epochs * epoch_len; k < n_samples; ++k)
    record.samples[k] = 5.0 * gauss(rng);

  // Merge consecutive equal labels into continuous hypnogram spans.
  for (std::size_t e = 0; e < n_epochs;) {
    std::size_t end = e + 1;
    while (end < n_epochs && labels[end] == labels[e]) ++end;
    Annotation ann;
    ann.start_s = static_cast<double>(e) * kEpochBlockSeconds;
    ann.end_s = static_cast<double>(end) * kEpochBlockSeconds;
    ann.kind = labels[e] == Stage::Wake ? AnnotationKind::Wake
                                        : AnnotationKind::Sleep;
    record.annotations.push_back(ann);
    e = end;
  }

  if (labels_out) *labels_out = std::move(labels);
  return record;
}

SyntheticCorpus generate_synthetic(const SynthConfig& cfg) {
  validate_synth_config(cfg);
  SyntheticCorpus corpus;
  corpus.records.reserve(cfg.n_records);
  corpus.epoch_labels.reserve(cfg.n_records);
  for (int r = 0; r < cfg.n_records; ++r) {
    std::vector<Stage> labels;
    corpus.records.push_back(generate_synthetic_record(cfg, r, &labels));
    corpus.epoch_labels.push_back(std::move(labels));
  }
  return corpus;
}

void write_epoch_labels(const std::string& path,
                        const std::vector<std::string>& record_ids,
                        const std::vector<int>& epoch_indices,
                        const std::vector<Stage>& labels) {
  if (record_ids.size() != labels.size() ||
      epoch_indices.size() != labels.size())
    throw ParameterError("epoch label export: column lengths differ");
  std::string out = "record_id,epoch_index,label\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out += record_ids[i];
    out += ',';
    out += std::to_string(epoch_indices[i]);
    out += ',';
    out += to_string(labels[i]);
    out += '\n';
  }
  write_whole_file(path, out);
}

} // namespace neosleep
