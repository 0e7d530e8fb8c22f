#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace neosleep {

/// Sleep stage of an epoch. Wake is the positive class throughout.
enum class Stage { Sleep = 0, Wake = 1 };

enum class AnnotationKind { Wake, Sleep, Artifact };

std::string to_string(Stage s);
std::string to_string(AnnotationKind k);
Stage stage_from_string(const std::string& s);

/// Half-open time interval [start_s, end_s) tagged with a kind.
/// Wake/Sleep annotations may not overlap each other; Artifact may overlap
/// anything.
struct Annotation {
  double start_s = 0.0;
  double end_s = 0.0;
  AnnotationKind kind = AnnotationKind::Artifact;
};

/// One channel of sampled EEG (microvolts) plus its stage/artifact
/// annotations.
struct EegRecord {
  std::string record_id;
  double fs = 0.0; // Hz
  std::vector<double> samples;
  std::vector<Annotation> annotations;

  double duration_s() const {
    return fs > 0 ? static_cast<double>(samples.size()) / fs : 0.0;
  }
};

/// Fixed-length segment of a record. `index` is the ordinal within the
/// source record; `label` is present only when a dominant stage exists.
struct Epoch {
  std::string record_id;
  int index = 0;
  std::vector<double> samples;
  std::optional<Stage> label;
};

/// Configuration of the synthetic corpus generator.
struct SynthConfig {
  int n_records = 19;
  double record_seconds = 7200.0;
  double fs = 500.0;
  double wake_fraction = 0.4;
  double noise_level = 1.0;
  std::uint64_t seed = 0;
};

struct SyntheticCorpus {
  std::vector<EegRecord> records;
  // Ground-truth stage per 30-second epoch, one vector per record.
  std::vector<std::vector<Stage>> epoch_labels;
};

/// Parse a record file (line 1 `fs=<float>`, then one amplitude per line).
/// If `annotation_path` is non-empty the companion annotation CSV
/// (`start_s,end_s,kind` with kind in {wake,sleep,artifact}, case-insensitive)
/// is parsed and validated against the record duration.
EegRecord load_record(const std::string& record_path,
                      const std::string& annotation_path);

/// Convenience overload: derives the annotation path by replacing the
/// record extension with `.ann`; a missing annotation file means no
/// annotations.
EegRecord load_record(const std::string& record_path);

std::vector<Annotation> load_annotations(const std::string& path,
                                         double duration_s);

void save_record(const EegRecord& record, const std::string& record_path,
                 const std::string& annotation_path);

/// Cut a record into consecutive non-overlapping epochs of
/// round(fs * epoch_seconds) samples starting at sample 0. A trailing
/// partial epoch is dropped. An empty record yields an empty list.
std::vector<Epoch> segment(const EegRecord& record, double epoch_seconds);

struct LabelStats {
  std::size_t excluded_artifact = 0;
  std::size_t excluded_no_majority = 0;
};

/// Apply the artifact-exclusion rule and assign stage labels. An epoch is
/// excluded when the fraction of its time span overlapped by Artifact
/// annotations is >= artifact_threshold, or when no single stage covers a
/// strict majority (>50%) of the span. Survivors carry their stage label.
std::vector<Epoch> label_and_filter(const std::vector<Epoch>& epochs,
                                    const EegRecord& record,
                                    double artifact_threshold,
                                    LabelStats* stats = nullptr);

/// Generate one synthetic record. Sleep epochs concentrate spectral power
/// below ~4 Hz (large slow waves); wake epochs mix 4-30 Hz components with
/// broadband noise. Stage annotations are written as merged 30-second-aligned
/// spans so that segment + label_and_filter recovers `labels_out`.
/// Deterministic for a given (cfg.seed, record_index).
EegRecord generate_synthetic_record(const SynthConfig& cfg, int record_index,
                                    std::vector<Stage>* labels_out = nullptr);

/// Generate the whole corpus. Deterministic for a given seed.
SyntheticCorpus generate_synthetic(const SynthConfig& cfg);

/// `record_id,epoch_index,label` export for labeled epochs.
void write_epoch_labels(const std::string& path,
                        const std::vector<std::string>& record_ids,
                        const std::vector<int>& epoch_indices,
                        const std::vector<Stage>& labels);

} // namespace neosleep
