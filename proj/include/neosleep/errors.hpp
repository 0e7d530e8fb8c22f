#pragma once

#include <stdexcept>
#include <string>

namespace neosleep {

/// Invalid argument or precondition violation on an operation parameter.
class ParameterError : public std::runtime_error {
public:
  explicit ParameterError(const std::string& msg)
      : std::runtime_error("parameter: " + msg) {}
};

/// Malformed input file; message names the file and line where parsing failed.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& path, std::size_t line, const std::string& msg)
      : std::runtime_error("parse: " + path + ":" + std::to_string(line) +
                           ": " + msg) {}
};

/// Signal has no usable variation (constant input, zero-variance derivative).
class DegenerateSignalError : public std::runtime_error {
public:
  explicit DegenerateSignalError(const std::string& msg)
      : std::runtime_error("degenerate signal: " + msg) {}
};

/// Training data contains only one class.
class SingleClassError : public std::runtime_error {
public:
  explicit SingleClassError(const std::string& msg)
      : std::runtime_error("single class: " + msg) {}
};

/// A confusion-matrix metric has a zero denominator; message names the metric.
class UndefinedMetricError : public std::runtime_error {
public:
  explicit UndefinedMetricError(const std::string& msg)
      : std::runtime_error("undefined metric: " + msg) {}
};

/// Filesystem-level failure (missing file, unwritable directory).
class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& msg)
      : std::runtime_error("io: " + msg) {}
};

} // namespace neosleep
