#pragma once

#include <stdexcept>
#include <string>

namespace robench {

/// Process exit codes used by the command-line front end.
enum class ExitCode : int {
  ok = 0,
  usage = 2,  // bad arguments, malformed configuration, missing inputs
  data = 3,   // input data is well-formed but cannot be evaluated
};

/// Base of every error raised by the toolkit. The exit code tells the CLI
/// how to report it.
class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

/// A parameter outside its documented domain.
class ArgumentError : public Error {
 public:
  explicit ArgumentError(const std::string& what) : Error(ExitCode::usage, what) {}
};

/// Malformed configuration, manifest or report file.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ExitCode::usage, what) {}
};

/// Malformed image header or CSV record.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error(ExitCode::data, what) {}
};

/// Payload shorter than its header claims, or mismatched dimensions.
class SizeError : public Error {
 public:
  explicit SizeError(const std::string& what) : Error(ExitCode::data, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ExitCode::data, what) {}
};

/// Evaluation requested against ground truth that has no boxes at all.
class ZeroGroundTruthError : public Error {
 public:
  explicit ZeroGroundTruthError(const std::string& what) : Error(ExitCode::data, what) {}
};

}  // namespace robench
