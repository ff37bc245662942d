#pragma once

// Config-driven front end: solve, verify and sweep.
//
// Exit codes: 0 success, 1 config error, 2 solver failure, 3 verification failure.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "minrel/errors.hpp"
#include "minrel/projection.hpp"

namespace minrel::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kConfigError = 1, kSolverError = 2, kVerificationFailed = 3 };

/// Invalid config; field() is the dotted path of the offending entry ("" for syntax errors).
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field.empty() ? message : "config field '" + field + "': " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct FamilyConfig {
  std::optional<Density> from;
  std::optional<Density> to;
  /// Draw the endpoints from the seeded generator instead.
  bool random = false;
  int scan_points = 41;
};

struct SweepConfig {
  std::vector<double> q_values;
  std::vector<std::vector<double>> targets;
  bool over_q() const { return !q_values.empty(); }
};

struct ProblemConfig {
  ProblemConfig(Density p, FeatureSet u) : prior(std::move(p)), features(std::move(u)) {}

  Density prior;
  FeatureSet features;
  MomentSpec spec;
  SolverOptions solver;
  std::optional<Density> test_distribution;
  std::optional<FamilyConfig> family;
  std::optional<SweepConfig> sweep;
  /// Warnings collected while validating (q-regime target ranges).
  std::vector<std::string> warnings;
};

/// Parses and validates a JSON config. source names the input in messages.
ProblemConfig parse_config(const std::string& text, const std::string& source = "config");

/// FNV-1a 64-bit hash of the raw config bytes, as 16 hex digits.
std::string config_hash(const std::string& bytes);

/// Runs the command line (argv[0] is the program name). Reports go to the
/// --output file or to out; diagnostics go to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace minrel::cli
