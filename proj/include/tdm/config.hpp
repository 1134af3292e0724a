#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tdm/errors.hpp"
#include "tdm/model.hpp"

namespace tdm::cli {

// Bad invocation or configuration (exit code 2).
class UsageError : public Error {
 public:
  using Error::Error;
};

// File system failure (exit code 4).
class IoError : public Error {
 public:
  using Error::Error;
};

enum class Command {
  GroundState,
  Boundary,
  GapMap,
  Scaling,
  FiniteN,
  SteadyStates,
  PhaseDiagram,
  Hysteresis,
  Trajectory,
};

std::string_view to_string(Command c);
std::optional<Command> command_from_string(std::string_view name);
const std::vector<Command>& all_commands();

enum class Format { Csv, Json };

struct Range {
  double min = 0.0;
  double max = 0.0;
  int steps = 2;

  /// `steps` equally spaced values from min to max inclusive.
  std::vector<double> values() const;
};

// How a lambda_plus sweep splits into (lambda1, lambda2).
enum class LambdaMode {
  Symmetric,     // lambda1 = lambda2 = lambda_plus / 2
  FixedLambda1,  // lambda1 from the model section, lambda2 = lambda_plus - lambda1
};

struct RunConfig {
  Command command = Command::GroundState;
  ModelParams params;  // resolved couplings; sweeps override lambda and gamma
  double lambda1 = 0.0;
  double lambda2 = 0.0;

  Range lambda_range;
  Range gamma_range;
  LambdaMode lambda_mode = LambdaMode::Symmetric;

  // finite-n
  int cutoff = 100;
  std::string sector = "both";  // both | even | odd
  std::string export_matrix;    // empty: no export

  // open-system dynamics
  double t_max = 10000.0;
  double stride = 1.0;
  std::string init = "np3";  // np3 | np2 | sr
  std::complex<double> perturbation{0.1, 0.01};

  // scaling
  std::string branch = "sra";  // sra | srb | tc | tp
  std::string quantity = "gap_below";

  std::string output_path;  // empty: standard output
  Format format = Format::Csv;
  std::uint64_t seed = 1;
  int workers = 1;

  // Fully resolved configuration; reading it back reproduces this run.
  nlohmann::json resolved;
};

/// Parses JSON text; malformed input raises UsageError naming the line.
nlohmann::json parse_config_text(std::string_view text, std::string_view source = "config");

/// Reads and parses a configuration file (IoError when unreadable, UsageError
/// when empty or malformed).
nlohmann::json load_config_file(const std::string& path);

/// Merges defaults, file and flag layers (flags win), rejects unknown keys and
/// contradictory settings, and validates ranges.
RunConfig resolve_config(Command command, const nlohmann::json& file,
                         const nlohmann::json& flags = nlohmann::json::object());

/// Built-in defaults of a command, in the file layout.
nlohmann::json default_config(Command command);

}  // namespace tdm::cli
