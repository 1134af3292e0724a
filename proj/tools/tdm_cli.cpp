#include <algorithm>
#include <charconv>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tdm/commands.hpp"
#include "tdm/config.hpp"

namespace {

using tdm::cli::Command;
using nlohmann::json;

enum class Kind { Real, Integer, Text };

struct Flag {
  const char* name;  // long option without dashes
  const char* section;
  const char* key;
  Kind kind;
  const char* help;
  std::vector<Command> only;  // empty: every command
};

const std::vector<Command> kLambdaSweeps{Command::GapMap, Command::FiniteN, Command::PhaseDiagram,
                                         Command::Hysteresis};
const std::vector<Command> kGammaSweeps{Command::Boundary, Command::GapMap, Command::PhaseDiagram};
const std::vector<Command> kDynamics{Command::SteadyStates, Command::PhaseDiagram, Command::Hysteresis,
                                     Command::Trajectory};

const std::vector<Flag>& flags() {
  static const std::vector<Flag> f{
      {"omega", "model", "omega", Kind::Real, "photon frequency", {}},
      {"Omega", "model", "Omega", Kind::Real, "atomic level splitting", {}},
      {"delta", "model", "delta", Kind::Real, "shift of level |1>", {}},
      {"gamma", "model", "gamma", Kind::Real, "relative |2>-|3> coupling", {}},
      {"g1", "model", "g1", Kind::Real, "co-rotating coupling", {}},
      {"g2", "model", "g2", Kind::Real, "counter-rotating coupling", {}},
      {"lambda1", "model", "lambda1", Kind::Real, "g1 / sqrt(omega Omega)", {}},
      {"lambda2", "model", "lambda2", Kind::Real, "g2 / sqrt(omega Omega)", {}},
      {"lambda-plus", "model", "lambda_plus", Kind::Real, "lambda1 = lambda2 = lambda_plus / 2", {}},
      {"kappa", "model", "kappa", Kind::Real, "photon loss rate", {}},
      {"kappa-ratio", "model", "kappa_ratio", Kind::Real, "photon loss rate in units of omega", {}},
      {"atoms", "model", "n_atoms", Kind::Integer, "number of atoms", {Command::FiniteN}},
      {"lambda-min", "sweep", "lambda_min", Kind::Real, "sweep start in lambda_plus", kLambdaSweeps},
      {"lambda-max", "sweep", "lambda_max", Kind::Real, "sweep end in lambda_plus", kLambdaSweeps},
      {"lambda-steps", "sweep", "lambda_steps", Kind::Integer, "lambda_plus grid points (>= 2)", kLambdaSweeps},
      {"lambda-mode", "sweep", "lambda_mode", Kind::Text,
       "symmetric (lambda1 = lambda2) or fixed_lambda1 (lambda2 = lambda_plus - lambda1)",
       {Command::GapMap, Command::FiniteN}},
      {"gamma-min", "sweep", "gamma_min", Kind::Real, "sweep start in gamma", kGammaSweeps},
      {"gamma-max", "sweep", "gamma_max", Kind::Real, "sweep end in gamma", kGammaSweeps},
      {"gamma-steps", "sweep", "gamma_steps", Kind::Integer, "gamma grid points (>= 2)", kGammaSweeps},
      {"cutoff", "finite_n", "cutoff", Kind::Integer, "photon number cutoff", {Command::FiniteN}},
      {"sector", "finite_n", "sector", Kind::Text, "parity sector: both, even or odd", {Command::FiniteN}},
      {"export-matrix", "finite_n", "export_matrix", Kind::Text,
       "write the Hamiltonian at the first grid point (needs --sector even|odd)", {Command::FiniteN}},
      {"t-max", "dynamics", "t_max", Kind::Real, "integration time (units of 1/omega)", kDynamics},
      {"stride", "dynamics", "stride", Kind::Real, "sampling interval", {Command::Trajectory}},
      {"init", "dynamics", "init", Kind::Text, "initial state: np3, np2 or sr",
       {Command::Hysteresis, Command::Trajectory}},
      {"branch", "scaling", "branch", Kind::Text, "critical point: sra, srb, tc or tp", {Command::Scaling}},
      {"quantity", "scaling", "quantity", Kind::Text, "gap_below, gap_above or alpha_above", {Command::Scaling}},
      {"output", "output", "path", Kind::Text, "dataset file (default: standard output)", {}},
      {"format", "output", "format", Kind::Text, "csv or json", {}},
      {"seed", "run", "seed", Kind::Integer, "seed for random starts", {}},
      {"workers", "run", "workers", Kind::Integer, "worker threads (0: all cores)", {}},
  };
  return f;
}

bool applies(const Flag& f, Command c) {
  return f.only.empty() || std::find(f.only.begin(), f.only.end(), c) != f.only.end();
}

json convert(const Flag& f, const std::string& text) {
  const char* b = text.data();
  const char* e = b + text.size();
  if (f.kind == Kind::Real) {
    double x = 0.0;
    const auto r = std::from_chars(b, e, x);
    if (r.ec != std::errc{} || r.ptr != e)
      throw tdm::cli::UsageError("--" + std::string(f.name) + ": not a number: '" + text + "'");
    return x;
  }
  if (f.kind == Kind::Integer) {
    long long x = 0;
    const auto r = std::from_chars(b, e, x);
    if (r.ec != std::errc{} || r.ptr != e)
      throw tdm::cli::UsageError("--" + std::string(f.name) + ": not an integer: '" + text + "'");
    return x;
  }
  return text;
}

struct SubcommandState {
  Command command;
  CLI::App* app = nullptr;
  std::map<std::string, std::string> values;  // flag name -> raw text
  std::map<std::string, CLI::Option*> options;
  std::vector<double> perturbation;
  CLI::Option* perturbation_opt = nullptr;
  std::string config;
};

const char* describe(Command c) {
  switch (c) {
    case Command::GroundState: return "Mean-field ground state and excitation gap at one point";
    case Command::Boundary: return "Tricritical point and NP boundary versus gamma";
    case Command::GapMap: return "Excitation gap over the (gamma, lambda_plus) plane";
    case Command::Scaling: return "Critical exponent at a boundary point";
    case Command::FiniteN: return "Exact finite-N ground state versus lambda_plus";
    case Command::SteadyStates: return "Open-system steady states and their stability";
    case Command::PhaseDiagram: return "Stable steady states over the (gamma, lambda_plus) plane";
    case Command::Hysteresis: return "Long-time state versus lambda_plus from a fixed initial state";
    case Command::Trajectory: return "Time evolution of the open-system mean-field equations";
  }
  return "";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Three-level Dicke model: mean field, fluctuations, exact diagonalization and "
               "driven-dissipative dynamics"};
  app.set_version_flag("--version", std::string(TDM_VERSION));
  app.require_subcommand(1);

  std::vector<SubcommandState> subs;
  subs.reserve(tdm::cli::all_commands().size());
  for (Command c : tdm::cli::all_commands()) {
    auto& s = subs.emplace_back();
    s.command = c;
    s.app = app.add_subcommand(std::string(tdm::cli::to_string(c)), describe(c));
    s.app->add_option("--config,-c", s.config, "JSON configuration file")->envname("TDM_CONFIG");
    for (const auto& f : flags()) {
      if (!applies(f, c)) continue;
      std::string names = "--" + std::string(f.name);
      if (std::string_view(f.name) == "output") names += ",-o";
      if (std::string_view(f.name) == "workers") names += ",-j";
      s.options[f.name] = s.app->add_option(names, s.values[f.name], f.help);
    }
    if (applies({"", "", "", Kind::Real, "", kDynamics}, c))
      s.perturbation_opt = s.app->add_option("--perturbation", s.perturbation,
                                             "added to the initial photon amplitude: re,im")
                               ->expected(2)
                               ->delimiter(',');
    auto excl = [&](const char* a, const char* b) {
      if (s.options.count(a) && s.options.count(b)) s.options[a]->excludes(s.options[b]);
    };
    excl("g1", "lambda1");
    excl("g2", "lambda2");
    for (const char* k : {"g1", "g2", "lambda1", "lambda2"}) excl("lambda-plus", k);
    excl("kappa", "kappa-ratio");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  for (auto& s : subs) {
    if (!s.app->parsed()) continue;
    try {
      json overrides = json::object();
      for (const auto& f : flags()) {
        if (!applies(f, s.command) || s.options[f.name]->count() == 0) continue;
        overrides[f.section][f.key] = convert(f, s.values[f.name]);
      }
      if (s.perturbation_opt && s.perturbation_opt->count() > 0)
        overrides["dynamics"]["perturbation"] = s.perturbation;
      const json file = s.config.empty() ? json::object() : tdm::cli::load_config_file(s.config);
      const auto config = tdm::cli::resolve_config(s.command, file, overrides);
      return tdm::cli::run(config, std::cout, std::cerr);
    } catch (const std::exception& e) {
      std::cerr << "tdm " << tdm::cli::to_string(s.command) << ": error: " << e.what() << '\n';
      return tdm::cli::exit_code(e);
    }
  }
  return 2;
}
