#include "tdm/config.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace tdm::cli {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<Command, std::string_view>, 9> kCommandNames{{
    {Command::GroundState, "ground-state"},
    {Command::Boundary, "boundary"},
    {Command::GapMap, "gap-map"},
    {Command::Scaling, "scaling"},
    {Command::FiniteN, "finite-n"},
    {Command::SteadyStates, "steady-states"},
    {Command::PhaseDiagram, "phase-diagram"},
    {Command::Hysteresis, "hysteresis"},
    {Command::Trajectory, "trajectory"},
}};

// Accepted keys per section.
const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"model",
       {"omega", "Omega", "delta", "gamma", "g1", "g2", "lambda1", "lambda2", "lambda_plus",
        "kappa", "kappa_ratio", "n_atoms"}},
      {"sweep",
       {"lambda_min", "lambda_max", "lambda_steps", "gamma_min", "gamma_max", "gamma_steps",
        "lambda_mode"}},
      {"finite_n", {"cutoff", "sector", "export_matrix"}},
      {"dynamics", {"t_max", "stride", "init", "perturbation"}},
      {"scaling", {"branch", "quantity"}},
      {"output", {"path", "format"}},
      {"run", {"seed", "workers"}},
  };
  return s;
}

// Keys that specify the same quantity in different ways. A layer may set at
// most one member of each group; setting one removes the others from the
// layers below.
const std::vector<std::vector<std::string>>& alternatives() {
  static const std::vector<std::vector<std::string>> groups{
      {"g1", "lambda1", "lambda_plus"},
      {"g2", "lambda2", "lambda_plus"},
      {"kappa", "kappa_ratio"},
  };
  return groups;
}

void check_keys(const json& layer, std::string_view origin) {
  if (!layer.is_object()) throw UsageError(std::string(origin) + ": top level must be a JSON object");
  for (const auto& [section, body] : layer.items()) {
    if (section == "command") {
      if (!body.is_string()) throw UsageError(std::string(origin) + ": 'command' must be a string");
      continue;
    }
    const auto it = schema().find(section);
    if (it == schema().end())
      throw UsageError(std::string(origin) + ": unknown section '" + section + "'");
    if (!body.is_object())
      throw UsageError(std::string(origin) + ": section '" + section + "' must be an object");
    for (const auto& [key, value] : body.items()) {
      if (!it->second.count(key))
        throw UsageError(std::string(origin) + ": unknown key '" + section + "." + key + "'");
      (void)value;
    }
  }
  if (layer.contains("model")) {
    const auto& m = layer["model"];
    for (const auto& group : alternatives()) {
      std::vector<std::string> set;
      for (const auto& k : group)
        if (m.contains(k)) set.push_back(k);
      if (set.size() > 1)
        throw UsageError(std::string(origin) + ": contradictory settings model." + set[0] +
                         " and model." + set[1]);
    }
  }
}

// Overlays `top` on `base`, section by section.
void merge_layer(json& base, const json& top) {
  for (const auto& [section, body] : top.items()) {
    if (section == "command") {
      base[section] = body;
      continue;
    }
    json& dst = base[section];
    if (!dst.is_object()) dst = json::object();
    if (section == "model") {
      for (const auto& group : alternatives())
        for (const auto& k : group)
          if (body.contains(k))
            for (const auto& other : group)
              if (other != k) dst.erase(other);
    }
    for (const auto& [key, value] : body.items()) dst[key] = value;
  }
}

template <class T>
T get(const json& cfg, const std::string& section, const std::string& key) {
  const json& v = cfg.at(section).at(key);
  try {
    if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) throw UsageError("");
      const double x = v.get<double>();
      if (!std::isfinite(x)) throw UsageError("");
      return x;
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw UsageError("");
      return v.get<T>();
    } else {
      if (!v.is_string()) throw UsageError("");
      return v.get<T>();
    }
  } catch (const std::exception&) {
    throw UsageError("invalid value for " + section + "." + key + ": " + v.dump());
  }
}

bool has(const json& cfg, const std::string& section, const std::string& key) {
  return cfg.contains(section) && cfg[section].contains(key);
}

std::string one_of(const json& cfg, const std::string& section, const std::string& key,
                   std::initializer_list<std::string_view> allowed) {
  const auto v = get<std::string>(cfg, section, key);
  for (auto a : allowed)
    if (v == a) return v;
  std::string list;
  for (auto a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
  throw UsageError(section + "." + key + " must be one of {" + list + "}, got '" + v + "'");
}

Range read_range(const json& cfg, const std::string& name) {
  Range r;
  r.min = get<double>(cfg, "sweep", name + "_min");
  r.max = get<double>(cfg, "sweep", name + "_max");
  r.steps = get<int>(cfg, "sweep", name + "_steps");
  if (!(r.max > r.min)) throw UsageError("sweep." + name + " range is empty (need min < max)");
  if (r.steps < 2) throw UsageError("sweep." + name + "_steps must be at least 2");
  return r;
}

bool sweeps_lambda(Command c) {
  return c == Command::GapMap || c == Command::FiniteN || c == Command::PhaseDiagram ||
         c == Command::Hysteresis;
}

bool sweeps_gamma(Command c) {
  return c == Command::Boundary || c == Command::GapMap || c == Command::PhaseDiagram;
}

}  // namespace

std::string_view to_string(Command c) {
  for (const auto& [cmd, name] : kCommandNames)
    if (cmd == c) return name;
  return "?";
}

std::optional<Command> command_from_string(std::string_view name) {
  for (const auto& [cmd, n] : kCommandNames)
    if (n == name) return cmd;
  return std::nullopt;
}

const std::vector<Command>& all_commands() {
  static const std::vector<Command> v = [] {
    std::vector<Command> out;
    for (const auto& [cmd, name] : kCommandNames) out.push_back(cmd);
    return out;
  }();
  return v;
}

std::vector<double> Range::values() const {
  std::vector<double> v(static_cast<std::size_t>(std::max(steps, 1)));
  if (steps == 1) {
    v[0] = min;
    return v;
  }
  for (int i = 0; i < steps; ++i)
    v[static_cast<std::size_t>(i)] = i == steps - 1 ? max : min + (max - min) * i / (steps - 1);
  return v;
}

json parse_config_text(std::string_view text, std::string_view source) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos)
    throw UsageError(std::string(source) + ": configuration is empty");
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw UsageError(std::string(source) + ":" + std::to_string(line) + ": malformed JSON (" +
                     e.what() + ")");
  }
}

json load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading config file '" + path + "'");
  return parse_config_text(ss.str(), path);
}

json default_config(Command command) {
  json d = {
      {"command", std::string(to_string(command))},
      {"model",
       {{"omega", 1.0}, {"Omega", 1.0}, {"delta", 0.0}, {"gamma", 0.8}, {"lambda_plus", 1.5},
        {"kappa", 0.0}, {"n_atoms", 1}}},
      {"sweep",
       {{"lambda_min", 0.5}, {"lambda_max", 2.5}, {"lambda_steps", 41}, {"gamma_min", 0.5},
        {"gamma_max", 1.1}, {"gamma_steps", 31}, {"lambda_mode", "symmetric"}}},
      {"finite_n", {{"cutoff", 100}, {"sector", "both"}, {"export_matrix", ""}}},
      {"dynamics", {{"t_max", 10000.0}, {"stride", 1.0}, {"init", "np3"}, {"perturbation", {0.1, 0.01}}}},
      {"scaling", {{"branch", "sra"}, {"quantity", "gap_below"}}},
      {"output", {{"path", ""}, {"format", "csv"}}},
      {"run", {{"seed", 1}, {"workers", 0}}},
  };
  auto& m = d["model"];
  auto& s = d["sweep"];
  switch (command) {
    case Command::Boundary:
      s["gamma_min"] = 0.3;
      s["gamma_max"] = 1.2;
      s["gamma_steps"] = 19;
      break;
    case Command::GapMap:
      // fixed lambda1 slice of the (gamma, lambda_plus) plane
      m.erase("lambda_plus");
      m["lambda1"] = 0.3 * std::sqrt(2.0);
      s["lambda_mode"] = "fixed_lambda1";
      break;
    case Command::FiniteN:
      m["n_atoms"] = 50;
      s["lambda_min"] = 0.5;
      s["lambda_max"] = 2.0;
      s["lambda_steps"] = 31;
      break;
    case Command::SteadyStates:
    case Command::Trajectory:
      m.erase("kappa");
      m["kappa_ratio"] = 0.1;
      m["lambda_plus"] = std::sqrt(2.0);
      if (command == Command::Trajectory) {
        d["dynamics"]["t_max"] = 1000.0;
        d["dynamics"]["stride"] = 0.5;
      }
      break;
    case Command::PhaseDiagram:
      m.erase("kappa");
      m["kappa_ratio"] = 0.1;
      s["lambda_min"] = 0.2;
      s["lambda_max"] = 2.6;
      s["lambda_steps"] = 13;
      s["gamma_min"] = 0.2;
      s["gamma_max"] = 1.4;
      s["gamma_steps"] = 13;
      break;
    case Command::Hysteresis:
      m.erase("kappa");
      m["kappa_ratio"] = 0.1;
      m["gamma"] = 0.6;
      s["lambda_min"] = 1.0;
      s["lambda_max"] = 2.5;
      s["lambda_steps"] = 301;
      break;
    default:
      break;
  }
  return d;
}

RunConfig resolve_config(Command command, const json& file, const json& flags) {
  check_keys(file, "config file");
  check_keys(flags, "command line");
  if (file.contains("command") && file["command"].get<std::string>() != to_string(command))
    throw UsageError("config file is for command '" + file["command"].get<std::string>() +
                     "', not '" + std::string(to_string(command)) + "'");

  json cfg = default_config(command);
  merge_layer(cfg, file);
  merge_layer(cfg, flags);
  cfg["command"] = std::string(to_string(command));

  RunConfig rc;
  rc.command = command;

  ModelParams& p = rc.params;
  p.omega = get<double>(cfg, "model", "omega");
  p.Omega = get<double>(cfg, "model", "Omega");
  p.delta = get<double>(cfg, "model", "delta");
  p.gamma = get<double>(cfg, "model", "gamma");
  p.n_atoms = get<int>(cfg, "model", "n_atoms");
  if (!(p.omega > 0.0) || !(p.Omega > 0.0))
    throw UsageError("model.omega and model.Omega must be positive");
  if (has(cfg, "model", "kappa_ratio")) {
    p.kappa = get<double>(cfg, "model", "kappa_ratio") * p.omega;
  } else {
    p.kappa = get<double>(cfg, "model", "kappa");
  }

  // Couplings; an unspecified one is zero.
  const double scale = std::sqrt(p.omega * p.Omega);
  if (has(cfg, "model", "lambda_plus")) {
    rc.lambda1 = rc.lambda2 = 0.5 * get<double>(cfg, "model", "lambda_plus");
  } else {
    rc.lambda1 = has(cfg, "model", "g1")        ? get<double>(cfg, "model", "g1") / scale
                 : has(cfg, "model", "lambda1") ? get<double>(cfg, "model", "lambda1")
                                                : 0.0;
    rc.lambda2 = has(cfg, "model", "g2")        ? get<double>(cfg, "model", "g2") / scale
                 : has(cfg, "model", "lambda2") ? get<double>(cfg, "model", "lambda2")
                                                : 0.0;
  }
  p.g1 = rc.lambda1 * scale;
  p.g2 = rc.lambda2 * scale;
  try {
    p.validate();
  } catch (const DomainError& e) {
    throw UsageError(std::string("invalid model parameters: ") + e.what());
  }

  rc.lambda_mode = one_of(cfg, "sweep", "lambda_mode", {"symmetric", "fixed_lambda1"}) == "symmetric"
                       ? LambdaMode::Symmetric
                       : LambdaMode::FixedLambda1;
  if (sweeps_lambda(command)) rc.lambda_range = read_range(cfg, "lambda");
  if (sweeps_gamma(command)) rc.gamma_range = read_range(cfg, "gamma");

  rc.cutoff = get<int>(cfg, "finite_n", "cutoff");
  if (rc.cutoff < 1) throw UsageError("finite_n.cutoff must be at least 1");
  rc.sector = one_of(cfg, "finite_n", "sector", {"both", "even", "odd"});
  rc.export_matrix = get<std::string>(cfg, "finite_n", "export_matrix");
  if (!rc.export_matrix.empty() && rc.sector == "both")
    throw UsageError("finite_n.export_matrix needs a single sector (even or odd)");

  rc.t_max = get<double>(cfg, "dynamics", "t_max");
  rc.stride = get<double>(cfg, "dynamics", "stride");
  if (!(rc.t_max > 0.0)) throw UsageError("dynamics.t_max must be positive");
  if (!(rc.stride > 0.0)) throw UsageError("dynamics.stride must be positive");
  rc.init = one_of(cfg, "dynamics", "init", {"np3", "np2", "sr"});
  const json& pert = cfg["dynamics"]["perturbation"];
  if (!pert.is_array() || pert.size() != 2 || !pert[0].is_number() || !pert[1].is_number())
    throw UsageError("dynamics.perturbation must be [re, im]");
  rc.perturbation = {pert[0].get<double>(), pert[1].get<double>()};

  rc.branch = one_of(cfg, "scaling", "branch", {"sra", "srb", "tc", "tp"});
  rc.quantity = one_of(cfg, "scaling", "quantity", {"gap_below", "gap_above", "alpha_above"});

  rc.output_path = get<std::string>(cfg, "output", "path");
  rc.format = one_of(cfg, "output", "format", {"csv", "json"}) == "csv" ? Format::Csv : Format::Json;

  const json& seed = cfg["run"]["seed"];
  if (!seed.is_number_integer() || (seed.is_number_integer() && !seed.is_number_unsigned() && seed.get<long long>() < 0))
    throw UsageError("run.seed must be a non-negative integer");
  rc.seed = seed.get<std::uint64_t>();
  rc.workers = get<int>(cfg, "run", "workers");
  if (rc.workers < 0) throw UsageError("run.workers must be non-negative (0: all cores)");
  if (rc.workers == 0) rc.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  cfg["run"]["workers"] = rc.workers;

  rc.resolved = cfg;
  return rc;
}

}  // namespace tdm::cli
