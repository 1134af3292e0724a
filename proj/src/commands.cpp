#include "tdm/commands.hpp"

#include <chrono>
#include <cmath>
#include <mutex>
#include <sstream>

#include "tdm/fluctuations.hpp"
#include "tdm/meanfield.hpp"
#include "tdm/opensys.hpp"
#include "tdm/parallel.hpp"
#include "tdm/su3.hpp"

namespace tdm::cli {

using nlohmann::json;

namespace {

// Thread-safe "command: k/n" reports at roughly 10% intervals.
class Progress {
 public:
  Progress(std::ostream& log, std::string_view name, std::size_t total)
      : log_(log), name_(name), total_(total) {}

  void tick() {
    std::lock_guard lock(mutex_);
    ++done_;
    const std::size_t step = std::max<std::size_t>(1, total_ / 10);
    if (done_ % step == 0 || done_ == total_)
      log_ << name_ << ": " << done_ << "/" << total_ << '\n' << std::flush;
  }

 private:
  std::ostream& log_;
  std::string name_;
  std::size_t total_;
  std::size_t done_ = 0;
  std::mutex mutex_;
};

std::pair<double, double> split_lambda(const RunConfig& rc, double lambda_plus) {
  if (rc.lambda_mode == LambdaMode::FixedLambda1) return {rc.lambda1, lambda_plus - rc.lambda1};
  return {0.5 * lambda_plus, 0.5 * lambda_plus};
}

ModelParams with_lambdas(const RunConfig& rc, double l1, double l2, double gamma) {
  const ModelParams& b = rc.params;
  auto p = ModelParams::from_lambdas(l1, l2, gamma, b.delta, b.omega, b.Omega, b.kappa);
  p.n_atoms = b.n_atoms;
  return p;
}

meanfield::MinimizeOptions minimize_options(const RunConfig& rc) {
  meanfield::MinimizeOptions o;
  o.seed = rc.seed;
  return o;
}

void require_open_regime(const ModelParams& p) {
  if (p.delta != 0.0 || p.g1 != p.g2)
    throw UsageError("open-system commands need delta = 0 and lambda1 = lambda2 (use lambda_plus)");
}

std::vector<std::string> bloch_columns() {
  std::vector<std::string> c{"re_a", "im_a"};
  for (int j = 1; j <= 8; ++j) c.push_back("lambda_" + std::to_string(j));
  return c;
}

void append_bloch(std::vector<Cell>& row, const opensys::BlochState& s) {
  row.emplace_back(s.a.real());
  row.emplace_back(s.a.imag());
  for (double x : s.lambda) row.emplace_back(x);
}

// ---------------------------------------------------------------------------

Dataset ground_state(const RunConfig& rc, std::ostream&) {
  const ModelParams& p = rc.params;
  const auto sol = meanfield::minimize(p, minimize_options(rc));
  const auto spec = fluctuations::symplectic_diagonalize(fluctuations::build_quadratic(p, sol));
  const auto& o = sol.order;
  Dataset d;
  d.table.columns = {"lambda1", "lambda2", "gamma", "delta", "re_alpha", "im_alpha", "alpha_sq",
                     "re_beta1", "im_beta1", "re_beta2", "im_beta2", "energy", "label", "gap",
                     "stable"};
  d.table.rows.push_back({rc.lambda1, rc.lambda2, p.gamma, p.delta, o.alpha.real(), o.alpha.imag(),
                          std::norm(o.alpha), o.beta1.real(), o.beta1.imag(), o.beta2.real(),
                          o.beta2.imag(), sol.energy, std::string(to_string(sol.label)), spec.gap,
                          spec.stable});
  d.summary = {{"label", to_string(sol.label)}, {"energy", sol.energy}, {"gap", spec.gap}};
  return d;
}

// |alpha|^2 of the global minimum on the continuous line lambda_plus = 1/gamma:
// zero where the transition is continuous, finite where a first-order jump
// has already happened.
double alpha_sq_on_line(const RunConfig& rc, double gamma) {
  const double l = 1.0 / gamma;
  const auto sol = meanfield::minimize(with_lambdas(rc, 0.5 * l, 0.5 * l, gamma), minimize_options(rc));
  return std::norm(sol.order.alpha);
}

constexpr double kJumpThreshold = 1e-6;

Dataset boundary(const RunConfig& rc, std::ostream& log) {
  const double delta = rc.params.delta;
  const auto tp = meanfield::tricritical_point(delta);
  const auto gammas = rc.gamma_range.values();
  struct Row {
    double lambda_c = 0.0, alpha_sq = 0.0;
    std::string order;
  };
  std::vector<Row> rows(gammas.size());
  Progress progress(log, "boundary", gammas.size());
  meanfield::FirstOrderOptions fo;
  fo.minimize = minimize_options(rc);
  parallel_for(gammas.size(), rc.workers, [&](std::size_t i) {
    const double g = gammas[i];
    Row& r = rows[i];
    try {
      r.lambda_c = meanfield::second_order_boundary(g, delta, meanfield::Branch::SRA);
      r.order = "second";
    } catch (const RegimeError&) {
      r.lambda_c = meanfield::first_order_boundary(g, delta, meanfield::Branch::SRA, fo);
      r.order = "first";
    }
    r.alpha_sq = alpha_sq_on_line(rc, g);
    progress.tick();
  });
  Dataset d;
  d.table.columns = {"gamma", "lambda_plus_c", "order", "alpha_sq_on_line", "order_scan"};
  std::optional<double> scan_tp;
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    const bool first = rows[i].alpha_sq > kJumpThreshold;
    d.table.rows.push_back({gammas[i], rows[i].lambda_c, rows[i].order, rows[i].alpha_sq,
                            std::string(first ? "first" : "second")});
    if (i > 0 && !scan_tp && rows[i - 1].alpha_sq > kJumpThreshold && !first)
      scan_tp = 0.5 * (gammas[i - 1] + gammas[i]);
  }
  d.summary = {{"delta", delta}, {"gamma_tp", tp.gamma}, {"lambda_tp", tp.lambda},
               {"degenerate", tp.degenerate}};
  d.summary["gamma_tp_scan"] = scan_tp ? json(*scan_tp) : json(nullptr);
  return d;
}

Dataset gap_map(const RunConfig& rc, std::ostream& log) {
  const auto lambdas = rc.lambda_range.values();
  const auto gammas = rc.gamma_range.values();
  const std::size_t n = lambdas.size() * gammas.size();
  std::vector<std::vector<Cell>> rows(n);
  Progress progress(log, "gap-map", n);
  parallel_for(n, rc.workers, [&](std::size_t idx) {
    const double g = gammas[idx / lambdas.size()];
    const double lp = lambdas[idx % lambdas.size()];
    const auto [l1, l2] = split_lambda(rc, lp);
    const auto p = with_lambdas(rc, l1, l2, g);
    const auto sol = meanfield::minimize(p, minimize_options(rc));
    const auto spec = fluctuations::symplectic_diagonalize(fluctuations::build_quadratic(p, sol));
    rows[idx] = {g, lp, l1, l2, spec.gap, spec.stable, std::string(to_string(sol.label)),
                 std::norm(sol.order.alpha)};
    progress.tick();
  });
  Dataset d;
  d.table.columns = {"gamma", "lambda_plus", "lambda1", "lambda2", "gap", "stable", "label", "alpha_sq"};
  d.table.rows = std::move(rows);
  return d;
}

Dataset scaling(const RunConfig& rc, std::ostream&) {
  ModelParams pc = rc.params;
  const double g = pc.gamma;
  double l1 = 0.0, l2 = 0.0;
  if (rc.branch == "tp") {
    const auto tp = meanfield::tricritical_point(pc.delta);
    pc.gamma = tp.gamma;
    l1 = l2 = 0.5 * tp.lambda;
  } else {
    if (!(g > 0.0)) throw UsageError("scaling needs gamma > 0");
    if (rc.branch == "sra") l1 = l2 = 0.5 / g;
    if (rc.branch == "srb") l1 = 0.5 / g, l2 = -0.5 / g;
    if (rc.branch == "tc") l1 = 1.0 / g, l2 = 0.0;
  }
  pc = with_lambdas(rc, l1, l2, pc.gamma);
  const auto quantity = rc.quantity == "gap_below"   ? fluctuations::ScalingQuantity::GapBelow
                        : rc.quantity == "gap_above" ? fluctuations::ScalingQuantity::GapAbove
                                                     : fluctuations::ScalingQuantity::AlphaAbove;
  const auto dir = fluctuations::boundary_normal(pc);
  fluctuations::ScalingOptions so;
  so.minimize = minimize_options(rc);
  const auto res = fluctuations::scaling_exponent(pc, dir, quantity, so);
  Dataset d;
  d.table.columns = {"distance", "value"};
  for (std::size_t i = 0; i < res.distances.size(); ++i) d.table.rows.push_back({res.distances[i], res.values[i]});
  const auto point = fluctuations::control_point(pc);
  d.summary = {{"branch", rc.branch},
               {"quantity", rc.quantity},
               {"point", {{"delta", point[0]}, {"lambda1", point[1]}, {"lambda2", point[2]}, {"gamma", point[3]}}},
               {"direction", dir},
               {"r_squared", res.r_squared},
               {"poor_fit", res.poor_fit},
               {"zero_branch", res.zero_branch}};
  d.summary["exponent"] = res.exponent ? json(*res.exponent) : json(nullptr);
  return d;
}

void export_matrix(const RunConfig& rc, double lambda_plus) {
  const auto [l1, l2] = split_lambda(rc, lambda_plus);
  const auto p = with_lambdas(rc, l1, l2, rc.params.gamma);
  const auto sector = su3::sector_from_string(rc.sector);
  const auto basis = su3::enumerate_basis(p.n_atoms, rc.cutoff, sector);
  const auto h = su3::build_hamiltonian(p, basis);
  std::ostringstream body;
  write_coordinate(body, h.matrix);
  json states = json::array();
  for (const auto& [ai, n] : basis.states) {
    const auto& s = basis.atoms[static_cast<std::size_t>(ai)];
    states.push_back({s.two_t, s.two_tz, n});
  }
  const json header = {
      {"format", "coordinate"},
      {"index_base", 0},
      {"rows", h.matrix.rows()},
      {"cols", h.matrix.cols()},
      {"nnz", h.matrix.nonZeros()},
      {"storage", "all entries (matrix is real symmetric)"},
      {"energy_offset", -p.n_atoms * p.Omega * p.delta / 3.0},
      {"sector", rc.sector},
      {"n_atoms", p.n_atoms},
      {"cutoff", rc.cutoff},
      {"lambda_plus", lambda_plus},
      {"lambda1", l1},
      {"lambda2", l2},
      {"gamma", p.gamma},
      {"delta", p.delta},
      {"omega", p.omega},
      {"Omega", p.Omega},
      {"basis_columns", {"two_t", "two_tz", "photons"}},
      {"basis", states},
  };
  write_file(rc.export_matrix, body.str());
  write_file(rc.export_matrix + ".json", header.dump() + "\n");
}

Dataset finite_n(const RunConfig& rc, std::ostream& log) {
  const auto lambdas = rc.lambda_range.values();
  std::vector<su3::GroundState> out(lambdas.size());
  Progress progress(log, "finite-n", lambdas.size());
  parallel_for(lambdas.size(), rc.workers, [&](std::size_t i) {
    const auto [l1, l2] = split_lambda(rc, lambdas[i]);
    const auto p = with_lambdas(rc, l1, l2, rc.params.gamma);
    su3::GroundStateOptions go;
    go.lanczos.seed = rc.seed;
    if (rc.sector == "both") {
      out[i] = su3::ground_state(p, p.n_atoms, rc.cutoff, go);
    } else {
      out[i] = su3::sector_ground_state(
          p, su3::enumerate_basis(p.n_atoms, rc.cutoff, su3::sector_from_string(rc.sector)), go);
    }
    progress.tick();
  });
  Dataset d;
  d.table.columns = {"lambda_plus", "gamma", "n_atoms", "cutoff", "energy_per_atom", "photon_density",
                     "p11", "p22", "p33", "sector", "top_fock_occupancy", "cutoff_warning", "residual"};
  int warnings = 0;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const auto& gs = out[i];
    const double n = rc.params.n_atoms;
    if (gs.cutoff_warning) {
      ++warnings;
      log << "finite-n: warning: photon cutoff " << rc.cutoff << " may be too small at lambda_plus="
          << format_double(lambdas[i]) << " (top Fock occupancy " << format_double(gs.top_fock_occupancy)
          << ")\n";
    }
    d.table.rows.push_back({lambdas[i], rc.params.gamma, static_cast<long long>(rc.params.n_atoms),
                            static_cast<long long>(rc.cutoff), gs.energy / n, gs.photon_density,
                            gs.populations[0], gs.populations[1], gs.populations[2],
                            std::string(su3::to_string(gs.sector)), gs.top_fock_occupancy,
                            gs.cutoff_warning, gs.residual});
  }
  d.summary = {{"points", lambdas.size()}, {"cutoff_warnings", warnings}};
  if (!rc.export_matrix.empty()) {
    export_matrix(rc, lambdas.front());
    d.summary["matrix"] = rc.export_matrix;
  }
  return d;
}

opensys::ProbeOptions probe_options(const RunConfig& rc) {
  opensys::ProbeOptions o;
  o.perturbation = rc.perturbation;
  o.t_max = rc.t_max;
  return o;
}

opensys::SteadyStateOptions steady_options(const RunConfig& rc) {
  opensys::SteadyStateOptions o;
  o.seed = rc.seed;
  return o;
}

Dataset steady_states(const RunConfig& rc, std::ostream& log) {
  const ModelParams& p = rc.params;
  require_open_regime(p);
  auto roots = opensys::find_steady_states(p, steady_options(rc));
  Progress progress(log, "steady-states", roots.size());
  parallel_for(roots.size(), rc.workers, [&](std::size_t i) {
    roots[i].stable = opensys::stability_probe(roots[i], p, probe_options(rc));
    roots[i].method = opensys::StabilityMethod::DynamicsProbe;
    progress.tick();
  });
  Dataset d;
  d.table.columns = {"label", "stable", "method"};
  for (const auto& c : bloch_columns()) d.table.columns.push_back(c);
  for (const char* c : {"p11", "p22", "p33", "casimir_a", "casimir_b", "residual"}) d.table.columns.push_back(c);
  json stable = json::array();
  for (const auto& r : roots) {
    std::vector<Cell> row{std::string(to_string(r.label)), r.stable, std::string(opensys::to_string(r.method))};
    append_bloch(row, r.state);
    const auto pop = opensys::populations(r.state);
    const auto cas = opensys::casimir_invariants(r.state);
    for (double x : {pop[0], pop[1], pop[2], cas.A, cas.B, r.residual}) row.emplace_back(x);
    d.table.rows.push_back(std::move(row));
    if (r.stable) stable.push_back(to_string(r.label));
  }
  d.summary = {{"roots", roots.size()}, {"stable", stable}};
  return d;
}

Dataset phase_diagram(const RunConfig& rc, std::ostream& log) {
  require_open_regime(rc.params);
  const auto lambdas = rc.lambda_range.values();
  const auto gammas = rc.gamma_range.values();
  opensys::PhaseDiagramOptions o;
  o.steady = steady_options(rc);
  o.probe = probe_options(rc);
  o.workers = rc.workers;
  log << "phase-diagram: " << lambdas.size() * gammas.size() << " points on " << rc.workers
      << " worker(s)\n";
  const auto pts = opensys::phase_diagram(lambdas, gammas, rc.params, o);
  Dataset d;
  d.table.columns = {"gamma", "lambda_plus", "stable_set", "np1", "np2", "np3", "sr", "n_roots", "resolved"};
  int unresolved = 0;
  for (const auto& pt : pts) {
    std::string set;
    auto contains = [&](PhaseLabel l) {
      return std::find(pt.stable_set.begin(), pt.stable_set.end(), l) != pt.stable_set.end();
    };
    for (auto l : pt.stable_set) set += (set.empty() ? "" : "+") + std::string(to_string(l));
    if (set.empty()) set = "none";
    if (!pt.resolved) ++unresolved;
    d.table.rows.push_back({pt.gamma, pt.lambda_plus, set, contains(PhaseLabel::NP1), contains(PhaseLabel::NP2),
                            contains(PhaseLabel::NP3), contains(PhaseLabel::SR),
                            static_cast<long long>(pt.n_roots), pt.resolved});
  }
  d.summary = {{"points", pts.size()}, {"unresolved", unresolved}};
  return d;
}

opensys::HysteresisInit hysteresis_init(const std::string& s) {
  if (s == "np2") return opensys::HysteresisInit::NP2;
  if (s == "sr") return opensys::HysteresisInit::SRSeed;
  return opensys::HysteresisInit::NP3;
}

Dataset hysteresis(const RunConfig& rc, std::ostream& log) {
  require_open_regime(rc.params);
  const auto lambdas = rc.lambda_range.values();
  opensys::HysteresisOptions o;
  o.perturbation = rc.perturbation;
  o.t_max = rc.t_max;
  o.workers = rc.workers;
  log << "hysteresis: " << lambdas.size() << " points on " << rc.workers << " worker(s)\n";
  const double gamma = rc.params.gamma;
  const auto pts = opensys::hysteresis_scan(gamma, lambdas, rc.params, hysteresis_init(rc.init), o);
  Dataset d;
  d.table.columns = {"lambda_plus", "p33", "label", "residual"};
  double max_step = 0.0, max_step_at = lambdas.front();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    d.table.rows.push_back({pts[i].lambda_plus, pts[i].p33, std::string(to_string(pts[i].label)), pts[i].residual});
    if (i > 0 && pts[i - 1].p33 - pts[i].p33 > max_step) {
      max_step = pts[i - 1].p33 - pts[i].p33;
      max_step_at = 0.5 * (pts[i - 1].lambda_plus + pts[i].lambda_plus);
    }
  }
  d.summary = {{"gamma", gamma}, {"init", rc.init}, {"max_drop", max_step}, {"max_drop_at", max_step_at}};
  if (gamma > 0.0)
    d.summary["np3_boundary"] =
        opensys::np_boundary(gamma, rc.params.kappa / rc.params.omega, opensys::NormalPhase::NP3);
  return d;
}

Dataset trajectory(const RunConfig& rc, std::ostream& log) {
  const ModelParams& p = rc.params;
  require_open_regime(p);
  opensys::BlochState start = opensys::BlochState::normal_phase(rc.init == "np2" ? 2 : 3);
  if (rc.init == "sr") {
    bool found = false;
    for (const auto& r : opensys::find_steady_states(p, steady_options(rc)))
      if (r.label == PhaseLabel::SR) {
        start = r.state;
        found = true;
        break;
      }
    if (!found) throw UsageError("trajectory: no superradiant steady state to start from");
  }
  start.a += rc.perturbation;
  opensys::IntegrateOptions io;
  io.sample_stride = rc.stride;
  io.average_from = 0.95 * rc.t_max;
  log << "trajectory: integrating to t=" << format_double(rc.t_max) << '\n';
  const auto tr = opensys::integrate(start, p, rc.t_max, io);
  Dataset d;
  d.table.columns = {"t"};
  for (const auto& c : bloch_columns()) d.table.columns.push_back(c);
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    std::vector<Cell> row{tr.times[i]};
    append_bloch(row, tr.states[i]);
    d.table.rows.push_back(std::move(row));
  }
  const auto c0 = opensys::casimir_invariants(start);
  const auto c1 = opensys::casimir_invariants(tr.final_state);
  d.summary = {{"final_time", tr.final_time},
               {"final_residual", tr.final_residual},
               {"final_label", to_string(opensys::classify(tr.final_state))},
               {"attractor", to_string(opensys::identify_attractor(tr.window_mean, p))},
               {"casimir_drift", {std::abs(c1.A - c0.A), std::abs(c1.B - c0.B)}},
               {"steps", tr.steps}};
  return d;
}

json provenance(const RunConfig& rc, const Dataset& d) {
  json cfg = rc.resolved;
  // worker count and destination do not affect the data
  cfg["run"].erase("workers");
  cfg["output"].erase("path");
  return {{"tool", "tdm"}, {"version", TDM_VERSION}, {"config", cfg}, {"summary", d.summary}};
}

}  // namespace

Dataset execute(const RunConfig& rc, std::ostream& log) {
  switch (rc.command) {
    case Command::GroundState: return ground_state(rc, log);
    case Command::Boundary: return boundary(rc, log);
    case Command::GapMap: return gap_map(rc, log);
    case Command::Scaling: return scaling(rc, log);
    case Command::FiniteN: return finite_n(rc, log);
    case Command::SteadyStates: return steady_states(rc, log);
    case Command::PhaseDiagram: return phase_diagram(rc, log);
    case Command::Hysteresis: return hysteresis(rc, log);
    case Command::Trajectory: return trajectory(rc, log);
  }
  throw InternalError("unknown command");
}

int exit_code(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e)) return 4;
  if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const DomainError*>(&e) ||
      dynamic_cast<const RegimeError*>(&e) || dynamic_cast<const UnsupportedRegimeError*>(&e))
    return 2;
  return 3;
}

int run(const RunConfig& rc, std::ostream& out, std::ostream& log) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const Dataset d = execute(rc, log);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const json prov = provenance(rc, d);
    std::ostringstream body;
    if (rc.format == Format::Csv) write_csv(body, d.table, prov);
    else write_json(body, d.table, prov);

    if (rc.output_path.empty()) {
      out << body.str() << std::flush;
      return 0;
    }
    write_file(rc.output_path, body.str());
    const json meta = {{"tool", "tdm"},
                       {"version", TDM_VERSION},
                       {"command", to_string(rc.command)},
                       {"dataset", rc.output_path},
                       {"format", rc.format == Format::Csv ? "csv" : "json"},
                       {"rows", d.table.rows.size()},
                       {"config", rc.resolved},
                       {"summary", d.summary},
                       {"wall_time_seconds", wall}};
    write_file(rc.output_path + ".meta.json", meta.dump(1) + "\n");
    out << d.summary.dump() << '\n' << std::flush;
    return 0;
  } catch (const std::exception& e) {
    log << "tdm " << to_string(rc.command) << ": error: " << e.what() << '\n';
    return exit_code(e);
  }
}

}  // namespace tdm::cli
