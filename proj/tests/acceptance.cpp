// Acceptance checks: one PASS/FAIL line per criterion.
//
//   acceptance [--only 1,4,...] [--expected-failures 9,10]
//
// The exit status is non-zero when a criterion fails that is not listed as
// an expected failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <thread>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "../tests/oracles.hpp"
#include "tdm/commands.hpp"
#include "tdm/fluctuations.hpp"
#include "tdm/meanfield.hpp"
#include "tdm/opensys.hpp"
#include "tdm/su3.hpp"

using namespace tdm;
namespace mf = tdm::meanfield;
namespace fl = tdm::fluctuations;
namespace os = tdm::opensys;

namespace {

const double kSqrt2 = std::sqrt(2.0);
const double kGammaTP = 1.0 / std::sqrt(2.0);

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string fmt(double x, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

ModelParams sym(double lambda_plus, double gamma, double delta = 0.0) {
  return ModelParams::from_lambdas(0.5 * lambda_plus, 0.5 * lambda_plus, gamma, delta);
}

// ---------------------------------------------------------------------------

void criterion1(Outcome& o) {
  std::ostringstream log;
  nlohmann::json flags = {{"model", {{"delta", 0.0}}}};
  auto d = cli::execute(cli::resolve_config(cli::Command::Boundary, nlohmann::json::object(), flags), log);
  const double g = d.summary["gamma_tp"], l = d.summary["lambda_tp"];
  o.detail << "gamma_TP=" << fmt(g, 17) << " lambda_TP=" << fmt(l, 17);
  o.require(std::abs(g - kGammaTP) <= 1e-12, "gamma_TP");
  o.require(std::abs(l - kSqrt2) <= 1e-12, "lambda_TP");

  // order scan with minimize(): |alpha|^2 on the line lambda_plus = 1/gamma
  flags["sweep"] = {{"gamma_min", 0.68}, {"gamma_max", 0.74}, {"gamma_steps", 25}};
  d = cli::execute(cli::resolve_config(cli::Command::Boundary, nlohmann::json::object(), flags), log);
  if (d.summary["gamma_tp_scan"].is_null()) {
    o.require(false, "order change not found");
    return;
  }
  const double scan = d.summary["gamma_tp_scan"];
  o.detail << " scan=" << fmt(scan) << " |dgamma|=" << fmt(std::abs(scan - kGammaTP), 3);
  o.require(std::abs(scan - kGammaTP) <= 0.005, "order scan");
}

void criterion2(Outcome& o) {
  const double l1 = 0.3 * kSqrt2;
  double worst_on = 0.0, worst_in = 1e300;
  for (int i = 0; i < 10; ++i) {
    const double lp = 0.9 + 0.05 * i;  // gamma from 1.11 down to 0.74, all second order
    const double gamma = 1.0 / lp;
    worst_on = std::max(worst_on, fl::energy_gap(ModelParams::from_lambdas(l1, lp - l1, gamma)));
    worst_in = std::min(worst_in, fl::energy_gap(ModelParams::from_lambdas(l1, lp - 0.05 - l1, gamma)));
  }
  o.detail << "max gap on boundary=" << fmt(worst_on, 3) << " min gap 0.05 inside NP=" << fmt(worst_in, 4);
  o.require(worst_on < 1e-6, "gap on boundary");
  o.require(worst_in > 1e-3, "gap inside NP");
}

void criterion3(Outcome& o) {
  auto exponent = [&](const ModelParams& pc, fl::ScalingQuantity q, double expected, const char* name) {
    const auto r = fl::scaling_exponent(pc, fl::boundary_normal(pc), q);
    const double e = r.exponent.value_or(NAN);
    o.detail << name << "=" << fmt(e, 4) << " ";
    o.require(std::abs(e - expected) <= 0.02, name);
  };
  exponent(sym(1.25, 0.8), fl::ScalingQuantity::AlphaAbove, 0.5, "mu(second)");
  exponent(sym(kSqrt2, kGammaTP), fl::ScalingQuantity::AlphaAbove, 0.25, "mu(TP)");
  const auto tc = ModelParams::from_lambdas(1.25, 0.0, 0.8);
  exponent(tc, fl::ScalingQuantity::GapBelow, 1.0, "nu-(TC)");
  exponent(sym(1.25, 0.8), fl::ScalingQuantity::GapBelow, 0.5, "nu-(SRA)");
  exponent(sym(1.25, 0.8), fl::ScalingQuantity::GapAbove, 0.5, "nu+(SRA)");
  const double goldstone = fl::energy_gap(ModelParams::from_lambdas(1.6, 0.0, 0.8));
  o.detail << "TC-SR gap=" << fmt(goldstone, 3);
  o.require(goldstone < 1e-8, "Goldstone gap");
}

void criterion4(Outcome& o) {
  for (double lp : {1.0, 1.5}) {
    const auto p = sym(lp, 0.8);
    const double ed = su3::ground_state(p, 50, 100).photon_density;
    const double mfv = std::norm(mf::minimize(p).order.alpha);
    o.detail << "lambda+=" << lp << ": |ED-MF|=" << fmt(std::abs(ed - mfv), 3) << " ";
    o.require(std::abs(ed - mfv) < 0.02, "finite-N vs mean field");
  }
  const double lc = mf::first_order_boundary(0.6, 0.0, mf::Branch::SRA);
  double prev = 0.0, jump = 0.0, at = 0.0;
  for (int i = 0; i <= 30; ++i) {
    const double lp = 1.48 + 0.01 * i;
    const double n = su3::ground_state(sym(lp, 0.6), 50, 100).photon_density;
    if (i > 0 && n - prev > jump) jump = n - prev, at = lp - 0.005;
    prev = n;
  }
  o.detail << "gamma=0.6: max step=" << fmt(jump, 3) << " at " << fmt(at, 4) << " (first-order line "
           << fmt(lc, 5) << ")";
  o.require(jump > 0.1, "jump size");
  o.require(std::abs(at - lc) <= 0.03, "jump location");
}

void criterion5(Outcome& o) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> l(-1.5, 1.5), g(0.1, 1.5), d(-0.5, 0.9), w(0.5, 1.5);
  double worst = 0.0;
  for (int n = 1; n <= 3; ++n)
    for (int k = 0; k < 5; ++k) {
      const auto p = ModelParams::from_lambdas(l(rng), l(rng), g(rng), d(rng), w(rng), w(rng));
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(oracle::brute_force_hamiltonian(p, n, 4),
                                                        Eigen::EigenvaluesOnly);
      worst = std::max(worst, std::abs(es.eigenvalues()(0) - su3::ground_state(p, n, 4).energy));
    }
  o.detail << "max |E_SU3 - E_brute| over 15 cases=" << fmt(worst, 3);
  o.require(worst <= 1e-10, "energy mismatch");
}

void criterion6(Outcome& o) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> l(-1.8, 1.8), g(0.2, 1.4), d(-0.5, 0.8);
  double sympl = 0.0, pairing = 0.0;
  int non_symplectic = 0;
  for (int k = 0; k < 100; ++k) {
    const auto p = ModelParams::from_lambdas(l(rng), l(rng), g(rng), d(rng));
    const auto s = fl::symplectic_diagonalize(fl::build_quadratic(p, mf::minimize(p)));
    if (!s.symplectic) ++non_symplectic;
    sympl = std::max(sympl, fl::symplectic_defect(s.transform));
    pairing = std::max(pairing, fl::pairing_defect(s.gm_eigenvalues));
  }
  std::uniform_real_distribution<double> u(-0.45, 0.45);
  double grad = 0.0;
  for (int k = 0; k < 100; ++k) {
    const auto p = ModelParams::from_lambdas(l(rng), l(rng), g(rng), d(rng));
    mf::Vector6 x = mf::Vector6::NullaryExpr([&](Eigen::Index) { return u(rng); });
    auto at = [](const mf::Vector6& v) { return mf::OrderParameters{{v[0], v[1]}, {v[2], v[3]}, {v[4], v[5]}}; };
    const auto gr = mf::gradient(p, at(x));
    mf::Vector6 fd;
    const double h = 1e-6;
    for (int i = 0; i < 6; ++i) {
      auto xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      fd[i] = (mf::energy(p, at(xp)) - mf::energy(p, at(xm))) / (2 * h);
    }
    grad = std::max(grad, (gr - fd).norm() / std::max(fd.norm(), 1e-300));
  }
  o.detail << "max symplectic defect=" << fmt(sympl, 3) << " max pairing defect=" << fmt(pairing, 3)
           << " max gradient rel. error=" << fmt(grad, 3);
  o.require(non_symplectic == 0, "zero modes at random points");
  o.require(sympl < 1e-10, "symplectic defect");
  o.require(pairing < 1e-10, "pairing defect");
  o.require(grad < 1e-6, "gradient");
}

void criterion7(Outcome& o) {
  const double k = 0.1;
  // (a) sign change of the NP3 stability matrix
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double gamma = 0.3 + 0.1 * i;
    const double lc = os::np_boundary(gamma, k, os::NormalPhase::NP3);
    double lo = 0.5 * lc, hi = 1.5 * lc;
    while (hi - lo > 1e-13 * hi) {
      const double mid = 0.5 * (lo + hi);
      (os::linear_stability_np3(os::open_params(mid, gamma, k)).max_real_part > 1e-12 ? hi : lo) = mid;
    }
    worst = std::max(worst, std::abs(0.5 * (lo + hi) - lc));
  }
  o.detail << "linear NP3 boundary max error=" << fmt(worst, 3);
  o.require(worst <= 1e-9, "NP3 linear boundary");

  // (b) open tricritical point from a phase-diagram sweep
  std::vector<double> lambdas, gammas;
  for (int i = 0; i <= 17; ++i) lambdas.push_back(1.34 + 0.01 * i);
  for (int i = 0; i <= 6; ++i) gammas.push_back(0.68 + 0.01 * i);
  os::PhaseDiagramOptions po;
  po.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const auto pts = os::phase_diagram(lambdas, gammas, os::open_params(1.0, 1.0, k), po);
  auto stable = [&](std::size_t gi, std::size_t li, PhaseLabel l) {
    const auto& s = pts[gi * lambdas.size() + li].stable_set;
    return std::find(s.begin(), s.end(), l) != s.end();
  };
  // per gamma row: where NP3 and NP2 stop being stable
  auto loss = [&](std::size_t gi, PhaseLabel l) -> double {
    for (std::size_t li = 1; li < lambdas.size(); ++li)
      if (stable(gi, li - 1, l) && !stable(gi, li, l)) return 0.5 * (lambdas[li - 1] + lambdas[li]);
    return NAN;
  };
  std::optional<std::pair<double, double>> tp;
  for (std::size_t gi = 1; gi < gammas.size() && !tp; ++gi) {
    const double a3 = loss(gi - 1, PhaseLabel::NP3), a2 = loss(gi - 1, PhaseLabel::NP2);
    const double b3 = loss(gi, PhaseLabel::NP3), b2 = loss(gi, PhaseLabel::NP2);
    if (std::isnan(a3 + a2 + b3 + b2)) continue;
    if ((a3 - a2) > 0 && (b3 - b2) <= 0) {
      const double t = (a3 - a2) / ((a3 - a2) - (b3 - b2));
      tp = {{gammas[gi - 1] + t * (gammas[gi] - gammas[gi - 1]), a3 + t * (b3 - a3)}};
    }
  }
  if (!tp) {
    o.require(false, "open TP not bracketed by the sweep");
  } else {
    const double target = std::sqrt(2.02);
    o.detail << " sweep TP=(" << fmt(tp->first, 4) << ", " << fmt(tp->second, 4) << ") vs (" << fmt(kGammaTP, 4)
             << ", " << fmt(target, 4) << ")";
    o.require(std::abs(tp->first - kGammaTP) <= 0.01 && std::abs(tp->second - target) <= 0.01, "open TP");
  }

  // (c) kappa -> 0 reproduces the closed-system boundary and tricritical point
  bool same = true;
  for (double gamma = kGammaTP; gamma <= 1.5; gamma += 0.05)
    same = same && os::np_boundary(gamma, 0.0, os::NormalPhase::NP3) ==
                       mf::second_order_boundary(gamma, 0.0, mf::Branch::SRA);
  double lo = 0.3, hi = 0.95;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double f = os::np_boundary(mid, 0.0, os::NormalPhase::NP3) - os::np_boundary(mid, 0.0, os::NormalPhase::NP2);
    (f > 0 ? lo : hi) = mid;
  }
  const auto closed = mf::tricritical_point(0.0);
  const double g0 = 0.5 * (lo + hi), l0 = os::np_boundary(g0, 0.0, os::NormalPhase::NP3);
  o.detail << " kappa->0 TP error=" << fmt(std::max(std::abs(g0 - closed.gamma), std::abs(l0 - closed.lambda)), 3);
  o.require(same, "kappa->0 boundary");
  o.require(std::abs(g0 - closed.gamma) < 1e-12 && std::abs(l0 - closed.lambda) < 1e-12, "kappa->0 TP");
}

void criterion8(Outcome& o) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> lam(0.5, 2.0), gam(0.3, 1.3);
  double worst_a = 0.0, worst_b = 0.0, raw = 0.0;
  os::IntegrateOptions unprojected;
  unprojected.project_casimirs = false;
  for (int k = 0; k < 20; ++k) {
    const auto p = os::open_params(lam(rng), gam(rng), 0.1);
    const auto s = os::BlochState::from_amplitudes({n(rng), n(rng), n(rng)}, {0.3 * n(rng), 0.3 * n(rng)});
    const auto c0 = os::casimir_invariants(s);
    const auto c1 = os::casimir_invariants(os::integrate(s, p, 10000.0).final_state);
    worst_a = std::max(worst_a, std::abs(c1.A - c0.A));
    worst_b = std::max(worst_b, std::abs(c1.B - c0.B));
    const auto c2 = os::casimir_invariants(os::integrate(s, p, 10000.0, unprojected).final_state);
    raw = std::max({raw, std::abs(c2.A - c0.A), std::abs(c2.B - c0.B)});
  }
  o.detail << "max |dA|=" << fmt(worst_a, 3) << " max |dB|=" << fmt(worst_b, 3)
           << " (without shell projection: " << fmt(raw, 3) << ")";
  o.require(worst_a < 1e-8 && worst_b < 1e-8, "Casimir drift");
}

void criterion9(Outcome& o) {
  const double k = 0.1;
  os::HysteresisOptions ho;
  ho.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  for (double gamma : {0.5, 0.6, kGammaTP, 0.8, 0.9}) {
    const double l21 = os::np_boundary(gamma, k, os::NormalPhase::NP3);
    const double start = std::floor((l21 - 0.1) / 0.005) * 0.005;
    std::vector<double> grid;
    for (int i = 0; i <= 50; ++i) grid.push_back(start + 0.005 * i);
    const auto scan = os::hysteresis_scan(gamma, grid, os::open_params(1.0, 1.0, k), os::HysteresisInit::NP3, ho);
    double departure = NAN, max_step = 0.0;
    for (std::size_t i = 0; i < scan.size(); ++i) {
      if (std::isnan(departure) && scan[i].p33 < 1.0 - 1e-3) departure = scan[i].lambda_plus;
      if (i > 0) max_step = std::max(max_step, std::abs(scan[i].p33 - scan[i - 1].p33));
    }
    o.detail << "g=" << fmt(gamma, 4) << ": dep=" << fmt(departure, 5) << " eq=" << fmt(l21, 5)
             << " step=" << fmt(max_step, 3) << "; ";
    o.require(std::abs(departure - l21) <= 0.01, "departure at gamma=" + fmt(gamma, 4));
    if (gamma >= kGammaTP - 1e-12) o.require(max_step < 0.05, "continuity at gamma=" + fmt(gamma, 4));
    else o.require(max_step > 0.2, "jump at gamma=" + fmt(gamma, 4));
  }
}

void criterion10(Outcome& o) {
  struct Case {
    double lambda_plus;
    int level;
    PhaseLabel expected;
  };
  for (const Case c : {Case{0.6 * kSqrt2, 3, PhaseLabel::NP3}, Case{kSqrt2, 3, PhaseLabel::SR},
                       Case{kSqrt2, 2, PhaseLabel::NP2}}) {
    const auto p = os::open_params(c.lambda_plus, 0.8, 0.1);
    auto s = os::BlochState::normal_phase(c.level);
    s.a += os::complex(0.1, 0.01);
    os::IntegrateOptions io;
    io.average_from = 9500.0;
    const auto tr = os::integrate(s, p, 10000.0, io);
    const auto reached = os::identify_attractor(tr.window_mean, p);
    o.detail << to_string(reached) << " (residual " << fmt(tr.final_residual, 3) << ") ";
    o.require(reached == c.expected, "attractor " + std::string(to_string(c.expected)));
    o.require(tr.final_residual < 1e-6, "residual for " + std::string(to_string(c.expected)));
  }
}

std::set<int> parse_list(const std::string& s) {
  std::set<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.insert(std::stoi(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only, expected;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--only") only = parse_list(argv[i + 1]);
    else if (flag == "--expected-failures") expected = parse_list(argv[i + 1]);
  }
  const std::vector<std::pair<double, std::function<void(Outcome&)>>> criteria{
      {60, criterion1},  {60, criterion2},   {300, criterion3}, {900, criterion4}, {1e9, criterion5},
      {1e9, criterion6}, {1e9, criterion7},  {1e9, criterion8}, {1800, criterion9}, {1e9, criterion10},
  };
  int unexpected = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.require(secs < criteria[i].first, "runtime limit " + fmt(criteria[i].first) + " s");
    std::printf("criterion %2d: %s  %s (%.1f s)\n", id, o.pass ? "PASS" : "FAIL", o.detail.str().c_str(), secs);
    std::fflush(stdout);
    if (!o.pass && !expected.count(id)) ++unexpected;
  }
  if (!expected.empty()) {
    std::printf("expected failures:");
    for (int id : expected) std::printf(" %d", id);
    std::printf("\n");
  }
  return unexpected == 0 ? 0 : 1;
}
