#include "tdm/opensys.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>

#include "tdm/errors.hpp"
#include "tdm/meanfield.hpp"
#include "tdm/parallel.hpp"

namespace tdm::opensys {

namespace {

const double kSqrt3 = std::sqrt(3.0);

using Matrix3c = Eigen::Matrix3cd;

const std::array<Matrix3c, 8>& gell_mann() {
  static const std::array<Matrix3c, 8> m = [] {
    std::array<Matrix3c, 8> l;
    for (auto& x : l) x.setZero();
    const complex i(0.0, 1.0);
    l[0](0, 1) = l[0](1, 0) = 1.0;
    l[1](0, 1) = -i;
    l[1](1, 0) = i;
    l[2](0, 0) = 1.0;
    l[2](1, 1) = -1.0;
    l[3](0, 2) = l[3](2, 0) = 1.0;
    l[4](0, 2) = -i;
    l[4](2, 0) = i;
    l[5](1, 2) = l[5](2, 1) = 1.0;
    l[6](1, 2) = -i;
    l[6](2, 1) = i;
    l[7](0, 0) = l[7](1, 1) = 1.0 / std::sqrt(3.0);
    l[7](2, 2) = -2.0 / std::sqrt(3.0);
    return l;
  }();
  return m;
}

// Real symmetric Gell-Mann matrices (indices 0, 2, 3, 5, 7).
Eigen::Matrix3d real_part(int j) { return gell_mann()[j].real(); }

void require_supported(const ModelParams& p) {
  if (p.delta != 0.0) throw UnsupportedRegimeError("open-system dynamics require delta = 0");
  if (p.g1 != p.g2) throw UnsupportedRegimeError("open-system dynamics require g1 = g2");
}

}  // namespace

BlochState BlochState::normal_phase(int level) {
  if (level < 1 || level > 3) throw DomainError("normal phase level must be 1, 2 or 3");
  Eigen::Vector3d psi = Eigen::Vector3d::Zero();
  psi[level - 1] = 1.0;
  return from_amplitudes(psi);
}

BlochState BlochState::from_amplitudes(const Eigen::Vector3d& psi_in, complex a) {
  const double n = psi_in.norm();
  if (!(n > 0.0)) throw DomainError("atomic amplitudes must not all vanish");
  const Eigen::Vector3cd psi = (psi_in / n).cast<complex>();
  BlochState s;
  s.a = a;
  for (int j = 0; j < 8; ++j) s.lambda[j] = (psi.adjoint() * gell_mann()[j] * psi)(0, 0).real();
  // exact zeros for the antisymmetric components of a real state
  s.lambda[1] = s.lambda[4] = s.lambda[6] = 0.0;
  return s;
}

std::array<double, 10> BlochState::to_array() const {
  std::array<double, 10> x{};
  x[0] = a.real();
  x[1] = a.imag();
  std::copy(lambda.begin(), lambda.end(), x.begin() + 2);
  return x;
}

BlochState BlochState::from_array(const std::array<double, 10>& x) {
  BlochState s;
  s.a = {x[0], x[1]};
  std::copy(x.begin() + 2, x.end(), s.lambda.begin());
  return s;
}

BlochState derivative(const BlochState& s, const ModelParams& p) {
  require_supported(p);
  const double g = p.g1, gm = p.gamma, W = p.Omega;
  const auto& L = s.lambda;
  const double x = 2.0 * s.a.real();  // <a> + <a^+>
  const complex i(0.0, 1.0);
  BlochState d;
  d.a = -i * (p.omega - i * p.kappa) * s.a - i * g * (L[0] + gm * L[5]);
  auto& D = d.lambda;
  D[0] = -W * L[1] + g * gm * x * L[4];
  D[1] = W * L[0] - 2.0 * g * x * L[2] - g * gm * x * L[3];
  D[2] = 2.0 * g * x * L[1] - g * gm * x * L[6];
  D[3] = -2.0 * W * L[4] - g * x * L[6] + g * gm * x * L[1];
  D[4] = 2.0 * W * L[3] + g * x * L[5] - g * gm * x * L[0];
  D[5] = -W * L[6] - g * x * L[4];
  D[6] = W * L[5] + g * x * L[3] + g * gm * x * L[2] - kSqrt3 * g * gm * x * L[7];
  D[7] = kSqrt3 * g * gm * x * L[6];
  return d;
}

double residual(const BlochState& state, const ModelParams& params) {
  const auto d = derivative(state, params).to_array();
  double r = 0.0;
  for (double v : d) r = std::max(r, std::abs(v));
  return r;
}

const std::array<std::array<std::array<double, 8>, 8>, 8>& symmetric_constants() {
  static const auto table = [] {
    std::array<std::array<std::array<double, 8>, 8>, 8> d{};
    const auto& l = gell_mann();
    for (int j = 0; j < 8; ++j)
      for (int k = 0; k < 8; ++k) {
        const Matrix3c ac = l[j] * l[k] + l[k] * l[j];
        for (int m = 0; m < 8; ++m) {
          const double v = 0.25 * (ac * l[m]).trace().real();
          d[j][k][m] = std::abs(v) < 1e-15 ? 0.0 : v;
        }
      }
    return d;
  }();
  return table;
}

CasimirValues casimir_invariants(const BlochState& s) {
  CasimirValues c;
  const auto& d = symmetric_constants();
  for (int j = 0; j < 8; ++j) {
    c.A += s.lambda[j] * s.lambda[j];
    for (int k = 0; k < 8; ++k)
      for (int m = 0; m < 8; ++m)
        if (d[j][k][m] != 0.0) c.B += d[j][k][m] * s.lambda[j] * s.lambda[k] * s.lambda[m];
  }
  return c;
}

std::array<double, 3> populations(const BlochState& s) {
  const double l3 = s.lambda[2], l8 = s.lambda[7];
  return {1.0 / 3.0 + l3 / 2.0 + l8 / (2.0 * kSqrt3), 1.0 / 3.0 - l3 / 2.0 + l8 / (2.0 * kSqrt3),
          1.0 / 3.0 - l8 / kSqrt3};
}

double distance(const BlochState& x, const BlochState& y) {
  const auto a = x.to_array(), b = y.to_array();
  double r = 0.0;
  for (int i = 0; i < 10; ++i) r = std::max(r, std::abs(a[i] - b[i]));
  return r;
}

namespace {

struct DEntry {
  int j, k, m;
  double value;
};

const std::vector<DEntry>& nonzero_constants() {
  static const auto list = [] {
    std::vector<DEntry> v;
    const auto& d = symmetric_constants();
    for (int j = 0; j < 8; ++j)
      for (int k = 0; k < 8; ++k)
        for (int m = 0; m < 8; ++m)
          if (d[j][k][m] != 0.0) v.push_back({j, k, m, d[j][k][m]});
    return v;
  }();
  return list;
}

using Atomic = Eigen::Matrix<double, 8, 1>;

// Casimir values and their gradients with respect to the atomic components.
Eigen::Vector2d casimirs(const Atomic& l, Eigen::Matrix<double, 8, 2>* grad) {
  Atomic b = Atomic::Zero();
  for (const auto& e : nonzero_constants()) b[e.j] += e.value * l[e.k] * l[e.m];
  if (grad) {
    grad->col(0) = 2.0 * l;
    grad->col(1) = 3.0 * b;
  }
  return {l.squaredNorm(), l.dot(b)};
}

// Moves the atomic components back onto the level set (A0, B0) along the
// Casimir gradients (minimum-norm Newton; the gradients are parallel on the
// pure-state shell, where one direction suffices).
void project_casimirs(std::array<double, 10>& x, const Eigen::Vector2d& target) {
  const Atomic l = Eigen::Map<const Atomic>(x.data() + 2);
  Eigen::Matrix<double, 8, 2> g0, g;
  Eigen::Vector2d f = casimirs(l, &g0) - target;
  if (g0.col(0).norm() < 1e-12) return;
  Eigen::Vector2d mu = Eigen::Vector2d::Zero();
  Eigen::CompleteOrthogonalDecomposition<Eigen::Matrix2d> cod;
  cod.setThreshold(1e-8);
  for (int it = 0; it < 4 && f.cwiseAbs().maxCoeff() > 4e-16; ++it) {
    casimirs(l + g0 * mu, &g);
    mu -= cod.compute(g.transpose() * g0).solve(f);
    f = casimirs(l + g0 * mu, nullptr) - target;
  }
  Eigen::Map<Atomic>(x.data() + 2) = l + g0 * mu;
}

}  // namespace

Trajectory integrate(const BlochState& state0, const ModelParams& params, double t_max,
                     const IntegrateOptions& opt) {
  namespace odeint = boost::numeric::odeint;
  using State = std::array<double, 10>;
  require_supported(params);
  params.validate();
  if (!(t_max >= 0.0)) throw DomainError("integration time must be non-negative");

  auto rhs = [&params](const State& x, State& dxdt, double) {
    dxdt = derivative(BlochState::from_array(x), params).to_array();
  };
  auto stepper = odeint::make_controlled(opt.abs_tol, opt.rel_tol, odeint::runge_kutta_fehlberg78<State>());
  const auto c0 = casimir_invariants(state0);
  const Eigen::Vector2d shell(c0.A, c0.B);

  Trajectory tr;
  State x = state0.to_array();
  double t = 0.0, dt = opt.initial_step;
  double next_sample = 0.0;
  const bool sampling = opt.sample_stride > 0.0;
  auto record = [&] {
    tr.times.push_back(t);
    tr.states.push_back(BlochState::from_array(x));
  };
  if (sampling) {
    record();
    next_sample = opt.sample_stride;
  }
  const bool averaging = opt.average_from >= 0.0 && opt.average_from < t_max;
  std::array<double, 10> sum{};
  double weight = 0.0;
  while (t < t_max) {
    const State x_prev = x;
    const double t_prev = t;
    double h = std::min(dt, t_max - t);
    if (sampling) h = std::min(h, next_sample - t);
    const bool clamped = h < dt;
    const auto result = stepper.try_step(rhs, x, t, h);
    if (result == odeint::success) {
      ++tr.steps;
      if (!clamped) dt = h;
      if (opt.project_casimirs) project_casimirs(x, shell);
      for (double v : x)
        if (!std::isfinite(v)) throw StiffnessError("state became non-finite", t);
      if (averaging && t > opt.average_from) {
        // trapezoid over the overlap of the step with the window
        const double lo = std::max(t_prev, opt.average_from);
        const double w = t - lo;
        for (int i = 0; i < 10; ++i) sum[i] += 0.5 * w * (x_prev[i] + x[i]);
        weight += w;
      }
      if (sampling && t >= next_sample - 1e-12 * std::max(1.0, t)) {
        record();
        next_sample += opt.sample_stride;
      }
      if (opt.observer && !opt.observer(t, BlochState::from_array(x))) {
        tr.stopped_early = true;
        break;
      }
    } else {
      dt = h;
      if (dt < opt.min_step * std::max(1.0, t)) throw StiffnessError("step size underflow", t);
    }
  }
  tr.final_state = BlochState::from_array(x);
  tr.final_time = t;
  if (weight > 0.0) {
    for (double& v : sum) v /= weight;
    tr.window_mean = BlochState::from_array(sum);
  } else {
    tr.window_mean = tr.final_state;
  }
  tr.final_residual = residual(tr.final_state, params);
  return tr;
}

std::string_view to_string(StabilityMethod m) {
  switch (m) {
    case StabilityMethod::DynamicsProbe: return "dynamics_probe";
    case StabilityMethod::LinearNP3: return "linear_np3";
    case StabilityMethod::LinearNP2: return "linear_np2";
  }
  return "dynamics_probe";
}

PhaseLabel classify(const BlochState& s, double tol) {
  if (std::abs(s.a) >= tol) return PhaseLabel::SR;
  const auto p = populations(s);
  const PhaseLabel labels[3] = {PhaseLabel::NP1, PhaseLabel::NP2, PhaseLabel::NP3};
  for (int m = 0; m < 3; ++m)
    if (p[m] > 1.0 - 1e-6) return labels[m];
  return PhaseLabel::Unclassified;
}

namespace {

// Steady-state conditions on the real pure-state sphere with a eliminated.
struct Reduced {
  Eigen::Vector3d r;
  Eigen::Matrix3d jac;  // d r / d psi
};

Reduced reduced_residual(const ModelParams& p, const Eigen::Vector3d& psi) {
  const double g = p.g1, gm = p.gamma, W = p.Omega;
  std::array<double, 8> L{};
  std::array<Eigen::RowVector3d, 8> dL;
  for (int j : {0, 2, 3, 5, 7}) {
    const Eigen::Matrix3d m = real_part(j);
    L[j] = psi.dot(m * psi);
    dL[j] = 2.0 * (m * psi).transpose();
  }
  const double c = -2.0 * g * p.omega / (p.omega * p.omega + p.kappa * p.kappa);
  const double x = c * (L[0] + gm * L[5]);
  const Eigen::RowVector3d dx = c * (dL[0] + gm * dL[5]);
  Reduced out;
  out.r[0] = W * L[0] - 2.0 * g * x * L[2] - g * gm * x * L[3];
  out.r[1] = 2.0 * W * L[3] + g * x * L[5] - g * gm * x * L[0];
  out.r[2] = W * L[5] + g * x * L[3] + g * gm * x * L[2] - kSqrt3 * g * gm * x * L[7];
  out.jac.row(0) = W * dL[0] - 2.0 * g * (dx * L[2] + x * dL[2]) - g * gm * (dx * L[3] + x * dL[3]);
  out.jac.row(1) = 2.0 * W * dL[3] + g * (dx * L[5] + x * dL[5]) - g * gm * (dx * L[0] + x * dL[0]);
  out.jac.row(2) = W * dL[5] + g * (dx * L[3] + x * dL[3]) + g * gm * (dx * L[2] + x * dL[2]) -
                   kSqrt3 * g * gm * (dx * L[7] + x * dL[7]);
  return out;
}

BlochState state_from_psi(const ModelParams& p, const Eigen::Vector3d& psi) {
  BlochState s = BlochState::from_amplitudes(psi);
  const complex i(0.0, 1.0);
  s.a = -p.g1 * (s.lambda[0] + p.gamma * s.lambda[5]) / (p.omega - i * p.kappa);
  return s;
}

bool newton_on_sphere(const ModelParams& p, Eigen::Vector3d& psi, int max_iterations) {
  psi.normalize();
  auto red = reduced_residual(p, psi);
  double f = red.r.norm();
  for (int it = 0; it < max_iterations && f > 1e-15; ++it) {
    // orthonormal tangent basis at psi
    Eigen::Vector3d e1 = psi.unitOrthogonal();
    Eigen::Vector3d e2 = psi.cross(e1);
    Eigen::Matrix<double, 3, 2> basis;
    basis << e1, e2;
    const Eigen::Matrix<double, 3, 2> jt = red.jac * basis;
    const Eigen::Vector2d step = jt.completeOrthogonalDecomposition().solve(-red.r);
    if (!step.allFinite()) return false;
    double t = 1.0;
    bool improved = false;
    for (int k = 0; k < 40; ++k, t *= 0.5) {
      Eigen::Vector3d trial = (psi + t * (basis * step)).normalized();
      const auto tr = reduced_residual(p, trial);
      if (tr.r.norm() < f) {
        psi = trial;
        red = tr;
        f = tr.r.norm();
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  return f < 1e-11;
}

std::vector<Eigen::Vector3d> seeds(const ModelParams& p, const SteadyStateOptions& opt) {
  std::vector<Eigen::Vector3d> out;
  out.push_back(Eigen::Vector3d::UnitX());
  out.push_back(Eigen::Vector3d::UnitY());
  out.push_back(Eigen::Vector3d::UnitZ());
  // closed-system superradiant guesses with sign variants
  try {
    ModelParams closed = p;
    closed.kappa = 0.0;
    const auto sol = meanfield::minimize(closed);
    const double b1 = sol.order.beta1.real(), b2 = sol.order.beta2.real(), b = sol.order.beta();
    for (double s1 : {1.0, -1.0})
      for (double s2 : {1.0, -1.0}) out.emplace_back(s1 * b1, s2 * b2, b);
  } catch (const Error&) {
    // no guess available; the generic seeds still cover the sphere
  }
  // deterministic hemisphere covering (psi and -psi are the same state)
  const int n_fib = 64 - static_cast<int>(out.size());
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  for (int k = 0; k < n_fib; ++k) {
    const double z = 1.0 - (k + 0.5) / n_fib;
    const double r = std::sqrt(1.0 - z * z);
    out.emplace_back(r * std::cos(golden * k), r * std::sin(golden * k), z);
  }
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> nd;
  for (int k = 0; k < opt.random_seeds; ++k) {
    Eigen::Vector3d v(nd(rng), nd(rng), nd(rng));
    out.push_back(v.normalized());
  }
  return out;
}

double unknown_distance(const BlochState& x, const BlochState& y) {
  double r = std::max(std::abs(x.a.real() - y.a.real()), std::abs(x.a.imag() - y.a.imag()));
  for (int j : {0, 2, 3, 5, 7}) r = std::max(r, std::abs(x.lambda[j] - y.lambda[j]));
  return r;
}

int label_rank(PhaseLabel l) {
  switch (l) {
    case PhaseLabel::NP1: return 0;
    case PhaseLabel::NP2: return 1;
    case PhaseLabel::NP3: return 2;
    case PhaseLabel::SR: return 3;
    default: return 4;
  }
}

}  // namespace

std::vector<SteadyStateRecord> find_steady_states(const ModelParams& params,
                                                  const SteadyStateOptions& opt) {
  require_supported(params);
  params.validate();
  std::vector<SteadyStateRecord> out;
  for (Eigen::Vector3d psi : seeds(params, opt)) {
    if (!newton_on_sphere(params, psi, opt.max_iterations)) continue;
    SteadyStateRecord rec;
    rec.state = state_from_psi(params, psi);
    rec.residual = residual(rec.state, params);
    if (!(rec.residual < opt.accept_residual)) continue;
    rec.label = classify(rec.state);
    const bool duplicate = std::any_of(out.begin(), out.end(), [&](const SteadyStateRecord& r) {
      return unknown_distance(r.state, rec.state) < opt.dedup_tolerance;
    });
    if (!duplicate) out.push_back(rec);
  }
  std::sort(out.begin(), out.end(), [](const SteadyStateRecord& x, const SteadyStateRecord& y) {
    if (label_rank(x.label) != label_rank(y.label)) return label_rank(x.label) < label_rank(y.label);
    if (x.state.a.real() != y.state.a.real()) return x.state.a.real() < y.state.a.real();
    return x.state.lambda[0] < y.state.lambda[0];
  });
  return out;
}

bool stability_probe(const SteadyStateRecord& record, const ModelParams& params,
                     const ProbeOptions& opt) {
  BlochState start = record.state;
  start.a += opt.perturbation;
  bool diverged = false, settled_elsewhere = false, returned = false;
  IntegrateOptions io = opt.integrate;
  io.average_from = (1.0 - opt.window) * opt.t_max;
  io.observer = [&](double, const BlochState& s) {
    const double d = distance(s, record.state);
    if (d > opt.divergence || std::abs(s.a) > opt.divergence) {
      diverged = true;
      return false;
    }
    if (opt.early_exit) {
      // deep inside the basin: linear decay only from here on
      if (d < 1e-6 * opt.tolerance) {
        returned = true;
        return false;
      }
      // resting on a different fixed point
      if (d > opt.tolerance && residual(s, params) < 1e-12) {
        settled_elsewhere = true;
        return false;
      }
    }
    return true;
  };
  Trajectory tr;
  try {
    tr = integrate(start, params, opt.t_max, io);
  } catch (const StiffnessError&) {
    return false;
  }
  if (diverged || settled_elsewhere) return false;
  if (returned) return true;
  return distance(tr.window_mean, record.state) <= opt.tolerance;
}

PhaseLabel identify_attractor(const BlochState& state, const ModelParams& params, double tolerance) {
  PhaseLabel best = PhaseLabel::Unclassified;
  double best_d = tolerance;
  for (const auto& r : find_steady_states(params)) {
    const double d = distance(state, r.state);
    if (d <= best_d) {
      best_d = d;
      best = r.label;
    }
  }
  return best;
}

double np_boundary(double gamma, double kappa_over_omega, NormalPhase which) {
  if (!(kappa_over_omega >= 0.0)) throw DomainError("np_boundary: kappa/omega must be non-negative");
  const double k = std::sqrt(1.0 + kappa_over_omega * kappa_over_omega);
  if (which == NormalPhase::NP3) {
    if (!(gamma > 0.0)) throw DomainError("np_boundary: NP3 boundary requires gamma > 0");
    return k / gamma;
  }
  if (!(gamma > 0.0) || !(gamma < 1.0))
    throw DomainError("np_boundary: NP2 is unstable for all couplings unless 0 < gamma < 1");
  return k / std::sqrt(1.0 - gamma * gamma);
}

namespace {

double max_real(const Eigen::Matrix<double, 6, 6>& m) {
  Eigen::EigenSolver<Eigen::Matrix<double, 6, 6>> es(m, false);
  return es.eigenvalues().real().maxCoeff();
}

}  // namespace

LinearStability linear_stability_np3(const ModelParams& p) {
  require_supported(p);
  const double g = p.g1, gm = p.gamma, k = p.kappa, w = p.omega, W = p.Omega;
  LinearStability ls;
  auto& m = ls.matrix;
  m << -k, w, 0, 0, 0, 0,
       -w, -k, 0, 0, -2 * g * gm, 0,
       0, 0, 0, 2 * W, 0, 0,
       0, 0, -2 * W, 0, 0, 0,
       0, 0, 0, 0, 0, W,
       -2 * g * gm, 0, 0, 0, -W, 0;
  ls.max_real_part = max_real(m);
  return ls;
}

LinearStability linear_stability_np2(const ModelParams& p) {
  require_supported(p);
  const double g = p.g1, gm = p.gamma, k = p.kappa, w = p.omega, W = p.Omega;
  // (Re c, Im c, Re z1, Im z1, Re z3, Im z3): z1 excites |2> -> |1> (energy +W),
  // z3 de-excites |2> -> |3> (energy -W).
  LinearStability ls;
  auto& m = ls.matrix;
  m << -k, w, 0, 0, 0, 0,
       -w, -k, -2 * g, 0, -2 * g * gm, 0,
       0, 0, 0, W, 0, 0,
       -2 * g, 0, -W, 0, 0, 0,
       0, 0, 0, 0, 0, -W,
       -2 * g * gm, 0, 0, 0, W, 0;
  ls.max_real_part = max_real(m);
  return ls;
}

ModelParams open_params(double lambda_plus, double gamma, double kappa, double omega, double Omega) {
  ModelParams p;
  p.omega = omega;
  p.Omega = Omega;
  p.gamma = gamma;
  p.kappa = kappa;
  p.g1 = p.g2 = 0.5 * lambda_plus * std::sqrt(omega * Omega);
  return p;
}

std::vector<PhasePoint> phase_diagram(const std::vector<double>& lambdas,
                                      const std::vector<double>& gammas, const ModelParams& base,
                                      const PhaseDiagramOptions& opt) {
  std::vector<PhasePoint> out(lambdas.size() * gammas.size());
  parallel_for(out.size(), opt.workers, [&](std::size_t idx) {
    PhasePoint& pt = out[idx];
    pt.gamma = gammas[idx / lambdas.size()];
    pt.lambda_plus = lambdas[idx % lambdas.size()];
    try {
      const auto p = open_params(pt.lambda_plus, pt.gamma, base.kappa, base.omega, base.Omega);
      const auto roots = find_steady_states(p, opt.steady);
      pt.n_roots = static_cast<int>(roots.size());
      for (const auto& r : roots) {
        if (r.label == PhaseLabel::Unclassified) continue;
        if (!stability_probe(r, p, opt.probe)) continue;
        if (std::find(pt.stable_set.begin(), pt.stable_set.end(), r.label) == pt.stable_set.end())
          pt.stable_set.push_back(r.label);
      }
      std::sort(pt.stable_set.begin(), pt.stable_set.end(),
                [](PhaseLabel x, PhaseLabel y) { return label_rank(x) < label_rank(y); });
    } catch (const Error&) {
      pt.resolved = false;
    }
  });
  return out;
}

std::vector<HysteresisPoint> hysteresis_scan(double gamma, const std::vector<double>& lambdas,
                                             const ModelParams& base, HysteresisInit init,
                                             const HysteresisOptions& opt) {
  std::vector<HysteresisPoint> out(lambdas.size());
  parallel_for(out.size(), opt.workers, [&](std::size_t i) {
    const auto p = open_params(lambdas[i], gamma, base.kappa, base.omega, base.Omega);
    BlochState start = BlochState::normal_phase(init == HysteresisInit::NP2 ? 2 : 3);
    if (init == HysteresisInit::SRSeed) {
      for (const auto& r : find_steady_states(p))
        if (r.label == PhaseLabel::SR) {
          start = r.state;
          break;
        }
    }
    start.a += opt.perturbation;
    IntegrateOptions io = opt.integrate;
    io.average_from = (1.0 - opt.window) * opt.t_max;
    const auto tr = integrate(start, p, opt.t_max, io);
    HysteresisPoint& h = out[i];
    h.lambda_plus = lambdas[i];
    h.p33 = populations(tr.final_state)[2];
    h.residual = tr.final_residual;
    h.label = identify_attractor(tr.window_mean, p, opt.match_tolerance);
  });
  return out;
}

}  // namespace tdm::opensys
