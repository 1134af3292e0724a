#include "tdm/meanfield.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

namespace tdm::meanfield {

namespace {

double coupling_scale(const ModelParams& p) {
  return p.omega + p.Omega + std::abs(p.g1) + std::abs(p.g2);
}

// The six real coordinates used by the optimizer: (Re alpha, Im alpha, u1, u2)
// with u in R^4 = C^2. The atomic state is the point of the unit sphere
//   (beta1, beta2, beta) = (u1 sin r / r, u2 sin r / r, cos r),  r = |u|,
// so no boundary or 1/beta singularity exists in these coordinates. A
// negative cos r is the same physical state with an overall sign flip.
struct SphereState {
  complex alpha;
  complex beta1;
  complex beta2;
  double beta;
  double s;   // sin r / r
  double sp;  // (d/dr (sin r / r)) / r
};

SphereState sphere_state(const Vector6& x) {
  SphereState st;
  st.alpha = {x[0], x[1]};
  const double r2 = x[2] * x[2] + x[3] * x[3] + x[4] * x[4] + x[5] * x[5];
  const double r = std::sqrt(r2);
  if (r < 1e-4) {
    st.s = 1.0 - r2 / 6.0 + r2 * r2 / 120.0;
    st.sp = -1.0 / 3.0 + r2 / 30.0;
  } else {
    st.s = std::sin(r) / r;
    st.sp = (r * std::cos(r) - std::sin(r)) / (r2 * r);
  }
  st.beta1 = complex(x[2], x[3]) * st.s;
  st.beta2 = complex(x[4], x[5]) * st.s;
  st.beta = std::cos(r);
  return st;
}

// Energy as a polynomial in (alpha, beta1, beta2, beta) with beta free.
double polynomial_energy(const ModelParams& p, complex a, complex b1, complex b2, double b) {
  const double ee = p.omega * std::norm(a) - p.Omega + (2.0 - p.delta) * p.Omega * std::norm(b1) +
                    p.Omega * std::norm(b2);
  const double g1_term = 2.0 * p.g1 * std::real(a * std::conj(b1) * b2);
  const double g2_term = 2.0 * p.g2 * std::real(a * std::conj(b2) * b1);
  const double tc = 2.0 * p.gamma * b *
                    (p.g1 * std::real(a * std::conj(b2)) + p.g2 * std::real(a * b2));
  return ee + g1_term + g2_term + tc;
}

double sphere_energy(const ModelParams& p, const Vector6& x) {
  const auto st = sphere_state(x);
  return polynomial_energy(p, st.alpha, st.beta1, st.beta2, st.beta);
}

Vector6 sphere_gradient(const ModelParams& p, const Vector6& x) {
  const auto st = sphere_state(x);
  const complex a = st.alpha, b1 = st.beta1, b2 = st.beta2;
  const double b = st.beta;
  // Wirtinger derivatives with beta held fixed.
  const complex da = p.omega * std::conj(a) + p.g1 * std::conj(b1) * b2 +
                     p.g2 * std::conj(b2) * b1 + p.gamma * b * (p.g1 * std::conj(b2) + p.g2 * b2);
  const complex db1 = (2.0 - p.delta) * p.Omega * std::conj(b1) + p.g1 * std::conj(a) * std::conj(b2) +
                      p.g2 * a * std::conj(b2);
  const complex db2 = p.Omega * std::conj(b2) + p.g1 * a * std::conj(b1) +
                      p.g2 * std::conj(a) * std::conj(b1) +
                      p.gamma * b * (p.g1 * std::conj(a) + p.g2 * a);
  const double dbeta =
      2.0 * p.gamma * (p.g1 * std::real(a * std::conj(b2)) + p.g2 * std::real(a * b2));

  Vector6 g;
  g[0] = 2.0 * da.real();
  g[1] = -2.0 * da.imag();
  const std::array<double, 4> gb{2.0 * db1.real(), -2.0 * db1.imag(), 2.0 * db2.real(),
                                 -2.0 * db2.imag()};
  const std::array<double, 4> comps{b1.real(), b1.imag(), b2.real(), b2.imag()};
  double proj = 0.0;
  for (int c = 0; c < 4; ++c) proj += gb[c] * comps[c];
  // proj = sum_c G_c beta_c = s * sum_c G_c u_c
  const double gu = (st.s != 0.0) ? proj / st.s : 0.0;
  for (int k = 0; k < 4; ++k) {
    const double xk = x[2 + k];
    g[2 + k] = st.s * gb[k] + gu * st.sp * xk - dbeta * st.s * xk;
  }
  return g;
}

OrderParameters to_order(const Vector6& x) {
  const auto st = sphere_state(x);
  OrderParameters o{st.alpha, st.beta1, st.beta2};
  if (st.beta < 0.0) {
    o.beta1 = -o.beta1;
    o.beta2 = -o.beta2;
  }
  return o;
}

struct DescentResult {
  Vector6 x;
  double f;
};

// BFGS with backtracking Armijo line search.
DescentResult bfgs(const ModelParams& p, Vector6 x) {
  using Matrix6 = Eigen::Matrix<double, 6, 6>;
  Matrix6 hinv = Matrix6::Identity();
  double f = sphere_energy(p, x);
  Vector6 g = sphere_gradient(p, x);
  const double scale = coupling_scale(p);
  for (int iter = 0; iter < 500; ++iter) {
    if (g.lpNorm<Eigen::Infinity>() < 1e-14 * scale) break;
    Vector6 dir = -hinv * g;
    double slope = g.dot(dir);
    if (slope >= 0.0) {
      hinv.setIdentity();
      dir = -g;
      slope = -g.squaredNorm();
    }
    // keep trial steps within a sensible radius
    const double dn = dir.norm();
    double t = dn > 2.0 ? 2.0 / dn : 1.0;
    Vector6 xn;
    double fn = f;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      xn = x + t * dir;
      fn = sphere_energy(p, xn);
      if (fn <= f + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    const Vector6 gn = sphere_gradient(p, xn);
    const Vector6 s = xn - x;
    const Vector6 y = gn - g;
    const double sy = s.dot(y);
    if (sy > 1e-300 && sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Matrix6 I = Matrix6::Identity();
      hinv = (I - rho * s * y.transpose()) * hinv * (I - rho * y * s.transpose()) +
             rho * s * s.transpose();
    }
    const double df = f - fn;
    x = xn;
    f = fn;
    g = gn;
    if (s.lpNorm<Eigen::Infinity>() < 1e-16 && df <= 0.0) break;
  }
  return {x, f};
}

// Newton iterations on a finite-difference Hessian of the analytic gradient;
// near-null Hessian directions (symmetry orbits) are excluded from the step.
Vector6 newton_polish(const ModelParams& p, Vector6 x) {
  using Matrix6 = Eigen::Matrix<double, 6, 6>;
  Vector6 g = sphere_gradient(p, x);
  for (int iter = 0; iter < 12; ++iter) {
    const double gnorm = g.norm();
    if (gnorm == 0.0) break;
    Matrix6 hess;
    const double h = 1e-5;
    for (int k = 0; k < 6; ++k) {
      Vector6 xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      hess.col(k) = (sphere_gradient(p, xp) - sphere_gradient(p, xm)) / (2.0 * h);
    }
    hess = 0.5 * (hess + hess.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix6> es(hess);
    const auto& ev = es.eigenvalues();
    const double cut = 1e-11 * std::max(1.0, ev.cwiseAbs().maxCoeff());
    Vector6 step = Vector6::Zero();
    for (int k = 0; k < 6; ++k) {
      if (std::abs(ev[k]) > cut) {
        const Vector6 v = es.eigenvectors().col(k);
        step -= (v.dot(g) / ev[k]) * v;
      }
    }
    const Vector6 xn = x + step;
    const Vector6 gn = sphere_gradient(p, xn);
    if (!(gn.norm() < gnorm)) break;
    x = xn;
    g = gn;
  }
  return x;
}

std::vector<Vector6> starting_points(const ModelParams& p, const MinimizeOptions& opt) {
  std::vector<Vector6> seeds;
  seeds.push_back(Vector6::Zero());  // normal phase
  const double amp = std::max(0.5, (std::abs(p.g1) + std::abs(p.g2)) / p.omega);
  const std::array<double, 2> alphas{0.5 * amp, 1.5 * amp};
  const std::array<std::array<double, 2>, 4> atoms{{{0.3, 0.6}, {0.3, -0.6}, {1.0, 0.9}, {1.0, -0.9}}};
  for (double a : alphas) {
    for (const auto& u : atoms) {
      Vector6 x;
      x << a, 0.0, u[0], 0.0, u[1], 0.0;  // real sector
      seeds.push_back(x);
    }
  }
  for (double a : alphas) {
    for (const auto& u : atoms) {
      Vector6 x;
      x << 0.0, a, u[0], 0.0, 0.0, u[1];  // alpha and beta2 imaginary
      seeds.push_back(x);
    }
  }
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> ua(-2.0 * amp, 2.0 * amp);
  std::uniform_real_distribution<double> uu(-1.2, 1.2);
  const int total = std::max(opt.n_starts, 32);
  while (static_cast<int>(seeds.size()) < total) {
    Vector6 x;
    x << ua(rng), ua(rng), uu(rng), uu(rng), uu(rng), uu(rng);
    seeds.push_back(x);
  }
  return seeds;
}

}  // namespace

double OrderParameters::beta() const {
  const double ex = excitation();
  if (ex > 1.0) throw DomainError("order parameters outside |beta1|^2 + |beta2|^2 <= 1");
  return std::sqrt(1.0 - ex);
}

double energy(const ModelParams& params, const OrderParameters& order) {
  const double b = order.beta();
  return polynomial_energy(params, order.alpha, order.beta1, order.beta2, b);
}

Vector6 gradient(const ModelParams& params, const OrderParameters& order) {
  const double b = order.beta();
  if (!(b > 0.0)) throw SingularityError("gradient undefined at beta = 0");
  const auto& p = params;
  const complex a = order.alpha, b1 = order.beta1, b2 = order.beta2;
  const complex ac = std::conj(a), b1c = std::conj(b1), b2c = std::conj(b2);
  // (alpha beta2^* + c.c.) and (alpha beta2 + c.c.)
  const double x = 2.0 * std::real(a * b2c);
  const double y = 2.0 * std::real(a * b2);

  const complex d_alpha = p.omega * ac + p.g1 * b1c * b2 + p.g2 * b2c * b1 +
                          p.g1 * p.gamma * b * b2c + p.g2 * p.gamma * b * b2;
  const complex d_beta1 = (2.0 - p.delta) * p.Omega * b1c + p.g1 * ac * b2c + p.g2 * a * b2c -
                          p.g1 * p.gamma * b1c / (2.0 * b) * x -
                          p.g2 * p.gamma * b1c / (2.0 * b) * y;
  const complex d_beta2 = p.Omega * b2c + p.g1 * a * b1c + p.g2 * ac * b1c +
                          p.g1 * p.gamma * b * ac + p.g2 * p.gamma * b * a -
                          p.g1 * p.gamma * b2c / (2.0 * b) * x -
                          p.g2 * p.gamma * b2c / (2.0 * b) * y;

  Vector6 g;
  g << 2.0 * d_alpha.real(), -2.0 * d_alpha.imag(), 2.0 * d_beta1.real(), -2.0 * d_beta1.imag(),
      2.0 * d_beta2.real(), -2.0 * d_beta2.imag();
  return g;
}

OrderParameters canonicalize(const ModelParams& params, const OrderParameters& order) {
  OrderParameters o = order;
  const double mag = std::abs(o.alpha);
  if (mag == 0.0) return o;
  const bool tc_g2 = params.g2 == 0.0 && params.g1 != 0.0;
  const bool tc_g1 = params.g1 == 0.0 && params.g2 != 0.0;
  if (tc_g2 || tc_g1) {
    const double theta = -std::arg(o.alpha);
    const double sign = tc_g2 ? 1.0 : -1.0;
    o.alpha = mag;
    o.beta2 *= std::polar(1.0, sign * theta);
    o.beta1 *= std::polar(1.0, 2.0 * sign * theta);
    return o;
  }
  const double re = o.alpha.real();
  const double tiny = 1e-14 * mag;
  if (re < -tiny || (std::abs(re) <= tiny && o.alpha.imag() < 0.0)) {
    o.alpha = -o.alpha;
    o.beta2 = -o.beta2;
  }
  return o;
}

MeanFieldSolution minimize(const ModelParams& params, const MinimizeOptions& options) {
  params.validate();
  const double scale = coupling_scale(params);
  const double tol = options.gradient_tolerance * std::max(1.0, scale);

  MeanFieldSolution best;
  best.energy = std::numeric_limits<double>::infinity();
  MeanFieldSolution best_any = best;
  bool have_np = false;
  MeanFieldSolution np_solution;

  for (const Vector6& seed : starting_points(params, options)) {
    DescentResult r = bfgs(params, seed);
    const Vector6 x = newton_polish(params, r.x);
    MeanFieldSolution cand;
    cand.order = to_order(x);
    if (!(cand.order.excitation() < 1.0)) continue;  // beta = 0 exactly; measure zero
    cand.energy = energy(params, cand.order);
    cand.gradient_norm = gradient(params, cand.order).norm();
    cand.converged = cand.gradient_norm < tol;
    if (cand.energy < best_any.energy) best_any = cand;
    if (!cand.converged) continue;
    if (seed.isZero()) {
      have_np = true;
      np_solution = cand;
    }
    if (cand.energy < best.energy) best = cand;
  }

  if (!std::isfinite(best.energy)) {
    best_any.order = canonicalize(params, best_any.order);
    best_any.label = PhaseLabel::Unclassified;
    throw OptimizationFailure("mean-field minimization: no start converged", best_any);
  }
  // prefer the exact normal phase over a numerically indistinguishable candidate
  if (have_np && best.energy > np_solution.energy - 1e-14 * scale) best = np_solution;

  best.order = canonicalize(params, best.order);
  best.energy = energy(params, best.order);
  best.gradient_norm = gradient(params, best.order).norm();
  best.converged = best.gradient_norm < tol;
  best.label = classify(best, params, options.np_tolerance);
  return best;
}

PhaseLabel classify(const MeanFieldSolution& solution, const ModelParams& params, double tol) {
  const complex a = solution.order.alpha;
  const double mag = std::abs(a);
  if (mag < tol) return PhaseLabel::NP;
  if (params.g1 == 0.0 || params.g2 == 0.0) return PhaseLabel::TC_SR;
  const bool same_sign = (params.g1 > 0.0) == (params.g2 > 0.0);
  const bool real_dominant = std::abs(a.imag()) < tol * mag;
  const bool imag_dominant = std::abs(a.real()) < tol * mag;
  if (real_dominant && !imag_dominant && same_sign) return PhaseLabel::SRA;
  if (imag_dominant && !real_dominant && !same_sign) return PhaseLabel::SRB;
  return PhaseLabel::Unclassified;
}

double second_order_boundary(double gamma, double delta, Branch) {
  if (!(delta < 2.0)) throw DomainError("second_order_boundary requires delta < 2");
  const double g2 = gamma * gamma;
  const double threshold = 1.0 / (2.0 - delta);
  if (g2 < threshold * (1.0 - 1e-12))
    throw RegimeError("gamma^2 < 1/(2-delta): transition is first order, use first_order_boundary");
  return 1.0 / std::abs(gamma);
}

double first_order_boundary(double gamma, double delta, Branch branch,
                            const FirstOrderOptions& options) {
  if (!(delta < 2.0)) throw DomainError("first_order_boundary requires delta < 2");
  if (gamma * gamma > (1.0 / (2.0 - delta)) * (1.0 + 1e-12))
    throw RegimeError("gamma^2 > 1/(2-delta): transition is second order, use second_order_boundary");

  const double sign = branch == Branch::SRA ? 1.0 : -1.0;
  auto superradiant = [&](double lambda) {
    const auto p = ModelParams::from_lambdas(0.5 * lambda, sign * 0.5 * lambda, gamma, delta);
    const auto sol = minimize(p, options.minimize);
    return std::abs(sol.order.alpha) >= options.minimize.np_tolerance;
  };

  constexpr double kMax = 10.0;
  double lo = 1e-3;
  double hi = gamma != 0.0 ? std::min(1.0 / std::abs(gamma), kMax) : kMax;
  if (superradiant(lo)) throw SearchError("first_order_boundary: superradiant already at lambda = 1e-3");
  // at the tricritical point the spinodal itself is still normal; step past it
  double step = 1e-9;
  while (!superradiant(hi)) {
    if (hi >= kMax) throw SearchError("first_order_boundary: no transition for lambda in (0, 10]");
    lo = hi;
    hi = std::min(hi + step, kMax);
    step *= 4.0;
  }
  while (hi - lo > options.tolerance) {
    const double mid = 0.5 * (lo + hi);
    (superradiant(mid) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

TricriticalPoint tricritical_point(double delta) {
  if (!(delta < 2.0)) throw DomainError("tricritical point requires delta < 2");
  TricriticalPoint tp;
  tp.gamma = 1.0 / std::sqrt(2.0 - delta);
  tp.lambda = std::sqrt(2.0 - delta);
  tp.degenerate = delta == 1.0;
  return tp;
}

LandauCoefficients landau_coefficients(double lambda_plus, double gamma, double delta) {
  if (!(delta < 2.0)) throw DomainError("Landau expansion requires delta < 2");
  if (delta == 1.0) throw DegeneracyError("Landau expansion is degenerate at delta = 1");
  if (!(lambda_plus > 0.0)) throw DomainError("Landau expansion requires lambda_plus > 0");
  const double g2 = gamma * gamma;
  const double inv = 1.0 / (2.0 - delta);
  LandauCoefficients c;
  c.p0 = -1.0;
  c.p1 = 1.0 / (lambda_plus * lambda_plus) - g2;
  c.p2 = g2 * (g2 - inv);
  c.p3 = g2 * (-2.0 * g2 * g2 + 3.0 * g2 * inv + g2 * inv * inv - inv * inv);
  return c;
}

TridiagonalReport tridiagonal_criticality(const ModelParams& params, double tol) {
  params.validate();
  if (!(params.delta < 2.0)) throw DomainError("tridiagonal criterion requires delta < 2");
  const double lp = derive_couplings(params).lambda_plus;
  if (!(lp > 0.0)) throw DomainError("tridiagonal criterion requires lambda_plus > 0");
  // d couples neighbouring levels (1,2,3); h is the bare level energy above |3>
  const std::array<double, 3> d_sub{0.0, 1.0, params.gamma};  // d_{k,k-1}
  const std::array<double, 3> h_diag{2.0 - params.delta, 1.0, 0.0};
  const double inv = 1.0 / (lp * lp);
  TridiagonalReport r;
  r.residual_k2 = d_sub[1] * d_sub[1] - h_diag[0] * inv;
  r.residual_k3 = d_sub[2] * d_sub[2] - h_diag[1] * inv;
  r.critical_k2 = std::abs(r.residual_k2) <= tol;
  r.critical_k3 = std::abs(r.residual_k3) <= tol;
  r.degenerate = params.gamma == 0.0;
  return r;
}

}  // namespace tdm::meanfield
