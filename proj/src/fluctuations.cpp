#include "tdm/fluctuations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "tdm/errors.hpp"

namespace tdm::fluctuations {

namespace {

constexpr int sigma(int j) { return (j + 3) % 6; }

Eigen::Matrix<double, 6, 1> gamma_diag() {
  Eigen::Matrix<double, 6, 1> g;
  g << 1, 1, 1, -1, -1, -1;
  return g;
}

complex gamma_product(const Vector6c& x, const Vector6c& y) {
  const auto g = gamma_diag();
  complex s = 0.0;
  for (int i = 0; i < 6; ++i) s += std::conj(x[i]) * g[i] * y[i];
  return s;
}

// (u, v) -> (v*, u*): the column paired with x in a symplectic transform.
Vector6c partner(const Vector6c& x) {
  Vector6c y;
  for (int i = 0; i < 3; ++i) {
    y[i] = std::conj(x[i + 3]);
    y[i + 3] = std::conj(x[i]);
  }
  return y;
}

void fix_phase(Vector6c& x) {
  Eigen::Index k = 0;
  x.cwiseAbs().maxCoeff(&k);
  if (std::abs(x[k]) > 0.0) x *= std::conj(x[k]) / std::abs(x[k]);
  x[k] = std::abs(x[k]);
}

}  // namespace

Matrix6c QuadraticForm::bosonic_matrix() const {
  Matrix6c m;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) m(i, j) = c_matrix(i, sigma(j));
  return m;
}

QuadraticForm build_quadratic(const ModelParams& p, const meanfield::OrderParameters& order) {
  const double B = order.beta();
  if (B <= 1e-9) throw SingularityError("build_quadratic: reference amplitude beta vanishes");

  const complex a = order.alpha, ac = std::conj(a);
  const complex b1 = order.beta1, b1c = std::conj(b1);
  const complex b2 = order.beta2, b2c = std::conj(b2);
  const double g1 = p.g1, g2 = p.g2, gm = p.gamma;
  const double B3 = B * B * B;
  const complex X = a * b2c + ac * b2;
  const complex Y = a * b2 + ac * b2c;
  const complex gXY = g1 * X + g2 * Y;
  const double n1 = std::norm(b1), n2 = std::norm(b2);

  // 1-based entries, filled by symmetry below
  Matrix6c C = Matrix6c::Zero();
  auto set = [&C](int j, int k, complex v) { C(j - 1, k - 1) = v; };
  set(1, 1, 0.0);
  set(1, 4, 0.5 * p.omega);
  set(2, 2, -gm * b1 * b1 / (8.0 * B3) * gXY);
  set(2, 5, 0.5 * ((2.0 - p.delta) * p.Omega - g1 * gm / (2.0 * B) * (1.0 + n1 / (2.0 * B * B)) * X) -
                g2 * gm / (4.0 * B) * (1.0 + n1 / (2.0 * B * B)) * Y);
  set(3, 3, -gm * b2 * b2 / (8.0 * B3) * gXY - gm / (2.0 * B) * (g1 * a * b2 + g2 * ac * b2));
  set(3, 6, 0.5 * (p.Omega - g1 * gm / (2.0 * B) * (2.0 + n2 / (2.0 * B * B)) * X) -
                g2 * gm / (4.0 * B) * (2.0 + n2 / (2.0 * B * B)) * Y);
  set(1, 2, 0.5 * g2 * b2 - gm / (4.0 * B) * (g1 * b2 * b1 + g2 * b2c * b1));
  set(1, 5, 0.5 * g1 * b2c - gm / (4.0 * B) * (g1 * b2 * b1c + g2 * b2c * b1c));
  set(1, 3, 0.5 * (g1 * b1 - g1 * gm * b2 * b2 / (2.0 * B)) +
                0.5 * (g2 * gm * B - g2 * gm * n2 / (2.0 * B)));
  set(1, 6, 0.5 * (g1 * gm * B - g1 * gm * n2 / (2.0 * B)) +
                0.5 * (g2 * b1c - g2 * gm * b2c * b2c / (2.0 * B)));
  set(2, 3, -g1 * gm * a * b1 / (4.0 * B) - g2 * gm * ac * b1 / (4.0 * B) -
                g1 * gm * b2 * b1 / (8.0 * B3) * X - g2 * gm * b2 * b1 / (8.0 * B3) * Y);
  set(2, 6, 0.5 * (g1 * a + g2 * ac) - g1 * gm * ac * b1 / (4.0 * B) - g2 * gm * a * b1 / (4.0 * B) -
                g1 * gm * b1 * b2c / (8.0 * B3) * X - g2 * gm * b1 * b2c / (8.0 * B3) * Y);

  // The diagonal blocks of the two real-coefficient pairs are real.
  C(1, 4) = C(1, 4).real();
  C(2, 5) = C(2, 5).real();

  const std::array<std::pair<int, int>, 12> given{{{0, 0}, {0, 3}, {1, 1}, {1, 4}, {2, 2}, {2, 5},
                                                   {0, 1}, {0, 4}, {0, 2}, {0, 5}, {1, 2}, {1, 5}}};
  for (const auto& [j, k] : given) {
    const complex v = C(j, k);
    C(k, j) = v;
    C(sigma(j), sigma(k)) = std::conj(v);
    C(sigma(k), sigma(j)) = std::conj(v);
  }
  return QuadraticForm{C};
}

QuadraticForm build_quadratic(const ModelParams& params, const meanfield::MeanFieldSolution& solution) {
  return build_quadratic(params, solution.order);
}

double symplectic_defect(const Matrix6c& t) {
  const Matrix6c g = gamma_diag().cast<complex>().asDiagonal();
  return (t.adjoint() * g * t - g).cwiseAbs().maxCoeff();
}

double pairing_defect(const Eigen::Matrix<complex, 6, 1>& ev) {
  double worst = 0.0;
  for (int i = 0; i < 6; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < 6; ++j)
      if (j != i) best = std::min(best, std::abs(ev[i] + ev[j]));
    // a zero eigenvalue may be its own partner
    best = std::min(best, 2.0 * std::abs(ev[i]));
    worst = std::max(worst, best);
  }
  return worst;
}

ExcitationSpectrum symplectic_diagonalize(const QuadraticForm& form) {
  const Matrix6c m_raw = form.bosonic_matrix();
  const Matrix6c m = 0.5 * (m_raw + m_raw.adjoint());
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const auto g = gamma_diag();
  const Matrix6c gm = g.cast<complex>().asDiagonal() * m;

  ExcitationSpectrum out;
  Eigen::ComplexEigenSolver<Matrix6c> ces(gm, true);
  if (ces.info() != Eigen::Success) throw DiagonalizationError("eigen-decomposition of Gamma*M failed");
  out.gm_eigenvalues = ces.eigenvalues();

  // Zero modes: null directions of the Hermitian M. Their Gamma*M eigenvalues
  // form Jordan blocks split by ~sqrt(rounding), so they are counted here and
  // set to exactly zero rather than thresholded on Gamma*M.
  Eigen::SelfAdjointEigenSolver<Matrix6c> herm(m);
  std::vector<int> null_idx;
  for (int i = 0; i < 6; ++i)
    if (std::abs(herm.eigenvalues()[i]) < 1e-10 * scale) null_idx.push_back(i);

  std::vector<int> order(6);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    return std::abs(out.gm_eigenvalues[x]) < std::abs(out.gm_eigenvalues[y]);
  });
  int modes = 0;
  if (!null_idx.empty()) {
    int small = 0;
    for (int i = 0; i < 6; ++i)
      if (std::abs(out.gm_eigenvalues[i]) < 1e-5 * scale) ++small;
    modes = std::max<int>((small + 1) / 2, (static_cast<int>(null_idx.size()) + 1) / 2);
    modes = std::min(modes, 3);
  }
  out.zero_modes = modes;
  std::vector<int> rest(order.begin() + 2 * modes, order.end());

  bool complex_pair = false;
  for (int i : rest)
    if (std::abs(out.gm_eigenvalues[i].imag()) > 1e-9 * scale) complex_pair = true;

  if (complex_pair) {
    // Dynamically unstable: no symplectic transform exists.
    std::vector<double> re;
    for (int i : rest) re.push_back(out.gm_eigenvalues[i].real());
    std::sort(re.rbegin(), re.rend());
    std::vector<double> e(modes, 0.0);
    for (int i = 0; i < 3 - modes; ++i) e.push_back(2.0 * re[i]);
    std::sort(e.begin(), e.end());
    std::copy(e.begin(), e.end(), out.energies.begin());
    out.gap = out.energies[0];
    out.stable = false;
    out.symplectic = false;
    return out;
  }

  struct Branch {
    double value;
    Vector6c vec;
  };
  std::vector<Branch> positive;
  for (int i : rest) {
    Vector6c x = ces.eigenvectors().col(i);
    x /= x.norm();
    const double n = gamma_product(x, x).real();
    if (std::abs(n) < 1e-12) throw DiagonalizationError("Gamma*M is defective: null symplectic norm");
    if (n > 0) positive.push_back({out.gm_eigenvalues[i].real(), x});
  }
  if (static_cast<int>(positive.size()) != 3 - modes)
    throw DiagonalizationError("Gamma*M eigenvectors do not split into paired branches");
  std::sort(positive.begin(), positive.end(),
            [](const Branch& x, const Branch& y) { return x.value < y.value; });

  // Gamma-orthonormalize, including within degenerate clusters.
  for (std::size_t i = 0; i < positive.size(); ++i) {
    Vector6c& v = positive[i].vec;
    for (std::size_t j = 0; j < i; ++j) {
      if (std::abs(positive[j].value - positive[i].value) > 1e-8 * scale) continue;
      v -= gamma_product(positive[j].vec, v) * positive[j].vec;
    }
    const double n = gamma_product(v, v).real();
    if (n <= 1e-12 * v.squaredNorm())
      throw DiagonalizationError("degenerate cluster is not symplectically orthogonalizable");
    v /= std::sqrt(n);
    fix_phase(v);
  }

  int col = 0;
  for (int k = 0; k < modes; ++k) {
    Vector6c z = Vector6c::Zero();
    if (k < static_cast<int>(null_idx.size())) z = herm.eigenvectors().col(null_idx[k]);
    if (z.norm() > 0) z /= z.norm();
    fix_phase(z);
    out.transform.col(col) = z;
    out.transform.col(col + 3) = partner(z);
    out.energies[col] = 0.0;
    ++col;
  }
  bool negative = false;
  for (const auto& b : positive) {
    out.transform.col(col) = b.vec;
    out.transform.col(col + 3) = partner(b.vec);
    out.energies[col] = 2.0 * b.value;
    if (b.value < -1e-9 * scale) negative = true;
    ++col;
  }
  out.gap = *std::min_element(out.energies.begin(), out.energies.end());
  out.stable = !negative;
  out.symplectic = modes == 0;
  return out;
}

double energy_gap(const ModelParams& params, const meanfield::MinimizeOptions& options) {
  const auto sol = meanfield::minimize(params, options);
  return symplectic_diagonalize(build_quadratic(params, sol)).gap;
}

ControlPoint control_point(const ModelParams& p) {
  const auto c = derive_couplings(p);
  return {p.delta, c.lambda1, c.lambda2, p.gamma};
}

ControlPoint boundary_normal(const ModelParams& params_c) {
  const auto c = derive_couplings(params_c);
  const double l1 = c.lambda1, l2 = c.lambda2;
  const double leff = std::max(c.lambda_plus, c.lambda_minus);
  double d1 = 0.0, d2 = 0.0;
  const double tie = 1e-12 * std::max(1.0, leff);
  if (std::abs(c.lambda_plus - c.lambda_minus) <= tie) {
    // One coupling vanishes: lambda_eff is not differentiable across it.
    if (std::abs(l1) >= std::abs(l2)) d1 = l1 >= 0 ? 1.0 : -1.0;
    else d2 = l2 >= 0 ? 1.0 : -1.0;
  } else if (c.lambda_plus > c.lambda_minus) {
    d1 = d2 = (l1 + l2) >= 0 ? 1.0 : -1.0;
  } else {
    d1 = (l1 - l2) >= 0 ? 1.0 : -1.0;
    d2 = -d1;
  }
  ControlPoint n{0.0, params_c.gamma * d1, params_c.gamma * d2, leff};
  const double norm = std::sqrt(n[1] * n[1] + n[2] * n[2] + n[3] * n[3]);
  if (!(norm > 0)) throw DomainError("boundary_normal: degenerate boundary point");
  for (double& x : n) x /= norm;
  return n;
}

ScalingResult scaling_exponent(const ModelParams& params_c, const ControlPoint& direction,
                               ScalingQuantity quantity, const ScalingOptions& options) {
  params_c.validate();
  const auto c = derive_couplings(params_c);
  const double leff = std::max(c.lambda_plus, c.lambda_minus);
  if (std::abs(params_c.gamma * leff - 1.0) > 1e-9)
    throw DomainError("scaling_exponent: point is not on the continuous NP boundary");
  if (params_c.delta < 2.0 &&
      params_c.gamma * params_c.gamma * (2.0 - params_c.delta) < 1.0 - 1e-9)
    throw DomainError("scaling_exponent: point lies on the first-order part of the boundary");
  double nn = 0.0;
  for (double x : direction) nn += x * x;
  if (std::abs(std::sqrt(nn) - 1.0) > 1e-9)
    throw DomainError("scaling_exponent: direction must be normalized");
  const auto normal = boundary_normal(params_c);
  double cosang = 0.0;
  for (int i = 0; i < 4; ++i) cosang += normal[i] * direction[i];
  if (cosang < 1.0 - 1e-8)
    throw DomainError("scaling_exponent: direction must be the boundary normal into the superradiant side");
  if (options.points < 3 || !(options.d_min > 0) || !(options.d_max > options.d_min))
    throw DomainError("scaling_exponent: invalid distance grid");

  const auto p0 = control_point(params_c);
  const double sign = quantity == ScalingQuantity::GapBelow ? -1.0 : 1.0;
  ScalingResult res;
  for (int k = 0; k < options.points; ++k) {
    const double d = options.d_min *
                     std::pow(options.d_max / options.d_min, double(k) / (options.points - 1));
    ControlPoint q;
    for (int i = 0; i < 4; ++i) q[i] = p0[i] + sign * d * direction[i];
    const auto p = ModelParams::from_lambdas(q[1], q[2], q[3], q[0], params_c.omega,
                                             params_c.Omega, params_c.kappa);
    const auto sol = meanfield::minimize(p, options.minimize);
    double value = 0.0;
    if (quantity == ScalingQuantity::AlphaAbove) value = std::abs(sol.order.alpha);
    else value = symplectic_diagonalize(build_quadratic(p, sol)).gap;
    res.distances.push_back(d);
    res.values.push_back(value);
  }

  const bool any_zero = std::any_of(res.values.begin(), res.values.end(),
                                    [&](double v) { return v < options.zero_threshold; });
  if (any_zero) {
    res.zero_branch = true;
    return res;
  }
  const int n = options.points;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (int k = 0; k < n; ++k) {
    const double x = std::log(res.distances[k]), y = std::log(res.values[k]);
    sx += x; sy += y; sxx += x * x; sxy += x * y; syy += y * y;
  }
  const double cov = sxy - sx * sy / n, vx = sxx - sx * sx / n, vy = syy - sy * sy / n;
  const double slope = cov / vx;
  res.exponent = slope;
  res.r_squared = vy > 0 ? cov * cov / (vx * vy) : 1.0;
  res.poor_fit = res.r_squared < options.r2_threshold;
  return res;
}

}  // namespace tdm::fluctuations
