#pragma once

#include <array>
#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "tdm/meanfield.hpp"
#include "tdm/model.hpp"

namespace tdm::fluctuations {

using complex = std::complex<double>;
using Matrix6c = Eigen::Matrix<complex, 6, 6>;
using Vector6c = Eigen::Matrix<complex, 6, 1>;

/// Quadratic fluctuation Hamiltonian H2 = sum_jk C_jk v_j v_k over
/// v = (c^+, d1^+, d2^+, c, d1, d2) (indices 0-based here).
struct QuadraticForm {
  Matrix6c c_matrix = Matrix6c::Zero();

  /// The matrix M with H2 = v M v^+, i.e. M_ij = C_{i, j+3 mod 6}.
  Matrix6c bosonic_matrix() const;
};

/// Result of the symplectic (Bogoliubov) diagonalization.
///
/// `energies` are the excitation energies of H2 = sum_j eps_j a_j^+ a_j,
/// ascending; they equal twice the positive eigenvalues of Gamma*M. Only the
/// lowest branch carries physical meaning; the other two are reported as
/// computed.
struct ExcitationSpectrum {
  std::array<double, 3> energies{};
  Matrix6c transform = Matrix6c::Zero();
  Eigen::Matrix<complex, 6, 1> gm_eigenvalues = Eigen::Matrix<complex, 6, 1>::Zero();
  double gap = 0.0;
  bool stable = false;
  int zero_modes = 0;
  // true when every column of `transform` is symplectically normalized
  bool symplectic = false;
};

QuadraticForm build_quadratic(const ModelParams& params, const meanfield::OrderParameters& order);
QuadraticForm build_quadratic(const ModelParams& params, const meanfield::MeanFieldSolution& solution);

ExcitationSpectrum symplectic_diagonalize(const QuadraticForm& form);

/// max |T^+ Gamma T - Gamma|.
double symplectic_defect(const Matrix6c& transform);
/// Largest distance from any eigenvalue of Gamma*M to the negative of its nearest partner.
double pairing_defect(const Eigen::Matrix<complex, 6, 1>& eigenvalues);

/// Energy gap at the global mean-field minimum.
double energy_gap(const ModelParams& params, const meanfield::MinimizeOptions& options = {});

enum class ScalingQuantity { GapBelow, GapAbove, AlphaAbove };

/// A point in the (delta, lambda1, lambda2, gamma) control space.
using ControlPoint = std::array<double, 4>;

ControlPoint control_point(const ModelParams& params);

/// Unit normal of the continuous NP boundary gamma * lambda_eff = 1 at the
/// given point, pointing into the superradiant side. lambda_eff is the larger
/// of lambda_plus and lambda_minus.
ControlPoint boundary_normal(const ModelParams& params_c);

struct ScalingOptions {
  double d_min = 1e-6;
  double d_max = 1e-4;
  int points = 12;
  double r2_threshold = 0.999;
  double zero_threshold = 1e-14;
  meanfield::MinimizeOptions minimize{};
};

struct ScalingResult {
  std::optional<double> exponent;  // empty on an identically-zero branch
  double r_squared = 0.0;
  bool poor_fit = false;           // R^2 below the threshold
  bool zero_branch = false;
  std::vector<double> distances;
  std::vector<double> values;
};

/// Log-log slope of the requested quantity against the distance d from a
/// critical point along `direction`. Gap-below probes params_c - d*direction,
/// the other quantities probe params_c + d*direction.
ScalingResult scaling_exponent(const ModelParams& params_c, const ControlPoint& direction,
                               ScalingQuantity quantity, const ScalingOptions& options = {});

}  // namespace tdm::fluctuations
