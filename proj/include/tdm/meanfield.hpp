#pragma once

#include <complex>
#include <cstdint>

#include <Eigen/Core>

#include "tdm/errors.hpp"
#include "tdm/model.hpp"

namespace tdm::meanfield {

using complex = std::complex<double>;
using Vector6 = Eigen::Matrix<double, 6, 1>;

/// Photon amplitude alpha and the two bosonic atomic amplitudes beta1, beta2,
/// all per sqrt(N). The reference level |3> carries the real amplitude
/// beta = sqrt(1 - |beta1|^2 - |beta2|^2).
struct OrderParameters {
  complex alpha{};
  complex beta1{};
  complex beta2{};

  double excitation() const { return std::norm(beta1) + std::norm(beta2); }
  /// Throws DomainError when |beta1|^2 + |beta2|^2 > 1.
  double beta() const;
};

struct MeanFieldSolution {
  OrderParameters order;
  double energy = 0.0;
  PhaseLabel label = PhaseLabel::Unclassified;
  bool converged = false;
  double gradient_norm = 0.0;
};

class OptimizationFailure : public Error {
 public:
  OptimizationFailure(const std::string& what, MeanFieldSolution best)
      : Error(what), best_(best) {}
  const MeanFieldSolution& best() const noexcept { return best_; }

 private:
  MeanFieldSolution best_;
};

class DegeneracyError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Thermodynamic-limit energy per atom, including the constant -Omega.
double energy(const ModelParams& params, const OrderParameters& order);

/// dH0/d(Re alpha, Im alpha, Re beta1, Im beta1, Re beta2, Im beta2).
/// Throws SingularityError when beta = 0.
Vector6 gradient(const ModelParams& params, const OrderParameters& order);

struct MinimizeOptions {
  int n_starts = 32;  // values below 32 are raised to 32
  std::uint64_t seed = 0x7d1c3a5bULL;
  double gradient_tolerance = 1e-10;
  double np_tolerance = 1e-6;
};

/// Global minimum of the energy over the six real order-parameter components
/// by multi-start quasi-Newton descent followed by Newton polishing. The
/// returned order parameters are the canonical representative of the
/// symmetry-degenerate family: Re alpha >= 0, and alpha real positive on the
/// Tavis-Cummings lines (g1 = 0 or g2 = 0).
MeanFieldSolution minimize(const ModelParams& params, const MinimizeOptions& options = {});

/// NP / SRA / SRB / TC_SR, or Unclassified if alpha sits inside the tolerance
/// band of two labels.
PhaseLabel classify(const MeanFieldSolution& solution, const ModelParams& params,
                    double tol = 1e-6);

enum class Branch { SRA, SRB };

/// lambda_c = 1/gamma on the continuous part of the NP boundary (lambda_plus
/// for SRA, lambda_minus for SRB). Throws RegimeError in the first-order regime.
double second_order_boundary(double gamma, double delta, Branch branch);

struct FirstOrderOptions {
  double tolerance = 1e-8;
  MinimizeOptions minimize{};
};

/// Coupling where the global minimum switches from NP to a superradiant
/// state, found by bisection on minimize(). Applies for gamma^2 <= 1/(2-delta).
double first_order_boundary(double gamma, double delta, Branch branch,
                            const FirstOrderOptions& options = {});

struct TricriticalPoint {
  double gamma = 0.0;
  double lambda = 0.0;
  bool degenerate = false;  // delta == 1: perturbative derivation breaks down
};

TricriticalPoint tricritical_point(double delta);

struct LandauCoefficients {
  double p0 = -1.0;
  double p1 = 0.0;
  double p2 = 0.0;
  double p3 = 0.0;
};

LandauCoefficients landau_coefficients(double lambda_plus, double gamma, double delta);

struct TridiagonalReport {
  bool critical_k2 = false;  // lambda_plus^2 = 2 - delta
  bool critical_k3 = false;  // gamma^2 = 1 / lambda_plus^2
  bool degenerate = false;   // gamma == 0: lower transition decoupled
  double residual_k2 = 0.0;
  double residual_k3 = 0.0;

  bool subcritical() const { return !critical_k2 && !critical_k3; }
};

TridiagonalReport tridiagonal_criticality(const ModelParams& params, double tol = 1e-12);

/// Canonical member of the Z2 / U(1) orbit (see minimize()).
OrderParameters canonicalize(const ModelParams& params, const OrderParameters& order);

}  // namespace tdm::meanfield
