#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace tdm {

/// Physical parameters of the three-level cavity model.
///
/// Energies are in units of the photon frequency unless the caller chooses
/// otherwise. `delta` and `gamma` are dimensionless: `delta` shifts the
/// energy of level |1>, `gamma` scales the |2>-|3> coupling relative to the
/// |1>-|2> coupling. `g1` multiplies the co-rotating terms, `g2` the
/// counter-rotating ones. `kappa` is the photon loss rate (zero for the
/// closed system) and `n_atoms` is only read by the finite-N solver.
struct ModelParams {
  double omega = 1.0;
  double Omega = 1.0;
  double delta = 0.0;
  double gamma = 0.0;
  double g1 = 0.0;
  double g2 = 0.0;
  double kappa = 0.0;
  int n_atoms = 1;

  /// Throws DomainError unless omega > 0, Omega > 0, kappa >= 0, n_atoms >= 1.
  void validate() const;

  /// Couplings from dimensionless lambda1, lambda2 (g_i = lambda_i sqrt(omega Omega)).
  static ModelParams from_lambdas(double lambda1, double lambda2, double gamma,
                                  double delta = 0.0, double omega = 1.0,
                                  double Omega = 1.0, double kappa = 0.0);
};

struct DimensionlessCouplings {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double lambda_plus = 0.0;   // |lambda1 + lambda2|
  double lambda_minus = 0.0;  // |lambda1 - lambda2|
};

DimensionlessCouplings derive_couplings(const ModelParams& params);

/// Closed-system ground-state phases, open-system steady-state phases, and
/// a marker for results that could not be assigned without ambiguity.
enum class PhaseLabel {
  NP,
  SRA,
  SRB,
  TC_SR,
  NP1,
  NP2,
  NP3,
  SR,
  Unclassified,
};

std::string_view to_string(PhaseLabel label);
std::optional<PhaseLabel> phase_label_from_string(std::string_view name);

}  // namespace tdm
