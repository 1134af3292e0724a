#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "tdm/model.hpp"

namespace tdm::opensys {

using complex = std::complex<double>;

/// Mean-field state of the driven-dissipative model: photon amplitude a
/// (per sqrt(N)) and the Gell-Mann expectations Lambda_1..Lambda_8 (stored at
/// indices 0..7) per atom. With this normalization the symmetric sector has
/// A = 4/3 and B = 8/9, and level |3> alone is Lambda_8 = -2/sqrt(3).
struct BlochState {
  complex a{};
  std::array<double, 8> lambda{};

  static BlochState normal_phase(int level);  // level in {1, 2, 3}
  /// Pure atomic state with real amplitudes psi on levels 1..3 (normalized inside).
  static BlochState from_amplitudes(const Eigen::Vector3d& psi, complex a = {});

  std::array<double, 10> to_array() const;
  static BlochState from_array(const std::array<double, 10>& x);
};

/// Time derivative of every component. Requires g1 == g2 and delta == 0
/// (UnsupportedRegimeError otherwise); the common coupling g = g1.
BlochState derivative(const BlochState& state, const ModelParams& params);

/// max |d/dt component|.
double residual(const BlochState& state, const ModelParams& params);

struct CasimirValues {
  double A = 0.0;
  double B = 0.0;
};

CasimirValues casimir_invariants(const BlochState& state);

/// Totally symmetric constants d_jkl (0-based), d_jkl = tr({L_j, L_k} L_l) / 4.
const std::array<std::array<std::array<double, 8>, 8>, 8>& symmetric_constants();

/// <P11>, <P22>, <P33> from Lambda_3 and Lambda_8.
std::array<double, 3> populations(const BlochState& state);

/// Max-norm distance over all ten real components.
double distance(const BlochState& x, const BlochState& y);

struct IntegrateOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double sample_stride = 0.0;   // 0: only the final state is kept
  double initial_step = 1e-3;
  double min_step = 1e-13;      // relative to max(1, t)
  // time average of the state is accumulated for t >= average_from (if < t_max)
  double average_from = -1.0;
  // after every accepted step, restore the initial Casimir values A and B
  bool project_casimirs = true;
  // called after every accepted step; returning false stops the integration
  std::function<bool(double, const BlochState&)> observer;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<BlochState> states;
  BlochState final_state;
  double final_time = 0.0;
  double final_residual = 0.0;
  BlochState window_mean;  // time average over [average_from, final_time]
  long steps = 0;
  bool stopped_early = false;
};

/// Adaptive Dormand-Prince 5(4) integration. Throws StiffnessError when the
/// step size underflows.
Trajectory integrate(const BlochState& state0, const ModelParams& params, double t_max,
                     const IntegrateOptions& options = {});

enum class StabilityMethod { DynamicsProbe, LinearNP3, LinearNP2 };

std::string_view to_string(StabilityMethod m);

struct SteadyStateRecord {
  BlochState state;
  PhaseLabel label = PhaseLabel::Unclassified;
  bool stable = false;
  StabilityMethod method = StabilityMethod::DynamicsProbe;
  double residual = 0.0;
};

/// NP1 / NP2 / NP3 / SR per the photon amplitude and level populations.
PhaseLabel classify(const BlochState& state, double tol = 1e-7);

struct SteadyStateOptions {
  int random_seeds = 32;
  std::uint64_t seed = 0x5eedULL;
  double accept_residual = 1e-9;
  double dedup_tolerance = 1e-7;
  int max_iterations = 100;
};

/// All steady states reachable from the seed set. The atomic state is a real
/// pure state, which makes Lambda_2 = Lambda_5 = Lambda_7 = 0 and A, B exact;
/// the photon amplitude follows from da/dt = 0. Stability is not evaluated.
std::vector<SteadyStateRecord> find_steady_states(const ModelParams& params,
                                                  const SteadyStateOptions& options = {});

struct ProbeOptions {
  complex perturbation{0.1, 0.01};
  double t_max = 10000.0;
  double window = 0.05;        // fraction of the run that must stay near the record
  double tolerance = 1e-4;
  double divergence = 1e3;
  bool early_exit = true;      // stop once the outcome can no longer change
  IntegrateOptions integrate{};
};

/// True iff the perturbed record flows back to it: the state averaged over the
/// final window lies within `tolerance` of the record. Averaging removes the
/// undamped atomic oscillations that the photon loss cannot reach.
bool stability_probe(const SteadyStateRecord& record, const ModelParams& params,
                     const ProbeOptions& options = {});

enum class NormalPhase { NP2, NP3 };

/// Analytic lambda_plus at which the normal phase loses stability.
double np_boundary(double gamma, double kappa_over_omega, NormalPhase which);

struct LinearStability {
  Eigen::Matrix<double, 6, 6> matrix = Eigen::Matrix<double, 6, 6>::Zero();
  double max_real_part = 0.0;
};

/// Linearized flow about NP3 in (Re c, Im c, Re d1, Im d1, Re d2, Im d2).
LinearStability linear_stability_np3(const ModelParams& params);
/// Same about NP2, with level |2> as the reference (fluctuations toward |1> and |3>).
LinearStability linear_stability_np2(const ModelParams& params);

/// Open-system parameters with g1 = g2 = lambda_plus sqrt(omega Omega) / 2.
ModelParams open_params(double lambda_plus, double gamma, double kappa, double omega = 1.0,
                        double Omega = 1.0);

struct PhasePoint {
  double lambda_plus = 0.0;
  double gamma = 0.0;
  std::vector<PhaseLabel> stable_set;
  int n_roots = 0;
  bool resolved = true;
};

struct PhaseDiagramOptions {
  SteadyStateOptions steady{};
  ProbeOptions probe{};
  int workers = 1;
};

/// Stable steady states on the grid (row-major in gamma, then lambda_plus).
std::vector<PhasePoint> phase_diagram(const std::vector<double>& lambdas,
                                      const std::vector<double>& gammas, const ModelParams& base,
                                      const PhaseDiagramOptions& options = {});

enum class HysteresisInit { NP3, NP2, SRSeed };

struct HysteresisPoint {
  double lambda_plus = 0.0;
  double p33 = 0.0;       // final state
  PhaseLabel label = PhaseLabel::Unclassified;  // nearest steady state to the window mean
  double residual = 0.0;  // max |d/dt| at the final state
};

/// Steady state nearest to `state` (by the max-norm over the ten components)
/// if it lies within `tolerance`; Unclassified otherwise.
PhaseLabel identify_attractor(const BlochState& state, const ModelParams& params,
                              double tolerance = 1e-3);

struct HysteresisOptions {
  complex perturbation{0.1, 0.01};
  double t_max = 10000.0;
  double window = 0.05;
  double match_tolerance = 1e-3;  // window mean to nearest steady state, for the label
  IntegrateOptions integrate{};
  int workers = 1;
};

std::vector<HysteresisPoint> hysteresis_scan(double gamma, const std::vector<double>& lambdas,
                                             const ModelParams& base, HysteresisInit init,
                                             const HysteresisOptions& options = {});

}  // namespace tdm::opensys
