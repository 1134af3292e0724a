#include "tdm/model.hpp"

#include <array>
#include <cmath>
#include <utility>

#include "tdm/errors.hpp"

namespace tdm {

void ModelParams::validate() const {
  if (!(omega > 0.0)) throw DomainError("photon frequency omega must be positive");
  if (!(Omega > 0.0)) throw DomainError("atomic splitting Omega must be positive");
  if (!(kappa >= 0.0)) throw DomainError("photon loss rate kappa must be non-negative");
  if (n_atoms < 1) throw DomainError("atom number must be at least 1");
  if (!std::isfinite(delta) || !std::isfinite(gamma) || !std::isfinite(g1) ||
      !std::isfinite(g2))
    throw DomainError("model parameters must be finite");
}

ModelParams ModelParams::from_lambdas(double lambda1, double lambda2, double gamma,
                                      double delta, double omega, double Omega,
                                      double kappa) {
  ModelParams p;
  p.omega = omega;
  p.Omega = Omega;
  p.delta = delta;
  p.gamma = gamma;
  p.kappa = kappa;
  const double scale = std::sqrt(omega * Omega);
  p.g1 = lambda1 * scale;
  p.g2 = lambda2 * scale;
  return p;
}

DimensionlessCouplings derive_couplings(const ModelParams& params) {
  if (!(params.omega > 0.0) || !(params.Omega > 0.0))
    throw DomainError("derive_couplings: omega and Omega must be positive");
  const double scale = std::sqrt(params.omega * params.Omega);
  DimensionlessCouplings c;
  c.lambda1 = params.g1 / scale;
  c.lambda2 = params.g2 / scale;
  c.lambda_plus = std::abs(c.lambda1 + c.lambda2);
  c.lambda_minus = std::abs(c.lambda1 - c.lambda2);
  return c;
}

namespace {
constexpr std::array<std::pair<PhaseLabel, std::string_view>, 9> kLabelNames{{
    {PhaseLabel::NP, "NP"},
    {PhaseLabel::SRA, "SRA"},
    {PhaseLabel::SRB, "SRB"},
    {PhaseLabel::TC_SR, "TC_SR"},
    {PhaseLabel::NP1, "NP1"},
    {PhaseLabel::NP2, "NP2"},
    {PhaseLabel::NP3, "NP3"},
    {PhaseLabel::SR, "SR"},
    {PhaseLabel::Unclassified, "unclassified"},
}};
}  // namespace

std::string_view to_string(PhaseLabel label) {
  for (const auto& [l, name] : kLabelNames)
    if (l == label) return name;
  return "unclassified";
}

std::optional<PhaseLabel> phase_label_from_string(std::string_view name) {
  for (const auto& [l, n] : kLabelNames)
    if (n == name) return l;
  return std::nullopt;
}

}  // namespace tdm
