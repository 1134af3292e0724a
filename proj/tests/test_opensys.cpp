#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tdm/errors.hpp"
#include "tdm/opensys.hpp"

using namespace tdm;
using namespace tdm::opensys;

namespace {

const double kSqrt2 = std::sqrt(2.0);

bool has_label(const std::vector<SteadyStateRecord>& v, PhaseLabel l) {
  return std::any_of(v.begin(), v.end(), [&](const auto& r) { return r.label == l; });
}

const SteadyStateRecord& record(const std::vector<SteadyStateRecord>& v, PhaseLabel l) {
  for (const auto& r : v)
    if (r.label == l) return r;
  throw std::runtime_error("missing steady state");
}

BlochState random_state(std::mt19937_64& rng, bool pure) {
  std::normal_distribution<double> n(0.0, 1.0);
  if (pure) {
    Eigen::Vector3d psi(n(rng), n(rng), n(rng));
    return BlochState::from_amplitudes(psi, {0.3 * n(rng), 0.3 * n(rng)});
  }
  BlochState s;
  s.a = {0.3 * n(rng), 0.3 * n(rng)};
  for (auto& x : s.lambda) x = 0.3 * n(rng);
  return s;
}

}  // namespace

TEST_CASE("Casimir values") {
  const auto np3 = BlochState::normal_phase(3);
  const auto c = casimir_invariants(np3);
  CHECK(c.A == doctest::Approx(4.0 / 3.0));
  CHECK(c.B == doctest::Approx(8.0 / 9.0));
  CHECK(casimir_invariants(BlochState{}).A == 0.0);
  CHECK(casimir_invariants(BlochState{}).B == 0.0);
  for (int level : {1, 2}) {
    CHECK(casimir_invariants(BlochState::normal_phase(level)).A == doctest::Approx(4.0 / 3.0));
    CHECK(casimir_invariants(BlochState::normal_phase(level)).B == doctest::Approx(8.0 / 9.0));
  }
}

TEST_CASE("symmetric constants from the Gell-Mann matrices") {
  const auto l = oracle::gell_mann();
  const auto& d = symmetric_constants();
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      for (int k = 0; k < 8; ++k) {
        const double ref = 0.25 * ((l[i] * l[j] + l[j] * l[i]) * l[k]).trace().real();
        CHECK(d[i][j][k] == doctest::Approx(ref).epsilon(1e-14).scale(1.0));
      }
  CHECK(d[0][0][7] == doctest::Approx(1.0 / std::sqrt(3.0)));
}

TEST_CASE("populations") {
  const auto p = populations(BlochState::normal_phase(2));
  CHECK(p[0] == doctest::Approx(0.0).scale(1.0));
  CHECK(p[1] == doctest::Approx(1.0));
  CHECK(p[2] == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("equations of motion agree with the density-matrix flow") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.2, 1.5);
  for (int k = 0; k < 20; ++k) {
    const auto p = open_params(2.0 * u(rng), u(rng), 0.3 * u(rng), u(rng), u(rng));
    const auto s = random_state(rng, k % 2 == 0);
    const auto d = derivative(s, p);
    const auto ref = oracle::mean_field_flow(p, s.a, s.lambda);
    CHECK(std::abs(d.a - ref.da) < 1e-12);
    for (int j = 0; j < 8; ++j) CHECK(d.lambda[j] == doctest::Approx(ref.dlambda[j]).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("normal phases are fixed points; Casimirs are conserved by the flow") {
  const auto p = open_params(1.3, 0.8, 0.1);
  for (int level : {1, 2, 3}) CHECK(residual(BlochState::normal_phase(level), p) == 0.0);

  std::mt19937_64 rng(37);
  for (int k = 0; k < 10; ++k) {
    const auto s = random_state(rng, false);
    const auto d = derivative(s, p);
    // dA/dt = 2 sum L_j dL_j, dB/dt = 3 sum d_jkl dL_j L_k L_l
    const auto& dc = symmetric_constants();
    double da = 0.0, db = 0.0;
    for (int i = 0; i < 8; ++i) {
      da += 2 * s.lambda[i] * d.lambda[i];
      for (int j = 0; j < 8; ++j)
        for (int l = 0; l < 8; ++l) db += 3 * dc[i][j][l] * d.lambda[i] * s.lambda[j] * s.lambda[l];
    }
    CHECK(std::abs(da) < 1e-12);
    CHECK(std::abs(db) < 1e-12);
  }
}

TEST_CASE("unsupported regimes") {
  auto p = open_params(1.3, 0.8, 0.1);
  p.g2 = 0.5 * p.g1;
  CHECK_THROWS_AS(derivative(BlochState::normal_phase(3), p), UnsupportedRegimeError);
  p = open_params(1.3, 0.8, 0.1);
  p.delta = 0.2;
  CHECK_THROWS_AS(derivative(BlochState::normal_phase(3), p), UnsupportedRegimeError);
}

TEST_CASE("integration samples, conservation and final residual") {
  const auto p = open_params(kSqrt2, 0.8, 0.1);
  auto s = BlochState::normal_phase(3);
  s.a += complex(0.1, 0.01);
  IntegrateOptions o;
  o.sample_stride = 10.0;
  const auto tr = integrate(s, p, 200.0, o);
  REQUIRE(tr.times.size() == 21);
  CHECK(tr.times.back() == doctest::Approx(200.0));
  CHECK(tr.final_time == doctest::Approx(200.0));
  const auto c0 = casimir_invariants(s), c1 = casimir_invariants(tr.final_state);
  CHECK(std::abs(c1.A - c0.A) < 1e-8);
  CHECK(std::abs(c1.B - c0.B) < 1e-8);
  CHECK(tr.final_residual == doctest::Approx(residual(tr.final_state, p)));
}

TEST_CASE("steady states") {
  const auto p = open_params(kSqrt2, 0.8, 0.1);
  const auto roots = find_steady_states(p);
  for (auto l : {PhaseLabel::NP1, PhaseLabel::NP2, PhaseLabel::NP3, PhaseLabel::SR}) CHECK(has_label(roots, l));
  for (const auto& r : roots) {
    CHECK(r.residual < 1e-9);
    CHECK(casimir_invariants(r.state).A == doctest::Approx(4.0 / 3.0));
    CHECK(casimir_invariants(r.state).B == doctest::Approx(8.0 / 9.0));
    CHECK(r.state.lambda[1] == 0.0);
    CHECK(r.state.lambda[4] == 0.0);
    CHECK(r.state.lambda[6] == 0.0);
  }
  const auto weak = find_steady_states(open_params(0.3, 0.8, 0.1));
  CHECK_FALSE(has_label(weak, PhaseLabel::SR));
  for (auto l : {PhaseLabel::NP1, PhaseLabel::NP2, PhaseLabel::NP3}) CHECK(has_label(weak, l));
}

TEST_CASE("classification") {
  CHECK(classify(BlochState::normal_phase(1)) == PhaseLabel::NP1);
  CHECK(classify(BlochState::normal_phase(3)) == PhaseLabel::NP3);
  auto s = BlochState::normal_phase(3);
  s.a = 0.2;
  CHECK(classify(s) == PhaseLabel::SR);
}

TEST_CASE("dynamical stability probe") {
  const auto weak = open_params(0.6 * kSqrt2, 0.8, 0.1);
  CHECK(stability_probe(record(find_steady_states(weak), PhaseLabel::NP3), weak));

  const auto strong = open_params(kSqrt2, 0.8, 0.1);
  const auto roots = find_steady_states(strong);
  CHECK_FALSE(stability_probe(record(roots, PhaseLabel::NP3), strong));
  CHECK_FALSE(stability_probe(record(roots, PhaseLabel::NP1), strong));
  CHECK(stability_probe(record(roots, PhaseLabel::NP2), strong));
  CHECK(stability_probe(record(roots, PhaseLabel::SR), strong));
}

TEST_CASE("analytic normal-phase boundaries") {
  CHECK(np_boundary(0.8, 0.1, NormalPhase::NP3) == doctest::Approx(std::sqrt(1.01) / 0.8));
  CHECK(np_boundary(0.8, 0.1, NormalPhase::NP2) == doctest::Approx(std::sqrt(1.01) / 0.6));
  CHECK(np_boundary(0.8, 0.0, NormalPhase::NP3) == 1.25);
  CHECK_THROWS_AS(np_boundary(0.0, 0.1, NormalPhase::NP3), DomainError);
  CHECK_THROWS_AS(np_boundary(1.2, 0.1, NormalPhase::NP2), DomainError);
}

TEST_CASE("linearized normal phases change stability at the analytic boundary") {
  for (double gamma : {0.5, 0.8}) {
    for (auto which : {NormalPhase::NP3, NormalPhase::NP2}) {
      const double lc = np_boundary(gamma, 0.1, which);
      auto lin = [&](double lp) {
        const auto p = open_params(lp, gamma, 0.1);
        return (which == NormalPhase::NP3 ? linear_stability_np3(p) : linear_stability_np2(p)).max_real_part;
      };
      CHECK(lin(0.99 * lc) <= 1e-12);
      CHECK(lin(1.01 * lc) > 1e-6);
    }
  }
}

TEST_CASE("attractor identification and hysteresis scan") {
  const auto p = open_params(kSqrt2, 0.8, 0.1);
  CHECK(identify_attractor(BlochState::normal_phase(2), p) == PhaseLabel::NP2);
  auto far = BlochState::normal_phase(3);
  far.lambda[0] = 0.3;
  CHECK(identify_attractor(far, p) == PhaseLabel::Unclassified);

  HysteresisOptions o;
  o.t_max = 2000.0;
  const auto scan = hysteresis_scan(0.6, {1.60, 1.75}, p, HysteresisInit::NP3, o);
  REQUIRE(scan.size() == 2);
  CHECK(scan[0].label == PhaseLabel::NP3);
  CHECK(scan[0].p33 > 0.999);
  CHECK(scan[1].label == PhaseLabel::SR);
  CHECK(scan[1].p33 < 0.7);
}

TEST_CASE("phase diagram ordering does not depend on the worker count") {
  PhaseDiagramOptions o;
  o.probe.t_max = 1000.0;
  const std::vector<double> lambdas{0.8, 1.6}, gammas{0.6, 1.2};
  const auto base = open_params(1.0, 1.0, 0.1);
  const auto a = phase_diagram(lambdas, gammas, base, o);
  o.workers = 3;
  const auto b = phase_diagram(lambdas, gammas, base, o);
  REQUIRE(a.size() == 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].gamma == b[i].gamma);
    CHECK(a[i].lambda_plus == b[i].lambda_plus);
    CHECK(a[i].stable_set == b[i].stable_set);
  }
  CHECK(a[0].gamma == 0.6);
  CHECK(a[1].lambda_plus == 1.6);
  // NP1 is never stable
  for (const auto& pt : a)
    CHECK(std::find(pt.stable_set.begin(), pt.stable_set.end(), PhaseLabel::NP1) == pt.stable_set.end());
}
