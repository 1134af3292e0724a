#include <doctest.h>

#include <cmath>

#include "tdm/errors.hpp"
#include "tdm/model.hpp"

using namespace tdm;

TEST_CASE("dimensionless couplings") {
  ModelParams p;
  auto c = derive_couplings(p);
  CHECK(c.lambda1 == 0.0);
  CHECK(c.lambda_plus == 0.0);
  CHECK(c.lambda_minus == 0.0);

  p.g1 = p.g2 = 0.3 * std::sqrt(2.0);
  c = derive_couplings(p);
  CHECK(c.lambda_plus == doctest::Approx(0.6 * std::sqrt(2.0)).epsilon(1e-15));
  CHECK(c.lambda_minus == 0.0);

  p.g2 = 0.0;
  c = derive_couplings(p);
  CHECK(c.lambda_plus == doctest::Approx(0.3 * std::sqrt(2.0)).epsilon(1e-15));
  CHECK(c.lambda_minus == c.lambda_plus);
}

TEST_CASE("couplings are invariant under sign flip and common rescaling") {
  ModelParams p;
  p.omega = 1.3;
  p.Omega = 0.7;
  p.g1 = 0.4;
  p.g2 = -0.9;
  const auto ref = derive_couplings(p);

  ModelParams flipped = p;
  flipped.g1 = -p.g1;
  flipped.g2 = -p.g2;
  CHECK(derive_couplings(flipped).lambda_plus == doctest::Approx(ref.lambda_plus));
  CHECK(derive_couplings(flipped).lambda_minus == doctest::Approx(ref.lambda_minus));

  ModelParams scaled = p;
  for (double* x : {&scaled.omega, &scaled.Omega, &scaled.g1, &scaled.g2}) *x *= 3.7;
  CHECK(derive_couplings(scaled).lambda1 == doctest::Approx(ref.lambda1).epsilon(1e-14));
  CHECK(derive_couplings(scaled).lambda2 == doctest::Approx(ref.lambda2).epsilon(1e-14));
}

TEST_CASE("from_lambdas round trip") {
  const auto p = ModelParams::from_lambdas(0.4, 0.7, 0.8, 0.1, 2.0, 0.5, 0.3);
  const auto c = derive_couplings(p);
  CHECK(c.lambda1 == doctest::Approx(0.4));
  CHECK(c.lambda2 == doctest::Approx(0.7));
  CHECK(p.kappa == 0.3);
}

TEST_CASE("parameter validation") {
  ModelParams p;
  CHECK_NOTHROW(p.validate());
  p.omega = 0.0;
  CHECK_THROWS_AS(p.validate(), DomainError);
  CHECK_THROWS_AS(derive_couplings(p), DomainError);
  p.omega = 1.0;
  p.Omega = -1.0;
  CHECK_THROWS_AS(p.validate(), DomainError);
  p.Omega = 1.0;
  p.kappa = -0.1;
  CHECK_THROWS_AS(p.validate(), DomainError);
  p.kappa = 0.0;
  p.n_atoms = 0;
  CHECK_THROWS_AS(p.validate(), DomainError);
}

TEST_CASE("phase label names round trip") {
  for (auto l : {PhaseLabel::NP, PhaseLabel::SRA, PhaseLabel::SRB, PhaseLabel::TC_SR, PhaseLabel::NP1,
                 PhaseLabel::NP2, PhaseLabel::NP3, PhaseLabel::SR, PhaseLabel::Unclassified})
    CHECK(phase_label_from_string(to_string(l)) == l);
  CHECK_FALSE(phase_label_from_string("XYZ").has_value());
}
