#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "oracles.hpp"
#include "tdm/errors.hpp"
#include "tdm/meanfield.hpp"
#include "tdm/su3.hpp"

using namespace tdm;
using namespace tdm::su3;

namespace {

Eigen::MatrixXd op(LadderOp o, int n) { return atomic_operator(o, n); }

double lowest(const Eigen::MatrixXd& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace

TEST_CASE("basis enumeration") {
  for (int n : {1, 2, 5, 10}) {
    const auto b = atomic_basis(n);
    CHECK(b.size() == static_cast<std::size_t>((n + 1) * (n + 2) / 2));
    for (std::size_t i = 0; i < b.size(); ++i) {
      CHECK(b[i].valid());
      CHECK(ProductBasis::atom_index(b[i]) == static_cast<int>(i));
      CHECK(b[i].n1() + b[i].n2() + b[i].n3() == n);
    }
  }
  CHECK_THROWS_AS(atomic_basis(0), DomainError);
}

TEST_CASE("Cartan-Weyl commutation relations") {
  for (int n : {1, 3, 6}) {
    const auto tz = op(LadderOp::Tz, n), y = op(LadderOp::Y, n);
    const auto tp = op(LadderOp::Tplus, n), tm = op(LadderOp::Tminus, n);
    const auto up = op(LadderOp::Uplus, n), um = op(LadderOp::Uminus, n);
    const auto vp = op(LadderOp::Vplus, n), vm = op(LadderOp::Vminus, n);
    auto comm = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) -> Eigen::MatrixXd { return a * b - b * a; };
    CHECK((comm(tp, tm) - 2 * tz).norm() < 1e-12);
    CHECK((comm(tz, tp) - tp).norm() < 1e-12);
    CHECK((comm(up, um) - (1.5 * y - tz)).norm() < 1e-12);
    CHECK((comm(y, up) - up).norm() < 1e-12);
    CHECK((comm(tz, up) + 0.5 * up).norm() < 1e-12);
    CHECK((comm(tp, up) - vp).norm() < 1e-12);
    CHECK((comm(um, tm) - vm).norm() < 1e-12);
    CHECK((tm - tp.transpose()).norm() < 1e-12);
    CHECK((um - up.transpose()).norm() < 1e-12);
    CHECK((vm - vp.transpose()).norm() < 1e-12);

    // quadratic Casimir of the (N, 0) irrep
    const Eigen::MatrixXd c1 = 0.5 * (tp * tm + tm * tp + up * um + um * up + vp * vm + vm * vp) + tz * tz + 0.75 * y * y;
    const double expected = (n * n + 3.0 * n) / 3.0;
    CHECK((c1 - expected * Eigen::MatrixXd::Identity(c1.rows(), c1.cols())).norm() < 1e-10);
  }
}

TEST_CASE("parity sectors") {
  const auto even = enumerate_basis(4, 6, Sector::Even);
  const auto odd = enumerate_basis(4, 6, Sector::Odd);
  CHECK(even.size() + odd.size() == atomic_basis(4).size() * 7);
  for (const auto& [a, n] : even.states) CHECK(parity(even.atoms[a], n) == 0);
  // the decoupled ground state |t=0, n=0> is even
  CHECK(even.find(0, 0) >= 0);
  CHECK(sector_from_string("odd") == Sector::Odd);
  CHECK_THROWS_AS(sector_from_string("both"), DomainError);
}

TEST_CASE("Hamiltonian is symmetric and conserves parity") {
  const auto p = ModelParams::from_lambdas(0.9, 0.4, 0.7, 0.3);
  for (Sector s : {Sector::Even, Sector::Odd}) {
    const auto h = build_hamiltonian(p, enumerate_basis(5, 8, s));
    const Eigen::MatrixXd d(h.matrix);
    CHECK((d - d.transpose()).norm() < 1e-14);
  }
}

TEST_CASE("ground energy equals brute-force diagonalization in the product space") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> l(-1.5, 1.5), g(0.1, 1.5), d(-0.5, 0.9), w(0.5, 1.5);
  for (int n = 1; n <= 3; ++n) {
    for (int k = 0; k < 5; ++k) {
      auto p = ModelParams::from_lambdas(l(rng), l(rng), g(rng), d(rng), w(rng), w(rng));
      const double ref = lowest(oracle::brute_force_hamiltonian(p, n, 4));
      const auto gs = ground_state(p, n, 4);
      CHECK(gs.energy == doctest::Approx(ref).epsilon(1e-12));
    }
  }
}

TEST_CASE("Lanczos agrees with dense diagonalization") {
  const auto p = ModelParams::from_lambdas(0.7, 0.7, 0.8);
  const auto basis = enumerate_basis(12, 40, Sector::Even);
  const auto h = build_hamiltonian(p, basis);
  const auto dense = dense_lowest(h.matrix);
  const auto lz = lanczos_lowest(h.matrix);
  CHECK(lz.value == doctest::Approx(dense.value).epsilon(1e-11));
  CHECK(std::abs(std::abs(lz.vector.dot(dense.vector)) - 1.0) < 1e-8);

  GroundStateOptions dense_opt, sparse_opt;
  sparse_opt.dense_limit = 0;
  const auto a = sector_ground_state(p, basis, dense_opt);
  const auto b = sector_ground_state(p, basis, sparse_opt);
  CHECK(a.photon_density == doctest::Approx(b.photon_density).epsilon(1e-8));
}

TEST_CASE("observables") {
  // decoupled: every atom in |3>, no photons
  const auto gs = ground_state(ModelParams{}, 6, 5);
  CHECK(gs.energy == doctest::Approx(-6.0));
  CHECK(gs.photon_density == doctest::Approx(0.0));
  CHECK(gs.populations[2] == doctest::Approx(1.0));
  CHECK(gs.sector == Sector::Even);
  CHECK_FALSE(gs.cutoff_warning);

  const auto strong = ground_state(ModelParams::from_lambdas(1.2, 1.2, 0.8), 6, 3);
  CHECK(strong.cutoff_warning);
  const auto& pop = strong.populations;
  CHECK(pop[0] + pop[1] + pop[2] == doctest::Approx(1.0));
}

TEST_CASE("photon density approaches mean field with N") {
  const auto p = ModelParams::from_lambdas(0.75, 0.75, 0.8);
  const double mf = std::norm(meanfield::minimize(p).order.alpha);
  const double d10 = std::abs(ground_state(p, 10, 40).photon_density - mf);
  const double d30 = std::abs(ground_state(p, 30, 80).photon_density - mf);
  CHECK(d30 < d10);
  CHECK(d30 < 0.05);
}
