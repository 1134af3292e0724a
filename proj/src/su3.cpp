#include "tdm/su3.hpp"

#include <cmath>

#include <Eigen/SparseCore>

#include "tdm/errors.hpp"

namespace tdm::su3 {

bool BasisState::valid() const {
  return n_atoms >= 1 && two_t >= 0 && two_t <= n_atoms && std::abs(two_tz) <= two_t &&
         (two_t - two_tz) % 2 == 0;
}

std::vector<BasisState> atomic_basis(int n_atoms) {
  if (n_atoms < 1) throw DomainError("atomic_basis: N must be at least 1");
  std::vector<BasisState> out;
  out.reserve(static_cast<std::size_t>(n_atoms + 1) * (n_atoms + 2) / 2);
  for (int two_t = 0; two_t <= n_atoms; ++two_t)
    for (int two_tz = -two_t; two_tz <= two_t; two_tz += 2) out.push_back({two_t, two_tz, n_atoms});
  return out;
}

namespace {

LadderResult shifted(const BasisState& s, double coefficient, int dt2, int dtz2) {
  BasisState r{s.two_t + dt2, s.two_tz + dtz2, s.n_atoms};
  if (!(coefficient > 0.0) || !r.valid()) return {};
  return {coefficient, r};
}

// Composition A B |s> as a single (coefficient, state) pair.
LadderResult compose(LadderOp a, LadderOp b, const BasisState& s) {
  const auto first = ladder_action(b, s);
  if (!first.state) return {};
  const auto second = ladder_action(a, *first.state);
  if (!second.state) return {};
  return {first.coefficient * second.coefficient, second.state};
}

// [A, B] |s>; both orderings land on the same weight state.
LadderResult commutator(LadderOp a, LadderOp b, const BasisState& s) {
  const auto ab = compose(a, b, s);
  const auto ba = compose(b, a, s);
  const double c = ab.coefficient - ba.coefficient;
  const auto& st = ab.state ? ab.state : ba.state;
  if (!st || std::abs(c) < 1e-14) return {};
  return {c, st};
}

}  // namespace

LadderResult ladder_action(LadderOp op, const BasisState& s) {
  const double t = s.t(), tz = s.tz();
  const double n = s.n_atoms;
  switch (op) {
    case LadderOp::Tz:
      return {tz, s};
    case LadderOp::Y:
      return {s.y(), s};
    case LadderOp::Tplus:
      return shifted(s, std::sqrt(std::max(0.0, t * (t + 1) - tz * (tz + 1))), 0, 2);
    case LadderOp::Tminus:
      return shifted(s, std::sqrt(std::max(0.0, t * (t + 1) - tz * (tz - 1))), 0, -2);
    case LadderOp::Uplus:
      return shifted(s, std::sqrt(std::max(0.0, (t - tz + 1) * (n - 2 * t))), 1, -1);
    case LadderOp::Uminus:
      return shifted(s, std::sqrt(std::max(0.0, (t - tz) * (n - 2 * t + 1))), -1, 1);
    case LadderOp::Vplus:
      return commutator(LadderOp::Tplus, LadderOp::Uplus, s);
    case LadderOp::Vminus:
      return commutator(LadderOp::Uminus, LadderOp::Tminus, s);
  }
  return {};
}

std::string_view to_string(Sector s) { return s == Sector::Even ? "even" : "odd"; }

Sector sector_from_string(std::string_view name) {
  if (name == "even") return Sector::Even;
  if (name == "odd") return Sector::Odd;
  throw DomainError("unknown parity sector '" + std::string(name) + "' (expected even or odd)");
}

int parity(const BasisState& s, int photons) { return (photons + s.n2()) % 2; }

int ProductBasis::find(int atom, int photons) const {
  if (atom < 0 || photons < 0 || photons > n_ph || atom >= static_cast<int>(atoms.size())) return -1;
  return index[static_cast<std::size_t>(atom) * (n_ph + 1) + photons];
}

int ProductBasis::atom_index(const BasisState& s) {
  // position of (two_t, two_tz) in the fixed ordering
  const int base = s.two_t * (s.two_t + 1) / 2;
  return base + (s.two_tz + s.two_t) / 2;
}

ProductBasis enumerate_basis(int n_atoms, int n_ph, Sector sector) {
  if (n_atoms < 1) throw DomainError("enumerate_basis: N must be at least 1");
  if (n_ph < 1) throw DomainError("enumerate_basis: photon cutoff must be at least 1");
  ProductBasis b;
  b.n_atoms = n_atoms;
  b.n_ph = n_ph;
  b.sector = sector;
  b.atoms = atomic_basis(n_atoms);
  b.index.assign(b.atoms.size() * (n_ph + 1), -1);
  const int want = sector == Sector::Even ? 0 : 1;
  for (std::size_t a = 0; a < b.atoms.size(); ++a)
    for (int n = 0; n <= n_ph; ++n)
      if (parity(b.atoms[a], n) == want) {
        b.index[a * (n_ph + 1) + n] = static_cast<int>(b.states.size());
        b.states.emplace_back(static_cast<int>(a), n);
      }
  return b;
}

SparseHamiltonian build_hamiltonian(const ModelParams& p, const ProductBasis& basis) {
  p.validate();
  const double sqrt_n = std::sqrt(static_cast<double>(basis.n_atoms));
  const double c1 = p.g1 / sqrt_n, c2 = p.g2 / sqrt_n;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(basis.size() * 9);

  auto add_pair = [&](int row, int col, double value) {
    if (col < 0) throw InternalError("coupling connects different parity sectors");
    trip.emplace_back(row, col, value);
    trip.emplace_back(col, row, value);
  };

  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto [ai, n] = basis.states[i];
    const auto& s = basis.atoms[ai];
    const int row = static_cast<int>(i);
    const double diag = p.omega * n + p.Omega * ((3.0 - p.delta) / 2.0 * s.y() + (1.0 - p.delta) * s.tz());
    trip.emplace_back(row, row, diag);

    // Raising terms T+ and gamma U+ applied to |s, n>; the lowering
    // counterparts are added as transposes.
    for (const auto& [op, w] : {std::pair{LadderOp::Tplus, 1.0}, std::pair{LadderOp::Uplus, p.gamma}}) {
      const auto r = ladder_action(op, s);
      if (!r.state || w == 0.0) continue;
      const int target = basis.atom_index(*r.state);
      // a T+ : |s,n> -> sqrt(n) |T+s, n-1>
      if (n > 0 && c1 != 0.0)
        add_pair(row, basis.find(target, n - 1), c1 * w * r.coefficient * std::sqrt(double(n)));
      // a^+ T+ : |s,n> -> sqrt(n+1) |T+s, n+1>, dropped at the cutoff
      if (n < basis.n_ph && c2 != 0.0)
        add_pair(row, basis.find(target, n + 1), c2 * w * r.coefficient * std::sqrt(double(n + 1)));
    }
  }

  SparseHamiltonian h;
  h.sector = basis.sector;
  h.matrix.resize(static_cast<Eigen::Index>(basis.size()), static_cast<Eigen::Index>(basis.size()));
  h.matrix.setFromTriplets(trip.begin(), trip.end());
  h.matrix.makeCompressed();
  return h;
}

Eigen::MatrixXd atomic_operator(LadderOp op, int n_atoms) {
  const auto atoms = atomic_basis(n_atoms);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(atoms.size(), atoms.size());
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    const auto r = ladder_action(op, atoms[j]);
    if (!r.state) continue;
    m(ProductBasis::atom_index(*r.state), static_cast<Eigen::Index>(j)) += r.coefficient;
  }
  return m;
}

GroundState sector_ground_state(const ModelParams& params, const ProductBasis& basis,
                                const GroundStateOptions& options) {
  const auto h = build_hamiltonian(params, basis);
  const EigenPair pair = static_cast<int>(basis.size()) <= options.dense_limit
                             ? dense_lowest(h.matrix)
                             : lanczos_lowest(h.matrix, options.lanczos);
  GroundState gs;
  gs.sector = basis.sector;
  gs.residual = pair.residual;
  const double n_at = basis.n_atoms;
  gs.energy = pair.value - n_at * params.Omega * params.delta / 3.0;
  double photons = 0.0, p1 = 0.0, p2 = 0.0, p3 = 0.0, top = 0.0;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const double w = pair.vector[static_cast<Eigen::Index>(i)] * pair.vector[static_cast<Eigen::Index>(i)];
    const auto [ai, n] = basis.states[i];
    const auto& s = basis.atoms[ai];
    photons += w * n;
    p1 += w * s.n1();
    p2 += w * s.n2();
    // P33 from the diagonal generators: N/3 - Y
    p3 += w * (n_at / 3.0 - s.y());
    if (n == basis.n_ph) top += w;
  }
  gs.photon_density = photons / n_at;
  gs.populations = {p1 / n_at, p2 / n_at, p3 / n_at};
  gs.top_fock_occupancy = top;
  gs.cutoff_warning = top > options.cutoff_warning;
  return gs;
}

GroundState ground_state(const ModelParams& params, int n_atoms, int n_ph,
                         const GroundStateOptions& options) {
  params.validate();
  GroundState best;
  bool have = false;
  for (Sector s : {Sector::Even, Sector::Odd}) {
    const auto basis = enumerate_basis(n_atoms, n_ph, s);
    if (basis.size() == 0) continue;
    auto gs = sector_ground_state(params, basis, options);
    // ties go to the even sector
    if (!have || gs.energy < best.energy - 1e-12 * std::max(1.0, std::abs(best.energy))) {
      best = gs;
      have = true;
    }
  }
  return best;
}

}  // namespace tdm::su3
