#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "tdm/lanczos.hpp"
#include "tdm/model.hpp"

namespace tdm::su3 {

/// Generalized Dicke state |t, tz> of the totally symmetric SU(3) irrep
/// (p = N, q = 0). Half-integers are stored doubled.
struct BasisState {
  int two_t = 0;
  int two_tz = 0;
  int n_atoms = 1;

  double t() const { return 0.5 * two_t; }
  double tz() const { return 0.5 * two_tz; }
  double y() const { return t() * 2.0 - 2.0 * n_atoms / 3.0; }
  // level occupations n1 = t + tz, n2 = t - tz, n3 = N - 2t
  int n1() const { return (two_t + two_tz) / 2; }
  int n2() const { return (two_t - two_tz) / 2; }
  int n3() const { return n_atoms - two_t; }
  bool valid() const;

  friend bool operator==(const BasisState&, const BasisState&) = default;
};

/// All |t, tz> for N atoms, t ascending then tz ascending.
std::vector<BasisState> atomic_basis(int n_atoms);

enum class LadderOp { Tz, Y, Tplus, Tminus, Uplus, Uminus, Vplus, Vminus };

struct LadderResult {
  double coefficient = 0.0;
  std::optional<BasisState> state;  // empty when the action vanishes
};

LadderResult ladder_action(LadderOp op, const BasisState& state);

enum class Sector { Even, Odd };

std::string_view to_string(Sector s);
/// "even" / "odd"; throws DomainError otherwise.
Sector sector_from_string(std::string_view name);

/// Parity label (n + n2) mod 2, i.e. the exponent of exp(i pi (a^+a + Tz + 3Y/2))
/// shifted by N. The decoupled ground state is even.
int parity(const BasisState& s, int photons);

struct ProductBasis {
  int n_atoms = 1;
  int n_ph = 1;
  Sector sector = Sector::Even;
  std::vector<BasisState> atoms;
  std::vector<std::pair<int, int>> states;  // (atom index, photon number)
  std::vector<int> index;                   // atom * (n_ph + 1) + n -> position or -1

  std::size_t size() const { return states.size(); }
  int find(int atom, int photons) const;
  static int atom_index(const BasisState& s);
};

ProductBasis enumerate_basis(int n_atoms, int n_ph, Sector sector);

struct SparseHamiltonian {
  SparseMatrix matrix;
  Sector sector = Sector::Even;
  std::size_t dimension() const { return static_cast<std::size_t>(matrix.rows()); }
};

/// Collective Hamiltonian in the Cartan-Weyl form
///   w a^+a + W((3-d)/2 Y + (1-d) Tz) + g1/sqrt(N) (a(T+ + gU+) + h.c.)
///   + g2/sqrt(N) (a^+(T+ + gU+) + h.c.)
/// restricted to one parity sector. It exceeds the level-projector form of
/// the model by the constant N W d / 3.
SparseHamiltonian build_hamiltonian(const ModelParams& params, const ProductBasis& basis);

/// Dense matrix of a collective operator on the atomic basis (algebra checks).
Eigen::MatrixXd atomic_operator(LadderOp op, int n_atoms);

struct GroundStateOptions {
  int dense_limit = 2000;
  double cutoff_warning = 1e-8;  // top-Fock occupancy above which the cutoff is flagged
  LanczosOptions lanczos{};
};

struct GroundState {
  double energy = 0.0;  // total energy of the model Hamiltonian (level-projector form)
  double photon_density = 0.0;
  std::array<double, 3> populations{};  // <P11>/N, <P22>/N, <P33>/N
  Sector sector = Sector::Even;
  double top_fock_occupancy = 0.0;
  bool cutoff_warning = false;
  double residual = 0.0;
};

/// Lowest eigenstate over both parity sectors (n_atoms taken from the argument).
GroundState ground_state(const ModelParams& params, int n_atoms, int n_ph,
                         const GroundStateOptions& options = {});

/// Lowest state of a single sector.
GroundState sector_ground_state(const ModelParams& params, const ProductBasis& basis,
                                const GroundStateOptions& options = {});

}  // namespace tdm::su3
