#pragma once

#include <cstdint>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace tdm {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct LanczosOptions {
  int max_iterations = 20000;         // matrix-vector products
  int basis_size = 80;                // Krylov vectors held before a restart
  int keep = 20;                      // Ritz vectors kept across a restart
  int check_every = 5;
  double tolerance = 1e-11;           // Ritz residual estimate, relative to the spectral scale
  double residual_tolerance = 1e-7;   // true residual of the returned vector, same scale
  std::uint64_t seed = 20240611ULL;
};

struct EigenPair {
  double value = 0.0;
  Eigen::VectorXd vector;
  double residual = 0.0;  // ||H x - value x||
  int iterations = 0;
};

/// Lowest eigenpair of a real symmetric sparse matrix by thick-restart
/// Lanczos with full reorthogonalization. Throws EigensolverError when the
/// final residual exceeds the tolerance.
EigenPair lanczos_lowest(const SparseMatrix& h, const LanczosOptions& options = {});

/// Dense symmetric solve; intended for small dimensions.
EigenPair dense_lowest(const SparseMatrix& h);

}  // namespace tdm
