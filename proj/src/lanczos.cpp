#include "tdm/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "tdm/errors.hpp"

namespace tdm {

namespace {

Eigen::VectorXd start_vector(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = u(rng);
  return v.normalized();
}

}  // namespace

EigenPair dense_lowest(const SparseMatrix& h) {
  const Eigen::MatrixXd dense = Eigen::MatrixXd(h);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
  if (es.info() != Eigen::Success) throw EigensolverError("dense eigensolver failed", -1.0);
  EigenPair out;
  out.value = es.eigenvalues()[0];
  out.vector = es.eigenvectors().col(0);
  out.residual = (h * out.vector - out.value * out.vector).norm();
  return out;
}

EigenPair lanczos_lowest(const SparseMatrix& h, const LanczosOptions& opt) {
  const Eigen::Index n = h.rows();
  if (n == 0) throw EigensolverError("empty matrix", 0.0);
  if (n <= 64) return dense_lowest(h);

  // Gershgorin bound as the spectral scale.
  double scale = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    double s = 0.0;
    for (SparseMatrix::InnerIterator it(h, r); it; ++it) s += std::abs(it.value());
    scale = std::max(scale, s);
  }
  scale = std::max(scale, 1.0);

  const int mmax = static_cast<int>(std::min<Eigen::Index>(std::max(opt.basis_size, 4), n));
  const int keep = std::clamp(opt.keep, 1, mmax - 2);
  Eigen::MatrixXd v(n, mmax + 1);
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(mmax, mmax);
  v.col(0) = start_vector(n, opt.seed);
  Eigen::VectorXd w(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  int j = 0, products = 0, m = 0;
  bool converged = false;
  while (products < opt.max_iterations) {
    w.noalias() = h * v.col(j);
    ++products;
    // classical Gram-Schmidt, applied twice
    Eigen::VectorXd c = v.leftCols(j + 1).transpose() * w;
    w.noalias() -= v.leftCols(j + 1) * c;
    const Eigen::VectorXd c2 = v.leftCols(j + 1).transpose() * w;
    w.noalias() -= v.leftCols(j + 1) * c2;
    c += c2;
    t.block(0, j, j + 1, 1) = c;
    t.block(j, 0, 1, j + 1) = c.transpose();
    const double b = w.norm();
    m = j + 1;
    const bool invariant = b < 1e-14 * scale;
    const bool full = m == mmax;
    if (invariant || full || m % opt.check_every == 0 || products >= opt.max_iterations) {
      es.compute(t.topLeftCorner(m, m));
      if (invariant || std::abs(b * es.eigenvectors()(m - 1, 0)) < opt.tolerance * scale || m == n) {
        converged = true;
        break;
      }
      if (full) {
        // thick restart: keep the lowest Ritz vectors and the residual direction
        const Eigen::MatrixXd s = es.eigenvectors().leftCols(keep);
        const Eigen::MatrixXd kept = v.leftCols(m) * s;
        v.leftCols(keep) = kept;
        v.col(keep) = w / b;
        t.setZero();
        for (int i = 0; i < keep; ++i) {
          t(i, i) = es.eigenvalues()[i];
          t(i, keep) = t(keep, i) = b * s(m - 1, i);
        }
        j = keep;
        continue;
      }
    }
    v.col(j + 1) = w / b;
    ++j;
  }
  if (!converged) es.compute(t.topLeftCorner(m, m));

  EigenPair out;
  out.vector = (v.leftCols(m) * es.eigenvectors().col(0)).normalized();
  const Eigen::VectorXd hx = h * out.vector;
  out.value = out.vector.dot(hx);
  out.residual = (hx - out.value * out.vector).norm();
  out.iterations = products;
  if (!converged || out.residual > opt.residual_tolerance * scale)
    throw EigensolverError("Lanczos did not converge to the requested residual", out.residual);
  return out;
}

}  // namespace tdm
