#include "spg/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spg/rng.hpp"

namespace spg {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void apply(const LinearOperator& op, const double* x, double* y) {
  const std::size_t n = op.size();
  op.apply({x, n}, {y, n});
}

VectorXd random_unit(std::size_t n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = normal(rng);
  v.normalize();
  return v;
}

void check_symmetry(const LinearOperator& op, std::uint64_t seed) {
  const std::size_t n = op.size();
  Rng rng = make_rng(split_seed(seed, 0x5e77));
  VectorXd x = random_unit(n, rng), y = random_unit(n, rng);
  VectorXd bx(n), by(n);
  apply(op, x.data(), bx.data());
  apply(op, y.data(), by.data());
  const double lhs = x.dot(by), rhs = y.dot(bx);
  const double scale = std::max(1.0, bx.norm() + by.norm());
  if (std::abs(lhs - rhs) > 1e-9 * scale) {
    throw AsymmetricOperatorError(
        "operator failed symmetry check: x'By - y'Bx = " +
        std::to_string(lhs - rhs));
  }
}

// Orthogonalizes w against the first k columns of V (two classical
// Gram-Schmidt passes). Returns the projection coefficients.
VectorXd orthogonalize(const MatrixXd& V, Eigen::Index k, VectorXd& w) {
  VectorXd h = V.leftCols(k).transpose() * w;
  w.noalias() -= V.leftCols(k) * h;
  VectorXd h2 = V.leftCols(k).transpose() * w;
  w.noalias() -= V.leftCols(k) * h2;
  return h + h2;
}

// Fresh unit vector orthogonal to the first k columns of V.
bool fresh_direction(const MatrixXd& V, Eigen::Index k, Rng& rng,
                     VectorXd& out) {
  for (int attempt = 0; attempt < 4; ++attempt) {
    out = random_unit(static_cast<std::size_t>(V.rows()), rng);
    orthogonalize(V, k, out);
    const double nrm = out.norm();
    if (nrm > 1e-8) {
      out /= nrm;
      return true;
    }
  }
  return false;
}

}  // namespace

std::size_t default_max_iter(std::size_t n, std::size_t m) {
  const auto root = static_cast<std::size_t>(
      std::ceil(std::sqrt(static_cast<double>(n))));
  return 5 * m * std::max<std::size_t>(root, 1);
}

EigenResult top_eigenpairs(const LinearOperator& op,
                           const EigenOptions& options) {
  const std::size_t n = op.size();
  const std::size_t m = options.count;
  if (m < 1 || m > 32) throw ConfigError("eigenpair count must be in [1, 32]");
  if (m > n) throw ConfigError("eigenpair count exceeds operator dimension");
  if (!(options.tol > 0.0)) throw ConfigError("tolerance must be > 0");
  if (options.check_symmetry) check_symmetry(op, options.seed);

  const std::size_t max_iter =
      options.max_iter ? options.max_iter : default_max_iter(n, m);
  std::size_t basis =
      options.basis_size ? options.basis_size : std::max(2 * m + 20, 3 * m);
  basis = std::min(std::max(basis, m + 1), n);
  const auto K = static_cast<Eigen::Index>(basis);
  const auto N = static_cast<Eigen::Index>(n);
  const auto M = static_cast<Eigen::Index>(m);

  Rng rng = make_rng(options.seed);
  MatrixXd V(N, K + 1);
  MatrixXd H = MatrixXd::Zero(K, K);
  V.col(0) = random_unit(n, rng);

  VectorXd w(N), fresh(N);
  VectorXd theta;
  MatrixXd S;
  Eigen::Index kept = 0;   // locked Ritz vectors at the front of V
  Eigen::Index J = 0;      // active basis size
  double beta_last = 0.0;  // coupling of the basis to V.col(J)
  std::size_t matvecs = 0;
  bool exhausted = false;  // Krylov space spans the whole operator

  for (;;) {
    Eigen::Index j = kept;
    for (; j < K; ++j) {
      apply(op, V.col(j).data(), w.data());
      ++matvecs;
      const double wnorm = w.norm();
      VectorXd h = orthogonalize(V, j + 1, w);
      for (Eigen::Index i = 0; i <= j; ++i) H(i, j) = H(j, i) = h[i];
      double beta = w.norm();
      const bool last_dim = j + 1 == N;
      if (last_dim || beta <= 1e-12 * std::max(wnorm, 1e-300)) {
        // Invariant subspace: continue in a fresh orthogonal direction.
        beta = 0.0;
        if (last_dim || !fresh_direction(V, j + 1, rng, fresh)) {
          exhausted = true;
          V.col(j + 1).setZero();
        } else {
          V.col(j + 1) = fresh;
        }
      } else {
        V.col(j + 1) = w / beta;
      }
      if (j + 1 < K) H(j + 1, j) = H(j, j + 1) = beta;
      beta_last = beta;
      if (exhausted || matvecs >= max_iter) {
        ++j;
        break;
      }
    }
    J = std::min(j, K);

    Eigen::SelfAdjointEigenSolver<MatrixXd> es(H.topLeftCorner(J, J));
    // Descending order.
    theta = es.eigenvalues().reverse();
    S = es.eigenvectors().rowwise().reverse();

    const Eigen::Index avail = std::min(M, J);
    bool all_converged = avail == M;
    for (Eigen::Index i = 0; i < avail && all_converged; ++i) {
      const double est = std::abs(beta_last * S(J - 1, i));
      if (est > options.tol * std::max(1.0, std::abs(theta[i])))
        all_converged = false;
    }
    if (all_converged || exhausted || matvecs >= max_iter) break;

    // Thick restart: keep the leading Ritz vectors plus the residual
    // direction, which couples to them through an arrowhead.
    const Eigen::Index keep = std::min(J - 1, M + (J - M) / 2);
    MatrixXd ritz = V.leftCols(J) * S.leftCols(keep);
    V.col(keep) = V.col(J);
    V.leftCols(keep) = ritz;
    H.setZero();
    for (Eigen::Index i = 0; i < keep; ++i) {
      H(i, i) = theta[i];
      H(i, keep) = H(keep, i) = beta_last * S(J - 1, i);
    }
    kept = keep;
  }

  const Eigen::Index out = std::min(M, J);
  EigenResult result;
  result.iterations = matvecs;
  result.vectors = V.leftCols(J) * S.leftCols(out);
  result.values.assign(theta.data(), theta.data() + out);
  result.residual_norms.resize(static_cast<std::size_t>(out));

  VectorXd bv(N);
  bool ok = out == M;
  for (Eigen::Index i = 0; i < out; ++i) {
    auto v = result.vectors.col(i);
    v.normalize();
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0.0) v = -v;
    const VectorXd vi = v;
    apply(op, vi.data(), bv.data());
    const double res = (bv - theta[i] * vi).norm();
    result.residual_norms[static_cast<std::size_t>(i)] = res;
    if (res > options.tol * std::max(1.0, std::abs(theta[i]))) ok = false;
  }
  result.converged = ok;
  return result;
}

}  // namespace spg
