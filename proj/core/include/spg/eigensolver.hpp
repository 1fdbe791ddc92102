#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "spg/error.hpp"
#include "spg/residuals.hpp"

namespace spg {

class AsymmetricOperatorError : public Error {
 public:
  using Error::Error;
};

struct EigenOptions {
  std::size_t count = 1;  // m, in [1, 32]
  double tol = 1e-6;
  /// Operator applications allowed; 0 selects 5 * m * ceil(sqrt(n)).
  std::size_t max_iter = 0;
  std::uint64_t seed = 0;
  /// Krylov basis size before a restart; 0 selects max(2m + 20, 3m),
  /// capped at n.
  std::size_t basis_size = 0;
  bool check_symmetry = true;
};

struct EigenResult {
  std::vector<double> values;  // descending
  Eigen::MatrixXd vectors;     // n x m, orthonormal columns
  std::vector<double> residual_norms;  // ||B v - lambda v||, explicit
  std::size_t iterations = 0;          // operator applications
  bool converged = false;

  std::size_t count() const { return values.size(); }
  std::size_t dimension() const { return static_cast<std::size_t>(vectors.rows()); }
};

std::size_t default_max_iter(std::size_t n, std::size_t m);

/// m algebraically largest eigenpairs of a symmetric operator by thick-restart
/// Lanczos with full reorthogonalization and a seeded start vector.
/// Eigenvectors are normalized with their largest-magnitude entry positive.
/// On hitting max_iter the partial result is returned with converged = false.
/// Throws ConfigError on bad options and AsymmetricOperatorError when the
/// xᵀBy = yᵀBx spot check fails.
EigenResult top_eigenpairs(const LinearOperator& op, const EigenOptions& options);

}  // namespace spg
