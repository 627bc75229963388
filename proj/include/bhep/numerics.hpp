#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

#include "bhep/errors.hpp"

namespace bhep {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Mean vector and covariance matrix of a d-variate normal model.
/// The constructor checks that sigma is symmetric (1e-12 relative
/// tolerance) and positive definite; it throws NotPositiveDefinite or
/// std::invalid_argument otherwise.
struct GaussianParams {
  Vector mu;
  Matrix sigma;

  GaussianParams(Vector mu_in, Matrix sigma_in);
  Index dim() const { return mu.size(); }
};

/// Seedable pseudo-random stream addressed by (master_seed, stream_index).
///
/// Equal addresses replay bit-identical draw sequences; distinct indices
/// yield decorrelated streams. Callers pre-assign indices to work items so
/// parallel and serial schedules produce the same results. A stream is
/// owned by one logical task at a time.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index);

  /// Uniform draw on [0, 1) with 53-bit resolution.
  double uniform();
  /// Uniform draw on (0, 1); safe to pass through log().
  double uniform_open();
  /// Standard normal draw (Box-Muller, pairs cached).
  double normal();
  /// Gamma(shape, 1) draw via Marsaglia-Tsang squeeze; shape > 0.
  double gamma(double shape);
  /// Chi-squared draw with dof degrees of freedom.
  double chi_squared(double dof);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_index() const { return stream_index_; }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool have_spare_ = false;
};

/// Lower-triangular L with L * L^T = sigma. Throws NotPositiveDefinite if a
/// pivot is non-positive (degenerate covariance).
Matrix cholesky_lower(const Matrix& sigma);

/// Symmetric M with M * sigma * M = I, computed from the eigendecomposition
/// M = V diag(eig^{-1/2}) V^T. Eigenvalues at or below d*eps*max_eig count
/// as non-positive-definite rather than being regularized.
Matrix inv_sqrt_sym(const Matrix& sigma);

/// n IID rows from N_d(mu, sigma); row = mu + L z with z standard normal.
Matrix sample_mvn(const GaussianParams& params, Index n, RngStream& rng);

/// n IID rows from the centered multivariate t with the given scale matrix:
/// row = L z / sqrt(chi2_dof / dof).
Matrix sample_mvt(int dof, const Matrix& scale, Index n, RngStream& rng);

struct QuadratureNode {
  Vector point;
  double weight;
};

/// Tensor-product Gauss-Hermite rule for the standard d-variate normal
/// weight: sum_i w_i f(x_i) ~ integral of f(t) phi(t) dt, with the weights
/// summing to one. Exact for polynomials of per-coordinate degree below
/// 2*order. Supports d in {1,2,3} (verification-scale use only) and order
/// in [2, 64].
std::vector<QuadratureNode> gauss_hermite_nodes(int order, int d);

}  // namespace bhep
