#include "bhep/numerics.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace bhep {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

GaussianParams::GaussianParams(Vector mu_in, Matrix sigma_in)
    : mu(std::move(mu_in)), sigma(std::move(sigma_in)) {
  if (sigma.rows() != sigma.cols() || sigma.rows() != mu.size()) {
    throw std::invalid_argument("GaussianParams: mu/sigma dimension mismatch");
  }
  const double scale = std::max(sigma.cwiseAbs().maxCoeff(), 1.0);
  const double asym = (sigma - sigma.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) {
    throw std::invalid_argument("GaussianParams: sigma is not symmetric");
  }
  (void)cholesky_lower(sigma);  // positive definiteness check
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
    : master_seed_(master_seed), stream_index_(stream_index) {
  // Mix (seed, index) into a full seed sequence so that nearby stream
  // indices still start the engine in unrelated states.
  std::uint64_t state =
      master_seed ^ (stream_index * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL);
  std::array<std::uint32_t, 8> words{};
  for (int i = 0; i < 4; ++i) {
    const std::uint64_t w = splitmix64(state);
    words[2 * i] = static_cast<std::uint32_t>(w);
    words[2 * i + 1] = static_cast<std::uint32_t>(w >> 32);
  }
  std::seed_seq seq(words.begin(), words.end());
  engine_.seed(seq);
}

double RngStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_open() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_normal_;
  }
  const double u1 = uniform_open();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_normal_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

double RngStream::gamma(double shape) {
  if (!(shape > 0.0)) {
    throw std::invalid_argument("RngStream::gamma: shape must be positive");
  }
  if (shape < 1.0) {
    // Boost to shape+1 and scale back.
    const double u = uniform_open();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_open();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double RngStream::chi_squared(double dof) {
  return 2.0 * gamma(0.5 * dof);
}

Matrix cholesky_lower(const Matrix& sigma) {
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("cholesky_lower: matrix is not positive definite");
  }
  return llt.matrixL();
}

Matrix inv_sqrt_sym(const Matrix& sigma) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sigma);
  if (es.info() != Eigen::Success) {
    throw NotPositiveDefinite("inv_sqrt_sym: eigendecomposition failed");
  }
  const Vector& evals = es.eigenvalues();
  const double max_eval = evals.maxCoeff();
  const double floor = static_cast<double>(sigma.rows()) *
                       std::numeric_limits<double>::epsilon() * max_eval;
  if (max_eval <= 0.0 || evals.minCoeff() <= floor) {
    throw NotPositiveDefinite("inv_sqrt_sym: eigenvalue at or below noise floor");
  }
  const Matrix m = es.eigenvectors() *
                   evals.array().rsqrt().matrix().asDiagonal() *
                   es.eigenvectors().transpose();
  return 0.5 * (m + m.transpose());
}

Matrix sample_mvn(const GaussianParams& params, Index n, RngStream& rng) {
  if (n < 1) throw std::invalid_argument("sample_mvn: n must be >= 1");
  const Index d = params.dim();
  const Matrix L = cholesky_lower(params.sigma);
  Matrix out(n, d);
  Vector z(d);
  for (Index j = 0; j < n; ++j) {
    for (Index k = 0; k < d; ++k) z[k] = rng.normal();
    out.row(j) = (params.mu + L * z).transpose();
  }
  return out;
}

Matrix sample_mvt(int dof, const Matrix& scale, Index n, RngStream& rng) {
  if (dof < 1) throw std::invalid_argument("sample_mvt: dof must be >= 1");
  if (n < 1) throw std::invalid_argument("sample_mvt: n must be >= 1");
  const Index d = scale.rows();
  const Matrix L = cholesky_lower(scale);
  Matrix out(n, d);
  Vector z(d);
  for (Index j = 0; j < n; ++j) {
    for (Index k = 0; k < d; ++k) z[k] = rng.normal();
    const double w = rng.chi_squared(static_cast<double>(dof)) / dof;
    out.row(j) = (L * z / std::sqrt(w)).transpose();
  }
  return out;
}

namespace {

// Golub-Welsch on the Jacobi matrix of the probabilists' Hermite family:
// zero diagonal, off-diagonal sqrt(k). Nodes are the eigenvalues; the
// weight of node i is the squared first component of its unit eigenvector
// (total mass one for the normal density).
void gauss_hermite_1d(int order, std::vector<double>& nodes,
                      std::vector<double>& weights) {
  Matrix jacobi = Matrix::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    jacobi(k, k - 1) = std::sqrt(static_cast<double>(k));
    jacobi(k - 1, k) = jacobi(k, k - 1);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(jacobi);
  nodes.resize(order);
  weights.resize(order);
  for (int i = 0; i < order; ++i) {
    nodes[i] = es.eigenvalues()[i];
    const double v0 = es.eigenvectors()(0, i);
    weights[i] = v0 * v0;
  }
  // Enforce the exact +/- symmetry of the rule so odd moments cancel.
  for (int i = 0; i < order / 2; ++i) {
    const int j = order - 1 - i;
    const double x = 0.5 * (nodes[j] - nodes[i]);
    nodes[i] = -x;
    nodes[j] = x;
    const double w = 0.5 * (weights[i] + weights[j]);
    weights[i] = w;
    weights[j] = w;
  }
  if (order % 2 == 1) nodes[order / 2] = 0.0;
}

}  // namespace

std::vector<QuadratureNode> gauss_hermite_nodes(int order, int d) {
  if (d < 1 || d > 3) {
    throw UnsupportedDimension("gauss_hermite_nodes: d must be in {1,2,3}");
  }
  if (order < 2 || order > 64) {
    throw std::invalid_argument("gauss_hermite_nodes: order must be in [2, 64]");
  }
  std::vector<double> nodes1d;
  std::vector<double> weights1d;
  gauss_hermite_1d(order, nodes1d, weights1d);

  std::vector<QuadratureNode> out;
  out.reserve(static_cast<std::size_t>(std::pow(order, d)));
  std::array<int, 3> idx{0, 0, 0};
  for (;;) {
    QuadratureNode node;
    node.point.resize(d);
    node.weight = 1.0;
    for (int k = 0; k < d; ++k) {
      node.point[k] = nodes1d[idx[k]];
      node.weight *= weights1d[idx[k]];
    }
    out.push_back(std::move(node));
    int k = d - 1;
    while (k >= 0 && ++idx[k] == order) {
      idx[k] = 0;
      --k;
    }
    if (k < 0) break;
  }
  return out;
}

}  // namespace bhep
