#include "graphtt/graph.hpp"

#include <cmath>

namespace graphtt {

namespace {
constexpr double kWeightTruncation = 1e-12;
}

GraphLaplacian GraphLaplacian::identity(Index n) {
  GraphLaplacian l;
  l.n = n;
  l.is_identity = true;
  l.matrix = Eigen::MatrixXd::Identity(n, n);
  return l;
}

double GraphLaplacian::quadratic_form(const Eigen::VectorXd& x) const {
  if (x.size() != n) throw std::invalid_argument("quadratic_form: size mismatch");
  if (is_identity) return x.squaredNorm();
  return x.dot(matrix * x);
}

Eigen::MatrixXd build_weights(const WeightSpec& spec) {
  if (spec.n < 1) throw std::invalid_argument("build_weights: n must be >= 1");
  if (spec.kind == WeightSpec::Kind::Identity)
    return Eigen::MatrixXd::Zero(spec.n, spec.n);
  if (spec.alpha <= 0) throw std::invalid_argument("build_weights: alpha must be positive");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(spec.n, spec.n);
  for (Index j = 0; j < spec.n; ++j)
    for (Index k = j + 1; k < spec.n; ++k) {
      const double dist = static_cast<double>(j - k);
      double w = std::exp(-spec.alpha * dist * dist);
      if (w < kWeightTruncation) w = 0.0;
      a(j, k) = a(k, j) = w;
    }
  return a;
}

GraphLaplacian laplacian_from_weights(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("laplacian_from_weights: not square");
  const Index n = a.rows();
  for (Index j = 0; j < n; ++j) {
    if (a(j, j) != 0.0) throw std::invalid_argument("laplacian_from_weights: nonzero diagonal");
    for (Index k = j + 1; k < n; ++k) {
      if (a(j, k) < 0.0 || a(k, j) < 0.0)
        throw std::invalid_argument("laplacian_from_weights: negative weight");
      if (std::abs(a(j, k) - a(k, j)) > 1e-12 * std::max(1.0, std::abs(a(j, k))))
        throw std::invalid_argument("laplacian_from_weights: asymmetric weights");
    }
  }
  GraphLaplacian l;
  l.n = n;
  l.is_identity = false;
  l.matrix = Eigen::MatrixXd(a.rowwise().sum().asDiagonal()) - a;
  return l;
}

GraphLaplacian laplacian_from_spec(const WeightSpec& spec) {
  if (spec.kind == WeightSpec::Kind::Identity) return GraphLaplacian::identity(spec.n);
  return laplacian_from_weights(build_weights(spec));
}

}  // namespace graphtt
