#include "fiqa/distance.hpp"

#include <cmath>
#include <string>

#include "fiqa/error.hpp"

namespace fiqa {
namespace {

void require_same_dim(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw ContractError("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                        std::to_string(b.size()));
}

double triplet_argument(std::span<const double> anchor, std::span<const double> positive,
                        std::span<const double> negative, double margin) {
  require_same_dim(anchor, positive);
  require_same_dim(anchor, negative);
  if (!(margin >= 0.0)) throw ContractError("triplet margin must be non-negative");
  return squared_distance(anchor, positive) - squared_distance(anchor, negative) + margin;
}

}  // namespace

double squared_distance(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a, b);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

double triplet_loss(std::span<const double> anchor, std::span<const double> positive,
                    std::span<const double> negative, double margin) {
  const double arg = triplet_argument(anchor, positive, negative, margin);
  return arg > 0.0 ? arg : 0.0;
}

TripletGradient triplet_loss_grad(std::span<const double> anchor,
                                  std::span<const double> positive,
                                  std::span<const double> negative, double margin) {
  const double arg = triplet_argument(anchor, positive, negative, margin);
  const std::size_t dim = anchor.size();
  TripletGradient grad{Vector(dim, 0.0), Vector(dim, 0.0), Vector(dim, 0.0)};
  if (arg < 0.0) return grad;

  // d/da = 2(n - p), d/dp = -2(a - p), d/dn = 2(a - n)
  for (std::size_t i = 0; i < dim; ++i) {
    grad.anchor[i] = 2.0 * (negative[i] - positive[i]);
    grad.positive[i] = -2.0 * (anchor[i] - positive[i]);
    grad.negative[i] = 2.0 * (anchor[i] - negative[i]);
  }
  return grad;
}

}  // namespace fiqa
