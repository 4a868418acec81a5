#pragma once

#include <span>

#include "fiqa/embedding.hpp"

namespace fiqa {

// All functions throw ContractError when operand dimensions differ.

double squared_distance(std::span<const double> a, std::span<const double> b);
double euclidean_distance(std::span<const double> a, std::span<const double> b);

/// max(0, |a-p|^2 - |a-n|^2 + margin). margin must be >= 0; the default of 0
/// is the unmargined hinge.
double triplet_loss(std::span<const double> anchor, std::span<const double> positive,
                    std::span<const double> negative, double margin = 0.0);

struct TripletGradient {
  Vector anchor;
  Vector positive;
  Vector negative;
};

/// Gradient of triplet_loss. Zero when the hinge argument is strictly
/// negative; at the kink (argument exactly 0) the active quadratic branch is
/// reported.
TripletGradient triplet_loss_grad(std::span<const double> anchor,
                                  std::span<const double> positive,
                                  std::span<const double> negative, double margin = 0.0);

}  // namespace fiqa
