#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace ltac {

enum class Activation { Tanh, Relu };

// Layer shapes for the width-m, depth-L value network. theta is kept as one
// flat vector (layers in order, each row-major) so parameter-space arithmetic
// and projection reduce to plain vector operations. The output vector b is
// frozen at initialization and excluded from theta.
struct ValueNetShape {
  int width = 0;
  int depth = 0;
  int input_dim = 0;
  Activation activation = Activation::Relu;

  int layer_rows(int) const { return width; }
  int layer_cols(int layer) const { return layer == 0 ? input_dim : width; }
  int layer_offset(int layer) const;
  int param_count() const;
};

struct ValueNetParams {
  ValueNetShape shape;
  Eigen::VectorXd theta;  // flat, layer-major, row-major within a layer
  Eigen::VectorXd b;      // frozen output weights, length = width
};

// All theta entries and b drawn i.i.d. N(0,1) from the stream, theta first
// (flat order), then b.
ValueNetParams init_valuenet(std::uint64_t seed, int width, int depth,
                             int input_dim, Activation activation);

double value(const ValueNetParams& p, const Eigen::VectorXd& s);

struct ValueGradResult {
  double value = 0.0;
  Eigen::VectorXd grad;  // same flat layout as theta
};

// Reverse-mode gradient of value() with respect to theta. The relu
// subgradient at zero is zero.
ValueGradResult value_grad(const ValueNetParams& p, const Eigen::VectorXd& s);

struct ProjectionBall {
  Eigen::VectorXd center;
  double radius = 0.0;
};

// Euclidean projection onto the ball, applied over the whole flat vector
// (equivalently over the concatenated Frobenius norms of the layers).
Eigen::VectorXd project_theta(const Eigen::VectorXd& theta,
                              const ProjectionBall& ball);
ValueNetParams project(ValueNetParams p, const ProjectionBall& ball);

}  // namespace ltac
