#include "ltac/valuenet.hpp"

#include <cmath>
#include <stdexcept>

#include "ltac/rng.hpp"

namespace ltac {

namespace {

using RowMajorMap = Eigen::Map<
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using RowMajorMutableMap = Eigen::Map<
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

double activate(Activation act, double u) {
  return act == Activation::Tanh ? std::tanh(u) : (u > 0.0 ? u : 0.0);
}

double activate_deriv(Activation act, double u) {
  if (act == Activation::Tanh) {
    const double t = std::tanh(u);
    return 1.0 - t * t;
  }
  return u > 0.0 ? 1.0 : 0.0;  // subgradient 0 at the kink
}

}  // namespace

int ValueNetShape::layer_offset(int layer) const {
  int off = 0;
  for (int l = 0; l < layer; ++l) off += layer_rows(l) * layer_cols(l);
  return off;
}

int ValueNetShape::param_count() const { return layer_offset(depth); }

ValueNetParams init_valuenet(std::uint64_t seed, int width, int depth,
                             int input_dim, Activation activation) {
  if (width < 1 || depth < 1 || input_dim < 1)
    throw std::invalid_argument("init_valuenet: width, depth, input_dim >= 1");
  ValueNetParams p;
  p.shape = ValueNetShape{width, depth, input_dim, activation};
  RngStream rng(seed);
  p.theta.resize(p.shape.param_count());
  for (Eigen::Index i = 0; i < p.theta.size(); ++i) p.theta(i) = rng.normal();
  p.b.resize(width);
  for (int i = 0; i < width; ++i) p.b(i) = rng.normal();
  return p;
}

double value(const ValueNetParams& p, const Eigen::VectorXd& s) {
  const ValueNetShape& sh = p.shape;
  if (s.size() != sh.input_dim)
    throw std::invalid_argument("value: state dimension mismatch");
  const double inv_sqrt_m = 1.0 / std::sqrt(double(sh.width));
  Eigen::VectorXd x = s;
  for (int l = 0; l < sh.depth; ++l) {
    RowMajorMap w(p.theta.data() + sh.layer_offset(l), sh.layer_rows(l),
                  sh.layer_cols(l));
    Eigen::VectorXd u = w * x;
    x.resize(sh.width);
    for (int i = 0; i < sh.width; ++i)
      x(i) = inv_sqrt_m * activate(sh.activation, u(i));
  }
  return inv_sqrt_m * p.b.dot(x);
}

ValueGradResult value_grad(const ValueNetParams& p, const Eigen::VectorXd& s) {
  const ValueNetShape& sh = p.shape;
  if (s.size() != sh.input_dim)
    throw std::invalid_argument("value_grad: state dimension mismatch");
  const double inv_sqrt_m = 1.0 / std::sqrt(double(sh.width));

  std::vector<Eigen::VectorXd> inputs(sh.depth);  // x^{l-1} per layer
  std::vector<Eigen::VectorXd> pre(sh.depth);     // u^l per layer
  Eigen::VectorXd x = s;
  for (int l = 0; l < sh.depth; ++l) {
    inputs[l] = x;
    RowMajorMap w(p.theta.data() + sh.layer_offset(l), sh.layer_rows(l),
                  sh.layer_cols(l));
    pre[l] = w * x;
    x.resize(sh.width);
    for (int i = 0; i < sh.width; ++i)
      x(i) = inv_sqrt_m * activate(sh.activation, pre[l](i));
  }

  ValueGradResult out;
  out.value = inv_sqrt_m * p.b.dot(x);
  out.grad = Eigen::VectorXd::Zero(p.theta.size());

  Eigen::VectorXd gx = inv_sqrt_m * p.b;  // dV/dx^L
  for (int l = sh.depth - 1; l >= 0; --l) {
    Eigen::VectorXd gu(sh.width);
    for (int i = 0; i < sh.width; ++i)
      gu(i) = inv_sqrt_m * activate_deriv(sh.activation, pre[l](i)) * gx(i);
    RowMajorMutableMap gw(out.grad.data() + sh.layer_offset(l),
                          sh.layer_rows(l), sh.layer_cols(l));
    gw.noalias() = gu * inputs[l].transpose();
    if (l > 0) {
      RowMajorMap w(p.theta.data() + sh.layer_offset(l), sh.layer_rows(l),
                    sh.layer_cols(l));
      gx.noalias() = w.transpose() * gu;
    }
  }
  return out;
}

Eigen::VectorXd project_theta(const Eigen::VectorXd& theta,
                              const ProjectionBall& ball) {
  if (theta.size() != ball.center.size())
    throw std::invalid_argument("project_theta: dimension mismatch");
  const double dist = (theta - ball.center).norm();
  if (dist <= ball.radius) return theta;
  return ball.center + (ball.radius / dist) * (theta - ball.center);
}

ValueNetParams project(ValueNetParams p, const ProjectionBall& ball) {
  p.theta = project_theta(p.theta, ball);
  return p;
}

}  // namespace ltac
