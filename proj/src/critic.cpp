#include "ltac/critic.hpp"

#include <stdexcept>

namespace ltac {

double td_error(const ValueNetParams& theta, const Transition& tr,
                double gamma) {
  return tr.r_own + gamma * value(theta, tr.s_next) - value(theta, tr.s);
}

Eigen::VectorXd batch_semi_gradient(const ValueNetParams& theta,
                                    std::span<const Transition> batch,
                                    double gamma) {
  if (batch.empty())
    throw std::invalid_argument("batch_semi_gradient: empty batch");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(theta.theta.size());
  for (const Transition& tr : batch) {
    ValueGradResult vg = value_grad(theta, tr.s);
    const double delta =
        tr.r_own + gamma * value(theta, tr.s_next) - vg.value;
    g.noalias() += delta * vg.grad;
  }
  return g / static_cast<double>(batch.size());
}

CriticRunResult decentralized_td(ChainCursor& cursor, const PolicyParams& phi,
                                 const ValueNetParams& theta_init,
                                 int batch_size, double eta, int iterations,
                                 const ProjectionBall& ball, RngStream& rng,
                                 double gamma) {
  if (batch_size < 1)
    throw std::invalid_argument("decentralized_td: batch_size >= 1");
  if (iterations < 1)
    throw std::invalid_argument("decentralized_td: iterations >= 1");
  if (eta < 0.0) throw std::invalid_argument("decentralized_td: eta >= 0");

  // Snapshot index decided up front so the draw costs O(1) memory.
  const int snapshot_at = 1 + rng.uniform_int(iterations);

  CriticRunResult out;
  ValueNetParams theta = theta_init;
  for (int it = 1; it <= iterations; ++it) {
    CollectResult batch = collect(cursor, phi, batch_size);
    double loss = 0.0;
    for (const Transition& tr : batch.transitions) {
      const double d = td_error(theta, tr, gamma);
      loss += d * d;
    }
    out.td_loss_trace.push_back(loss / batch_size);
    const Eigen::VectorXd g =
        batch_semi_gradient(theta, batch.transitions, gamma);
    theta.theta = project_theta(theta.theta + eta * g, ball);
    if (it == snapshot_at) out.theta_out = theta;
  }
  return out;
}

}  // namespace ltac
