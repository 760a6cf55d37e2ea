#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ltac/sampler.hpp"
#include "ltac/valuenet.hpp"

namespace ltac {

// delta = r + gamma * V(s') - V(s), both values at the same theta.
double td_error(const ValueNetParams& theta, const Transition& tr,
                double gamma);

// (1/batch) * sum_j delta_j * dV(s_j)/dtheta, everything evaluated at the
// given theta. The bootstrapped target is never differentiated.
Eigen::VectorXd batch_semi_gradient(const ValueNetParams& theta,
                                    std::span<const Transition> batch,
                                    double gamma);

struct CriticRunResult {
  ValueNetParams theta_out;          // snapshot at the uniformly drawn index
  std::vector<double> td_loss_trace; // mean squared TD error per iteration,
                                     // at the pre-update theta
};

// Local TD loop: `iterations` projected semi-gradient updates on consecutive
// `batch_size`-sample segments of the cursor's chain. The returned parameters
// are the post-update snapshot at an index drawn uniformly from
// {1, ..., iterations} before the loop starts; the chain itself always runs
// to the end, so the cursor is left at the final state.
CriticRunResult decentralized_td(ChainCursor& cursor, const PolicyParams& phi,
                                 const ValueNetParams& theta_init,
                                 int batch_size, double eta, int iterations,
                                 const ProjectionBall& ball, RngStream& rng,
                                 double gamma);

}  // namespace ltac
