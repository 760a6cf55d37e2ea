#pragma once

#include <span>

#include <Eigen/Dense>

#include "ltac/rng.hpp"

namespace ltac {

struct EnvStepResult {
  Eigen::VectorXd state;    // flattened global state
  Eigen::VectorXd rewards;  // one entry per agent
  bool done = false;
};

// Minimal environment contract for chain sampling. Implementations own their
// internal state; step() advances it and reports the flattened global state.
class EnvModel {
 public:
  virtual ~EnvModel() = default;
  virtual int state_dim() const = 0;
  virtual int agent_count() const = 0;
  virtual int action_count(int agent) const = 0;
  virtual Eigen::VectorXd reset(RngStream& rng) = 0;
  virtual EnvStepResult step(std::span<const int> action, RngStream& rng) = 0;
};

}  // namespace ltac
