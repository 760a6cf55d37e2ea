#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "ltac/env_model.hpp"
#include "ltac/policynet.hpp"
#include "ltac/rng.hpp"

namespace ltac {

// One sample from the owning agent's chain; r_own is that agent's reward.
struct Transition {
  Eigen::VectorXd s;
  JointAction a;
  double r_own = 0.0;
  Eigen::VectorXd s_next;
};

// Same sample with every agent's reward; used by diagnostics probes only and
// never transmitted between agents.
struct JointTransition {
  Eigen::VectorXd s;
  JointAction a;
  Eigen::VectorXd rewards;
  Eigen::VectorXd s_next;
};

struct CollectResult {
  std::vector<Transition> transitions;
  std::vector<int> resets_after;  // indices q where a reset followed sample q
};

struct JointCollectResult {
  std::vector<JointTransition> transitions;
  std::vector<int> resets_after;
};

// A continuing sampling chain over a private environment replica. The chain
// survives episode boundaries: on done the environment resets and the reset
// step index is logged. All draws (resets, actions, env noise) come from the
// cursor's stream, so (seed, params, count) fully determine a batch.
class ChainCursor {
 public:
  ChainCursor(std::unique_ptr<EnvModel> env, RngStream rng, int owner_agent);

  const Eigen::VectorXd& state() const { return state_; }
  int owner() const { return owner_; }
  long total_steps() const { return steps_; }
  const std::vector<long>& reset_log() const { return reset_steps_; }
  EnvModel& env() { return *env_; }

  // Advances one step under the policy; returns the sampled transition with
  // all rewards. Applies the episode reset when the step reports done.
  JointTransition advance(const PolicyParams& params);

 private:
  std::unique_ptr<EnvModel> env_;
  Eigen::VectorXd state_;
  RngStream rng_;
  int owner_ = 0;
  long steps_ = 0;
  std::vector<long> reset_steps_;
  bool pending_reset_ = false;
  friend CollectResult collect(ChainCursor&, const PolicyParams&, int);
  friend JointCollectResult collect_joint(ChainCursor&, const PolicyParams&,
                                          int);
};

// Advances the chain without recording, approximating the stationary
// distribution of the policy-induced chain.
void burn_in(ChainCursor& cursor, const PolicyParams& params, int length);

// Records `count` consecutive transitions (owner rewards only).
CollectResult collect(ChainCursor& cursor, const PolicyParams& params,
                      int count);

// Same chain advance, keeping every agent's reward.
JointCollectResult collect_joint(ChainCursor& cursor,
                                 const PolicyParams& params, int count);

}  // namespace ltac
