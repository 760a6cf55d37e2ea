#include "ltac/sampler.hpp"

#include <stdexcept>

namespace ltac {

ChainCursor::ChainCursor(std::unique_ptr<EnvModel> env, RngStream rng,
                         int owner_agent)
    : env_(std::move(env)), rng_(std::move(rng)), owner_(owner_agent) {
  if (!env_) throw std::invalid_argument("ChainCursor: null environment");
  if (owner_ < 0 || owner_ >= env_->agent_count())
    throw std::invalid_argument("ChainCursor: owner out of range");
  state_ = env_->reset(rng_);
}

JointTransition ChainCursor::advance(const PolicyParams& params) {
  JointTransition tr;
  tr.s = state_;
  tr.a = sample_joint(params, state_, rng_);
  EnvStepResult step = env_->step(tr.a, rng_);
  tr.rewards = std::move(step.rewards);
  tr.s_next = step.state;
  state_ = std::move(step.state);
  ++steps_;
  if (step.done) {
    state_ = env_->reset(rng_);
    reset_steps_.push_back(steps_);
    pending_reset_ = true;
  }
  return tr;
}

void burn_in(ChainCursor& cursor, const PolicyParams& params, int length) {
  if (length < 0) throw std::invalid_argument("burn_in: negative length");
  for (int i = 0; i < length; ++i) cursor.advance(params);
}

CollectResult collect(ChainCursor& cursor, const PolicyParams& params,
                      int count) {
  if (count < 1) throw std::invalid_argument("collect: count >= 1");
  CollectResult out;
  out.transitions.reserve(count);
  cursor.pending_reset_ = false;
  for (int q = 0; q < count; ++q) {
    JointTransition tr = cursor.advance(params);
    out.transitions.push_back(Transition{std::move(tr.s), std::move(tr.a),
                                         tr.rewards(cursor.owner()),
                                         std::move(tr.s_next)});
    if (cursor.pending_reset_) {
      out.resets_after.push_back(q);
      cursor.pending_reset_ = false;
    }
  }
  return out;
}

JointCollectResult collect_joint(ChainCursor& cursor,
                                 const PolicyParams& params, int count) {
  if (count < 1) throw std::invalid_argument("collect_joint: count >= 1");
  JointCollectResult out;
  out.transitions.reserve(count);
  cursor.pending_reset_ = false;
  for (int q = 0; q < count; ++q) {
    out.transitions.push_back(cursor.advance(params));
    if (cursor.pending_reset_) {
      out.resets_after.push_back(q);
      cursor.pending_reset_ = false;
    }
  }
  return out;
}

}  // namespace ltac
