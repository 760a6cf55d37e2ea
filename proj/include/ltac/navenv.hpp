#pragma once

#include <vector>

#include <Eigen/Dense>

#include "ltac/env_model.hpp"
#include "ltac/rng.hpp"

namespace ltac {

using JointAction = std::vector<int>;

// Cooperative navigation arena: N damped point masses on [-bound, bound]^2,
// one landmark per agent, discrete force actions.
struct NavConfig {
  int n_agents = 5;
  std::vector<double> mass;   // per agent; empty means 1.0 each
  std::vector<double> v_max;  // per agent; empty means 1.0 each
  double damping = 0.25;
  double dt = 0.1;
  double force_mag = 1.0;
  double d_coll = 0.1;
  double bound = 1.0;
  double done_threshold = 0.15;
  int max_steps = 25;
  bool scale_state = true;  // rescale flattened state to unit-norm range
  double reward_shift = 0.0;

  double mass_of(int i) const { return mass.empty() ? 1.0 : mass[i]; }
  double v_max_of(int i) const { return v_max.empty() ? 1.0 : v_max[i]; }
  void validate() const;  // throws ConfigError naming the offending key
};

// Actions: 0 = +y, 1 = -y, 2 = -x, 3 = +x, 4 = stay.
inline constexpr int kActionUp = 0;
inline constexpr int kActionDown = 1;
inline constexpr int kActionLeft = 2;
inline constexpr int kActionRight = 3;
inline constexpr int kActionStay = 4;
inline constexpr int kNavActionCount = 5;

struct NavState {
  std::vector<Eigen::Vector2d> positions;
  std::vector<Eigen::Vector2d> velocities;
  std::vector<Eigen::Vector2d> landmarks;
  int step_count = 0;
};

// Positions and landmarks uniform in the arena, velocities zero, landmark i
// assigned to agent i. Draw order: agent positions, then landmarks, each x
// before y.
NavState nav_reset(const NavConfig& cfg, RngStream& rng);

struct NavStepResult {
  NavState state;
  Eigen::VectorXd rewards;
  bool done = false;
};

// One synchronous step of the damped point-mass dynamics. Stay actions leave
// the agent's position and velocity untouched. Rewards are evaluated at the
// post-move configuration.
NavStepResult nav_step(const NavConfig& cfg, const NavState& st,
                       const JointAction& a);

// Flattens to [p_0x, p_0y, ..., l_0x, l_0y, ...]; when cfg.scale_state is set
// the vector is scaled by 1/(2*sqrt(N)) so its norm never exceeds 1.
Eigen::VectorXd flatten_state(const NavConfig& cfg, const NavState& st);

// Inverse of flatten_state for positions and landmarks (velocities are not
// part of the flattened state). step_count is left at zero.
NavState unflatten_state(const NavConfig& cfg, const Eigen::VectorXd& flat);

inline int nav_state_dim(const NavConfig& cfg) { return 4 * cfg.n_agents; }

class NavEnvModel final : public EnvModel {
 public:
  explicit NavEnvModel(NavConfig cfg) : cfg_(std::move(cfg)) {}
  int state_dim() const override { return nav_state_dim(cfg_); }
  int agent_count() const override { return cfg_.n_agents; }
  int action_count(int) const override { return kNavActionCount; }
  Eigen::VectorXd reset(RngStream& rng) override;
  EnvStepResult step(std::span<const int> action, RngStream& rng) override;
  const NavState& nav_state() const { return state_; }

 private:
  NavConfig cfg_;
  NavState state_;
};

}  // namespace ltac
