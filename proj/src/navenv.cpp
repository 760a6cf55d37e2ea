#include "ltac/navenv.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ltac/errors.hpp"

namespace ltac {

void NavConfig::validate() const {
  if (n_agents < 1) throw ConfigError("env.n_agents", "must be >= 1");
  if (!mass.empty() && static_cast<int>(mass.size()) != n_agents)
    throw ConfigError("env.mass", "length must equal n_agents");
  for (double m : mass)
    if (m <= 0.0) throw ConfigError("env.mass", "must be positive");
  if (!v_max.empty() && static_cast<int>(v_max.size()) != n_agents)
    throw ConfigError("env.v_max", "length must equal n_agents");
  for (double v : v_max)
    if (v <= 0.0) throw ConfigError("env.v_max", "must be positive");
  if (damping < 0.0 || damping >= 1.0)
    throw ConfigError("env.damping", "must be in [0, 1)");
  if (dt <= 0.0) throw ConfigError("env.dt", "must be positive");
  if (force_mag <= 0.0) throw ConfigError("env.force_mag", "must be positive");
  if (d_coll <= 0.0) throw ConfigError("env.d_coll", "must be positive");
  if (bound <= 0.0) throw ConfigError("env.bound", "must be positive");
  if (done_threshold <= 0.0)
    throw ConfigError("env.done_threshold", "must be positive");
  if (max_steps < 1) throw ConfigError("env.max_steps", "must be >= 1");
}

NavState nav_reset(const NavConfig& cfg, RngStream& rng) {
  NavState st;
  st.positions.resize(cfg.n_agents);
  st.velocities.assign(cfg.n_agents, Eigen::Vector2d::Zero());
  st.landmarks.resize(cfg.n_agents);
  for (int i = 0; i < cfg.n_agents; ++i) {
    st.positions[i].x() = rng.uniform(-cfg.bound, cfg.bound);
    st.positions[i].y() = rng.uniform(-cfg.bound, cfg.bound);
  }
  for (int i = 0; i < cfg.n_agents; ++i) {
    st.landmarks[i].x() = rng.uniform(-cfg.bound, cfg.bound);
    st.landmarks[i].y() = rng.uniform(-cfg.bound, cfg.bound);
  }
  st.step_count = 0;
  return st;
}

namespace {

Eigen::Vector2d action_force(int a, double mag) {
  switch (a) {
    case kActionUp:
      return {0.0, mag};
    case kActionDown:
      return {0.0, -mag};
    case kActionLeft:
      return {-mag, 0.0};
    case kActionRight:
      return {mag, 0.0};
    default:
      return {0.0, 0.0};
  }
}

}  // namespace

NavStepResult nav_step(const NavConfig& cfg, const NavState& st,
                       const JointAction& a) {
  if (static_cast<int>(a.size()) != cfg.n_agents)
    throw std::invalid_argument("nav_step: action length mismatch");
  for (int ai : a)
    if (ai < 0 || ai >= kNavActionCount)
      throw std::invalid_argument("nav_step: invalid action index " +
                                  std::to_string(ai));

  NavStepResult out;
  out.state = st;
  for (int i = 0; i < cfg.n_agents; ++i) {
    if (a[i] == kActionStay) continue;
    Eigen::Vector2d v = (1.0 - cfg.damping) * st.velocities[i] +
                        (cfg.dt / cfg.mass_of(i)) *
                            action_force(a[i], cfg.force_mag);
    const double speed = v.norm();
    if (speed > cfg.v_max_of(i)) v *= cfg.v_max_of(i) / speed;
    out.state.velocities[i] = v;
    Eigen::Vector2d p = st.positions[i] + cfg.dt * v;
    p.x() = std::clamp(p.x(), -cfg.bound, cfg.bound);
    p.y() = std::clamp(p.y(), -cfg.bound, cfg.bound);
    out.state.positions[i] = p;
  }
  out.state.step_count = st.step_count + 1;

  out.rewards.resize(cfg.n_agents);
  double total_dist = 0.0;
  for (int i = 0; i < cfg.n_agents; ++i) {
    const double dist =
        (out.state.positions[i] - out.state.landmarks[i]).norm();
    total_dist += dist;
    int collisions = 0;
    for (int j = 0; j < cfg.n_agents; ++j) {
      if (j == i) continue;
      if ((out.state.positions[i] - out.state.positions[j]).norm() <
          cfg.d_coll)
        ++collisions;
    }
    out.rewards(i) = -dist - collisions + cfg.reward_shift;
  }
  out.done = total_dist < cfg.done_threshold ||
             out.state.step_count >= cfg.max_steps;
  return out;
}

Eigen::VectorXd flatten_state(const NavConfig& cfg, const NavState& st) {
  Eigen::VectorXd s(nav_state_dim(cfg));
  const double scale =
      cfg.scale_state ? 1.0 / (2.0 * std::sqrt(double(cfg.n_agents))) : 1.0;
  for (int i = 0; i < cfg.n_agents; ++i) {
    s(2 * i) = st.positions[i].x() * scale;
    s(2 * i + 1) = st.positions[i].y() * scale;
  }
  const int off = 2 * cfg.n_agents;
  for (int i = 0; i < cfg.n_agents; ++i) {
    s(off + 2 * i) = st.landmarks[i].x() * scale;
    s(off + 2 * i + 1) = st.landmarks[i].y() * scale;
  }
  return s;
}

NavState unflatten_state(const NavConfig& cfg, const Eigen::VectorXd& flat) {
  if (flat.size() != nav_state_dim(cfg))
    throw std::invalid_argument("unflatten_state: length mismatch");
  const double scale =
      cfg.scale_state ? 2.0 * std::sqrt(double(cfg.n_agents)) : 1.0;
  NavState st;
  st.positions.resize(cfg.n_agents);
  st.velocities.assign(cfg.n_agents, Eigen::Vector2d::Zero());
  st.landmarks.resize(cfg.n_agents);
  const int off = 2 * cfg.n_agents;
  for (int i = 0; i < cfg.n_agents; ++i) {
    st.positions[i] = {flat(2 * i) * scale, flat(2 * i + 1) * scale};
    st.landmarks[i] = {flat(off + 2 * i) * scale, flat(off + 2 * i + 1) * scale};
  }
  return st;
}

Eigen::VectorXd NavEnvModel::reset(RngStream& rng) {
  state_ = nav_reset(cfg_, rng);
  return flatten_state(cfg_, state_);
}

EnvStepResult NavEnvModel::step(std::span<const int> action, RngStream&) {
  JointAction a(action.begin(), action.end());
  NavStepResult r = nav_step(cfg_, state_, a);
  state_ = std::move(r.state);
  return {flatten_state(cfg_, state_), std::move(r.rewards), r.done};
}

}  // namespace ltac
