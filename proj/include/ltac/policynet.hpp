#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "ltac/navenv.hpp"
#include "ltac/rng.hpp"

namespace ltac {

// Factored joint policy: one relu MLP block per agent mapping the global
// state to that agent's action logits. Parameters live in one flat vector,
// ordered agent by agent; within an agent, layer by layer; within a layer,
// weight matrix row-major then bias. Agent j's block depends only on
// (s, a_j), so the joint score is block-sparse by construction.
struct PolicyLayout {
  int n_agents = 0;
  int input_dim = 0;
  std::vector<int> action_counts;
  std::vector<int> hidden;  // hidden widths; may be empty (linear block)
  int dim = 0;              // total flat parameter count

  // widths of block j: input_dim, hidden..., action_counts[j]
  std::vector<int> block_widths(int agent) const;
  int block_offset(int agent) const { return block_offsets_[agent]; }
  int block_dim(int agent) const {
    return block_offsets_[agent + 1] - block_offsets_[agent];
  }

  static PolicyLayout make(int n_agents, int input_dim,
                           std::vector<int> action_counts,
                           std::vector<int> hidden);

 private:
  std::vector<int> block_offsets_;
};

struct PolicyParams {
  PolicyLayout layout;
  Eigen::VectorXd flat;
};

PolicyParams make_policy(PolicyLayout layout);  // zero-initialized

// Fills all entries (weights and biases) i.i.d. N(0, stddev^2) in flat order.
void randomize_policy(PolicyParams& p, std::uint64_t seed, double stddev);

// Two hidden layers of the given width, scaled-normal init.
PolicyParams init_policy(std::uint64_t seed, int n_agents, int input_dim,
                         const std::vector<int>& action_counts, int hidden,
                         double init_std = 0.1);

// Per-agent softmax action distributions at state s.
std::vector<Eigen::VectorXd> action_distribution(const PolicyParams& p,
                                                 const Eigen::VectorXd& s);

JointAction sample_joint(const PolicyParams& p, const Eigen::VectorXd& s,
                         RngStream& rng);
JointAction argmax_joint(const PolicyParams& p, const Eigen::VectorXd& s);

double log_prob(const PolicyParams& p, const Eigen::VectorXd& s,
                const JointAction& a);

// Score function: gradient of the joint log probability with respect to the
// full flat parameter vector. Block j receives (onehot(a_j) - pi_j)
// backpropagated through agent j's network.
Eigen::VectorXd score(const PolicyParams& p, const Eigen::VectorXd& s,
                      const JointAction& a);

}  // namespace ltac
