#pragma once

#include <deque>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "ltac/config.hpp"
#include "ltac/critic.hpp"
#include "ltac/history.hpp"
#include "ltac/policynet.hpp"
#include "ltac/sampler.hpp"
#include "ltac/topology.hpp"
#include "ltac/valuenet.hpp"

namespace ltac {

// Edge-bridge state; row r is z_{ij} for directed slot r of the structures.
struct BridgeVars {
  Eigen::MatrixXd z;  // m x d
};

// All slots start at rho * omega0, which balances the bridge sum against the
// parameter average from round zero on.
BridgeVars init_bridge(const GraphStructures& gs,
                       const Eigen::VectorXd& omega0, double rho);

// rho * |N_i| * omega_anchor - sum of the agent's bridge rows.
Eigen::VectorXd penalty_term(const Eigen::VectorXd& omega_anchor,
                             const Eigen::Ref<const Eigen::MatrixXd>& z_rows,
                             double rho);

// phi += alpha * g - beta * penalty
void local_actor_step(Eigen::VectorXd& phi, const Eigen::VectorXd& g,
                      double alpha, double beta,
                      const Eigen::VectorXd& penalty);

// One synchronous communication round. Each agent i transmits
// m_ij = z_ij - 2*rho*omega_i' to every neighbor j; every slot then updates
// as z_ij' = (z_ij - m_ji) / 2 from the received message only. All updates
// read the pre-round bridge state (double-buffered). Counts one comm round
// and one policy-parameter message per directed slot in the ledger.
void communicate(BridgeVars& bridge, const Eigen::MatrixXd& omega_next,
                 const GraphStructures& gs, double rho, MessageLedger& ledger,
                 bool sign_flip = false);

// Outer-loop driver. Construction wires the graph, parameter vectors, bridge
// state, critics, and sampling chains from the config and seed; run_round()
// executes one full round (local steps for every agent, then one
// communication round and the diagnostics row).
class Trainer {
 public:
  explicit Trainer(RunConfig cfg);

  void run_round();
  int rounds_done() const { return rounds_done_; }

  const GraphStructures& structures() const { return gs_; }
  const Eigen::MatrixXd& omegas() const { return omegas_; }
  const Eigen::MatrixXd& bridge_z() const { return bridge_.z; }
  Eigen::VectorXd omega_bar() const {
    return omegas_.colwise().mean().transpose();
  }
  const std::vector<ValueNetParams>& critics() const { return thetas_; }
  const PolicyLayout& policy_layout() const { return layout_; }
  const std::vector<RoundMetrics>& metrics() const { return history_.metrics; }

  // Test-only fault hook; breaks the bridge update so the invariant checks
  // must notice.
  void set_bridge_sign_flip(bool flip) { bridge_sign_flip_ = flip; }

  TrainingHistory take_history();

 private:
  Eigen::VectorXd actor_gradient(int agent, PolicyParams& phi,
                                 double& return_accum);
  double estimate_grad_norm(double& critic_loss_out);

  RunConfig cfg_;
  GraphStructures gs_;
  int dim_ = 0;
  PolicyLayout layout_;  // actor-critic mode only
  Eigen::MatrixXd omegas_;
  BridgeVars bridge_;
  std::vector<ValueNetParams> thetas_;
  ProjectionBall ball_;
  std::vector<std::unique_ptr<ChainCursor>> cursors_;
  std::vector<RngStream> agent_rngs_;
  std::unique_ptr<ChainCursor> eval_cursor_;
  std::deque<double> return_window_;
  TrainingHistory history_;
  int rounds_done_ = 0;
  bool bridge_sign_flip_ = false;
};

TrainingHistory train(const RunConfig& cfg);

}  // namespace ltac
