#pragma once

#include <optional>
#include <ostream>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "ltac/diagnostics.hpp"
#include "ltac/topology.hpp"

namespace ltac {

enum class MessageKind { PolicyParameter, Reward, CriticParameter };

// Typed count of everything that crossed an edge. The reward and critic
// counters exist to prove structurally that no such payload is ever sent.
struct MessageLedger {
  long policy_parameter = 0;
  long reward = 0;
  long critic_parameter = 0;
  long comm_rounds = 0;

  void record(MessageKind kind, long count) {
    switch (kind) {
      case MessageKind::PolicyParameter:
        policy_parameter += count;
        break;
      case MessageKind::Reward:
        reward += count;
        break;
      case MessageKind::CriticParameter:
        critic_parameter += count;
        break;
    }
  }
  long total() const { return policy_parameter + reward + critic_parameter; }
};

struct TrainingHistory {
  nlohmann::json config_echo;
  Graph graph;
  Eigen::VectorXd omega_initial;
  Eigen::MatrixXd omegas_final;  // N x d; empty when no round was run
  bool has_final = false;
  std::vector<RoundMetrics> metrics;
  MessageLedger ledger;
  // Per-round invariant residuals. Mean preservation has one extra entry for
  // the initial bridge state.
  std::vector<double> mean_preservation_residuals;
  std::vector<double> omega_bar_residuals;
  double max_score_norm = 0.0;
  std::optional<CompactTrace> compact;  // only when caching was enabled

  Eigen::VectorXd omega_mean() const;
};

// Fixed column set:
// round,comm_rounds,return_mean,consensus_error,critic_loss,dk_surrogate,
// grad_norm_est,wall_time_s
void write_metrics_csv(const TrainingHistory& h, std::ostream& out);

// Everything needed to resume evaluation: config echo, snapshots, ledger,
// metrics, residuals. The compact-form cache stays in memory only.
nlohmann::json history_to_json(const TrainingHistory& h);
TrainingHistory history_from_json(const nlohmann::json& j);

}  // namespace ltac
