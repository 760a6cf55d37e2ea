#include "ltac/history.hpp"

#include <iomanip>

namespace ltac {

namespace {

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  Eigen::VectorXd v(j.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = j[i].get<double>();
  return v;
}

}  // namespace

Eigen::VectorXd TrainingHistory::omega_mean() const {
  if (!has_final) return omega_initial;
  return omegas_final.colwise().mean().transpose();
}

void write_metrics_csv(const TrainingHistory& h, std::ostream& out) {
  out << "round,comm_rounds,return_mean,consensus_error,critic_loss,"
         "dk_surrogate,grad_norm_est,wall_time_s\n";
  out << std::setprecision(17);
  for (const RoundMetrics& m : h.metrics) {
    out << m.round << ',' << m.comm_rounds << ',' << m.return_mean << ','
        << m.consensus_error << ',' << m.critic_loss << ',' << m.dk_surrogate
        << ',' << m.grad_norm_est << ',' << m.wall_time_s << '\n';
  }
}

nlohmann::json history_to_json(const TrainingHistory& h) {
  nlohmann::json j;
  j["config"] = h.config_echo;
  j["graph"] = graph_to_json(h.graph);
  j["initial"] = {{"omega", vector_to_json(h.omega_initial)}};
  if (h.has_final) {
    nlohmann::json omegas = nlohmann::json::array();
    for (Eigen::Index r = 0; r < h.omegas_final.rows(); ++r)
      omegas.push_back(vector_to_json(h.omegas_final.row(r).transpose()));
    j["final"] = {{"omegas", omegas},
                  {"omega_mean", vector_to_json(h.omega_mean())}};
  }
  nlohmann::json metrics = nlohmann::json::array();
  for (const RoundMetrics& m : h.metrics) {
    metrics.push_back({{"round", m.round},
                       {"comm_rounds", m.comm_rounds},
                       {"return_mean", m.return_mean},
                       {"consensus_error", m.consensus_error},
                       {"critic_loss", m.critic_loss},
                       {"dk_surrogate", m.dk_surrogate},
                       {"grad_norm_est", m.grad_norm_est},
                       {"wall_time_s", m.wall_time_s}});
  }
  j["metrics"] = metrics;
  j["ledger"] = {{"policy_parameter", h.ledger.policy_parameter},
                 {"reward", h.ledger.reward},
                 {"critic_parameter", h.ledger.critic_parameter},
                 {"comm_rounds", h.ledger.comm_rounds}};
  j["invariants"] = {
      {"mean_preservation_residuals", h.mean_preservation_residuals},
      {"omega_bar_residuals", h.omega_bar_residuals}};
  j["max_score_norm"] = h.max_score_norm;
  return j;
}

TrainingHistory history_from_json(const nlohmann::json& j) {
  TrainingHistory h;
  h.config_echo = j.at("config");
  h.graph = graph_from_json(j.at("graph"));
  h.omega_initial = vector_from_json(j.at("initial").at("omega"));
  if (j.contains("final")) {
    const auto& omegas = j["final"].at("omegas");
    const Eigen::Index rows = omegas.size();
    const Eigen::Index cols = rows > 0 ? omegas[0].size() : 0;
    h.omegas_final.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      h.omegas_final.row(r) = vector_from_json(omegas[r]).transpose();
    h.has_final = true;
  }
  for (const auto& m : j.at("metrics")) {
    RoundMetrics rm;
    rm.round = m.at("round").get<int>();
    rm.comm_rounds = m.at("comm_rounds").get<long>();
    rm.return_mean = m.at("return_mean").get<double>();
    rm.consensus_error = m.at("consensus_error").get<double>();
    rm.critic_loss = m.at("critic_loss").get<double>();
    rm.dk_surrogate = m.at("dk_surrogate").get<double>();
    rm.grad_norm_est = m.at("grad_norm_est").get<double>();
    rm.wall_time_s = m.at("wall_time_s").get<double>();
    h.metrics.push_back(rm);
  }
  const auto& ledger = j.at("ledger");
  h.ledger.policy_parameter = ledger.at("policy_parameter").get<long>();
  h.ledger.reward = ledger.at("reward").get<long>();
  h.ledger.critic_parameter = ledger.at("critic_parameter").get<long>();
  h.ledger.comm_rounds = ledger.at("comm_rounds").get<long>();
  if (j.contains("invariants")) {
    h.mean_preservation_residuals =
        j["invariants"].at("mean_preservation_residuals")
            .get<std::vector<double>>();
    h.omega_bar_residuals =
        j["invariants"].at("omega_bar_residuals").get<std::vector<double>>();
  }
  h.max_score_norm = j.value("max_score_norm", 0.0);
  return h;
}

}  // namespace ltac
