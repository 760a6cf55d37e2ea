#include "ltac/ltadmm.hpp"

#include <chrono>
#include <stdexcept>

#include "ltac/diagnostics.hpp"
#include "ltac/errors.hpp"
#include "ltac/navenv.hpp"

namespace ltac {

namespace {

// Salt tags for stream derivation; agent-indexed streams add the index.
constexpr std::uint64_t kSaltPolicy = 1;
constexpr std::uint64_t kSaltCritic = 2;
constexpr std::uint64_t kSaltCursor = 3;
constexpr std::uint64_t kSaltAgent = 4;
constexpr std::uint64_t kSaltEval = 5;

constexpr int kReturnWindow = 20;

}  // namespace

BridgeVars init_bridge(const GraphStructures& gs,
                       const Eigen::VectorXd& omega0, double rho) {
  BridgeVars b;
  b.z.resize(gs.m, omega0.size());
  for (int s = 0; s < gs.m; ++s) b.z.row(s) = rho * omega0.transpose();
  return b;
}

Eigen::VectorXd penalty_term(const Eigen::VectorXd& omega_anchor,
                             const Eigen::Ref<const Eigen::MatrixXd>& z_rows,
                             double rho) {
  if (z_rows.cols() != omega_anchor.size())
    throw std::invalid_argument("penalty_term: dimension mismatch");
  return rho * static_cast<double>(z_rows.rows()) * omega_anchor -
         z_rows.colwise().sum().transpose();
}

void local_actor_step(Eigen::VectorXd& phi, const Eigen::VectorXd& g,
                      double alpha, double beta,
                      const Eigen::VectorXd& penalty) {
  if (g.size() != phi.size() || penalty.size() != phi.size())
    throw std::invalid_argument("local_actor_step: dimension mismatch");
  phi += alpha * g - beta * penalty;
}

void communicate(BridgeVars& bridge, const Eigen::MatrixXd& omega_next,
                 const GraphStructures& gs, double rho, MessageLedger& ledger,
                 bool sign_flip) {
  if (bridge.z.rows() != gs.m || omega_next.rows() != gs.n ||
      bridge.z.cols() != omega_next.cols())
    throw TopologyError("communicate: bridge/graph shape mismatch");

  // Messages leave from the pre-round state; the update is synchronous.
  Eigen::MatrixXd messages(gs.m, bridge.z.cols());
  for (int s = 0; s < gs.m; ++s) {
    const int sender = gs.slots[s].first;
    messages.row(s) =
        bridge.z.row(s) - 2.0 * rho * omega_next.row(sender);
  }
  const double sign = sign_flip ? 1.0 : -1.0;
  Eigen::MatrixXd z_next(gs.m, bridge.z.cols());
  for (int s = 0; s < gs.m; ++s)
    z_next.row(s) = 0.5 * (bridge.z.row(s) + sign * messages.row(gs.twin[s]));
  bridge.z = std::move(z_next);

  ledger.record(MessageKind::PolicyParameter, gs.m);
  ledger.comm_rounds += 1;
}

Trainer::Trainer(RunConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  gs_ = build_structures(cfg_.graph);
  const int n = cfg_.graph.n;

  Eigen::VectorXd omega0;
  if (cfg_.train.oracle == OracleMode::Quadratic) {
    dim_ = static_cast<int>(cfg_.quadratic.targets.cols());
    omega0 = Eigen::VectorXd::Zero(dim_);
  } else {
    const int d_s = nav_state_dim(cfg_.env);
    std::vector<int> action_counts(n, kNavActionCount);
    PolicyParams p0 = init_policy(
        RngStream::derive(cfg_.seed, {kSaltPolicy}).next_u64(), n, d_s,
        action_counts, cfg_.policy.hidden);
    layout_ = p0.layout;
    dim_ = layout_.dim;
    omega0 = std::move(p0.flat);

    ValueNetParams theta0 = init_valuenet(
        RngStream::derive(cfg_.seed, {kSaltCritic}).next_u64(),
        cfg_.critic.width, cfg_.critic.depth, d_s, cfg_.critic.activation);
    ball_ = ProjectionBall{theta0.theta, cfg_.critic.radius};
    thetas_.assign(n, theta0);

    const std::uint64_t sample_seed =
        cfg_.sampler.has_seed ? cfg_.sampler.seed : cfg_.seed;
    for (int i = 0; i < n; ++i) {
      cursors_.push_back(std::make_unique<ChainCursor>(
          std::make_unique<NavEnvModel>(cfg_.env),
          RngStream::derive(sample_seed,
                            {kSaltCursor, static_cast<std::uint64_t>(i)}),
          i));
      agent_rngs_.push_back(RngStream::derive(
          cfg_.seed, {kSaltAgent, static_cast<std::uint64_t>(i)}));
    }
    eval_cursor_ = std::make_unique<ChainCursor>(
        std::make_unique<NavEnvModel>(cfg_.env),
        RngStream::derive(sample_seed, {kSaltEval}), 0);
  }

  omegas_.resize(n, dim_);
  for (int i = 0; i < n; ++i) omegas_.row(i) = omega0.transpose();
  bridge_ = init_bridge(gs_, omega0, cfg_.train.rho);

  history_.config_echo = echo_config(cfg_);
  history_.graph = cfg_.graph;
  history_.omega_initial = omega0;
  history_.mean_preservation_residuals.push_back(
      mean_preservation_residual(bridge_.z, omegas_, gs_, cfg_.train.rho));
  if (cfg_.diag.cache_compact_form) {
    history_.compact = CompactTrace{};
    history_.compact->alpha = cfg_.train.alpha;
    history_.compact->beta = cfg_.train.beta;
    history_.compact->rho = cfg_.train.rho;
    history_.compact->tau = cfg_.train.local_steps;
  }
}

Eigen::VectorXd Trainer::actor_gradient(int agent, PolicyParams& phi,
                                        double& return_accum) {
  ChainCursor& cursor = *cursors_[agent];
  burn_in(cursor, phi, cfg_.sampler.burn_in);
  CriticRunResult res = decentralized_td(
      cursor, phi, thetas_[agent], cfg_.critic.batch, cfg_.critic.eta,
      cfg_.critic.iterations, ball_, agent_rngs_[agent], cfg_.critic.gamma);
  thetas_[agent] = std::move(res.theta_out);

  CollectResult batch = collect(cursor, phi, cfg_.train.batch);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dim_);
  const double clip = cfg_.policy.score_clip;
  for (const Transition& tr : batch.transitions) {
    const double delta = td_error(thetas_[agent], tr, cfg_.critic.gamma);
    Eigen::VectorXd psi = score(phi, tr.s, tr.a);
    const double norm = psi.norm();
    if (norm > history_.max_score_norm) history_.max_score_norm = norm;
    if (clip > 0.0 && norm > clip) psi *= clip / norm;
    g.noalias() += delta * psi;
    return_accum += tr.r_own;
  }
  return g / static_cast<double>(cfg_.train.batch);
}

double Trainer::estimate_grad_norm(double& critic_loss_out) {
  if (cfg_.train.oracle == OracleMode::Quadratic) {
    critic_loss_out = 0.0;
    const Eigen::VectorXd bar = omega_bar();
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(dim_);
    for (int i = 0; i < cfg_.graph.n; ++i)
      grad += cfg_.quadratic.curvatures(i) *
              (cfg_.quadratic.targets.row(i).transpose() - bar);
    grad /= static_cast<double>(cfg_.graph.n);
    return grad.squaredNorm();
  }
  PolicyParams mean_policy{layout_, omega_bar()};
  EvalProbe probe =
      eval_probe(*eval_cursor_, mean_policy, thetas_, cfg_.diag.eval_batch,
                 cfg_.critic.gamma);
  critic_loss_out = probe.critic_loss;
  return probe.grad_norm_sq;
}

void Trainer::run_round() {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = cfg_.graph.n;
  const int tau = cfg_.train.local_steps;
  const double alpha = cfg_.train.alpha;
  const double beta = cfg_.train.beta;
  const double rho = cfg_.train.rho;

  // Stationarity surrogate terms are anchored at the round-start average.
  double critic_loss_metric = 0.0;
  const double grad_norm_est = estimate_grad_norm(critic_loss_metric);

  CompactRound* cache = nullptr;
  if (history_.compact) {
    history_.compact->rounds.push_back(
        CompactRound{omegas_, bridge_.z,
                     Eigen::MatrixXd::Zero(n, dim_)});
    cache = &history_.compact->rounds.back();
  }

  const Eigen::VectorXd omega_bar_prev = omega_bar();
  Eigen::MatrixXd mean_g(tau, dim_);  // row t = (1/N) sum_i g_i at step t
  mean_g.setZero();
  double return_accum = 0.0;

  for (int i = 0; i < n; ++i) {
    PolicyParams phi;
    Eigen::VectorXd phi_plain;
    if (cfg_.train.oracle == OracleMode::ActorCritic) {
      phi.layout = layout_;
      phi.flat = omegas_.row(i).transpose();
    } else {
      phi_plain = omegas_.row(i).transpose();
    }
    Eigen::VectorXd& phi_vec =
        cfg_.train.oracle == OracleMode::ActorCritic ? phi.flat : phi_plain;

    const Eigen::VectorXd pen = penalty_term(
        omegas_.row(i).transpose(),
        bridge_.z.middleRows(gs_.slot_offset[i], gs_.degree[i]), rho);

    for (int t = 0; t < tau; ++t) {
      Eigen::VectorXd g;
      if (cfg_.train.oracle == OracleMode::Quadratic) {
        g = cfg_.quadratic.curvatures(i) *
            (cfg_.quadratic.targets.row(i).transpose() - phi_vec);
      } else {
        g = actor_gradient(i, phi, return_accum);
      }
      mean_g.row(t) += g.transpose() / static_cast<double>(n);
      if (cache) cache->sum_g.row(i) += g.transpose();
      local_actor_step(phi_vec, g, alpha, beta, pen);
    }
    omegas_.row(i) = phi_vec.transpose();
  }

  // Average-parameter recursion: the penalty terms cancel in the mean, so
  // the average moves by alpha times the summed mean gradients only.
  Eigen::VectorXd expected_bar = omega_bar_prev;
  for (int t = 0; t < tau; ++t)
    expected_bar += alpha * mean_g.row(t).transpose();
  history_.omega_bar_residuals.push_back(
      (omega_bar() - expected_bar).norm());

  communicate(bridge_, omegas_, gs_, rho, history_.ledger, bridge_sign_flip_);
  history_.mean_preservation_residuals.push_back(
      mean_preservation_residual(bridge_.z, omegas_, gs_, rho));

  double mean_g_sq_sum = 0.0;
  for (int t = 0; t < tau; ++t) mean_g_sq_sum += mean_g.row(t).squaredNorm();

  double round_return = 0.0;
  if (cfg_.train.oracle == OracleMode::ActorCritic)
    round_return = return_accum / static_cast<double>(n * tau);
  return_window_.push_back(round_return);
  if (return_window_.size() > kReturnWindow) return_window_.pop_front();
  double window_sum = 0.0;
  for (double r : return_window_) window_sum += r;

  RoundMetrics m;
  m.round = rounds_done_;
  m.comm_rounds = history_.ledger.comm_rounds;
  m.return_mean = window_sum / static_cast<double>(return_window_.size());
  m.consensus_error = consensus_error(omegas_);
  m.critic_loss = critic_loss_metric;
  m.grad_norm_est = grad_norm_est;
  m.dk_surrogate =
      grad_norm_est + mean_g_sq_sum / static_cast<double>(tau);
  m.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  history_.metrics.push_back(m);
  ++rounds_done_;
}

TrainingHistory Trainer::take_history() {
  if (rounds_done_ > 0) {
    history_.omegas_final = omegas_;
    history_.has_final = true;
  }
  if (history_.compact) {
    history_.compact->omega_final = omegas_;
    history_.compact->z_final = bridge_.z;
  }
  return std::move(history_);
}

TrainingHistory train(const RunConfig& cfg) {
  Trainer trainer(cfg);
  for (int k = 0; k < cfg.train.rounds; ++k) trainer.run_round();
  return trainer.take_history();
}

}  // namespace ltac
