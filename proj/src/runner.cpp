#include "ltac/runner.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "ltac/diagnostics.hpp"
#include "ltac/errors.hpp"
#include "ltac/ltadmm.hpp"
#include "ltac/navenv.hpp"

namespace ltac {

namespace {

std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("LTAC_SEED");
  if (!raw) return std::nullopt;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(raw, &end, 10);
  if (end == raw || *end != '\0')
    throw ConfigError("LTAC_SEED", "must be an unsigned integer");
  return static_cast<std::uint64_t>(v);
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

// Triangle consensus problem with orthogonal unit targets; beta sits in the
// middle of the admissible window for lambda_u = 3, tau = 3, rho = 0.5.
RunConfig triangle_quadratic_config(int rounds) {
  RunConfig cfg = default_config();
  cfg.graph = ring_graph(3);
  cfg.env.n_agents = 3;
  cfg.train.oracle = OracleMode::Quadratic;
  cfg.quadratic.targets = Eigen::MatrixXd::Identity(3, 3);
  cfg.quadratic.curvatures = Eigen::VectorXd::Ones(3);
  cfg.train.rounds = rounds;
  cfg.train.local_steps = 3;
  cfg.train.rho = 0.5;
  cfg.train.beta = 0.3;
  cfg.train.alpha = 0.05;
  return cfg;
}

// Desk-scale navigation run small enough for the fast verify battery.
RunConfig small_nav_config(int rounds) {
  RunConfig cfg = default_config();
  cfg.graph = ring_graph(3);
  cfg.env.n_agents = 3;
  cfg.seed = 7;
  cfg.policy.hidden = 8;
  cfg.critic.width = 8;
  cfg.critic.batch = 4;
  cfg.critic.iterations = 2;
  cfg.sampler.burn_in = 10;
  cfg.train.batch = 4;
  cfg.train.rounds = rounds;
  cfg.diag.eval_batch = 4;
  return cfg;
}

}  // namespace

RunConfig resolve_train_config(const TrainOptions& opt) {
  RunConfig cfg = load_config_file(opt.config_path, opt.overrides);
  if (opt.seed) cfg.seed = *opt.seed;
  if (const auto es = env_seed()) cfg.seed = *es;
  return cfg;
}

int cmd_train(const TrainOptions& opt) {
  const RunConfig cfg = resolve_train_config(opt);
  std::filesystem::create_directories(opt.out_dir);

  Trainer trainer(cfg);
  const int progress =
      cfg.train.rounds >= 10 ? cfg.train.rounds / 10 : cfg.train.rounds + 1;
  for (int k = 0; k < cfg.train.rounds; ++k) {
    trainer.run_round();
    if ((k + 1) % progress == 0) {
      const RoundMetrics& m = trainer.metrics().back();
      std::cout << "round " << (k + 1) << "/" << cfg.train.rounds
                << " return_mean=" << m.return_mean
                << " consensus=" << m.consensus_error
                << " critic_loss=" << m.critic_loss << "\n";
    }
  }
  TrainingHistory h = trainer.take_history();

  const std::filesystem::path out(opt.out_dir);
  {
    std::ofstream csv(out / "metrics.csv");
    if (!csv) throw std::runtime_error("cannot write metrics.csv");
    write_metrics_csv(h, csv);
  }
  write_text_file(out / "history.json", history_to_json(h).dump(2) + "\n");
  write_text_file(out / "config_echo.json",
                  h.config_echo.dump(2) + "\n");
  std::cout << "wrote " << (out / "metrics.csv").string() << "\n"
            << "wrote " << (out / "history.json").string() << "\n"
            << "wrote " << (out / "config_echo.json").string() << "\n";
  return 0;
}

int cmd_eval(const EvalOptions& opt) {
  std::ifstream in(opt.history_path);
  if (!in) {
    std::cerr << "cannot open history file: " << opt.history_path << "\n";
    return 1;
  }
  const TrainingHistory h =
      history_from_json(nlohmann::json::parse(in, nullptr, true));
  if (!h.has_final)
    throw std::runtime_error("history has no final parameter snapshot");
  RunConfig cfg = parse_config(h.config_echo);
  if (cfg.train.oracle != OracleMode::ActorCritic)
    throw std::runtime_error("eval requires an actor-critic history");
  if (opt.max_steps) cfg.env.max_steps = *opt.max_steps;

  std::vector<int> action_counts(cfg.graph.n, kNavActionCount);
  PolicyParams pi{PolicyLayout::make(cfg.graph.n, nav_state_dim(cfg.env),
                                     action_counts,
                                     {cfg.policy.hidden, cfg.policy.hidden}),
                  h.omega_mean()};
  if (pi.layout.dim != pi.flat.size())
    throw std::runtime_error("snapshot length does not match policy layout");

  nlohmann::json episodes = nlohmann::json::array();
  for (int ep = 0; ep < opt.episodes; ++ep) {
    NavEnvModel env(cfg.env);
    RngStream rng =
        RngStream::derive(opt.seed, {static_cast<std::uint64_t>(ep)});
    Eigen::VectorXd s = env.reset(rng);

    auto positions_json = [&]() {
      nlohmann::json frame = nlohmann::json::array();
      for (const auto& p : env.nav_state().positions)
        frame.push_back({p.x(), p.y()});
      return frame;
    };
    auto total_dist = [&]() {
      double d = 0.0;
      for (int i = 0; i < cfg.env.n_agents; ++i)
        d += (env.nav_state().positions[i] - env.nav_state().landmarks[i])
                 .norm();
      return d;
    };

    nlohmann::json landmarks = nlohmann::json::array();
    for (const auto& l : env.nav_state().landmarks)
      landmarks.push_back({l.x(), l.y()});
    nlohmann::json track = nlohmann::json::array();
    nlohmann::json rewards = nlohmann::json::array();
    track.push_back(positions_json());

    bool success = total_dist() < cfg.env.done_threshold;
    int steps = 0;
    while (steps < cfg.env.max_steps) {
      const JointAction a =
          opt.greedy ? argmax_joint(pi, s) : sample_joint(pi, s, rng);
      const EnvStepResult res = env.step(a, rng);
      ++steps;
      track.push_back(positions_json());
      nlohmann::json r = nlohmann::json::array();
      for (Eigen::Index i = 0; i < res.rewards.size(); ++i)
        r.push_back(res.rewards(i));
      rewards.push_back(r);
      s = res.state;
      if (total_dist() < cfg.env.done_threshold) {
        success = true;
        break;
      }
      if (res.done) break;
    }
    episodes.push_back({{"landmarks", landmarks},
                        {"positions", track},
                        {"rewards", rewards},
                        {"steps", steps},
                        {"success", success}});
  }

  std::filesystem::create_directories(opt.out_dir);
  const std::filesystem::path out_path =
      std::filesystem::path(opt.out_dir) / "trajectories.json";
  write_text_file(out_path,
                  nlohmann::json{{"seed", opt.seed},
                                 {"greedy", opt.greedy},
                                 {"episodes", episodes}}
                          .dump(2) +
                      "\n");
  std::cout << "wrote " << out_path.string() << "\n";
  return 0;
}

int cmd_stepsize(const StepsizeOptions& opt) {
  const RunConfig cfg = load_config_file(opt.config_path, opt.overrides);
  const GraphStructures gs = build_structures(cfg.graph);
  const StepsizeReport r =
      stepsize_bounds(cfg.diag.smoothness, cfg.train.local_steps,
                      cfg.train.rho, cfg.train.beta, gs);

  std::cout << std::setprecision(10);
  std::cout << "graph: n=" << gs.n << " |E|=" << gs.m / 2
            << " lambda_l=" << r.lambda_l << " lambda_u=" << r.lambda_u
            << "\n";
  std::cout << "beta window: [" << r.beta_window_lo << ", "
            << r.beta_window_hi << ")  beta=" << r.beta << "\n";
  if (!r.beta_in_window)
    std::cout << "warning: beta lies outside the admissible window\n";
  std::cout << "vhat_inv_norm=" << r.vhat_inv_norm << " delta=" << r.delta
            << "\n";
  std::cout << "alpha components: " << r.alpha1 << " " << r.alpha2 << " "
            << r.alpha3 << " " << r.alpha4 << " " << r.alpha5 << " "
            << r.alpha6 << "\n";
  std::cout << "alpha_bar=" << r.alpha_bar << "\n";

  std::filesystem::path out_path = opt.out_path;
  if (out_path.empty()) {
    std::filesystem::create_directories(opt.out_dir);
    out_path = std::filesystem::path(opt.out_dir) / "stepsize.json";
  } else if (out_path.has_parent_path()) {
    std::filesystem::create_directories(out_path.parent_path());
  }
  write_text_file(out_path, stepsize_to_json(r).dump(2) + "\n");
  std::cout << "wrote " << out_path.string() << "\n";
  return 0;
}

VerifyReport run_verify() {
  VerifyReport report;
  auto add = [&report](const std::string& name, bool pass, double residual,
                       const std::string& detail = {}) {
    report.checks.push_back(VerifyCheck{name, pass, residual, detail});
  };
  auto max_of = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, x);
    return m;
  };

  std::vector<const TrainingHistory*> all_runs;

  // Quadratic consensus on the triangle: iterates must land on the target
  // mean with vanishing disagreement.
  RunConfig quad_cfg = triangle_quadratic_config(2000);
  quad_cfg.diag.cache_compact_form = true;
  Trainer quad_trainer(quad_cfg);
  for (int k = 0; k < quad_cfg.train.rounds; ++k) quad_trainer.run_round();
  const Eigen::VectorXd target_mean =
      quad_cfg.quadratic.targets.colwise().mean().transpose();
  double worst = 0.0;
  for (int i = 0; i < 3; ++i)
    worst = std::max(worst, (quad_trainer.omegas().row(i).transpose() -
                             target_mean)
                                .norm());
  const double consensus = consensus_error(quad_trainer.omegas());
  TrainingHistory quad_hist = quad_trainer.take_history();
  all_runs.push_back(&quad_hist);
  add("quadratic_consensus", worst < 1e-6 && consensus < 1e-8, worst,
      "consensus=" + std::to_string(consensus));

  // Compact-form replay, oracle mode.
  RunConfig quad10 = triangle_quadratic_config(10);
  quad10.diag.cache_compact_form = true;
  TrainingHistory quad10_hist = train(quad10);
  all_runs.push_back(&quad10_hist);
  const double res_quad =
      compact_form_check(*quad10_hist.compact,
                         build_structures(quad10.graph));
  add("compact_form_quadratic", res_quad < 1e-12, res_quad);

  // Compact-form replay, actor-critic mode.
  RunConfig nav_cfg = small_nav_config(3);
  nav_cfg.diag.cache_compact_form = true;
  TrainingHistory nav_hist = train(nav_cfg);
  all_runs.push_back(&nav_hist);
  const double res_nav = compact_form_check(
      *nav_hist.compact, build_structures(nav_cfg.graph));
  add("compact_form_actor_critic", res_nav < 1e-10, res_nav);

  // Communication budget across local-step counts.
  bool budget_ok = true;
  std::string budget_detail;
  for (int tau : {1, 3, 5}) {
    RunConfig c = triangle_quadratic_config(7);
    c.train.local_steps = tau;
    TrainingHistory h = train(c);
    const long expected_msgs = 2L * c.graph.edge_count() * 7;
    bool ok = h.ledger.comm_rounds == 7 &&
              h.ledger.policy_parameter == expected_msgs;
    for (std::size_t k = 0; k < h.metrics.size(); ++k)
      ok = ok && h.metrics[k].comm_rounds == static_cast<long>(k) + 1;
    budget_ok = budget_ok && ok;
    budget_detail += "tau=" + std::to_string(tau) +
                     (ok ? " ok " : " FAIL ");
  }
  add("comm_budget", budget_ok, 0.0, budget_detail);

  // Invariant residuals and the privacy ledger over every recorded run.
  double mp = 0.0, ob = 0.0;
  long stray = 0;
  for (const TrainingHistory* h : all_runs) {
    mp = std::max(mp, max_of(h->mean_preservation_residuals));
    ob = std::max(ob, max_of(h->omega_bar_residuals));
    stray += h->ledger.reward + h->ledger.critic_parameter;
  }
  add("mean_preservation", mp < 1e-12, mp);
  add("omega_bar_recursion", ob < 1e-10, ob);
  add("privacy_ledger", stray == 0, static_cast<double>(stray));

  // Fault injection: a flipped bridge sign must break mean preservation.
  Trainer faulty(triangle_quadratic_config(3));
  faulty.set_bridge_sign_flip(true);
  for (int k = 0; k < 3; ++k) faulty.run_round();
  const double fault_res =
      max_of(faulty.take_history().mean_preservation_residuals);
  add("fault_sensitivity", fault_res > 1e-6, fault_res,
      "flipped bridge update must violate mean preservation");

  // Step-size constants on the 5-ring.
  const GraphStructures ring5 = build_structures(ring_graph(5));
  const StepsizeReport sr = stepsize_bounds(1.0, 3, 0.5, 0.25, ring5);
  bool consts_ok = sr.alpha3 == 0.25;
  consts_ok = consts_ok && std::abs(sr.beta_window_lo - 0.18426) < 1e-4 &&
              std::abs(sr.beta_window_hi - 0.36852) < 1e-4;
  consts_ok = consts_ok && sr.beta_in_window && sr.delta < 1.0;
  add("stepsize_constants", consts_ok, std::abs(sr.alpha3 - 0.25));

  // Eigenvector blocks invert cleanly inside the window.
  double inv_res = 0.0;
  for (const Eigen::Matrix3cd& v : vhat_blocks(ring5, 0.25, 0.5, 3)) {
    inv_res = std::max(
        inv_res, (v * v.inverse() - Eigen::Matrix3cd::Identity())
                     .cwiseAbs()
                     .maxCoeff());
  }
  add("eigvec_block_inverse", inv_res < 1e-10, inv_res);

  return report;
}

int cmd_verify(const VerifyOptions& opt) {
  const VerifyReport report = run_verify();
  for (const VerifyCheck& c : report.checks) {
    if (opt.verbose || !c.pass) {
      std::cout << (c.pass ? "[ok]   " : "[FAIL] ") << c.name
                << " residual=" << c.residual;
      if (!c.detail.empty()) std::cout << "  (" << c.detail << ")";
      std::cout << "\n";
    }
  }
  std::cout << (report.all_pass() ? "verify: all checks passed"
                                  : "verify: FAILURES present")
            << "\n";
  return report.all_pass() ? 0 : 1;
}

}  // namespace ltac
