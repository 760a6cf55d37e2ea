#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ltac/errors.hpp"
#include "ltac/runner.hpp"

using namespace ltac;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ltac_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_json(const fs::path& dir, const std::string& name,
                    const nlohmann::json& j) {
  const fs::path p = dir / name;
  std::ofstream out(p);
  out << j.dump(2) << "\n";
  return p;
}

nlohmann::json quadratic_json(int rounds) {
  return nlohmann::json{
      {"graph", {{"type", "ring"}, {"n", 3}}},
      {"train",
       {{"oracle", "quadratic"},
        {"K", rounds},
        {"tau", 3},
        {"alpha", 0.05},
        {"beta", 0.3},
        {"rho", 0.5}}},
      {"quadratic",
       {{"targets", {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}},
        {"curvatures", 1.0}}}};
}

nlohmann::json small_nav_json(int rounds) {
  return nlohmann::json{
      {"seed", 7},
      {"graph", {{"type", "ring"}, {"n", 3}}},
      {"policy", {{"hidden", 4}}},
      {"critic", {{"width", 4}, {"depth", 1}, {"Nc", 2}, {"Tc", 1}}},
      {"sampler", {{"burn_in", 5}}},
      {"train", {{"K", rounds}, {"B", 2}}},
      {"diag", {{"B_eval", 2}}}};
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(bool(in));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) fields.push_back(f);
  return fields;
}

nlohmann::json load_json(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(bool(in));
  return nlohmann::json::parse(in);
}

}  // namespace

TEST_CASE("empty config parses to the documented defaults") {
  const RunConfig cfg = parse_config(nlohmann::json::object());
  CHECK(cfg.seed == 1);
  CHECK(cfg.graph.n == 5);
  CHECK(cfg.graph.edges == ring_graph(5).edges);
  CHECK(cfg.env.n_agents == 5);
  CHECK(cfg.critic.width == 64);
  CHECK(cfg.critic.depth == 2);
  CHECK(cfg.critic.batch == 20);
  CHECK(cfg.critic.iterations == 3);
  CHECK(cfg.critic.gamma == 0.95);
  CHECK(cfg.critic.radius == 10.0);
  CHECK(cfg.policy.hidden == 64);
  CHECK(cfg.sampler.burn_in == 200);
  CHECK(cfg.train.rounds == 2000);
  CHECK(cfg.train.local_steps == 3);
  CHECK(cfg.train.batch == 20);
  CHECK(cfg.train.alpha == 0.001);
  CHECK(cfg.train.beta == 0.01);
  CHECK(cfg.train.rho == 0.5);
  CHECK(cfg.train.oracle == OracleMode::ActorCritic);
  CHECK(cfg.diag.eval_batch == 20);

  // the fully resolved echo reparses to the same echo
  const nlohmann::json echo = echo_config(cfg);
  CHECK(echo_config(parse_config(echo)) == echo);
}

TEST_CASE("unknown keys are rejected with their dotted path") {
  auto key_of = [](const nlohmann::json& j) {
    try {
      parse_config(j);
    } catch (const ConfigError& e) {
      return std::string(e.key());
    }
    return std::string("(no error)");
  };
  CHECK(key_of({{"trian", 1}}) == "trian");
  CHECK(key_of({{"env", {{"masse", 1.0}}}}) == "env.masse");
  CHECK(key_of({{"critic", {{"batch", 3}}}}) == "critic.batch");
  CHECK(key_of({{"train", {{"rounds", 3}}}}) == "train.rounds");
  CHECK(key_of({{"diag", {{"cache", true}}}}) == "diag.cache");
}

TEST_CASE("override strings patch the raw json") {
  nlohmann::json j = nlohmann::json::object();
  j = apply_overrides(j, {"train.alpha=0.5", "graph.type=ring", "graph.n=4",
                          "critic.activation=tanh", "train.K=3"});
  const RunConfig cfg = parse_config(j);
  CHECK(cfg.train.alpha == 0.5);
  CHECK(cfg.graph.edges == ring_graph(4).edges);
  CHECK(cfg.graph.n == 4);
  CHECK(cfg.env.n_agents == 4);  // follows the graph when unset
  CHECK(cfg.critic.activation == Activation::Tanh);
  CHECK(cfg.train.rounds == 3);

  CHECK_THROWS_AS(apply_overrides(j, {"nonsense"}), ConfigError);
  CHECK_THROWS_AS(apply_overrides(j, {"=3"}), ConfigError);
}

TEST_CASE("seed precedence is env var over flag over config") {
  const fs::path dir = scratch("seed");
  const fs::path cfg_path =
      write_json(dir, "cfg.json", nlohmann::json{{"seed", 3}});
  unsetenv("LTAC_SEED");

  TrainOptions opt;
  opt.config_path = cfg_path.string();
  CHECK(resolve_train_config(opt).seed == 3);

  opt.seed = 5;
  CHECK(resolve_train_config(opt).seed == 5);

  setenv("LTAC_SEED", "9", 1);
  CHECK(resolve_train_config(opt).seed == 9);

  setenv("LTAC_SEED", "junk", 1);
  CHECK_THROWS_AS(resolve_train_config(opt), ConfigError);

  unsetenv("LTAC_SEED");
  CHECK(resolve_train_config(opt).seed == 5);
}

TEST_CASE("train command writes the full artifact set") {
  const fs::path dir = scratch("train");
  const fs::path cfg_path = write_json(dir, "cfg.json", quadratic_json(10));
  unsetenv("LTAC_SEED");

  TrainOptions opt;
  opt.config_path = cfg_path.string();
  opt.out_dir = (dir / "out").string();
  REQUIRE(cmd_train(opt) == 0);

  const auto lines = read_lines(dir / "out" / "metrics.csv");
  REQUIRE(lines.size() == 11);
  CHECK(lines[0] ==
        "round,comm_rounds,return_mean,consensus_error,critic_loss,"
        "dk_surrogate,grad_norm_est,wall_time_s");
  for (int k = 0; k < 10; ++k) {
    const auto fields = split_csv(lines[k + 1]);
    REQUIRE(fields.size() == 8);
    CHECK(fields[0] == std::to_string(k));
    CHECK(fields[1] == std::to_string(k + 1));  // one comm round per round
  }

  const nlohmann::json hj = load_json(dir / "out" / "history.json");
  const TrainingHistory h = history_from_json(hj);
  REQUIRE(h.metrics.size() == 10);
  CHECK(h.ledger.comm_rounds == 10);
  CHECK(h.ledger.policy_parameter == 6 * 10);
  REQUIRE(h.has_final);

  // csv doubles survive the text round trip exactly
  const auto fields = split_csv(lines[4]);
  CHECK(std::stod(fields[3]) == h.metrics[3].consensus_error);
  CHECK(std::stod(fields[6]) == h.metrics[3].grad_norm_est);

  // the echoed config reparses to an equivalent run setup
  const RunConfig echoed =
      parse_config(load_json(dir / "out" / "config_echo.json"));
  CHECK(echoed.train.rounds == 10);
  CHECK(echoed.train.oracle == OracleMode::Quadratic);
  CHECK(echoed.quadratic.targets ==
        Eigen::MatrixXd::Identity(3, 3));
}

TEST_CASE("repeated seeds reproduce every column except wall time") {
  const fs::path dir = scratch("repeat");
  const fs::path cfg_path = write_json(dir, "cfg.json", small_nav_json(2));
  unsetenv("LTAC_SEED");

  TrainOptions a, b;
  a.config_path = b.config_path = cfg_path.string();
  a.out_dir = (dir / "a").string();
  b.out_dir = (dir / "b").string();
  REQUIRE(cmd_train(a) == 0);
  REQUIRE(cmd_train(b) == 0);

  const auto la = read_lines(dir / "a" / "metrics.csv");
  const auto lb = read_lines(dir / "b" / "metrics.csv");
  REQUIRE(la.size() == lb.size());
  for (std::size_t i = 1; i < la.size(); ++i) {
    const auto fa = split_csv(la[i]);
    const auto fb = split_csv(lb[i]);
    REQUIRE(fa.size() == 8);
    for (int c = 0; c < 7; ++c) CHECK(fa[c] == fb[c]);
  }

  const nlohmann::json ha = load_json(dir / "a" / "history.json");
  const nlohmann::json hb = load_json(dir / "b" / "history.json");
  CHECK(ha.at("final") == hb.at("final"));
  CHECK(ha.at("initial") == hb.at("initial"));
  CHECK(ha.at("ledger") == hb.at("ledger"));
}

TEST_CASE("eval rolls out the mean policy and rejects bad inputs") {
  const fs::path dir = scratch("eval");
  unsetenv("LTAC_SEED");

  TrainOptions t;
  t.config_path = write_json(dir, "nav.json", small_nav_json(2)).string();
  t.out_dir = (dir / "nav_out").string();
  REQUIRE(cmd_train(t) == 0);

  EvalOptions e;
  e.history_path = (dir / "nav_out" / "history.json").string();
  e.episodes = 2;
  e.greedy = true;
  e.out_dir = (dir / "eval_out").string();
  REQUIRE(cmd_eval(e) == 0);

  const nlohmann::json tj = load_json(dir / "eval_out" / "trajectories.json");
  CHECK(tj.at("greedy") == true);
  REQUIRE(tj.at("episodes").size() == 2);
  for (const auto& ep : tj.at("episodes")) {
    const int steps = ep.at("steps").get<int>();
    CHECK(steps >= 0);
    CHECK(steps <= 25);
    CHECK(ep.at("positions").size() == static_cast<std::size_t>(steps) + 1);
    CHECK(ep.at("landmarks").size() == 3);
    CHECK(ep.at("rewards").size() == static_cast<std::size_t>(steps));
  }

  // deterministic in the eval seed
  EvalOptions e2 = e;
  e2.out_dir = (dir / "eval_out2").string();
  REQUIRE(cmd_eval(e2) == 0);
  CHECK(load_json(dir / "eval_out2" / "trajectories.json") == tj);

  // a quadratic history has no policy to roll out
  TrainOptions q;
  q.config_path = write_json(dir, "quad.json", quadratic_json(2)).string();
  q.out_dir = (dir / "quad_out").string();
  REQUIRE(cmd_train(q) == 0);
  EvalOptions eq = e;
  eq.history_path = (dir / "quad_out" / "history.json").string();
  CHECK_THROWS_AS(cmd_eval(eq), std::runtime_error);

  // a zero-round history has no final snapshot
  TrainOptions z;
  z.config_path = write_json(dir, "zero.json", quadratic_json(0)).string();
  z.out_dir = (dir / "zero_out").string();
  REQUIRE(cmd_train(z) == 0);
  EvalOptions ez = e;
  ez.history_path = (dir / "zero_out" / "history.json").string();
  CHECK_THROWS_AS(cmd_eval(ez), std::runtime_error);

  // a missing file is a clean nonzero exit
  EvalOptions missing = e;
  missing.history_path = (dir / "nope.json").string();
  CHECK(cmd_eval(missing) == 1);
}

TEST_CASE("stepsize command reports the closed-form constants") {
  const fs::path dir = scratch("stepsize");
  StepsizeOptions opt;
  opt.config_path.clear();  // defaults: 5-ring, tau=3, rho=0.5, L=1
  opt.out_dir = (dir / "out").string();
  REQUIRE(cmd_stepsize(opt) == 0);

  const nlohmann::json sj = load_json(dir / "out" / "stepsize.json");
  const StepsizeReport r = stepsize_from_json(sj);
  CHECK(r.alpha3 == 0.25);
  CHECK(r.n_agents == 5);
  CHECK(std::abs(r.beta_window_lo - 0.18426) < 1e-4);
  CHECK(std::abs(r.beta_window_hi - 0.36852) < 1e-4);
  CHECK_FALSE(r.beta_in_window);  // default beta = 0.01 sits below

  // explicit out path plus overrides land inside the window
  StepsizeOptions opt2;
  opt2.overrides = {"train.beta=0.25"};
  opt2.out_path = (dir / "deep" / "report.json").string();
  REQUIRE(cmd_stepsize(opt2) == 0);
  const StepsizeReport r2 =
      stepsize_from_json(load_json(dir / "deep" / "report.json"));
  CHECK(r2.beta_in_window);
  CHECK(r2.delta < 1.0);
}

TEST_CASE("verify battery passes end to end") {
  const VerifyReport report = run_verify();
  REQUIRE(report.checks.size() == 10);
  for (const VerifyCheck& c : report.checks) {
    INFO(c.name, " residual=", c.residual, " ", c.detail);
    CHECK(c.pass);
  }
  CHECK(report.all_pass());
}
