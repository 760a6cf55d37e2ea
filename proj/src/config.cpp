#include "ltac/config.hpp"

#include <fstream>
#include <set>

#include "ltac/errors.hpp"

namespace ltac {

namespace {

void reject_unknown(const nlohmann::json& j, const std::string& prefix,
                    const std::set<std::string>& known) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!known.count(key))
      throw ConfigError(prefix.empty() ? key : prefix + "." + key,
                        "unknown key");
  }
}

double get_number(const nlohmann::json& j, const std::string& key,
                  double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw ConfigError(key, "must be a number");
  return j[key].get<double>();
}

int get_int(const nlohmann::json& j, const std::string& key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer()) throw ConfigError(key, "must be an integer");
  return j[key].get<int>();
}

bool get_bool(const nlohmann::json& j, const std::string& key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_boolean()) throw ConfigError(key, "must be a boolean");
  return j[key].get<bool>();
}

std::vector<double> get_per_agent(const nlohmann::json& j,
                                  const std::string& key, int n_agents) {
  if (!j.contains(key)) return {};
  std::vector<double> out;
  if (j[key].is_number()) {
    out.assign(n_agents, j[key].get<double>());
  } else if (j[key].is_array()) {
    for (const auto& v : j[key]) {
      if (!v.is_number()) throw ConfigError(key, "entries must be numbers");
      out.push_back(v.get<double>());
    }
  } else {
    throw ConfigError(key, "must be a number or an array");
  }
  return out;
}

}  // namespace

std::string activation_name(Activation a) {
  return a == Activation::Tanh ? "tanh" : "relu";
}

void RunConfig::validate() const {
  env.validate();
  if (train.oracle == OracleMode::ActorCritic && env.n_agents != graph.n)
    throw ConfigError("env.n_agents", "must equal the graph node count");
  if (critic.width < 1) throw ConfigError("critic.width", "must be >= 1");
  if (critic.depth < 1) throw ConfigError("critic.depth", "must be >= 1");
  if (critic.radius <= 0.0)
    throw ConfigError("critic.radius", "must be positive");
  if (critic.batch < 1) throw ConfigError("critic.Nc", "must be >= 1");
  if (critic.iterations < 1) throw ConfigError("critic.Tc", "must be >= 1");
  if (critic.eta < 0.0) throw ConfigError("critic.eta", "must be >= 0");
  if (critic.gamma < 0.0 || critic.gamma >= 1.0)
    throw ConfigError("critic.gamma", "must be in [0, 1)");
  if (policy.hidden < 1) throw ConfigError("policy.hidden", "must be >= 1");
  if (policy.score_clip < 0.0)
    throw ConfigError("policy.score_clip", "must be >= 0");
  if (sampler.burn_in < 0) throw ConfigError("sampler.burn_in", "must be >= 0");
  if (train.rounds < 0) throw ConfigError("train.K", "must be >= 0");
  if (train.local_steps < 1) throw ConfigError("train.tau", "must be >= 1");
  if (train.batch < 1) throw ConfigError("train.B", "must be >= 1");
  if (train.alpha < 0.0) throw ConfigError("train.alpha", "must be >= 0");
  if (train.beta < 0.0) throw ConfigError("train.beta", "must be >= 0");
  if (train.rho <= 0.0) throw ConfigError("train.rho", "must be positive");
  if (train.oracle == OracleMode::Quadratic) {
    if (quadratic.targets.rows() != graph.n)
      throw ConfigError("quadratic.targets",
                        "need one target row per graph node");
    if (quadratic.targets.cols() < 1)
      throw ConfigError("quadratic.targets", "need at least one column");
    if (quadratic.curvatures.size() != graph.n)
      throw ConfigError("quadratic.curvatures",
                        "need one curvature per graph node");
    for (Eigen::Index i = 0; i < quadratic.curvatures.size(); ++i)
      if (quadratic.curvatures(i) <= 0.0)
        throw ConfigError("quadratic.curvatures", "must be positive");
  }
  if (diag.eval_batch < 1) throw ConfigError("diag.B_eval", "must be >= 1");
  if (diag.smoothness <= 0.0) throw ConfigError("diag.L", "must be positive");
}

RunConfig default_config() {
  RunConfig cfg;
  cfg.graph = ring_graph(5);
  cfg.env.n_agents = 5;
  return cfg;
}

RunConfig parse_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("", "config must be a JSON object");
  reject_unknown(j, "", {"seed", "graph", "env", "critic", "policy", "sampler",
                         "train", "quadratic", "diag"});
  RunConfig cfg = default_config();

  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer() && !j["seed"].is_number_unsigned())
      throw ConfigError("seed", "must be an integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("graph")) cfg.graph = graph_from_json(j["graph"]);

  if (j.contains("env")) {
    const auto& e = j["env"];
    if (!e.is_object()) throw ConfigError("env", "must be an object");
    reject_unknown(e, "env",
                   {"n_agents", "mass", "v_max", "damping", "dt", "force_mag",
                    "d_coll", "bound", "done_threshold", "max_steps",
                    "scale_state", "reward_shift"});
    cfg.env.n_agents = get_int(e, "n_agents", cfg.graph.n);
    cfg.env.mass = get_per_agent(e, "mass", cfg.env.n_agents);
    cfg.env.v_max = get_per_agent(e, "v_max", cfg.env.n_agents);
    cfg.env.damping = get_number(e, "damping", cfg.env.damping);
    cfg.env.dt = get_number(e, "dt", cfg.env.dt);
    cfg.env.force_mag = get_number(e, "force_mag", cfg.env.force_mag);
    cfg.env.d_coll = get_number(e, "d_coll", cfg.env.d_coll);
    cfg.env.bound = get_number(e, "bound", cfg.env.bound);
    cfg.env.done_threshold =
        get_number(e, "done_threshold", cfg.env.done_threshold);
    cfg.env.max_steps = get_int(e, "max_steps", cfg.env.max_steps);
    cfg.env.scale_state = get_bool(e, "scale_state", cfg.env.scale_state);
    cfg.env.reward_shift = get_number(e, "reward_shift", cfg.env.reward_shift);
  } else {
    cfg.env.n_agents = cfg.graph.n;
  }

  if (j.contains("critic")) {
    const auto& c = j["critic"];
    if (!c.is_object()) throw ConfigError("critic", "must be an object");
    reject_unknown(c, "critic",
                   {"width", "depth", "activation", "radius", "Nc", "Tc",
                    "eta", "gamma"});
    cfg.critic.width = get_int(c, "width", cfg.critic.width);
    cfg.critic.depth = get_int(c, "depth", cfg.critic.depth);
    if (c.contains("activation")) {
      const std::string a = c["activation"].get<std::string>();
      if (a == "tanh")
        cfg.critic.activation = Activation::Tanh;
      else if (a == "relu")
        cfg.critic.activation = Activation::Relu;
      else
        throw ConfigError("critic.activation", "must be 'tanh' or 'relu'");
    }
    cfg.critic.radius = get_number(c, "radius", cfg.critic.radius);
    cfg.critic.batch = get_int(c, "Nc", cfg.critic.batch);
    cfg.critic.iterations = get_int(c, "Tc", cfg.critic.iterations);
    cfg.critic.eta = get_number(c, "eta", cfg.critic.eta);
    cfg.critic.gamma = get_number(c, "gamma", cfg.critic.gamma);
  }

  if (j.contains("policy")) {
    const auto& p = j["policy"];
    if (!p.is_object()) throw ConfigError("policy", "must be an object");
    reject_unknown(p, "policy", {"hidden", "score_clip"});
    cfg.policy.hidden = get_int(p, "hidden", cfg.policy.hidden);
    cfg.policy.score_clip = get_number(p, "score_clip", cfg.policy.score_clip);
  }

  if (j.contains("sampler")) {
    const auto& s = j["sampler"];
    if (!s.is_object()) throw ConfigError("sampler", "must be an object");
    reject_unknown(s, "sampler", {"burn_in", "seed"});
    cfg.sampler.burn_in = get_int(s, "burn_in", cfg.sampler.burn_in);
    if (s.contains("seed")) {
      cfg.sampler.seed = s["seed"].get<std::uint64_t>();
      cfg.sampler.has_seed = true;
    }
  }

  if (j.contains("train")) {
    const auto& t = j["train"];
    if (!t.is_object()) throw ConfigError("train", "must be an object");
    reject_unknown(t, "train",
                   {"K", "tau", "B", "alpha", "beta", "rho", "oracle"});
    cfg.train.rounds = get_int(t, "K", cfg.train.rounds);
    cfg.train.local_steps = get_int(t, "tau", cfg.train.local_steps);
    cfg.train.batch = get_int(t, "B", cfg.train.batch);
    cfg.train.alpha = get_number(t, "alpha", cfg.train.alpha);
    cfg.train.beta = get_number(t, "beta", cfg.train.beta);
    cfg.train.rho = get_number(t, "rho", cfg.train.rho);
    if (t.contains("oracle")) {
      const std::string o = t["oracle"].get<std::string>();
      if (o == "actor-critic")
        cfg.train.oracle = OracleMode::ActorCritic;
      else if (o == "quadratic")
        cfg.train.oracle = OracleMode::Quadratic;
      else
        throw ConfigError("train.oracle",
                          "must be 'actor-critic' or 'quadratic'");
    }
  }

  if (j.contains("quadratic")) {
    const auto& q = j["quadratic"];
    if (!q.is_object()) throw ConfigError("quadratic", "must be an object");
    reject_unknown(q, "quadratic", {"targets", "curvatures"});
    if (q.contains("targets")) {
      if (!q["targets"].is_array() || q["targets"].empty())
        throw ConfigError("quadratic.targets", "must be a non-empty array");
      const int rows = static_cast<int>(q["targets"].size());
      const int cols = static_cast<int>(q["targets"][0].size());
      cfg.quadratic.targets.resize(rows, cols);
      for (int r = 0; r < rows; ++r) {
        if (static_cast<int>(q["targets"][r].size()) != cols)
          throw ConfigError("quadratic.targets", "ragged rows");
        for (int c = 0; c < cols; ++c)
          cfg.quadratic.targets(r, c) = q["targets"][r][c].get<double>();
      }
    }
    if (q.contains("curvatures")) {
      const auto& cv = q["curvatures"];
      if (cv.is_number()) {
        cfg.quadratic.curvatures = Eigen::VectorXd::Constant(
            cfg.quadratic.targets.rows(), cv.get<double>());
      } else if (cv.is_array()) {
        cfg.quadratic.curvatures.resize(cv.size());
        for (Eigen::Index i = 0; i < cfg.quadratic.curvatures.size(); ++i)
          cfg.quadratic.curvatures(i) = cv[i].get<double>();
      } else {
        throw ConfigError("quadratic.curvatures",
                          "must be a number or an array");
      }
    }
  }
  if (cfg.train.oracle == OracleMode::Quadratic &&
      cfg.quadratic.curvatures.size() == 0)
    cfg.quadratic.curvatures =
        Eigen::VectorXd::Ones(cfg.quadratic.targets.rows());

  if (j.contains("diag")) {
    const auto& d = j["diag"];
    if (!d.is_object()) throw ConfigError("diag", "must be an object");
    reject_unknown(d, "diag", {"B_eval", "L", "cache_compact_form"});
    cfg.diag.eval_batch = get_int(d, "B_eval", cfg.diag.eval_batch);
    cfg.diag.smoothness = get_number(d, "L", cfg.diag.smoothness);
    cfg.diag.cache_compact_form =
        get_bool(d, "cache_compact_form", cfg.diag.cache_compact_form);
  }

  cfg.validate();
  return cfg;
}

nlohmann::json apply_overrides(nlohmann::json j,
                               const std::vector<std::string>& overrides) {
  for (const std::string& ov : overrides) {
    const std::size_t eq = ov.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError(ov, "override must look like key.path=value");
    const std::string path = ov.substr(0, eq);
    const std::string raw = ov.substr(eq + 1);
    nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;  // keep as string

    nlohmann::json* node = &j;
    std::size_t start = 0;
    while (true) {
      const std::size_t dot = path.find('.', start);
      const std::string part = path.substr(
          start, dot == std::string::npos ? std::string::npos : dot - start);
      if (part.empty()) throw ConfigError(path, "empty path segment");
      if (dot == std::string::npos) {
        (*node)[part] = value;
        break;
      }
      node = &(*node)[part];
      start = dot + 1;
    }
  }
  return j;
}

RunConfig load_config_file(const std::string& path,
                           const std::vector<std::string>& overrides) {
  nlohmann::json j = nlohmann::json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, "cannot open config file");
    j = nlohmann::json::parse(in, nullptr, true);
  }
  return parse_config(apply_overrides(std::move(j), overrides));
}

nlohmann::json echo_config(const RunConfig& cfg) {
  nlohmann::json j;
  j["seed"] = cfg.seed;
  j["graph"] = graph_to_json(cfg.graph);
  j["env"] = {{"n_agents", cfg.env.n_agents},
              {"damping", cfg.env.damping},
              {"dt", cfg.env.dt},
              {"force_mag", cfg.env.force_mag},
              {"d_coll", cfg.env.d_coll},
              {"bound", cfg.env.bound},
              {"done_threshold", cfg.env.done_threshold},
              {"max_steps", cfg.env.max_steps},
              {"scale_state", cfg.env.scale_state},
              {"reward_shift", cfg.env.reward_shift}};
  if (!cfg.env.mass.empty()) j["env"]["mass"] = cfg.env.mass;
  if (!cfg.env.v_max.empty()) j["env"]["v_max"] = cfg.env.v_max;
  j["critic"] = {{"width", cfg.critic.width},
                 {"depth", cfg.critic.depth},
                 {"activation", activation_name(cfg.critic.activation)},
                 {"radius", cfg.critic.radius},
                 {"Nc", cfg.critic.batch},
                 {"Tc", cfg.critic.iterations},
                 {"eta", cfg.critic.eta},
                 {"gamma", cfg.critic.gamma}};
  j["policy"] = {{"hidden", cfg.policy.hidden},
                 {"score_clip", cfg.policy.score_clip}};
  j["sampler"] = nlohmann::json{{"burn_in", cfg.sampler.burn_in}};
  if (cfg.sampler.has_seed) j["sampler"]["seed"] = cfg.sampler.seed;
  j["train"] = {{"K", cfg.train.rounds},
                {"tau", cfg.train.local_steps},
                {"B", cfg.train.batch},
                {"alpha", cfg.train.alpha},
                {"beta", cfg.train.beta},
                {"rho", cfg.train.rho},
                {"oracle", cfg.train.oracle == OracleMode::Quadratic
                               ? "quadratic"
                               : "actor-critic"}};
  if (cfg.train.oracle == OracleMode::Quadratic) {
    nlohmann::json targets = nlohmann::json::array();
    for (Eigen::Index r = 0; r < cfg.quadratic.targets.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < cfg.quadratic.targets.cols(); ++c)
        row.push_back(cfg.quadratic.targets(r, c));
      targets.push_back(row);
    }
    nlohmann::json curv = nlohmann::json::array();
    for (Eigen::Index i = 0; i < cfg.quadratic.curvatures.size(); ++i)
      curv.push_back(cfg.quadratic.curvatures(i));
    j["quadratic"] = {{"targets", targets}, {"curvatures", curv}};
  }
  j["diag"] = {{"B_eval", cfg.diag.eval_batch},
               {"L", cfg.diag.smoothness},
               {"cache_compact_form", cfg.diag.cache_compact_form}};
  return j;
}

}  // namespace ltac
