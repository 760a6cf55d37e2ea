#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "ltac/navenv.hpp"
#include "ltac/topology.hpp"
#include "ltac/valuenet.hpp"

namespace ltac {

enum class OracleMode { ActorCritic, Quadratic };

struct CriticConfig {
  int width = 64;
  int depth = 2;
  Activation activation = Activation::Relu;
  double radius = 10.0;
  int batch = 20;       // samples per TD iteration
  int iterations = 3;   // TD iterations per local step
  double eta = 0.001;
  double gamma = 0.95;
};

struct PolicyConfig {
  int hidden = 64;
  double score_clip = 0.0;  // 0 disables clipping
};

struct SamplerConfig {
  int burn_in = 200;
  std::uint64_t seed = 0;  // optional separate sampling seed
  bool has_seed = false;
};

struct TrainSection {
  int rounds = 2000;       // K
  int local_steps = 3;     // tau
  int batch = 20;          // B actor samples
  double alpha = 0.001;
  double beta = 0.01;
  double rho = 0.5;
  OracleMode oracle = OracleMode::ActorCritic;
};

struct QuadraticConfig {
  Eigen::MatrixXd targets;     // N x d
  Eigen::VectorXd curvatures;  // length N
};

struct DiagConfig {
  int eval_batch = 20;
  double smoothness = 1.0;  // L used by the step-size report
  bool cache_compact_form = false;
};

struct RunConfig {
  std::uint64_t seed = 1;
  Graph graph;
  NavConfig env;
  CriticConfig critic;
  PolicyConfig policy;
  SamplerConfig sampler;
  TrainSection train;
  QuadraticConfig quadratic;
  DiagConfig diag;

  void validate() const;  // cross-field checks; throws ConfigError
};

RunConfig default_config();

// Strict parse: unknown keys anywhere are rejected with their dotted path.
RunConfig parse_config(const nlohmann::json& j);

// Applies "a.b.c=value" overrides to the raw JSON before parsing; values are
// parsed as JSON when possible, otherwise taken as strings.
nlohmann::json apply_overrides(nlohmann::json j,
                               const std::vector<std::string>& overrides);

RunConfig load_config_file(const std::string& path,
                           const std::vector<std::string>& overrides);

// Fully resolved configuration (defaults filled in), round-trips through
// parse_config.
nlohmann::json echo_config(const RunConfig& cfg);

std::string activation_name(Activation a);

}  // namespace ltac
