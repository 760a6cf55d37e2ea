#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ltac/config.hpp"
#include "ltac/history.hpp"

namespace ltac {

struct TrainOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
};

struct EvalOptions {
  std::string history_path;
  int episodes = 4;
  std::optional<int> max_steps;
  bool greedy = false;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
};

struct StepsizeOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_path;  // empty writes <out_dir>/stepsize.json
  std::string out_dir = "out";
};

struct VerifyOptions {
  bool verbose = true;
};

// Applies LTAC_SEED / --seed precedence on top of the parsed config.
RunConfig resolve_train_config(const TrainOptions& opt);

int cmd_train(const TrainOptions& opt);
int cmd_eval(const EvalOptions& opt);
int cmd_stepsize(const StepsizeOptions& opt);
int cmd_verify(const VerifyOptions& opt);

struct VerifyCheck {
  std::string name;
  bool pass = false;
  double residual = 0.0;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

// Fast invariant battery: quadratic-oracle convergence, compact-form replay
// in both oracle modes, mean preservation, communication budget, privacy
// ledger, fault-injection sensitivity, and the step-size constants.
VerifyReport run_verify();

}  // namespace ltac
