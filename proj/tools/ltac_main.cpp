#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "ltac/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Communication-efficient decentralized actor-critic trainer"};
  app.require_subcommand(1);

  ltac::TrainOptions train_opt;
  std::uint64_t train_seed = 0;
  CLI::App* train = app.add_subcommand("train", "Run the training loop");
  train->add_option("--config", train_opt.config_path, "JSON config file");
  train->add_option("--set", train_opt.overrides,
                    "Config override key.path=value (repeatable)");
  CLI::Option* seed_opt =
      train->add_option("--seed", train_seed, "Override the config seed");
  train->add_option("--out", train_opt.out_dir, "Output directory");

  ltac::EvalOptions eval_opt;
  int eval_max_steps = 0;
  CLI::App* eval = app.add_subcommand("eval", "Roll out a trained policy");
  eval->add_option("--history", eval_opt.history_path, "history.json path")
      ->required();
  eval->add_option("--episodes", eval_opt.episodes, "Episode count");
  CLI::Option* ms_opt =
      eval->add_option("--max-steps", eval_max_steps, "Episode step cap");
  eval->add_flag("--greedy", eval_opt.greedy,
                 "Argmax actions instead of sampling");
  eval->add_option("--seed", eval_opt.seed, "Rollout seed");
  eval->add_option("--out", eval_opt.out_dir, "Output directory");

  ltac::StepsizeOptions step_opt;
  CLI::App* stepsize =
      app.add_subcommand("stepsize", "Report admissible step sizes");
  stepsize->add_option("--config", step_opt.config_path, "JSON config file");
  stepsize->add_option("--set", step_opt.overrides,
                       "Config override key.path=value (repeatable)");
  stepsize->add_option("--json", step_opt.out_path, "Report file path");
  stepsize->add_option("--out", step_opt.out_dir, "Output directory");

  ltac::VerifyOptions verify_opt;
  app.add_subcommand("verify", "Run the invariant battery");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      if (seed_opt->count() > 0) train_opt.seed = train_seed;
      return ltac::cmd_train(train_opt);
    }
    if (eval->parsed()) {
      if (ms_opt->count() > 0) eval_opt.max_steps = eval_max_steps;
      return ltac::cmd_eval(eval_opt);
    }
    if (stepsize->parsed()) return ltac::cmd_stepsize(step_opt);
    return ltac::cmd_verify(verify_opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
