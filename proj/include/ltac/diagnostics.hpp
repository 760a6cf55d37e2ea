#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "ltac/policynet.hpp"
#include "ltac/sampler.hpp"
#include "ltac/topology.hpp"
#include "ltac/valuenet.hpp"

namespace ltac {

// Rows of `omegas` are the per-agent parameter vectors.
// Returns sum_i ||omega_i - mean||^2.
double consensus_error(const Eigen::MatrixXd& omegas);

struct RoundMetrics {
  int round = 0;
  long comm_rounds = 0;
  double return_mean = 0.0;  // rolling-window smoothed per-round return
  double consensus_error = 0.0;
  double critic_loss = 0.0;
  double dk_surrogate = 0.0;
  double grad_norm_est = 0.0;
  double wall_time_s = 0.0;
};

// Stationarity surrogate: squared norm of the (estimated) average-parameter
// gradient plus the per-local-step average of ||mean_i g_i||^2.
double dk_surrogate(double grad_norm_est,
                    std::span<const double> mean_g_sq_per_step);

// Mean squared TD error over agents and probe transitions; rewards come per
// agent from the joint probe, values from each agent's own critic.
double critic_loss(std::span<const ValueNetParams> thetas,
                   std::span<const JointTransition> probe, double gamma);

// || 1^T A^T Z - rho 1^T D Omega ||_inf; zero in exact arithmetic whenever
// the bridge variables are balanced against the parameter average.
double mean_preservation_residual(const Eigen::MatrixXd& z,
                                  const Eigen::MatrixXd& omegas,
                                  const GraphStructures& gs, double rho);

// Recorded state of one outer round for the matrix-form replay.
struct CompactRound {
  Eigen::MatrixXd omega;  // N x d, row i = omega_i at round start
  Eigen::MatrixXd z;      // m x d, row = directed slot, at round start
  Eigen::MatrixXd sum_g;  // N x d, row i = sum over local steps of g_i
};

struct CompactTrace {
  double alpha = 0.0;
  double beta = 0.0;
  double rho = 0.0;
  int tau = 0;
  std::vector<CompactRound> rounds;
  Eigen::MatrixXd omega_final;
  Eigen::MatrixXd z_final;
};

// Replays the recorded rounds through the assembled-matrix recursions
//   Omega' = Omega + alpha*sum_g - tau*beta*(rho*D*Omega - A^T Z)
//   Z'     = Z/2 - P*Z/2 + rho*P*A*Omega'
// and returns the largest absolute deviation from the recorded iterates.
// An empty trace is vacuously zero.
double compact_form_check(const CompactTrace& trace,
                          const GraphStructures& gs);

struct StepsizeReport {
  double L = 0.0, rho = 0.0, beta = 0.0;
  int tau = 0, n_agents = 0;
  double lambda_l = 0.0, lambda_u = 0.0;
  double ltilde_norm = 0.0;
  double vhat_inv_norm = 0.0;
  double beta_window_lo = 0.0, beta_window_hi = 0.0;
  bool beta_in_window = false;
  double beta0 = 0.0, c2_tilde = 0.0, c4 = 0.0;
  double alpha1 = 0.0, alpha2 = 0.0, alpha3 = 0.0;
  double alpha4 = 0.0, alpha5 = 0.0, alpha6 = 0.0;
  double alpha_bar = 0.0;
  double delta = 0.0;  // 1 - lambda_l*rho*tau*beta/2
};

// Eigenvector blocks of the linearized update, one 3x3 block per nonzero
// eigenvalue of the signless matrix (ascending by Laplacian eigenvalue). The
// blocks are complex whenever beta is inside the admissible window (the
// square root argument turns negative there).
std::vector<Eigen::Matrix3cd> vhat_blocks(const GraphStructures& gs,
                                          double beta, double rho, int tau);

// Max operator norm of the inverted blocks. Permutation and orthogonal
// factors of the full eigenvector matrix do not change the operator norm, so
// only the blocks are inverted. Throws on a singular block, naming the
// offending eigenvalue.
double vhat_inv_norm(const GraphStructures& gs, double beta, double rho,
                     int tau);

double complex_operator_norm(const Eigen::Matrix3cd& m);

// Closed-form admissible step-size ceiling and its six components, plus the
// beta window [1/(tau*lambda_u*rho), 2/(tau*lambda_u*rho)). When beta falls
// outside the window the report carries beta_in_window=false instead of
// failing. All inputs must be positive.
StepsizeReport stepsize_bounds(double L, int tau, double rho, double beta,
                               const GraphStructures& gs);

nlohmann::json stepsize_to_json(const StepsizeReport& r);
StepsizeReport stepsize_from_json(const nlohmann::json& j);

struct EvalProbe {
  double grad_norm_sq = 0.0;  // squared norm of the estimated gradient at
                              // the mean policy
  double critic_loss = 0.0;
  double mean_reward = 0.0;   // per-step team-average reward of the probe
};

// Evaluation-only batch at the mean policy: estimates the joint-return
// gradient as (1/B) sum_l mean-TD-error * score and scores the critics on the
// same transitions. Advances only the dedicated evaluation cursor.
EvalProbe eval_probe(ChainCursor& cursor, const PolicyParams& mean_policy,
                     std::span<const ValueNetParams> thetas, int batch,
                     double gamma);

}  // namespace ltac
