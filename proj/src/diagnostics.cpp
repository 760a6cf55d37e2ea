#include "ltac/diagnostics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ltac {

double consensus_error(const Eigen::MatrixXd& omegas) {
  const Eigen::RowVectorXd mean = omegas.colwise().mean();
  return (omegas.rowwise() - mean).squaredNorm();
}

double dk_surrogate(double grad_norm_est,
                    std::span<const double> mean_g_sq_per_step) {
  double avg = 0.0;
  for (double v : mean_g_sq_per_step) avg += v;
  if (!mean_g_sq_per_step.empty())
    avg /= static_cast<double>(mean_g_sq_per_step.size());
  return grad_norm_est + avg;
}

double critic_loss(std::span<const ValueNetParams> thetas,
                   std::span<const JointTransition> probe, double gamma) {
  if (thetas.empty() || probe.empty())
    throw std::invalid_argument("critic_loss: empty inputs");
  double total = 0.0;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    for (const JointTransition& tr : probe) {
      const double delta = tr.rewards(static_cast<Eigen::Index>(i)) +
                           gamma * value(thetas[i], tr.s_next) -
                           value(thetas[i], tr.s);
      total += delta * delta;
    }
  }
  return total / (static_cast<double>(thetas.size()) *
                  static_cast<double>(probe.size()));
}

double mean_preservation_residual(const Eigen::MatrixXd& z,
                                  const Eigen::MatrixXd& omegas,
                                  const GraphStructures& gs, double rho) {
  if (z.rows() != gs.m || omegas.rows() != gs.n)
    throw std::invalid_argument("mean_preservation_residual: shape mismatch");
  Eigen::RowVectorXd lhs = z.colwise().sum();
  Eigen::RowVectorXd rhs = Eigen::RowVectorXd::Zero(omegas.cols());
  for (int i = 0; i < gs.n; ++i) rhs += rho * gs.degree[i] * omegas.row(i);
  return (lhs - rhs).cwiseAbs().maxCoeff();
}

double compact_form_check(const CompactTrace& trace,
                          const GraphStructures& gs) {
  if (trace.rounds.empty()) return 0.0;
  const Eigen::MatrixXd& A = gs.incidence;
  const Eigen::MatrixXd& P = gs.permutation;
  const Eigen::MatrixXd& D = gs.degree_matrix;
  double max_res = 0.0;
  for (std::size_t k = 0; k < trace.rounds.size(); ++k) {
    const CompactRound& cur = trace.rounds[k];
    const bool last = (k + 1 == trace.rounds.size());
    const Eigen::MatrixXd& omega_next =
        last ? trace.omega_final : trace.rounds[k + 1].omega;
    const Eigen::MatrixXd& z_next =
        last ? trace.z_final : trace.rounds[k + 1].z;

    Eigen::MatrixXd omega_pred =
        cur.omega + trace.alpha * cur.sum_g -
        trace.tau * trace.beta *
            (trace.rho * D * cur.omega - A.transpose() * cur.z);
    Eigen::MatrixXd z_pred =
        0.5 * cur.z - 0.5 * P * cur.z + trace.rho * P * A * omega_next;

    max_res = std::max(max_res,
                       (omega_pred - omega_next).cwiseAbs().maxCoeff());
    max_res = std::max(max_res, (z_pred - z_next).cwiseAbs().maxCoeff());
  }
  return max_res;
}

double complex_operator_norm(const Eigen::Matrix3cd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> solver(m.adjoint() * m);
  return std::sqrt(solver.eigenvalues().maxCoeff());
}

std::vector<Eigen::Matrix3cd> vhat_blocks(const GraphStructures& gs,
                                          double beta, double rho, int tau) {
  if (beta <= 0.0 || rho <= 0.0 || tau < 1)
    throw std::invalid_argument("vhat_blocks: positive inputs required");
  // Nonzero eigenvalues of the signless matrix are the negated nonzero
  // Laplacian eigenvalues.
  std::vector<Eigen::Matrix3cd> blocks;
  const double bt = beta * tau;
  for (Eigen::Index idx = 1; idx < gs.spectrum.size(); ++idx) {
    const double lam = -gs.spectrum(idx);
    const std::complex<double> root = std::sqrt(
        std::complex<double>(bt * lam * rho * (bt * lam * rho + 2.0)));
    const std::complex<double> d12 = -bt + root / (lam * rho);
    const std::complex<double> d13 = -bt - root / (lam * rho);
    Eigen::Matrix3cd v;
    v << std::complex<double>(-bt), d12, d13,
         std::complex<double>(1.0), lam * rho * d12 - 1.0,
         lam * rho * d13 - 1.0,
         std::complex<double>(1.0), std::complex<double>(1.0),
         std::complex<double>(1.0);
    blocks.push_back(v);
  }
  return blocks;
}

double vhat_inv_norm(const GraphStructures& gs, double beta, double rho,
                     int tau) {
  double max_norm = 0.0;
  const std::vector<Eigen::Matrix3cd> blocks =
      vhat_blocks(gs, beta, rho, tau);
  for (std::size_t idx = 0; idx < blocks.size(); ++idx) {
    const Eigen::Matrix3cd& v = blocks[idx];
    const std::complex<double> det = v.determinant();
    double scale = 0.0;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) scale = std::max(scale, std::abs(v(r, c)));
    if (std::abs(det) < 1e-12 * scale * scale * scale)
      throw std::runtime_error(
          "vhat_inv_norm: singular eigenvector block at eigenvalue " +
          std::to_string(-gs.spectrum(static_cast<Eigen::Index>(idx) + 1)));
    max_norm = std::max(max_norm, complex_operator_norm(v.inverse()));
  }
  return max_norm;
}

StepsizeReport stepsize_bounds(double L, int tau, double rho, double beta,
                               const GraphStructures& gs) {
  if (L <= 0.0 || tau < 1 || rho <= 0.0 || beta <= 0.0)
    throw std::invalid_argument("stepsize_bounds: positive inputs required");
  StepsizeReport r;
  r.L = L;
  r.tau = tau;
  r.rho = rho;
  r.beta = beta;
  r.n_agents = gs.n;

  const LambdaBounds lb = lambda_bounds(gs);
  r.lambda_l = lb.lambda_min_nonzero;
  r.lambda_u = lb.lambda_max;
  // The signless matrix is symmetric, so the operator norm is the largest
  // absolute eigenvalue.
  r.ltilde_norm = gs.spectrum.cwiseAbs().maxCoeff();

  r.beta_window_lo = 1.0 / (tau * r.lambda_u * rho);
  r.beta_window_hi = 2.0 / (tau * r.lambda_u * rho);
  r.beta_in_window = beta >= r.beta_window_lo && beta < r.beta_window_hi;

  r.vhat_inv_norm = ltac::vhat_inv_norm(gs, beta, rho, tau);
  const double vinv_sq = r.vhat_inv_norm * r.vhat_inv_norm;
  const double n = static_cast<double>(gs.n);
  const double t = static_cast<double>(tau);

  r.beta0 = 72.0 * beta * t * t / (r.lambda_l * rho) +
            216.0 * t * t * t * beta * beta;
  r.c2_tilde = 48.0 * (1.0 + 2.0 * rho * rho * r.ltilde_norm * r.ltilde_norm) *
               L * L * t * t * t * t * n * vinv_sq;
  r.c4 = (8.0 * L * L / n) *
         (72.0 * beta * t / (r.lambda_l * rho) + 216.0 * t * t * beta * beta);

  r.alpha1 = std::min(1.0, 1.0 / (2.0 * L * t * std::sqrt(3.0)));
  r.alpha2 = std::sqrt(n) / (8.0 * L * t);
  r.alpha3 = 3.0 / (4.0 * L * t);
  r.alpha4 =
      r.lambda_l /
      (r.lambda_u *
       std::sqrt(16.0 *
                 (1.0 + 2.0 * rho * rho * r.ltilde_norm * r.ltilde_norm) * t *
                 L * L * vinv_sq * r.beta0));
  r.alpha5 = std::pow(r.lambda_l * r.lambda_l /
                          (16.0 * r.c4 * r.lambda_u * r.lambda_u * r.c2_tilde),
                      0.25);
  r.alpha6 = std::pow(
      r.lambda_l * r.lambda_l * beta * beta /
          (48.0 * r.c4 * t * r.lambda_u * r.lambda_u * L * L * n * vinv_sq),
      0.25);
  r.alpha_bar = std::min({r.alpha1, r.alpha2, r.alpha3, r.alpha4, r.alpha5,
                          r.alpha6});

  r.delta = 1.0 - r.lambda_l * rho * t * beta / 2.0;
  // Contraction sanity: inside the window the decay factor stays below one.
  if (r.lambda_u * rho * t * beta < 2.0 && r.delta >= 1.0)
    throw std::logic_error("stepsize_bounds: contraction factor >= 1");
  return r;
}

nlohmann::json stepsize_to_json(const StepsizeReport& r) {
  return {{"L", r.L},
          {"tau", r.tau},
          {"rho", r.rho},
          {"beta", r.beta},
          {"n_agents", r.n_agents},
          {"lambda_l", r.lambda_l},
          {"lambda_u", r.lambda_u},
          {"ltilde_norm", r.ltilde_norm},
          {"vhat_inv_norm", r.vhat_inv_norm},
          {"beta_window_lo", r.beta_window_lo},
          {"beta_window_hi", r.beta_window_hi},
          {"beta_in_window", r.beta_in_window},
          {"beta0", r.beta0},
          {"c2_tilde", r.c2_tilde},
          {"c4", r.c4},
          {"alpha1", r.alpha1},
          {"alpha2", r.alpha2},
          {"alpha3", r.alpha3},
          {"alpha4", r.alpha4},
          {"alpha5", r.alpha5},
          {"alpha6", r.alpha6},
          {"alpha_bar", r.alpha_bar},
          {"delta", r.delta}};
}

StepsizeReport stepsize_from_json(const nlohmann::json& j) {
  StepsizeReport r;
  r.L = j.at("L").get<double>();
  r.tau = j.at("tau").get<int>();
  r.rho = j.at("rho").get<double>();
  r.beta = j.at("beta").get<double>();
  r.n_agents = j.at("n_agents").get<int>();
  r.lambda_l = j.at("lambda_l").get<double>();
  r.lambda_u = j.at("lambda_u").get<double>();
  r.ltilde_norm = j.at("ltilde_norm").get<double>();
  r.vhat_inv_norm = j.at("vhat_inv_norm").get<double>();
  r.beta_window_lo = j.at("beta_window_lo").get<double>();
  r.beta_window_hi = j.at("beta_window_hi").get<double>();
  r.beta_in_window = j.at("beta_in_window").get<bool>();
  r.beta0 = j.at("beta0").get<double>();
  r.c2_tilde = j.at("c2_tilde").get<double>();
  r.c4 = j.at("c4").get<double>();
  r.alpha1 = j.at("alpha1").get<double>();
  r.alpha2 = j.at("alpha2").get<double>();
  r.alpha3 = j.at("alpha3").get<double>();
  r.alpha4 = j.at("alpha4").get<double>();
  r.alpha5 = j.at("alpha5").get<double>();
  r.alpha6 = j.at("alpha6").get<double>();
  r.alpha_bar = j.at("alpha_bar").get<double>();
  r.delta = j.at("delta").get<double>();
  return r;
}

EvalProbe eval_probe(ChainCursor& cursor, const PolicyParams& mean_policy,
                     std::span<const ValueNetParams> thetas, int batch,
                     double gamma) {
  if (batch < 1) throw std::invalid_argument("eval_probe: batch >= 1");
  if (thetas.empty()) throw std::invalid_argument("eval_probe: no critics");
  JointCollectResult probe = collect_joint(cursor, mean_policy, batch);

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(mean_policy.layout.dim);
  double reward_sum = 0.0;
  const double n = static_cast<double>(thetas.size());
  for (const JointTransition& tr : probe.transitions) {
    // Mean TD error across agents equals the average of the per-agent
    // estimator weights, so one score evaluation per sample suffices.
    double mean_delta = 0.0;
    for (std::size_t i = 0; i < thetas.size(); ++i) {
      mean_delta += tr.rewards(static_cast<Eigen::Index>(i)) +
                    gamma * value(thetas[i], tr.s_next) -
                    value(thetas[i], tr.s);
    }
    mean_delta /= n;
    grad.noalias() += mean_delta * score(mean_policy, tr.s, tr.a);
    reward_sum += tr.rewards.mean();
  }
  grad /= static_cast<double>(batch);

  EvalProbe out;
  out.grad_norm_sq = grad.squaredNorm();
  out.critic_loss = critic_loss(thetas, probe.transitions, gamma);
  out.mean_reward = reward_sum / static_cast<double>(batch);
  return out;
}

}  // namespace ltac
