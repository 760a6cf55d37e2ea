#include <doctest.h>

#include <cmath>
#include <complex>

#include "ltac/diagnostics.hpp"
#include "ltac/ltadmm.hpp"
#include "support/test_envs.hpp"

using namespace ltac;
using ltac::testing::TabularEnv;

namespace {

// width 1, depth 1, relu, unit weights: V(s) = s for s > 0
ValueNetParams identity_net() {
  ValueNetParams p;
  p.shape = ValueNetShape{1, 1, 1, Activation::Relu};
  p.theta = Eigen::VectorXd::Ones(1);
  p.b = Eigen::VectorXd::Ones(1);
  return p;
}

JointTransition joint_tr(double s, Eigen::VectorXd rewards, double s_next) {
  JointTransition tr;
  tr.s = Eigen::VectorXd::Constant(1, s);
  tr.a = JointAction(static_cast<std::size_t>(rewards.size()), 0);
  tr.rewards = std::move(rewards);
  tr.s_next = Eigen::VectorXd::Constant(1, s_next);
  return tr;
}

Eigen::VectorXd vec1(double x) { return Eigen::VectorXd::Constant(1, x); }

}  // namespace

TEST_CASE("consensus error closed forms") {
  Eigen::MatrixXd same(3, 2);
  same << 1.0, 2.0, 1.0, 2.0, 1.0, 2.0;
  CHECK(consensus_error(same) == 0.0);

  // rows +v and -v around mean zero: 2 * ||v||^2
  Eigen::MatrixXd pm(2, 3);
  pm << 1.0, -2.0, 0.5, -1.0, 2.0, -0.5;
  CHECK(consensus_error(pm) ==
        doctest::Approx(2.0 * (1.0 + 4.0 + 0.25)).epsilon(1e-12));

  // invariant to a common shift
  Eigen::MatrixXd shifted = pm;
  shifted.rowwise() += Eigen::RowVector3d(5.0, -3.0, 2.0);
  CHECK(consensus_error(shifted) ==
        doctest::Approx(consensus_error(pm)).epsilon(1e-9));
}

TEST_CASE("stationarity surrogate averages the local-step terms") {
  const std::vector<double> steps{1.0, 2.0, 3.0};
  CHECK(dk_surrogate(0.5, steps) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(dk_surrogate(0.25, {}) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("critic loss hand values") {
  const ValueNetParams v = identity_net();
  const std::vector<ValueNetParams> one{v};
  // gamma 0: deltas are 2-1=1 and 0-0.5=-0.5, mean square 0.625
  std::vector<JointTransition> probe{joint_tr(1.0, vec1(2.0), 1.0),
                                     joint_tr(0.5, vec1(0.0), 1.0)};
  CHECK(critic_loss(one, probe, 0.0) ==
        doctest::Approx(0.625).epsilon(1e-12));

  // a perfect critic on a self-loop: delta = c + gamma*x - x = 0 when
  // x = c/(1-gamma)
  const double gamma = 0.8, c = 0.2, x = 1.0;
  std::vector<JointTransition> loop{joint_tr(x, vec1(c), x)};
  CHECK(critic_loss(one, loop, gamma) < 1e-15);

  // two agents with different rewards average over both
  ValueNetParams zero = v;
  zero.theta.setZero();  // V == 0
  const std::vector<ValueNetParams> two{zero, zero};
  Eigen::VectorXd r2(2);
  r2 << 1.0, 3.0;
  std::vector<JointTransition> jp{joint_tr(1.0, r2, 1.0)};
  CHECK(critic_loss(two, jp, 0.9) ==
        doctest::Approx((1.0 + 9.0) / 2.0).epsilon(1e-12));

  CHECK_THROWS_AS(critic_loss({}, probe, 0.9), std::invalid_argument);
}

TEST_CASE("mean preservation residual detects a broken bridge") {
  const GraphStructures gs = build_structures(ring_graph(4));
  const double rho = 0.5;
  Eigen::MatrixXd omegas(4, 2);
  omegas << 0.1, 0.2, -0.3, 0.4, 0.5, -0.6, 0.7, 0.8;

  // balanced state: z rows equal rho * omega of the slot source agent
  Eigen::MatrixXd z(gs.m, 2);
  for (int s = 0; s < gs.m; ++s)
    z.row(s) = rho * omegas.row(gs.slots[s].first);
  CHECK(mean_preservation_residual(z, omegas, gs, rho) < 1e-15);

  z(3, 0) += 1e-3;
  CHECK(mean_preservation_residual(z, omegas, gs, rho) ==
        doctest::Approx(1e-3).epsilon(1e-9));

  Eigen::MatrixXd bad(gs.m - 1, 2);
  bad.setZero();
  CHECK_THROWS_AS(mean_preservation_residual(bad, omegas, gs, rho),
                  std::invalid_argument);
}

TEST_CASE("compact-form check flags tampered traces") {
  RunConfig cfg;
  cfg.graph = ring_graph(3);
  cfg.env.n_agents = 3;
  cfg.train.oracle = OracleMode::Quadratic;
  cfg.train.rounds = 5;
  cfg.train.local_steps = 2;
  cfg.train.rho = 0.5;
  cfg.train.beta = 0.3;
  cfg.train.alpha = 0.05;
  cfg.quadratic.targets = Eigen::MatrixXd::Identity(3, 3);
  cfg.quadratic.curvatures = Eigen::VectorXd::Ones(3);
  cfg.diag.cache_compact_form = true;
  TrainingHistory h = train(cfg);
  REQUIRE(h.compact.has_value());
  const GraphStructures gs = build_structures(cfg.graph);

  CHECK(compact_form_check(*h.compact, gs) < 1e-12);

  CompactTrace tampered = *h.compact;
  tampered.rounds[2].omega(1, 1) += 1e-3;
  CHECK(compact_form_check(tampered, gs) > 1e-4);

  CompactTrace empty;
  CHECK(compact_form_check(empty, gs) == 0.0);
}

TEST_CASE("step-size constants at hand-checked points") {
  const GraphStructures tri = build_structures(ring_graph(3));
  // triangle: lambda_l = lambda_u = 3
  const StepsizeReport r = stepsize_bounds(1.0, 3, 0.5, 0.3, tri);
  CHECK(r.lambda_l == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(r.lambda_u == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(r.ltilde_norm == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(r.alpha3 == 0.25);  // 3/(4*1*3) is exact in binary
  CHECK(r.alpha1 == doctest::Approx(1.0 / (6.0 * std::sqrt(3.0))).epsilon(1e-12));
  CHECK(r.alpha2 == doctest::Approx(std::sqrt(3.0) / 24.0).epsilon(1e-12));
  CHECK(r.beta_window_lo == doctest::Approx(2.0 / 9.0).epsilon(1e-9));
  CHECK(r.beta_window_hi == doctest::Approx(4.0 / 9.0).epsilon(1e-9));
  CHECK(r.beta_in_window);
  CHECK(r.delta == doctest::Approx(1.0 - 3.0 * 0.5 * 3.0 * 0.3 / 2.0)
                       .epsilon(1e-12));
  CHECK(r.delta < 1.0);
  CHECK(r.alpha_bar > 0.0);
  CHECK(r.alpha_bar <=
        std::min({r.alpha1, r.alpha2, r.alpha3, r.alpha4, r.alpha5,
                  r.alpha6}) + 1e-18);

  // beta0, c2_tilde, c4 from the explicit formulas
  const double beta0 = 72.0 * 0.3 * 9.0 / (3.0 * 0.5) + 216.0 * 27.0 * 0.09;
  CHECK(r.beta0 == doctest::Approx(beta0).epsilon(1e-12));
  const double vinv_sq = r.vhat_inv_norm * r.vhat_inv_norm;
  const double c2 = 48.0 * (1.0 + 2.0 * 0.25 * 9.0) * 81.0 * 3.0 * vinv_sq;
  CHECK(r.c2_tilde == doctest::Approx(c2).epsilon(1e-9));
  const double c4 =
      (8.0 / 3.0) * (72.0 * 0.3 * 3.0 / (3.0 * 0.5) + 216.0 * 9.0 * 0.09);
  CHECK(r.c4 == doctest::Approx(c4).epsilon(1e-12));

  // alpha1 cap engages for small L*tau
  const StepsizeReport capped = stepsize_bounds(0.1, 1, 0.5, 3.0, tri);
  CHECK(capped.alpha1 == 1.0);
  CHECK(stepsize_bounds(1.0, 1, 1.0, 0.3, tri).alpha1 ==
        doctest::Approx(0.28867513459481287).epsilon(1e-12));
}

TEST_CASE("ring-5 window endpoints match the circulant closed form") {
  const GraphStructures gs = build_structures(ring_graph(5));
  const StepsizeReport r = stepsize_bounds(1.0, 3, 0.5, 0.01, gs);
  // lambda_u = 2 - 2*cos(4*pi/5) = (5 + sqrt(5))/2
  const double lu = (5.0 + std::sqrt(5.0)) / 2.0;
  const double ll = (5.0 - std::sqrt(5.0)) / 2.0;
  CHECK(r.lambda_u == doctest::Approx(3.6180340).epsilon(1e-6));
  CHECK(r.lambda_l == doctest::Approx(1.3819660).epsilon(1e-6));
  CHECK(r.beta_window_lo ==
        doctest::Approx(1.0 / (3.0 * lu * 0.5)).epsilon(1e-9));
  CHECK(r.beta_window_hi ==
        doctest::Approx(2.0 / (3.0 * lu * 0.5)).epsilon(1e-9));
  CHECK_FALSE(r.beta_in_window);  // paper's beta sits far below the window
  CHECK(ll == doctest::Approx(r.lambda_l).epsilon(1e-9));
}

TEST_CASE("alpha ceiling shrinks with smoothness") {
  const GraphStructures gs = build_structures(ring_graph(5));
  double prev = std::numeric_limits<double>::infinity();
  for (double L : {0.5, 1.0, 2.0, 4.0}) {
    const StepsizeReport r = stepsize_bounds(L, 3, 0.5, 0.3, gs);
    CHECK(r.alpha_bar < prev);
    CHECK(r.alpha_bar > 0.0);
    prev = r.alpha_bar;
  }
  // in-window beta keeps the contraction factor inside (0, 1)
  for (int tau : {1, 3, 5}) {
    const StepsizeReport r = stepsize_bounds(
        1.0, tau, 0.5, 1.2 / (tau * 3.6180339887498949 * 0.5), gs);
    CHECK(r.beta_in_window);
    CHECK(r.delta < 1.0);
    CHECK(r.delta > 0.0);
  }
}

TEST_CASE("eigenvector blocks invert consistently") {
  const GraphStructures gs = build_structures(ring_graph(5));
  const double beta = 0.25, rho = 0.5;
  const int tau = 3;
  const std::vector<Eigen::Matrix3cd> blocks =
      vhat_blocks(gs, beta, rho, tau);
  REQUIRE(blocks.size() == 4);  // one per nonzero eigenvalue

  // in-window beta makes the blocks genuinely complex
  bool any_complex = false;
  for (const auto& v : blocks)
    if (std::abs(v(0, 1).imag()) > 1e-12) any_complex = true;
  CHECK(any_complex);

  for (const auto& v : blocks) {
    const Eigen::Matrix3cd prod = v * v.inverse();
    CHECK((prod - Eigen::Matrix3cd::Identity()).cwiseAbs().maxCoeff() <
          1e-10);
  }

  // block-diagonal SVD oracle for the max-block-norm shortcut
  const double norm = vhat_inv_norm(gs, beta, rho, tau);
  Eigen::MatrixXcd blk = Eigen::MatrixXcd::Zero(12, 12);
  for (int b = 0; b < 4; ++b)
    blk.block<3, 3>(3 * b, 3 * b) = blocks[b].inverse();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(blk);
  CHECK(norm == doctest::Approx(svd.singularValues()(0)).epsilon(1e-9));

  // independent per-block oracle: sigma_max(V^-1) = 1/sigma_min(V)
  double oracle = 0.0;
  for (const auto& v : blocks) {
    Eigen::JacobiSVD<Eigen::Matrix3cd> s(v);
    oracle = std::max(oracle, 1.0 / s.singularValues()(2));
  }
  CHECK(norm == doctest::Approx(oracle).epsilon(1e-9));
}

TEST_CASE("singular block at the window edge is rejected") {
  // complete graph on 4 nodes with the spectrum pinned to exact integers;
  // beta*lambda*rho*tau = 2 zeroes the square root and collapses two columns
  GraphStructures gs = build_structures(complete_graph(4));
  gs.spectrum << 0.0, 4.0, 4.0, 4.0;
  CHECK_THROWS_AS(vhat_inv_norm(gs, 1.0, 0.5, 1), std::runtime_error);

  // slightly inside the window the blocks invert again
  CHECK(vhat_inv_norm(gs, 0.99, 0.5, 1) > 0.0);
}

TEST_CASE("step-size report round-trips through json") {
  const GraphStructures gs = build_structures(ring_graph(5));
  const StepsizeReport r = stepsize_bounds(1.5, 3, 0.5, 0.2, gs);
  const StepsizeReport back = stepsize_from_json(stepsize_to_json(r));
  CHECK(back.L == r.L);
  CHECK(back.tau == r.tau);
  CHECK(back.beta == r.beta);
  CHECK(back.lambda_l == r.lambda_l);
  CHECK(back.lambda_u == r.lambda_u);
  CHECK(back.vhat_inv_norm == r.vhat_inv_norm);
  CHECK(back.beta_in_window == r.beta_in_window);
  CHECK(back.alpha_bar == r.alpha_bar);
  CHECK(back.alpha4 == r.alpha4);
  CHECK(back.alpha5 == r.alpha5);
  CHECK(back.alpha6 == r.alpha6);
  CHECK(back.delta == r.delta);
  CHECK(back.beta0 == r.beta0);
  CHECK(back.c2_tilde == r.c2_tilde);
  CHECK(back.c4 == r.c4);
}

TEST_CASE("evaluation probe on a solvable loop") {
  // one state, two equal-reward actions, perfect critic: zero TD error,
  // zero gradient estimate, mean reward equal to the constant
  const double gamma = 0.8, c = 0.2;
  Eigen::MatrixXd feats(1, 1);
  feats << 1.0;  // x = c / (1 - gamma)
  std::vector<std::vector<Eigen::VectorXd>> trans{
      {ltac::testing::probs({1.0}), ltac::testing::probs({1.0})}};
  std::vector<std::vector<double>> reward{{c, c}};
  auto env = std::make_unique<TabularEnv>(feats, trans, reward);

  ChainCursor cursor(std::move(env), RngStream(5), 0);
  PolicyParams mean_policy =
      make_policy(PolicyLayout::make(1, 1, {2}, {4}));
  randomize_policy(mean_policy, 8, 0.1);
  const std::vector<ValueNetParams> thetas{identity_net()};

  const EvalProbe probe = eval_probe(cursor, mean_policy, thetas, 16, gamma);
  CHECK(probe.mean_reward == doctest::Approx(c).epsilon(1e-12));
  CHECK(probe.critic_loss < 1e-15);
  CHECK(probe.grad_norm_sq < 1e-15);

  CHECK_THROWS_AS(eval_probe(cursor, mean_policy, thetas, 0, gamma),
                  std::invalid_argument);
}
