#include <doctest.h>

#include <cmath>

#include "ltac/rng.hpp"
#include "ltac/valuenet.hpp"
#include "support/test_envs.hpp"

using namespace ltac;
using ltac::testing::fd_gradient;

namespace {

ValueNetParams scalar_net(double theta, double b, Activation act,
                          int depth = 1) {
  ValueNetParams p;
  p.shape = ValueNetShape{1, depth, 1, act};
  p.theta = Eigen::VectorXd::Constant(depth, theta);
  p.b = Eigen::VectorXd::Constant(1, b);
  return p;
}

Eigen::VectorXd unit_state(double v) {
  Eigen::VectorXd s(1);
  s(0) = v;
  return s;
}

}  // namespace

TEST_CASE("flat layout offsets and parameter counts") {
  ValueNetShape sh{4, 3, 7, Activation::Tanh};
  CHECK(sh.layer_offset(0) == 0);
  CHECK(sh.layer_offset(1) == 4 * 7);
  CHECK(sh.layer_offset(2) == 4 * 7 + 16);
  CHECK(sh.param_count() == 4 * 7 + 16 + 16);

  const ValueNetParams p = init_valuenet(1, 4, 3, 7, Activation::Tanh);
  CHECK(p.theta.size() == sh.param_count());
  CHECK(p.b.size() == 4);
}

TEST_CASE("scalar tanh net matches closed form") {
  // width 1, depth 1: V = b * tanh(theta * s), all scale factors are 1
  const ValueNetParams p = scalar_net(1.0, 1.0, Activation::Tanh);
  CHECK(value(p, unit_state(1.0)) ==
        doctest::Approx(0.76159415595576485).epsilon(1e-15));

  const ValueGradResult g = value_grad(p, unit_state(1.0));
  CHECK(g.value == doctest::Approx(0.76159415595576485).epsilon(1e-15));
  // dV/dtheta = b * (1 - tanh(1)^2) * s
  CHECK(g.grad(0) == doctest::Approx(0.41997434161402614).epsilon(1e-15));

  // depth 2 composes: V = b * tanh(tanh(s))
  const ValueNetParams p2 = scalar_net(1.0, 2.0, Activation::Tanh, 2);
  const double x1 = std::tanh(1.0);
  CHECK(value(p2, unit_state(1.0)) ==
        doctest::Approx(2.0 * std::tanh(x1)).epsilon(1e-15));
  const ValueGradResult g2 = value_grad(p2, unit_state(1.0));
  const double d2 = 1.0 - std::tanh(x1) * std::tanh(x1);
  // layer 2 weight sees input x1; layer 1 weight chains through both layers
  CHECK(g2.grad(1) == doctest::Approx(2.0 * d2 * x1).epsilon(1e-12));
  CHECK(g2.grad(0) ==
        doctest::Approx(2.0 * d2 * (1.0 - x1 * x1)).epsilon(1e-12));
}

TEST_CASE("width scaling applies 1/sqrt(m) twice") {
  // width 4, depth 1, all-ones parameters, s = 1:
  // u_i = 1, x_i = tanh(1)/2, V = (1/2) * 4 * tanh(1)/2 = tanh(1)
  ValueNetParams p;
  p.shape = ValueNetShape{4, 1, 1, Activation::Tanh};
  p.theta = Eigen::VectorXd::Ones(4);
  p.b = Eigen::VectorXd::Ones(4);
  CHECK(value(p, unit_state(1.0)) ==
        doctest::Approx(std::tanh(1.0)).epsilon(1e-15));
  const ValueGradResult g = value_grad(p, unit_state(1.0));
  // dV/dtheta_i = (1/4) * sech(1)^2
  for (int i = 0; i < 4; ++i)
    CHECK(g.grad(i) ==
          doctest::Approx(0.41997434161402614 / 4.0).epsilon(1e-12));
}

TEST_CASE("relu subgradient is zero at the kink") {
  const ValueNetParams p = scalar_net(0.0, 1.0, Activation::Relu);
  CHECK(value(p, unit_state(1.0)) == 0.0);
  CHECK(value_grad(p, unit_state(1.0)).grad(0) == 0.0);

  // just above the kink the gradient is b * s
  const ValueNetParams q = scalar_net(1e-9, 2.0, Activation::Relu);
  CHECK(value_grad(q, unit_state(3.0)).grad(0) ==
        doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("analytic gradient matches central finite differences") {
  const int probes = 20;

  SUBCASE("tanh") {
    for (int k = 0; k < probes; ++k) {
      ValueNetParams p =
          init_valuenet(100 + std::uint64_t(k), 8, 2, 3, Activation::Tanh);
      RngStream sr(500 + std::uint64_t(k));
      Eigen::VectorXd s(3);
      for (int i = 0; i < 3; ++i) s(i) = sr.uniform(-1.0, 1.0);

      const ValueGradResult g = value_grad(p, s);
      const Eigen::VectorXd fd = fd_gradient(
          [&](const Eigen::VectorXd& th) {
            ValueNetParams q = p;
            q.theta = th;
            return value(q, s);
          },
          p.theta, 1e-6);
      const double rel = (g.grad - fd).norm() / (fd.norm() + 1e-12);
      CHECK(rel < 1e-5);
    }
  }

  SUBCASE("relu away from kinks") {
    int accepted = 0;
    std::uint64_t seed = 1000;
    while (accepted < probes) {
      ValueNetParams p = init_valuenet(seed, 8, 2, 3, Activation::Relu);
      RngStream sr(seed + 7919);
      ++seed;
      Eigen::VectorXd s(3);
      for (int i = 0; i < 3; ++i) s(i) = sr.uniform(-1.0, 1.0);

      // skip probes with a pre-activation near a kink, where the finite
      // difference straddles the nondifferentiable point
      const double h = 1e-6;
      bool near_kink = false;
      Eigen::VectorXd x = s;
      for (int l = 0; l < p.shape.depth && !near_kink; ++l) {
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                       Eigen::RowMajor>>
            w(p.theta.data() + p.shape.layer_offset(l), p.shape.layer_rows(l),
              p.shape.layer_cols(l));
        Eigen::VectorXd u = w * x;
        if (u.cwiseAbs().minCoeff() < 1e-3) near_kink = true;
        x = (u.array().max(0.0) / std::sqrt(8.0)).matrix();
      }
      if (near_kink) continue;
      ++accepted;

      const ValueGradResult g = value_grad(p, s);
      const Eigen::VectorXd fd = fd_gradient(
          [&](const Eigen::VectorXd& th) {
            ValueNetParams q = p;
            q.theta = th;
            return value(q, s);
          },
          p.theta, h);
      const double rel = (g.grad - fd).norm() / (fd.norm() + 1e-12);
      CHECK(rel < 1e-4);
    }
  }
}

TEST_CASE("initialization draws theta then b from one stream") {
  const ValueNetParams p = init_valuenet(77, 3, 2, 2, Activation::Relu);
  RngStream rng(77);
  for (Eigen::Index i = 0; i < p.theta.size(); ++i)
    CHECK(p.theta(i) == rng.normal());
  for (int i = 0; i < 3; ++i) CHECK(p.b(i) == rng.normal());

  // same seed reproduces; different seed does not
  const ValueNetParams q = init_valuenet(77, 3, 2, 2, Activation::Relu);
  CHECK(p.theta == q.theta);
  CHECK(p.b == q.b);
  const ValueNetParams r = init_valuenet(78, 3, 2, 2, Activation::Relu);
  CHECK(p.theta != r.theta);
}

TEST_CASE("initialization is standard normal in aggregate") {
  const ValueNetParams p = init_valuenet(5, 64, 2, 20, Activation::Tanh);
  REQUIRE(p.theta.size() == 64 * 20 + 64 * 64);
  const double mean = p.theta.mean();
  const double var =
      (p.theta.array() - mean).square().sum() / double(p.theta.size() - 1);
  CHECK(std::abs(mean) < 0.07);
  CHECK(std::abs(var - 1.0) < 0.1);
}

TEST_CASE("values stay moderate across widths at random init") {
  for (int m : {1, 4, 16, 64}) {
    const ValueNetParams p = init_valuenet(m, m, 2, 4, Activation::Tanh);
    RngStream sr(m + 1);
    for (int k = 0; k < 10; ++k) {
      Eigen::VectorXd s(4);
      for (int i = 0; i < 4; ++i) s(i) = sr.uniform(-1.0, 1.0);
      CHECK(std::abs(value(p, s)) < 100.0);
    }
  }
}

TEST_CASE("projection onto the parameter ball") {
  ProjectionBall ball;
  ball.center = Eigen::VectorXd::Zero(3);
  ball.radius = 2.0;

  Eigen::VectorXd inside(3);
  inside << 1.0, 0.5, -0.5;
  CHECK(project_theta(inside, ball) == inside);

  Eigen::VectorXd outside(3);
  outside << 3.0, 0.0, 4.0;  // norm 5 -> scaled to norm 2
  const Eigen::VectorXd proj = project_theta(outside, ball);
  CHECK(proj.norm() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(proj(0) == doctest::Approx(1.2).epsilon(1e-12));
  CHECK(proj(2) == doctest::Approx(1.6).epsilon(1e-12));

  // off-center ball: projection lands on the segment toward the center
  ball.center = Eigen::VectorXd::Ones(3);
  ball.radius = 1.0;
  const Eigen::VectorXd q = project_theta(outside, ball);
  CHECK((q - ball.center).norm() == doctest::Approx(1.0).epsilon(1e-12));
  const Eigen::VectorXd dir = (outside - ball.center).normalized();
  CHECK((q - (ball.center + dir)).norm() < 1e-12);

  // boundary point is a fixed point of the projection
  const Eigen::VectorXd boundary = ball.center + dir;
  CHECK((project_theta(boundary, ball) - boundary).norm() < 1e-12);

  ValueNetParams p = scalar_net(5.0, 1.0, Activation::Tanh);
  ProjectionBall b1{Eigen::VectorXd::Zero(1), 2.0};
  const ValueNetParams pp = project(p, b1);
  CHECK(pp.theta(0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("dimension mismatches are rejected") {
  const ValueNetParams p = init_valuenet(1, 4, 1, 3, Activation::Tanh);
  Eigen::VectorXd bad(2);
  bad.setZero();
  CHECK_THROWS_AS(value(p, bad), std::invalid_argument);
  CHECK_THROWS_AS(value_grad(p, bad), std::invalid_argument);
  CHECK_THROWS_AS(init_valuenet(1, 0, 1, 1, Activation::Tanh),
                  std::invalid_argument);
}
