#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "czsd/algorithm.hpp"
#include "czsd/metrics.hpp"

using namespace czsd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

Topology ring(int n) {
  MatrixXd adj = MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) adj(i, i + 1) = adj(i + 1, i) = 1.0;
  if (n > 2) adj(0, n - 1) = adj(n - 1, 0) = 1.0;
  return build_topology(adj);
}

// constant objective: gradient-free fixed-point checks
ProblemInstance constant_problem(int n, int p) {
  ProblemInstance prob = pl_quadratic_make(n, p);
  prob.scalings.setZero();
  return prob;
}

Schedule table1(int n, int p) {
  return make_schedule(ScheduleRegime::table1, {}, n, p);
}

}  // namespace

TEST_CASE("schedule laws: theorem1") {
  ScheduleParams prm;
  prm.eps1 = 2.0;
  prm.eps2 = 0.5;
  prm.horizon = 100;
  prm.kappa_mu = 1.0;
  Schedule s = make_schedule(ScheduleRegime::theorem1_fixed, prm, 4, 16);
  CHECK(s.alpha(0) == doctest::Approx(0.05));  // sqrt(4)/sqrt(16*100)
  CHECK(s.alpha(50) == doctest::Approx(0.05));
  CHECK(s.gamma(0) == doctest::Approx(prm.eps2 / 0.05));
  CHECK(s.beta(0) == doctest::Approx(prm.eps1 * s.gamma(0)));
  CHECK(s.mu(0) == doctest::Approx(std::sqrt(16 * 0.05) / std::sqrt(20.0)));
}

TEST_CASE("schedule laws: theorem2 and theorem3") {
  ScheduleParams prm;
  prm.eps1 = 1.0;
  prm.eps2 = 1.0;
  prm.eps3 = 0.1;
  prm.m = 10;
  prm.kappa_mu = 1.0;
  Schedule s2 = make_schedule(ScheduleRegime::theorem2_timevarying, prm, 4, 8);
  CHECK(s2.gamma(0) == doctest::Approx(1.0));
  CHECK(s2.gamma(5) == doctest::Approx(1.5));
  CHECK(s2.alpha(5) * s2.gamma(5) == doctest::Approx(prm.eps2));
  CHECK(s2.beta(5) / s2.gamma(5) == doctest::Approx(prm.eps1));
  CHECK(s2.gamma(6) >= s2.gamma(5));  // nondecreasing

  prm.gamma_fixed = 2.0;
  prm.eps_tilde = 0.9;
  Schedule s3 = make_schedule(ScheduleRegime::theorem3_geometric, prm, 4, 8);
  CHECK(s3.gamma(7) == 2.0);
  CHECK(s3.mu(3) == doctest::Approx(std::pow(0.9, 3)));
  CHECK(s3.mu(100000) == kMuFloor);  // clamped, never zero
}

TEST_CASE("schedule laws: table1 values at k=0") {
  Schedule s = table1(20, 50);
  CHECK(s.alpha(0) == doctest::Approx(0.1));
  CHECK(s.beta(0) == doctest::Approx(3.0));
  CHECK(s.gamma(0) == doctest::Approx(0.1));
  CHECK(s.mu(0) == doctest::Approx(1.0));
  CHECK(s.omega() == doctest::Approx(0.1));
}

TEST_CASE("schedule rejects bad parameters") {
  ScheduleParams prm;
  prm.eps_tilde = 1.5;
  CHECK_THROWS_AS(make_schedule(ScheduleRegime::theorem3_geometric, prm, 4, 8),
                  InvalidParams);
  prm = {};
  prm.eps1 = -1.0;
  CHECK_THROWS_AS(make_schedule(ScheduleRegime::theorem2_timevarying, prm, 4, 8),
                  InvalidParams);
}

TEST_CASE("init: state layout per the algorithm's initialization") {
  Topology topo = ring(4);
  ProblemInstance prob = pl_quadratic_make(4, 3);
  MatrixXd x0 = MatrixXd::Zero(3, 4);
  RunState st = init(topo, prob, identity_compressor(), table1(4, 3), x0, 1);
  CHECK(st.V.cwiseAbs().maxCoeff() == 0.0);
  CHECK(st.Y.cwiseAbs().maxCoeff() == 0.0);
  CHECK(st.Z.cwiseAbs().maxCoeff() == 0.0);
  CHECK(st.Q.cwiseAbs().maxCoeff() == 0.0);  // q0 = C(x0) = 0
  CHECK(st.bits == 0);

  // identical nonzero starts: zero consensus error
  MatrixXd same = MatrixXd::Ones(3, 4);
  RunState st2 = init(topo, prob, identity_compressor(), table1(4, 3), same, 1);
  CHECK(consensus_error(st2.X) == doctest::Approx(0.0));
}

TEST_CASE("init rejects disconnected graphs and bad dimensions") {
  Topology disc = build_topology(MatrixXd::Zero(3, 3));
  ProblemInstance prob = pl_quadratic_make(3, 2);
  CHECK_THROWS_AS(init(disc, prob, identity_compressor(), table1(3, 2),
                       MatrixXd::Zero(2, 3), 1),
                  DisconnectedError);
  Topology topo = ring(3);
  CHECK_THROWS_AS(init(topo, prob, identity_compressor(), table1(3, 2),
                       MatrixXd::Zero(2, 4), 1),
                  DimensionMismatch);
}

TEST_CASE("consensus fixed point: identity compressor, equal starts, flat cost") {
  Topology topo = ring(5);
  ProblemInstance prob = constant_problem(5, 3);
  MatrixXd x0 = MatrixXd::Ones(3, 5) * 0.7;
  RunState st = init(topo, prob, identity_compressor(), table1(5, 3), x0, 2);
  for (int k = 0; k < 10; ++k) czsd_step(st);
  CHECK((st.X - x0).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(st.V.cwiseAbs().maxCoeff() < 1e-12);

  RunState bs = init(topo, prob, identity_compressor(), table1(5, 3), x0, 2);
  for (int k = 0; k < 10; ++k) zsdpd_step(bs);
  CHECK((bs.X - x0).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("dual sum and memory identity hold along a compressed run") {
  Topology topo = ring(6);
  ProblemInstance prob = pl_quadratic_make(6, 4, Heterogeneity::scaled, 5);
  auto x0rng = substream(3, 0);
  std::normal_distribution<double> gauss;
  MatrixXd x0(4, 6);
  for (int i = 0; i < 6; ++i)
    for (int l = 0; l < 4; ++l) x0(l, i) = gauss(x0rng);
  RunState st =
      init(topo, prob, dithered_quantizer(2), table1(6, 4), x0, 3);
  for (int k = 0; k < 200; ++k) {
    czsd_step(st);
    const double vscale = std::max(1.0, st.V.cwiseAbs().maxCoeff());
    CHECK(st.V.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-10 * vscale);
    const Eigen::MatrixXd LY = st.Y * topo.laplacian;
    const double zscale = std::max(1.0, LY.cwiseAbs().maxCoeff());
    CHECK((st.Z - LY).cwiseAbs().maxCoeff() <= 1e-10 * zscale);
  }
}

TEST_CASE("mean dynamics follow the averaged gradient step") {
  Topology topo = ring(4);
  ProblemInstance prob = pl_quadratic_make(4, 3, Heterogeneity::scaled, 8);
  MatrixXd x0 = MatrixXd::Ones(3, 4);
  RunState st = init(topo, prob, dithered_quantizer(2), table1(4, 3), x0, 9);
  for (int k = 0; k < 50; ++k) {
    const VectorXd xbar = mean_column(st.X);
    // replay the round's gradient draws to recover mean(g^z)
    RunState copy = st;
    const double alpha = st.sched.alpha(st.k);
    czsd_step(st);
    VectorXd gbar = VectorXd::Zero(3);
    {
      const double mu = copy.sched.mu(copy.k);
      for (int i = 0; i < 4; ++i) {
        const XiDraw xi = copy.prob->draw_xi(i, copy.xi_rng[i]);
        const VectorXd zeta = sample_sphere(3, copy.zeta_rng[i]);
        auto f = [&](const VectorXd& x) { return copy.prob->eval(i, x, xi); };
        gbar += zo_gradient(f, copy.X.col(i), mu, zeta);
      }
      gbar /= 4.0;
    }
    const VectorXd want = xbar - alpha * gbar;
    CHECK((mean_column(st.X) - want).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("single agent: both algorithms reduce to the plain ZO step") {
  Topology topo = build_topology(MatrixXd::Zero(1, 1));
  ProblemInstance prob = pl_quadratic_make(1, 2, Heterogeneity::scaled, 4);
  MatrixXd x0 = MatrixXd::Ones(2, 1) * 2.0;
  RunState a = init(topo, prob, identity_compressor(), table1(1, 2), x0, 5);
  RunState b = init(topo, prob, identity_compressor(), table1(1, 2), x0, 5);
  for (int k = 0; k < 20; ++k) {
    czsd_step(a);
    zsdpd_step(b);
  }
  CHECK((a.X - b.X).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(a.V.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("bit accounting: broadcast convention, exact counts") {
  Topology topo = ring(6);
  ProblemInstance prob = pl_quadratic_make(6, 10);
  MatrixXd x0 = MatrixXd::Zero(10, 6);
  RunState st = init(topo, prob, dithered_quantizer(2), table1(6, 10), x0, 6);
  const int K = 25;
  for (int k = 0; k < K; ++k) czsd_step(st);
  CHECK(st.bits == std::uint64_t(6) * K * (3 * 10 + 64));

  RunState bs = init(topo, prob, identity_compressor(), table1(6, 10), x0, 6);
  for (int k = 0; k < K; ++k) zsdpd_step(bs);
  CHECK(bs.bits == std::uint64_t(6) * K * 64 * 10);
}

TEST_CASE("bit accounting: per-edge convention scales with degree") {
  Topology topo = ring(6);  // every agent has 2 neighbors
  ProblemInstance prob = pl_quadratic_make(6, 10);
  MatrixXd x0 = MatrixXd::Zero(10, 6);
  RunState st = init(topo, prob, dithered_quantizer(2), table1(6, 10), x0, 6,
                     BitConvention::per_edge);
  czsd_step(st);
  CHECK(st.bits == std::uint64_t(12) * (3 * 10 + 64));
}

TEST_CASE("determinism: identical config and seed, identical state") {
  Topology topo = ring(5);
  ProblemInstance prob = make_logistic(5, 6, 20, 1e-3, 1.0, 2);
  MatrixXd x0 = MatrixXd::Zero(6, 5);
  RunState a = init(topo, prob, dithered_quantizer(2), table1(5, 6), x0, 77);
  RunState b = init(topo, prob, dithered_quantizer(2), table1(5, 6), x0, 77);
  for (int k = 0; k < 30; ++k) {
    czsd_step(a);
    czsd_step(b);
  }
  CHECK((a.X - b.X).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.V - b.V).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.bits == b.bits);
}

TEST_CASE("divergence guard raises a structured error") {
  Topology topo = ring(3);
  ProblemInstance prob = pl_quadratic_make(3, 2);
  MatrixXd x0 = MatrixXd::Ones(2, 3) * 1e11;
  ScheduleParams prm;
  prm.alpha0 = 1e6;  // absurd step size forces blow-up
  prm.beta0 = 1e6;
  prm.gamma0 = 1e6;
  prm.mu_decay = 1.0;
  Schedule s = make_schedule(ScheduleRegime::custom, prm, 3, 2);
  RunState st = init(topo, prob, identity_compressor(), s, x0, 1);
  CHECK_THROWS_AS(
      [&] {
        for (int k = 0; k < 50; ++k) czsd_step(st);
      }(),
      NonFiniteState);
}
