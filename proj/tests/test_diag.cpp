#include "dfol/diag.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace dfol;

namespace {

VectorXd scalar(double x)
{
  return VectorXd::Constant(1, x);
}

double quartic_risk(double t)
{
  return t * t * (3.0 * t * t - 8.0 * t - 48.0) / 12.0;
}

double quartic_curvature(double t)
{
  return 3.0 * t * t - 4.0 * t - 8.0;
}

// Composite Simpson rule.
template <class F>
double simpson(F f, double a, double b, int panels)
{
  double const h = (b - a) / panels;
  double       s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) {
    s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  }
  return s * h / 3.0;
}

} // namespace

TEST_CASE("smoothed risk tends to the risk as delta vanishes")
{
  ArScalarQuartic const env;
  Rng                   rng(1);
  for (double t : {-2.0, 0.5, 3.0}) {
    CHECK(std::abs(smoothed_risk(env, scalar(t), 1e-9, 1000, rng) - env.exact_risk(scalar(t))) <= 1e-6);
  }
}

TEST_CASE("smoothed pricing risk carries the offset kappa delta^2 d/(d+2)")
{
  ArPricing const env = ArPricing::with_defaults();
  VectorXd const  theta = VectorXd::Zero(5);
  int const       n = 1000000;
  Rng             rng(2);
  double const    offset = smoothed_risk(env, theta, 1.0, n, rng) - env.exact_risk(theta);
  CHECK(0.5 * 5.0 / 7.0 == doctest::Approx(0.35714).epsilon(1e-4));
  // At theta = 0, L(w) = kappa |w|^2 - <w, mu0>: Var = kappa^2 Var|w|^2 + E<w,mu0>^2.
  double const d = 5.0;
  double const var_norm = d / (d + 4.0) - (d / (d + 2.0)) * (d / (d + 2.0));
  double const var = 0.25 * var_norm + env.mu0().squaredNorm() / (d + 2.0);
  CHECK(std::abs(offset - 0.5 * 5.0 / 7.0) <= 3.0 * std::sqrt(var / n));
}

TEST_CASE("smoothed quartic risk at zero matches quadrature")
{
  ArScalarQuartic const env;
  Rng                   rng(3);
  for (double delta : {0.5, 1.0, 2.0}) {
    int const    n = 1000000;
    double const quad = simpson(quartic_risk, -delta, delta, 2000) / (2.0 * delta);
    // Closed form: -4 delta^2 / 3 + delta^4 / 20.
    CHECK(quad == doctest::Approx(-4.0 * delta * delta / 3.0 + std::pow(delta, 4) / 20.0).epsilon(1e-12));
    double const mc = smoothed_risk(env, scalar(0.0), delta, n, rng);
    // Standard error from the second moment by quadrature.
    double const m2 = simpson([](double t) { return quartic_risk(t) * quartic_risk(t); }, -delta, delta, 2000) /
                      (2.0 * delta);
    CHECK(std::abs(mc - quad) <= 3.0 * std::sqrt((m2 - quad * quad) / n));
  }
}

TEST_CASE("smoothed risk errors")
{
  ArScalarQuartic const       q;
  test::ConstantLossEnv const c(1, 1.0);
  Rng                         rng(4);
  CHECK_THROWS_AS(smoothed_risk(q, scalar(0.0), 0.0, 10, rng), InvalidArgument);
  CHECK_THROWS_AS(smoothed_risk(q, scalar(0.0), 1.0, 0, rng), InvalidArgument);
  CHECK_THROWS_AS(smoothed_risk(c, scalar(0.0), 1.0, 10, rng), OracleAbsent);
  CHECK_THROWS_AS(estimator_moments(c, scalar(0.0), 1.0, 10, Estimator::one_point, rng), OracleAbsent);
  CHECK_THROWS_AS(estimator_moments(q, scalar(0.0), 1.0, 0, Estimator::one_point, rng), InvalidArgument);
}

TEST_CASE("one-point estimator is unbiased for the smoothed gradient")
{
  int const n = 1000000;
  SUBCASE("pricing, quadratic risk so grad L_delta = grad L")
  {
    ArPricing const env = ArPricing::with_defaults();
    VectorXd        theta(5);
    theta << 1.0, -2.0, 0.5, 3.0, -1.0;
    Rng            rng(5);
    auto const     rep = estimator_moments(env, theta, 1.0, n, Estimator::one_point, rng);
    VectorXd const target = 2.0 * env.kappa() * theta - env.mu0();
    CHECK(rep.sample_count == n);
    for (Eigen::Index j = 0; j < 5; ++j) {
      CHECK(std::abs(rep.mean[j] - target[j]) <= 3.0 * rep.se[j]);
    }
  }
  SUBCASE("quartic")
  {
    ArScalarQuartic const env;
    double const          theta = 1.0, delta = 0.5;
    Rng                   rng(6);
    auto const            rep = estimator_moments(env, scalar(theta), delta, n, Estimator::one_point, rng);
    // In one dimension the sphere is {-1, 1}: grad L_delta = (L(t + d) - L(t - d)) / 2d.
    double const target = (quartic_risk(theta + delta) - quartic_risk(theta - delta)) / (2.0 * delta);
    CHECK(std::abs(rep.mean[0] - target) <= 3.0 * rep.se[0]);
  }
  SUBCASE("regression")
  {
    ArRegression const env = ArRegression::with_defaults();
    VectorXd const     theta = VectorXd::LinSpaced(5, -1.0, 1.0);
    Rng                rng(7);
    auto const         rep = estimator_moments(env, theta, 1.0, n, Estimator::one_point, rng);
    // Quadratic risk: the smoothed gradient equals the gradient.
    VectorXd const target = env.exact_risk_grad(theta);
    for (Eigen::Index j = 0; j < 5; ++j) {
      CHECK(std::abs(rep.mean[j] - target[j]) <= 3.0 * rep.se[j]);
    }
  }
}

TEST_CASE("shared-sample two-point estimator is biased on the quartic")
{
  ArScalarQuartic const env;
  double const          theta = 1.0, delta = 0.5;
  // Brute-force expectation: u = +-1 with equal probability, Z ~ N(theta + delta u, 1) and
  // l(t; z) = z f(t), so E[l(t; Z)] = (theta + delta u) f(t).
  auto const   f = [](double t) { return t * (3.0 * t * t - 8.0 * t - 48.0) / 12.0; };
  double       expected = 0.0;
  for (double u : {-1.0, 1.0}) {
    double const m = theta + delta * u;
    expected += 0.5 * (1.0 / delta) * m * (f(theta + delta * u) - f(theta)) * u;
  }
  double const smoothed = (quartic_risk(theta + delta) - quartic_risk(theta - delta)) / (2.0 * delta);
  CHECK(smoothed == doctest::Approx(-107.0 / 12.0));
  CHECK(expected == doctest::Approx(-4.5));
  CHECK(expected - smoothed == doctest::Approx(53.0 / 12.0));

  int const  n = 1000000;
  Rng        rng(8);
  auto const one = estimator_moments(env, scalar(theta), delta, n, Estimator::two_point_I, rng);
  CHECK(std::abs(one.mean[0] - expected) <= 3.0 * one.se[0]);
  CHECK(std::abs(one.mean[0] - smoothed) > 5.0 * one.se[0]);
  auto const two = estimator_moments(env, scalar(theta), delta, n, Estimator::two_point_II, rng);
  CHECK(std::abs(two.mean[0] - smoothed) <= 3.0 * two.se[0]);
}

TEST_CASE("one-point covariance trace scales like 1/delta^2")
{
  ArPricing const env = ArPricing::with_defaults();
  int const       n = 1000000;
  Rng             rng(9);
  auto const      a = estimator_moments(env, env.mu0(), 1.0, n, Estimator::one_point, rng);
  auto const      b = estimator_moments(env, env.mu0(), 0.5, n, Estimator::one_point, rng);
  double const    ratio = b.cov_trace / a.cov_trace;
  CHECK(ratio >= 3.2);
  CHECK(ratio <= 4.8);
}

TEST_CASE("independent two-point estimator keeps a d^2/delta^2 second moment")
{
  ArPricing const env = ArPricing::with_defaults();
  double const    d = 5.0;
  int const       n = 400000;
  VectorXd const  theta = env.mu0();
  for (double delta : {0.5, 0.25}) {
    Rng        rng(10);
    auto const rep = estimator_moments(env, theta, delta, n, Estimator::two_point_II, rng);

    // Measured Var[l(theta; Z)] and E[(l(theta + delta u; Z1) - l(theta; Z1))^2], Z1 at theta + delta u.
    std::vector<double> base;
    double              gap = 0.0;
    for (int i = 0; i < n; ++i) {
      base.push_back(env.loss(theta, env.stationary_sample(theta, rng)));
      auto const     u = sample_unit_sphere(5, rng);
      VectorXd const deployed = theta + delta * u.vector();
      VectorXd const z1 = env.stationary_sample(deployed, rng);
      double const   diff = env.loss(deployed, z1) - env.loss(theta, z1);
      gap += diff * diff;
    }
    gap /= n;
    double const var = test::moments(base).var;
    double const bound = 3.0 * d * d / (delta * delta) * (var / 2.0 - gap);
    CAPTURE(delta);
    CHECK(bound > 0.0);
    CHECK(rep.second_moment() >= bound);
  }
}

TEST_CASE("moment accumulator")
{
  MomentAccumulator acc(2);
  VectorXd          x(2);
  x << 1.0, 10.0;
  acc.add(x);
  x << 3.0, 10.0;
  acc.add(x);
  auto const r = acc.report();
  CHECK(r.sample_count == 2);
  CHECK(r.mean[0] == 2.0);
  CHECK(r.mean[1] == 10.0);
  CHECK(r.se[0] == doctest::Approx(std::sqrt(2.0) / std::sqrt(2.0)));
  CHECK(r.se[1] == 0.0);
  CHECK(r.cov_trace == doctest::Approx(2.0));
  CHECK(r.second_moment() == doctest::Approx((1.0 + 100.0 + 9.0 + 100.0) / 2.0));
}

TEST_CASE("estimator names round-trip")
{
  for (auto e : {Estimator::one_point, Estimator::two_point_I, Estimator::two_point_II}) {
    CHECK(estimator_from_string(to_string(e)) == e);
  }
  CHECK_FALSE(estimator_from_string("three_point").has_value());
}

TEST_CASE("finite differences")
{
  ArScalarQuartic const q;
  ArPricing const       p = ArPricing::with_defaults();
  auto const            fq = [&](VectorXd const &t) { return q.exact_risk(t); };
  auto const            fp = [&](VectorXd const &t) { return p.exact_risk(t); };
  CHECK(std::abs(finite_diff_grad(fq, scalar(6.0), 1e-5)[0] - 96.0) <= 1e-5);
  CHECK(finite_diff_grad([](VectorXd const &) { return 3.0; }, VectorXd::Ones(4), 1e-3).isZero(0.0));
  CHECK((finite_diff_grad(fp, VectorXd::Zero(5), 1e-5) + p.mu0()).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK_THROWS_AS(finite_diff_grad(fq, scalar(0.0), 0.0), InvalidArgument);
}

TEST_CASE("slope fit")
{
  std::vector<double> xs, inv, cube;
  for (int i = 0; i < 20; ++i) {
    double const x = std::pow(10.0, 1.0 + 0.25 * i);
    xs.push_back(x);
    inv.push_back(7.0 / x);
    cube.push_back(7.0 / std::cbrt(x));
  }
  CHECK(std::abs(slope_fit(xs, inv) + 1.0) <= 1e-12);
  CHECK(std::abs(slope_fit(xs, cube) + 1.0 / 3.0) <= 1e-12);

  // Only the trailing half is fitted: a different head does not move the slope.
  std::vector<double> bent = inv;
  for (std::size_t i = 0; i < 10; ++i) {
    bent[i] = 1.0;
  }
  CHECK(std::abs(slope_fit(xs, bent) + 1.0) <= 1e-12);

  std::vector<double> bad = inv;
  bad[3] = 0.0;
  CHECK_THROWS_AS(slope_fit(xs, bad), DomainError);
  bad[3] = -1.0;
  CHECK_THROWS_AS(slope_fit(xs, bad), DomainError);
  CHECK_THROWS_AS(slope_fit(std::span(xs).first(7), std::span(inv).first(7)), InvalidArgument);
  CHECK_THROWS_AS(slope_fit(xs, std::span(inv).first(19)), InvalidArgument);
}

TEST_CASE("smoothing bias of the quartic gradient is O(delta)")
{
  ArScalarQuartic const env;
  int const             n = 1000000;
  double const          h = 1e-3;
  for (double theta : {-3.0, -1.0, 0.0, 2.0, 5.0}) {
    for (double delta : {0.5, 0.25, 0.1}) {
      // Common random numbers at theta +- h.
      Rng          up(11), down(11);
      double const fd = (smoothed_risk(env, scalar(theta + h), delta, n, up) -
                         smoothed_risk(env, scalar(theta - h), delta, n, down)) /
                        (2.0 * h);
      double const bias = std::abs(fd - env.exact_risk_grad(scalar(theta))[0]);
      // L'' is a convex parabola: its extreme absolute value on an interval sits at an end or the vertex.
      double       local = std::max(std::abs(quartic_curvature(theta - delta)), std::abs(quartic_curvature(theta + delta)));
      if (std::abs(theta - 2.0 / 3.0) <= delta) { local = std::max(local, std::abs(quartic_curvature(2.0 / 3.0))); }
      CAPTURE(theta);
      CAPTURE(delta);
      CHECK(bias <= delta * local);
      // Exact smoothing bias in one dimension: delta^2 (theta - 2/3), w uniform on [-1, 1].
      CHECK(fd - env.exact_risk_grad(scalar(theta))[0] ==
            doctest::Approx(delta * delta * (theta - 2.0 / 3.0)).epsilon(0.05).scale(1.0));
    }
  }
}
