#include "doctest.h"

#include <random>

#include "panelcause/linreg.hpp"
#include "support.hpp"

using namespace panelcause;
using namespace panelcause::linreg;

namespace {

std::vector<std::size_t> each_own(std::size_t n) {
  std::vector<std::size_t> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = i;
  return c;
}

}  // namespace

TEST_CASE("exact line") {
  DesignMatrix X(6);
  Eigen::VectorXd x(6);
  x << 1, 2, 3, 4, 5, 6;
  X.add_column("x", x);
  const auto fit = ols_fit(X, 2.0 * x, each_own(6));
  CHECK(fit.coef("x") == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(fit.residuals.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("duplicated column is dropped") {
  support::Normal z(3);
  DesignMatrix X(20);
  Eigen::VectorXd a(20), y(20);
  for (int i = 0; i < 20; ++i) {
    a(i) = z();
    y(i) = 1.0 + a(i) + z();
  }
  X.add_intercept();
  X.add_column("a", a);
  X.add_column("a_copy", a);
  const auto fit = ols_fit(X, y, each_own(20));
  CHECK(fit.has("a"));
  CHECK_FALSE(fit.has("a_copy"));
  REQUIRE(fit.dropped_columns.size() == 1);
  CHECK(fit.dropped_columns[0].name == "a_copy");
  CHECK(fit.rank == 2);
}

TEST_CASE("random 50x3 system matches normal equations") {
  support::Normal z(11);
  Eigen::MatrixXd M(50, 3);
  Eigen::VectorXd y(50);
  std::vector<std::size_t> cluster(50);
  for (int i = 0; i < 50; ++i) {
    for (int j = 0; j < 3; ++j) M(i, j) = z();
    y(i) = 0.5 - M(i, 0) + 2.0 * M(i, 1) + 0.3 * M(i, 2) + z();
    cluster[static_cast<std::size_t>(i)] = static_cast<std::size_t>(i / 5);
  }
  DesignMatrix X(50);
  for (int j = 0; j < 3; ++j) X.add_column("x" + std::to_string(j), M.col(j));
  const auto fit = ols_fit(X, y, cluster);
  const Eigen::VectorXd b = support::normal_equations(M, y);
  for (int j = 0; j < 3; ++j) {
    CHECK(std::abs(fit.coefficients(j) - b(j)) <= 1e-8 * std::abs(b(j)));
  }
  const Eigen::MatrixXd V = support::cr1_vcov(M, y, cluster);
  CHECK((fit.vcov - V).cwiseAbs().maxCoeff() <= 1e-10 * V.cwiseAbs().maxCoeff());
  CHECK(fit.cluster_count == 10);
}

TEST_CASE("ols errors") {
  DesignMatrix X(4);
  X.add_column("zero", Eigen::VectorXd::Zero(4));
  CHECK(support::error_of([&] { ols_fit(X, Eigen::VectorXd::Ones(4), each_own(4)); }) == ErrorCode::kRankZero);
  DesignMatrix Y(4);
  Y.add_intercept();
  const std::vector<std::size_t> one(4, 0);
  CHECK(support::error_of([&] { ols_fit(Y, Eigen::VectorXd::Ones(4), one); }) ==
        ErrorCode::kFewerClustersThanTwo);
  CHECK(support::error_of([&] { ols_fit(Y, Eigen::VectorXd::Ones(3), each_own(4)); }) ==
        ErrorCode::kShapeMismatch);
}

TEST_CASE("unit demeaning of within-constant data gives zeros") {
  const std::vector<std::size_t> unit{0, 0, 0, 1, 1, 1};
  const std::vector<std::size_t> time{0, 1, 2, 0, 1, 2};
  Eigen::MatrixXd y(6, 1);
  y << 4, 4, 4, -2, -2, -2;
  const auto r = absorb_fixed_effects(unit, time, {true, false}, y);
  CHECK(r.columns.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("two-way absorption equals dummy regression") {
  const int N = 6, T = 8;
  support::Normal z(5);
  std::vector<std::size_t> unit, time;
  Eigen::VectorXd y(N * T), d(N * T);
  for (int u = 0; u < N; ++u) {
    const double a = z();
    for (int t = 0; t < T; ++t) {
      const int i = u * T + t;
      unit.push_back(static_cast<std::size_t>(u));
      time.push_back(static_cast<std::size_t>(t));
      d(i) = (u < 3 && t >= 2 + u) ? 1.0 : 0.0;
      y(i) = a + 0.3 * t + 1.7 * d(i) + z();
    }
  }
  Eigen::MatrixXd cols(N * T, 2);
  cols << y, d;
  const auto r = absorb_fixed_effects(unit, time, {}, cols, {1e-14, 100000});
  DesignMatrix X(N * T);
  X.add_column("policy", r.columns.col(1));
  const auto fit = ols_fit(X, r.columns.col(0), unit, {T - 1});

  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(N * T, 1 + N + T - 1);
  for (int i = 0; i < N * T; ++i) {
    D(i, 0) = d(i);
    D(i, 1 + static_cast<int>(unit[static_cast<std::size_t>(i)])) = 1.0;
    if (time[static_cast<std::size_t>(i)] > 0) D(i, N + static_cast<int>(time[static_cast<std::size_t>(i)])) = 1.0;
  }
  const Eigen::VectorXd b = support::normal_equations(D, y);
  CHECK(std::abs(fit.coef("policy") - b(0)) < 1e-8);
  // CR1 with absorbed levels counted in k
  const Eigen::MatrixXd V = support::cr1_vcov(D, y, unit);
  const double n = N * T, kd = D.cols(), k1 = 1 + T - 1;
  const double rescale = (n - kd) / (n - k1);
  CHECK(fit.vcov(0, 0) == doctest::Approx(V(0, 0) * rescale).epsilon(1e-8));
}

TEST_CASE("single level dimension is skipped with a warning") {
  const std::vector<std::size_t> unit{0, 0, 0};
  const std::vector<std::size_t> time{0, 1, 2};
  Eigen::MatrixXd y(3, 1);
  y << 1, 2, 6;
  const auto r = absorb_fixed_effects(unit, time, {true, false}, y);
  REQUIRE_FALSE(r.warnings.empty());
  CHECK(r.warnings[0].find("SINGLE_LEVEL") != std::string::npos);
  CHECK(r.columns(0, 0) == 1.0);
  CHECK(r.columns(2, 0) == 6.0);
}

TEST_CASE("ridge") {
  support::Normal z(21);
  const int n = 10;
  Eigen::MatrixXd M(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    M(i, 0) = z();
    M(i, 1) = z();
    y(i) = 1.0 + 2.0 * M(i, 0) - M(i, 1) + 0.1 * z();
  }
  DesignMatrix X(n);
  X.add_column("a", M.col(0));
  X.add_column("b", M.col(1));
  SUBCASE("lambda 0 equals ols") {
    const auto r = ridge_fit(X, y, 0.0);
    const auto fit = ols_fit(X, y, each_own(n));
    CHECK(r.at("a") == doctest::Approx(fit.coef("a")).epsilon(1e-12));
    CHECK(r.at("b") == doctest::Approx(fit.coef("b")).epsilon(1e-12));
  }
  SUBCASE("lambda 1 closed form") {
    const Eigen::VectorXd b =
        (M.transpose() * M + Eigen::MatrixXd::Identity(2, 2)).ldlt().solve(M.transpose() * y);
    const auto r = ridge_fit(X, y, 1.0);
    CHECK(std::abs(r.at("a") - b(0)) < 1e-8);
    CHECK(std::abs(r.at("b") - b(1)) < 1e-8);
  }
  SUBCASE("huge lambda shrinks slopes, not the intercept") {
    DesignMatrix Xi(n);
    Xi.add_intercept();
    Xi.add_column("a", M.col(0));
    Xi.add_column("b", M.col(1));
    const auto r = ridge_fit(Xi, y, 1e12);
    CHECK(std::abs(r.at("a")) <= 1e-6);
    CHECK(std::abs(r.at("b")) <= 1e-6);
    CHECK(r.at(std::string(kIntercept)) == doctest::Approx(y.mean()).epsilon(1e-6));
  }
}
