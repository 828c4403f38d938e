#include "doctest.h"

#include <cmath>

#include "panelcause/linreg.hpp"
#include "panelcause/scm.hpp"
#include "panelcause/simplex.hpp"
#include "support.hpp"

using namespace panelcause;
using namespace panelcause::scm;

namespace {

/// rows: units; columns: periods. Unit 0 is treated at `g`, the rest are donors.
PanelDataset from_series(const std::vector<std::vector<double>>& series, int g) {
  std::vector<int> adoption(series.size(), kNever);
  adoption[0] = g;
  return support::make_panel(adoption, int(series[0].size()),
                             [&](std::size_t u, int t) { return series[u][std::size_t(t)]; });
}

std::vector<std::vector<double>> factor_panel(std::size_t donors, int T, std::uint64_t seed, double idio) {
  support::Normal z(seed);
  std::vector<double> f(static_cast<std::size_t>(T));
  double level = 0;
  for (auto& v : f) v = (level += z());
  std::vector<std::vector<double>> s(donors + 1, std::vector<double>(static_cast<std::size_t>(T)));
  for (auto& row : s) {
    for (int t = 0; t < T; ++t) row[std::size_t(t)] = f[std::size_t(t)] + idio * z();
  }
  return s;
}

}  // namespace

TEST_CASE("simplex projection") {
  Eigen::VectorXd v(4);
  v << 0.5, 2.0, -1.0, 0.1;
  const auto p = simplex::project(v);
  CHECK(p.sum() == doctest::Approx(1.0));
  CHECK(p.minCoeff() >= 0.0);
  CHECK(p(1) == doctest::Approx(1.0));
}

TEST_CASE("exact convex representation") {
  const int T = 10, g = 7;
  support::Normal z(1);
  std::vector<double> A, B, C;
  for (int t = 0; t < T; ++t) {
    A.push_back(z());
    B.push_back(z());
    C.push_back(50.0 + z());
  }
  std::vector<double> treated;
  for (int t = 0; t < T; ++t) treated.push_back(0.5 * A[std::size_t(t)] + 0.5 * B[std::size_t(t)] + (t >= g ? 2.0 : 0.0));
  const auto p = from_series({treated, A, B, C}, g);
  const auto est = fit_scm(p, "u00", {});
  const auto& w = est.weights.weights;
  CHECK(std::abs(w(0) - 0.5) <= 1e-6);
  CHECK(std::abs(w(1) - 0.5) <= 1e-6);
  CHECK(std::abs(w(2)) <= 1e-6);
  CHECK(est.weights.pre_period_rmspe <= 1e-6);
  CHECK(est.att == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(w.minCoeff() >= -1e-8);
  CHECK(std::abs(w.sum() - 1.0) <= 1e-8);
}

TEST_CASE("copy of one donor") {
  auto s = factor_panel(4, 9, 2, 1.0);
  s[0] = s[3];
  const auto est = fit_scm(from_series(s, 6), "u00", {});
  CHECK(est.weights.weights(2) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("five donors: solver against exact and grid oracles") {
  for (std::uint64_t seed = 3; seed < 6; ++seed) {
    const auto s = factor_panel(5, 10, seed, 1.0);
    const auto est = fit_scm(from_series(s, 8), "u00", {});
    Eigen::MatrixXd X(8, 5);
    Eigen::VectorXd x(8);
    for (int t = 0; t < 8; ++t) {
      x(t) = s[0][std::size_t(t)];
      for (int j = 0; j < 5; ++j) X(t, j) = s[std::size_t(j + 1)][std::size_t(t)];
    }
    const double exact = support::simplex_kkt_oracle(X, x, nullptr);
    const double grid = support::simplex_grid_oracle(X, x);
    const double solver = support::simplex_objective(X, x, est.weights.weights);
    CHECK(std::abs(solver - exact) <= 1e-8);
    CHECK(solver <= grid + 1e-8);
    CHECK(est.weights.objective_value == doctest::Approx(solver).epsilon(1e-12));
  }
}

TEST_CASE("covariates are matched through pre-period means") {
  auto s = factor_panel(4, 8, 7, 1.0);
  std::vector<int> adoption{6, kNever, kNever, kNever, kNever};
  const auto p = support::make_panel(
      adoption, 8, [&](std::size_t u, int t) { return s[u][std::size_t(t)]; }, {"x"},
      [](std::size_t u, int t) { return std::vector<double>{double(u) + 0.1 * t}; });
  ScmOptions o;
  o.match_covariates = {"x"};
  const auto est = fit_scm(p, "u00", {}, o);
  CHECK(est.weights.weights.sum() == doctest::Approx(1.0));
  o.predictor_weights = std::vector<double>{1.0};
  CHECK(support::error_of([&] { fit_scm(p, "u00", {}, o); }) == ErrorCode::kInvalidConfig);
}

TEST_CASE("SCM errors") {
  const auto s = factor_panel(3, 8, 8, 1.0);
  const auto p = from_series(s, 6);
  const std::vector<std::string> one{"u01"};
  CHECK(support::error_of([&] { fit_scm(p, "u00", one); }) == ErrorCode::kTooFewDonors);
  CHECK(support::error_of([&] { fit_scm(p, "nobody", {}); }) == ErrorCode::kUnknownUnit);
  CHECK(support::error_of([&] { fit_scm(from_series(s, 1), "u00", {}); }) == ErrorCode::kTooFewPeriods);
}

TEST_CASE("placebo inference") {
  SUBCASE("treated ranked first among 6 retained") {
    auto s = factor_panel(6, 12, 9, 0.3);
    for (int t = 8; t < 12; ++t) s[0][std::size_t(t)] += 10.0;
    const auto r = placebo_inference(from_series(s, 8), "u00", {});
    CHECK(r.retained == 6);
    CHECK(r.treated_rank == 1);
    CHECK(std::abs(r.p_value - 1.0 / 7.0) <= 1e-12);
  }
  SUBCASE("treated ranked last") {
    auto s = factor_panel(6, 12, 10, 0.3);
    support::Normal z(77);
    for (int t = 0; t < 8; ++t) s[0][std::size_t(t)] += 2.0 * z();
    const auto r = placebo_inference(from_series(s, 8), "u00", {});
    CHECK(r.retained == 6);
    CHECK(r.p_value == doctest::Approx(1.0));
  }
  SUBCASE("exact ties count against the treated unit") {
    auto s = factor_panel(6, 12, 11, 0.5);
    for (auto& row : s) {
      for (int t = 8; t < 12; ++t) row[std::size_t(t)] = 0.0;
    }
    const auto r = placebo_inference(from_series(s, 8), "u00", {});
    CHECK(r.treated_ratio == 0.0);
    CHECK(r.p_value == doctest::Approx(1.0));
  }
  SUBCASE("rank against direct enumeration") {
    for (std::uint64_t seed = 20; seed < 26; ++seed) {
      auto s = factor_panel(6, 12, seed, 0.5);
      for (int t = 8; t < 12; ++t) s[0][std::size_t(t)] += 0.4 * double(seed % 3);
      const auto p = from_series(s, 8);
      const auto r = placebo_inference(p, "u00", {});
      auto ratio = [](const ScmEstimate& e) {
        double pre = 0, post = 0;
        for (const auto& [t, v] : e.pre_gaps) pre += v * v;
        for (const auto& [t, v] : e.gaps) post += v * v;
        return std::sqrt(post / double(e.gaps.size())) / std::sqrt(pre / double(e.pre_gaps.size()));
      };
      const auto treated = fit_scm(p, "u00", {});
      const double tr = ratio(treated);
      const double tpre = treated.weights.pre_period_rmspe;
      std::size_t exceed = 0, kept = 0;
      for (std::size_t j = 1; j <= 6; ++j) {
        std::vector<std::string> pool;
        for (std::size_t k = 1; k <= 6; ++k) {
          if (k != j) pool.push_back(support::unit_name(k));
        }
        ScmOptions o;
        o.adoption_time = 8;
        const auto e = fit_scm(p, support::unit_name(j), pool, o);
        if (e.weights.pre_period_rmspe > 5.0 * tpre) continue;
        ++kept;
        if (ratio(e) >= tr) ++exceed;
      }
      CHECK(r.retained == kept);
      CHECK(r.p_value == doctest::Approx(double(exceed + 1) / double(kept + 1)).epsilon(1e-12));
    }
  }
}

TEST_CASE("ASCM") {
  const int T = 10, g = 7;
  support::Normal z(31);
  std::vector<std::vector<double>> s(9, std::vector<double>(T));
  for (std::size_t j = 1; j < s.size(); ++j) {
    for (int t = 0; t < T; ++t) s[j][std::size_t(t)] = z();
  }
  SUBCASE("zero imbalance: ASCM equals SCM") {
    for (int t = 0; t < T; ++t) s[0][std::size_t(t)] = 0.5 * s[1][std::size_t(t)] + 0.5 * s[2][std::size_t(t)] + (t >= g);
    const auto p = from_series(s, g);
    const auto a = fit_scm(p, "u00", {});
    for (double lambda : {0.1, 1.0, 10.0}) {
      AscmOptions o;
      o.lambda = lambda;
      CHECK(std::abs(fit_ascm(p, "u00", {}, o).att - a.att) <= 1e-8);
    }
    CHECK(std::abs(fit_ascm(p, "u00", {}).att - a.att) <= 1e-8);
  }
  SUBCASE("huge lambda returns to SCM") {
    for (int t = 0; t < T; ++t) s[0][std::size_t(t)] = 3.0 + z();
    const auto p = from_series(s, g);
    AscmOptions o;
    o.lambda = 1e12;
    CHECK(std::abs(fit_ascm(p, "u00", {}, o).att - fit_scm(p, "u00", {}).att) <= 1e-6);
  }
  SUBCASE("matches the ridge outcome-model correction") {
    for (int t = 0; t < T; ++t) s[0][std::size_t(t)] = 0.8 + z();
    const auto p = from_series(s, g);
    const double lambda = 2.5;
    AscmOptions o;
    o.lambda = lambda;
    const auto aug = fit_ascm(p, "u00", {}, o);
    const auto base = fit_scm(p, "u00", {});
    const auto& w = base.weights.weights;
    const std::size_t J = s.size() - 1;
    double total = 0;
    for (int t = g; t < T; ++t) {
      linreg::DesignMatrix X(J);
      X.add_intercept();
      for (int k = 0; k < g; ++k) {
        Eigen::VectorXd col(static_cast<Eigen::Index>(J));
        for (std::size_t j = 0; j < J; ++j) col(Eigen::Index(j)) = s[j + 1][std::size_t(k)];
        X.add_column("pre" + std::to_string(k), col);
      }
      Eigen::VectorXd y(static_cast<Eigen::Index>(J));
      for (std::size_t j = 0; j < J; ++j) y(Eigen::Index(j)) = s[j + 1][std::size_t(t)];
      const auto beta = linreg::ridge_fit(X, y, lambda);
      auto predict = [&](std::size_t unit) {
        double v = beta.at(std::string(linreg::kIntercept));
        for (int k = 0; k < g; ++k) v += beta.at("pre" + std::to_string(k)) * s[unit][std::size_t(k)];
        return v;
      };
      double synth = 0, corr = predict(0);
      for (std::size_t j = 0; j < J; ++j) {
        synth += w(Eigen::Index(j)) * s[j + 1][std::size_t(t)];
        corr -= w(Eigen::Index(j)) * predict(j + 1);
      }
      total += s[0][std::size_t(t)] - synth - corr;
    }
    CHECK(aug.att == doctest::Approx(total / (T - g)).epsilon(1e-8));
    CHECK(aug.weights.negative_allowed);
    CHECK(aug.weights.weights.sum() == doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("constant offset outside the hull") {
    for (std::size_t j = 1; j < s.size(); ++j) {
      for (int t = 0; t < T; ++t) s[j][std::size_t(t)] = 0.5 + 0.5 * std::tanh(s[j][std::size_t(t)]);
    }
    const double c = 4.0;
    for (int t = 0; t < T; ++t) s[0][std::size_t(t)] = 0.5 * s[1][std::size_t(t)] + 0.5 * s[2][std::size_t(t)] + c;
    const auto p = from_series(s, g);
    const auto base = fit_scm(p, "u00", {});
    CHECK(base.weights.pre_period_rmspe >= c - 1.0);
    CHECK(base.weights.pre_period_rmspe <= c + 1.0);
    AscmOptions o;
    o.lambda = 0.0;
    const auto aug = fit_ascm(p, "u00", {}, o);
    double worst = 0;
    for (const auto& [t, v] : aug.pre_gaps) worst = std::max(worst, std::abs(v));
    CHECK(worst <= 1e-6);
  }
  SUBCASE("cross-validated lambda is on the scaled grid") {
    for (int t = 0; t < T; ++t) s[0][std::size_t(t)] = 1.0 + z();
    const auto est = fit_ascm(from_series(s, g), "u00", {});
    REQUIRE(est.lambda.has_value());
    CHECK(*est.lambda > 0.0);
  }
}

TEST_CASE("staggered ASCM") {
  const int T = 10;
  support::Normal z(41);
  const std::size_t D = 6;
  std::vector<std::vector<double>> donors(D, std::vector<double>(T));
  for (auto& row : donors) {
    for (auto& v : row) v = z();
  }
  // units 0-1 adopt at 5, units 2-4 at 7, units 5.. are donors
  std::vector<int> adoption{5, 5, 7, 7, 7};
  std::vector<std::vector<double>> treated(5, std::vector<double>(T));
  for (auto& row : treated) {
    for (auto& v : row) v = 0.5 + 0.7 * z();
  }
  for (std::size_t j = 0; j < D; ++j) adoption.push_back(kNever);
  auto y = [&](std::size_t u, int t) { return u < 5 ? treated[u][std::size_t(t)] : donors[u - 5][std::size_t(t)]; };
  const auto p = support::make_panel(adoption, T, y);
  const auto schedule = derive_adoption(p);
  std::vector<std::size_t> pool;
  for (std::size_t j = 5; j < 5 + D; ++j) pool.push_back(j);

  SUBCASE("nu = 0 decouples the cohorts") {
    StaggeredAscmOptions o;
    o.nu = 0.0;
    o.ascm.lambda = 1.0;
    o.jackknife = false;
    const auto est = fit_staggered_ascm(p, schedule, o);
    for (const auto& [g, members] : schedule.cohorts) {
      const auto alone = fit_ascm_average(p, members, pool, o.ascm);
      CHECK(std::abs(est.per_cohort.at(g).att - alone.att) <= 1e-8);
      CHECK((est.per_cohort.at(g).weights.weights - alone.weights.weights).cwiseAbs().maxCoeff() <= 1e-8);
    }
    const double pooled = (2.0 * est.per_cohort.at(5).att + 3.0 * est.per_cohort.at(7).att) / 5.0;
    CHECK(est.att == doctest::Approx(pooled).epsilon(1e-12));
  }
  SUBCASE("nu = 1 with one cohort equals ASCM on the cohort mean") {
    std::vector<std::size_t> keep{0, 1};
    for (auto j : pool) keep.push_back(j);
    const auto single = p.subset_units(keep);
    const auto s1 = derive_adoption(single);
    StaggeredAscmOptions o;
    o.nu = 1.0;
    o.ascm.lambda = 0.5;
    o.jackknife = false;
    const auto est = fit_staggered_ascm(single, s1, o);
    std::vector<std::size_t> donors_single;
    for (std::size_t j = 2; j < keep.size(); ++j) donors_single.push_back(j);
    const auto ref = fit_ascm_average(single, s1.cohorts.begin()->second, donors_single, o.ascm);
    CHECK(std::abs(est.att - ref.att) <= 1e-8);
  }
  SUBCASE("identical cohorts share weights for any nu") {
    std::vector<double> mix(T);
    for (int t = 0; t < T; ++t) mix[std::size_t(t)] = 0.2 * donors[0][std::size_t(t)] + 0.5 * donors[1][std::size_t(t)] + 0.3 * donors[2][std::size_t(t)];
    auto same = [&](std::size_t u, int t) { return u < 5 ? mix[std::size_t(t)] + (t >= adoption[u] ? 1.0 : 0.0) : donors[u - 5][std::size_t(t)]; };
    const auto q = support::make_panel(adoption, T, same);
    for (double nu : {0.0, 0.3, 1.0}) {
      StaggeredAscmOptions o;
      o.nu = nu;
      o.jackknife = false;
      const auto est = fit_staggered_ascm(q, derive_adoption(q), o);
      const auto& a = est.per_cohort.at(5).weights.weights;
      const auto& b = est.per_cohort.at(7).weights.weights;
      CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-6);
      CHECK(est.att == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
  SUBCASE("auto nu and jackknife") {
    const auto est = fit_staggered_ascm(p, schedule, {});
    CHECK(est.nu_auto);
    CHECK(est.nu >= 0.0);
    CHECK(est.nu <= 1.0);
    CHECK(est.jackknife_folds == D);
    CHECK(est.se > 0.0);
  }
  SUBCASE("no never-treated") {
    const auto q = support::make_panel({3, 5}, 8, [](std::size_t u, int t) { return double(u + t); });
    CHECK(support::error_of([&] { fit_staggered_ascm(q, derive_adoption(q), {}); }) == ErrorCode::kNoNeverTreated);
  }
}
