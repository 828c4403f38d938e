#include "doctest.h"

#include <cmath>
#include <sstream>

#include "json.hpp"
#include "panelcause/did.hpp"
#include "panelcause/sim.hpp"
#include "support.hpp"

using namespace panelcause;
using namespace panelcause::sim;
using advisor::MethodId;

namespace {

DgpConfig base_config() {
  DgpConfig c;
  c.name = "base";
  c.n_units = 30;
  c.n_periods = 8;
  c.cohorts = {{4, 10}, {6, 10}};
  c.effect.delta = 3.0;
  c.seed = 17;
  return c;
}

}  // namespace

TEST_CASE("noiseless null panel: observed equals untreated, estimators give zero") {
  auto c = base_config();
  c.noise_sd = 0.0;
  c.effect.delta = 0.0;
  const auto s = simulate_panel(c, 0);
  const auto T = s.panel.time_count();
  for (std::size_t u = 0; u < s.panel.unit_count(); ++u) {
    for (int t = 0; t < int(T); ++t) CHECK(s.panel.outcome(u, t) == s.untreated[u * T + std::size_t(t)]);
  }
  CHECK(std::abs(did::fit_did_twfe(s.panel, {}).att.estimate) <= 1e-8);
  const auto sched = derive_adoption(s.panel);
  CHECK(std::abs(did::fit_imputation_did(s.panel, sched, {}).att.estimate) <= 1e-8);
}

TEST_CASE("constant effect truth is exact") {
  const auto s = simulate_panel(base_config(), 3);
  CHECK(s.truth.overall == 3.0);
  CHECK(s.truth.cohort_weighted == 3.0);
  for (const auto& [k, v] : s.truth.by_event_time) CHECK(v == 3.0);
}

TEST_CASE("panels are a pure function of seed and rep") {
  const auto c = base_config();
  const auto a = simulate_panel(c, 5);
  const auto b = simulate_panel(c, 5);
  const auto d = simulate_panel(c, 6);
  std::ostringstream x, y, z;
  write_panel(x, a.panel);
  write_panel(y, b.panel);
  write_panel(z, d.panel);
  CHECK(x.str() == y.str());
  CHECK(x.str() != z.str());
}

TEST_CASE("dynamic and cohort truths") {
  auto c = base_config();
  c.effect.kind = EffectKind::kDynamic;
  c.effect.delta = 1.0;
  c.effect.slope = 1.0;
  const auto s = simulate_panel(c, 0);
  CHECK(s.truth.by_event_time.at(0) == 1.0);
  CHECK(s.truth.by_event_time.at(2) == 3.0);
  CHECK(s.truth.first_period == 1.0);
  // cohort g=4 sees k=0..3, cohort g=6 sees k=0..1; 10 units each
  CHECK(s.truth.overall == doctest::Approx((10 * (1 + 2 + 3 + 4) + 10 * (1 + 2)) / 60.0));
  c.effect.kind = EffectKind::kCohort;
  c.effect.by_cohort = {{4, 1.0}, {6, 3.0}};
  const auto h = simulate_panel(c, 0);
  CHECK(h.truth.by_cohort.at(4) == 1.0);
  CHECK(h.truth.cohort_weighted == 2.0);
}

TEST_CASE("config validation and JSON round trip") {
  auto c = base_config();
  c.ar_coef = 0.4;
  c.confounding = Confounding::kTrend;
  c.confounding_strength = 1.0;
  const auto j = config_to_json(c);
  CHECK(config_to_json(config_from_json(j)) == j);
  auto bad = j;
  bad["unknown_field"] = 1;
  CHECK(support::error_of([&] { config_from_json(bad); }) == ErrorCode::kConfigError);
  auto big = c;
  big.cohorts = {{3, 40}};
  CHECK(support::error_of([&] { big.validate(); }) == ErrorCode::kInvalidConfig);
  auto ar = c;
  ar.ar_coef = 1.0;
  CHECK(support::error_of([&] { ar.validate(); }) == ErrorCode::kInvalidConfig);
  auto noise = c;
  noise.noise_sd = -1.0;
  CHECK(support::error_of([&] { noise.validate(); }) == ErrorCode::kInvalidConfig);
}

TEST_CASE("metrics recompute from records and ignore scheduling") {
  auto a = base_config();
  auto n = base_config();
  n.name = "null";
  n.effect.delta = 0.0;
  n.seed = 99;
  const std::vector<DgpConfig> configs{a, n};
  EvalOptions o1;
  o1.threads = 1;
  o1.bootstrap_draws = 49;
  EvalOptions o4 = o1;
  o4.threads = 4;
  const std::vector<MethodId> m1{MethodId::kDidTwfe, MethodId::kGroupTimeDid, MethodId::kImputationDid, MethodId::kIts};
  const std::vector<MethodId> m2{MethodId::kImputationDid, MethodId::kIts, MethodId::kGroupTimeDid, MethodId::kDidTwfe};
  const auto e1 = evaluate(configs, m1, 20, o1);
  const auto e2 = evaluate(configs, m2, 20, o4);
  CHECK_FALSE(e1.skipped.empty());  // ITS with comparison units

  auto table = [](const Evaluation& e) {
    std::ostringstream out;
    auto metrics = e.metrics;
    std::sort(metrics.begin(), metrics.end(), [](const MethodMetrics& x, const MethodMetrics& y) {
      return std::tie(x.config, x.method) < std::tie(y.config, y.method);
    });
    write_metrics(out, metrics);
    return out.str();
  };
  CHECK(table(e1) == table(e2));

  const auto again = summarize_records(e1.records, configs, 0.95);
  std::ostringstream x, y;
  write_metrics(x, e1.metrics);
  write_metrics(y, again);
  CHECK(x.str() == y.str());

  for (const auto& m : e1.metrics) {
    CHECK(m.failures == 0);
    if (std::isfinite(m.coverage)) {
      CHECK(m.coverage >= 0.0);
      CHECK(m.coverage <= 1.0);
    }
    // rmse^2 = bias^2 + sd^2 * (R-1)/R with the sample SD
    const double R = double(m.reps);
    CHECK(m.rmse * m.rmse == doctest::Approx(m.bias * m.bias + m.sd * m.sd * (R - 1) / R).epsilon(1e-9));
    CHECK(m.null_config == (m.config == "null"));
    if (!m.null_config) CHECK(std::isnan(m.type_i));
  }
}

TEST_CASE("estimator failures are counted") {
  DgpConfig c = base_config();
  c.name = "tiny";
  c.n_periods = 3;
  c.cohorts = {{1, 10}, {2, 10}};
  EvalOptions o;
  o.check_viability = false;
  o.bootstrap_draws = 19;
  const auto e = evaluate({c}, {MethodId::kIts}, 4, o);
  REQUIRE(e.metrics.size() == 1);
  CHECK(e.metrics[0].failures == 4);
  CHECK(e.records.size() == 4);
  CHECK_FALSE(e.records[0].ok);
  CHECK(e.records[0].error.find("STAGGERED_INPUT") != std::string::npos);
}
