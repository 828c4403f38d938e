#include "panelcause/sim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <ostream>
#include <set>
#include <thread>

#include "panelcause/ar.hpp"
#include "panelcause/csv.hpp"
#include "panelcause/did.hpp"
#include "panelcause/error.hpp"
#include "panelcause/its.hpp"
#include "panelcause/rng.hpp"
#include "panelcause/scm.hpp"

namespace panelcause::sim {

using advisor::MethodId;
using nlohmann::json;

double EffectSpec::effect(int g, int k) const {
  switch (kind) {
    case EffectKind::kConstant:
      return delta;
    case EffectKind::kDynamic: {
      if (by_event_time.empty()) return delta + slope * k;
      auto it = by_event_time.upper_bound(k);
      if (it == by_event_time.begin()) return 0.0;
      return std::prev(it)->second;
    }
    case EffectKind::kCohort: {
      auto it = by_cohort.find(g);
      return it == by_cohort.end() ? delta : it->second;
    }
  }
  return 0.0;
}

void DgpConfig::validate() const {
  auto bad = [](const std::string& msg) { fail(ErrorCode::kInvalidConfig, msg); };
  if (n_units < 2) bad("n_units must be at least 2");
  if (n_periods < 3) bad("n_periods must be at least 3");
  std::size_t total = 0;
  std::set<int> seen;
  for (const auto& c : cohorts) {
    if (c.adoption < 0 || c.adoption >= static_cast<int>(n_periods)) {
      bad("cohort adoption " + std::to_string(c.adoption) + " outside 0.." + std::to_string(n_periods - 1));
    }
    if (c.size == 0) bad("cohort sizes must be positive");
    if (!seen.insert(c.adoption).second) bad("duplicate cohort adoption " + std::to_string(c.adoption));
    total += c.size;
  }
  if (total > n_units) bad("cohort sizes sum to more than n_units");
  if (!(noise_sd >= 0.0) || !(unit_intercept_sd >= 0.0) || !(unit_trend_sd >= 0.0) || !(time_shock_sd >= 0.0)) {
    bad("standard deviations must be non-negative");
  }
  if (!(ar_coef > -1.0 && ar_coef < 1.0)) bad("ar_coef must lie in (-1, 1)");
}

bool DgpConfig::is_null() const {
  for (const auto& c : cohorts) {
    for (int k = 0; k < static_cast<int>(n_periods) - c.adoption; ++k) {
      if (effect.effect(c.adoption, k) != 0.0) return false;
    }
  }
  return true;
}

namespace {

std::string_view kind_name(EffectKind k) {
  switch (k) {
    case EffectKind::kConstant: return "constant";
    case EffectKind::kDynamic: return "dynamic";
    case EffectKind::kCohort: return "cohort";
  }
  return "constant";
}

std::string_view confounding_name(Confounding c) {
  switch (c) {
    case Confounding::kNone: return "none";
    case Confounding::kIntercept: return "intercept";
    case Confounding::kTrend: return "trend";
  }
  return "none";
}

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!obj.is_object()) fail(ErrorCode::kConfigError, where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      fail(ErrorCode::kConfigError, "unknown key '" + key + "' in " + where);
    }
  }
}

std::map<int, double> int_keyed(const json& obj, const std::string& where) {
  if (!obj.is_object()) fail(ErrorCode::kConfigError, where + " must be an object");
  std::map<int, double> out;
  for (const auto& [key, value] : obj.items()) {
    auto k = csv::parse_integer(key);
    if (!k) fail(ErrorCode::kConfigError, "non-integer key '" + key + "' in " + where);
    out[static_cast<int>(*k)] = value.get<double>();
  }
  return out;
}

}  // namespace

DgpConfig config_from_json(const json& doc) {
  check_keys(doc,
             {"name", "n_units", "n_periods", "cohorts", "effect", "unit_intercept_sd", "unit_trend_sd", "trend",
              "time_shock_sd", "ar_coef", "noise_sd", "confounding", "seed"},
             "dgp config");
  DgpConfig c;
  try {
    c.name = doc.value("name", c.name);
    c.n_units = doc.value("n_units", c.n_units);
    c.n_periods = doc.value("n_periods", c.n_periods);
    if (doc.contains("cohorts")) {
      for (const auto& item : doc.at("cohorts")) {
        check_keys(item, {"adoption", "size"}, "cohort");
        c.cohorts.push_back({item.at("adoption").get<int>(), item.at("size").get<std::size_t>()});
      }
    }
    if (doc.contains("effect")) {
      const auto& e = doc.at("effect");
      check_keys(e, {"kind", "delta", "slope", "by_event_time", "by_cohort"}, "effect");
      const auto kind = e.value("kind", std::string("constant"));
      if (kind == "constant") c.effect.kind = EffectKind::kConstant;
      else if (kind == "dynamic") c.effect.kind = EffectKind::kDynamic;
      else if (kind == "cohort") c.effect.kind = EffectKind::kCohort;
      else fail(ErrorCode::kConfigError, "unknown effect kind '" + kind + "'");
      c.effect.delta = e.value("delta", 0.0);
      c.effect.slope = e.value("slope", 0.0);
      if (e.contains("by_event_time")) c.effect.by_event_time = int_keyed(e.at("by_event_time"), "by_event_time");
      if (e.contains("by_cohort")) c.effect.by_cohort = int_keyed(e.at("by_cohort"), "by_cohort");
    }
    c.unit_intercept_sd = doc.value("unit_intercept_sd", c.unit_intercept_sd);
    c.unit_trend_sd = doc.value("unit_trend_sd", c.unit_trend_sd);
    if (doc.contains("trend")) {
      check_keys(doc.at("trend"), {"linear", "quadratic"}, "trend");
      c.trend_linear = doc.at("trend").value("linear", 0.0);
      c.trend_quadratic = doc.at("trend").value("quadratic", 0.0);
    }
    c.time_shock_sd = doc.value("time_shock_sd", c.time_shock_sd);
    c.ar_coef = doc.value("ar_coef", c.ar_coef);
    c.noise_sd = doc.value("noise_sd", c.noise_sd);
    if (doc.contains("confounding")) {
      const auto& cf = doc.at("confounding");
      check_keys(cf, {"mode", "strength"}, "confounding");
      const auto mode = cf.value("mode", std::string("none"));
      if (mode == "none") c.confounding = Confounding::kNone;
      else if (mode == "intercept") c.confounding = Confounding::kIntercept;
      else if (mode == "trend") c.confounding = Confounding::kTrend;
      else fail(ErrorCode::kConfigError, "unknown confounding mode '" + mode + "'");
      c.confounding_strength = cf.value("strength", 0.0);
    }
    c.seed = doc.value("seed", c.seed);
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfigError, std::string("dgp config: ") + e.what());
  }
  c.validate();
  return c;
}

json config_to_json(const DgpConfig& c) {
  json doc;
  doc["name"] = c.name;
  doc["n_units"] = c.n_units;
  doc["n_periods"] = c.n_periods;
  doc["cohorts"] = json::array();
  for (const auto& p : c.cohorts) doc["cohorts"].push_back({{"adoption", p.adoption}, {"size", p.size}});
  json effect{{"kind", kind_name(c.effect.kind)}, {"delta", c.effect.delta}, {"slope", c.effect.slope}};
  if (!c.effect.by_event_time.empty()) {
    json m = json::object();
    for (const auto& [k, v] : c.effect.by_event_time) m[std::to_string(k)] = v;
    effect["by_event_time"] = m;
  }
  if (!c.effect.by_cohort.empty()) {
    json m = json::object();
    for (const auto& [k, v] : c.effect.by_cohort) m[std::to_string(k)] = v;
    effect["by_cohort"] = m;
  }
  doc["effect"] = effect;
  doc["unit_intercept_sd"] = c.unit_intercept_sd;
  doc["unit_trend_sd"] = c.unit_trend_sd;
  doc["trend"] = {{"linear", c.trend_linear}, {"quadratic", c.trend_quadratic}};
  doc["time_shock_sd"] = c.time_shock_sd;
  doc["ar_coef"] = c.ar_coef;
  doc["noise_sd"] = c.noise_sd;
  doc["confounding"] = {{"mode", confounding_name(c.confounding)}, {"strength", c.confounding_strength}};
  doc["seed"] = c.seed;
  return doc;
}

SimulatedPanel simulate_panel(const DgpConfig& config, std::size_t rep) {
  config.validate();
  auto gen = rng::substream(config.seed, {rep});
  std::normal_distribution<double> z(0.0, 1.0);
  const std::size_t N = config.n_units;
  const int T = static_cast<int>(config.n_periods);

  std::vector<double> alpha(N);
  std::vector<double> slope(N);
  std::vector<double> tau(static_cast<std::size_t>(T));
  for (auto& a : alpha) a = config.unit_intercept_sd * z(gen);
  for (auto& b : slope) b = config.unit_trend_sd * z(gen);
  for (int t = 0; t < T; ++t) {
    tau[static_cast<std::size_t>(t)] =
        config.trend_linear * t + config.trend_quadratic * t * t + config.time_shock_sd * z(gen);
  }
  std::vector<double> y0(N * static_cast<std::size_t>(T));
  const double stationary = config.noise_sd / std::sqrt(1.0 - config.ar_coef * config.ar_coef);
  for (std::size_t i = 0; i < N; ++i) {
    double u = stationary * z(gen);
    for (int t = 0; t < T; ++t) {
      if (t > 0) u = config.ar_coef * u + config.noise_sd * z(gen);
      y0[i * static_cast<std::size_t>(T) + static_cast<std::size_t>(t)] =
          alpha[i] + slope[i] * t + tau[static_cast<std::size_t>(t)] + u;
    }
  }

  // Assignment: units ordered by a score; the earliest cohorts take the top.
  std::vector<double> driver(N, 0.0);
  if (config.confounding != Confounding::kNone) {
    const auto& src = config.confounding == Confounding::kIntercept ? alpha : slope;
    const double mean = std::accumulate(src.begin(), src.end(), 0.0) / static_cast<double>(N);
    double ss = 0.0;
    for (double v : src) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(N));
    for (std::size_t i = 0; i < N; ++i) driver[i] = sd > 0.0 ? (src[i] - mean) / sd : 0.0;
  }
  std::vector<double> score(N);
  for (std::size_t i = 0; i < N; ++i) score[i] = config.confounding_strength * driver[i] + z(gen);
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  std::vector<CohortPlan> plan = config.cohorts;
  std::sort(plan.begin(), plan.end(), [](const CohortPlan& a, const CohortPlan& b) { return a.adoption < b.adoption; });
  std::vector<int> adoption(N, kNever);
  std::size_t next = 0;
  for (const auto& c : plan) {
    for (std::size_t k = 0; k < c.size; ++k) adoption[order[next++]] = c.adoption;
  }

  SimulatedPanel out;
  PanelBuilder builder;
  std::map<int, std::pair<double, double>> by_event;
  std::map<int, std::pair<double, double>> by_cohort;
  double total = 0.0;
  double cells = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    char name[24];
    std::snprintf(name, sizeof name, "u%03zu", i + 1);
    for (int t = 0; t < T; ++t) {
      const double base = y0[i * static_cast<std::size_t>(T) + static_cast<std::size_t>(t)];
      const bool treated = adoption[i] != kNever && t >= adoption[i];
      double y = base;
      if (treated) {
        const int k = t - adoption[i];
        const double eff = config.effect.effect(adoption[i], k);
        y += eff;
        total += eff;
        cells += 1.0;
        by_event[k].first += eff;
        by_event[k].second += 1.0;
        by_cohort[adoption[i]].first += eff;
        by_cohort[adoption[i]].second += 1.0;
      }
      builder.add(name, t, y, treated ? 1.0 : 0.0, {}, 0);
    }
  }
  out.panel = builder.build();
  out.untreated = std::move(y0);
  if (cells > 0) {
    out.truth.overall = total / cells;
    std::size_t treated_units = 0;
    for (const auto& c : plan) treated_units += c.size;
    for (const auto& [g, v] : by_cohort) out.truth.by_cohort[g] = v.first / v.second;
    for (const auto& [k, v] : by_event) out.truth.by_event_time[k] = v.first / v.second;
    for (const auto& c : plan) {
      const double share = static_cast<double>(c.size) / static_cast<double>(treated_units);
      out.truth.cohort_weighted += share * out.truth.by_cohort[c.adoption];
      out.truth.first_period += share * config.effect.effect(c.adoption, 0);
    }
  }
  return out;
}

namespace {

MethodOutcome from_summary(const EffectSummary& s) {
  return {s.estimate, s.se, s.ci_lower, s.ci_upper, s.p_value};
}

MethodOutcome point_only(double estimate) {
  const double nan = std::nan("");
  return {estimate, nan, nan, nan, nan};
}

std::string single_treated_unit(const PanelDataset& panel) {
  const auto schedule = derive_adoption(panel);
  if (schedule.treated_count() != 1) {
    fail(ErrorCode::kMethodNotViable, "synthetic control needs exactly one treated unit");
  }
  return panel.units()[schedule.cohorts.begin()->second.front()];
}

}  // namespace

MethodOutcome run_method(const PanelDataset& panel, MethodId method, const RunOptions& options) {
  const std::vector<std::string> none;
  switch (method) {
    case MethodId::kIts:
      return from_summary(its::fit_its(panel, none, {options.ci_level}).level_change);
    case MethodId::kItsMultiBaseline:
      return from_summary(
          its::fit_its_multiple_baseline(panel, derive_adoption(panel), none, {options.ci_level}).pooled_level_change);
    case MethodId::kCits: {
      its::CitsOptions o;
      o.ci_level = options.ci_level;
      return from_summary(its::fit_cits(panel, none, o).diff_level_change);
    }
    case MethodId::kScm:
      return point_only(scm::fit_scm(panel, single_treated_unit(panel), none).att);
    case MethodId::kAscm:
      return point_only(scm::fit_ascm(panel, single_treated_unit(panel), none).att);
    case MethodId::kDidTwfe:
      return from_summary(did::fit_did_twfe(panel, none, {options.ci_level}).att);
    case MethodId::kEventStudy: {
      did::EventStudyOptions o;
      o.ci_level = options.ci_level;
      const auto es = did::fit_event_study(panel, none, o);
      std::vector<std::string> names;
      std::vector<double> weights;
      double total = 0.0;
      for (const auto& c : es.coefficients) {
        if (c.event_time < 0) continue;
        names.push_back("event:" + c.label);
        weights.push_back(static_cast<double>(c.support));
        total += static_cast<double>(c.support);
      }
      if (names.empty()) fail(ErrorCode::kNoVariation, "no post-adoption event-time coefficient");
      Eigen::VectorXd w(static_cast<Eigen::Index>(names.size()));
      double estimate = 0.0;
      for (std::size_t i = 0; i < names.size(); ++i) {
        w(static_cast<Eigen::Index>(i)) = weights[i] / total;
        estimate += weights[i] / total * es.fit.coef(names[i]);
      }
      const double se = std::sqrt(std::max(0.0, w.dot(es.fit.vcov_block(names) * w)));
      return from_summary(summarize(estimate, se, options.ci_level));
    }
    case MethodId::kGroupTimeDid: {
      did::GroupTimeOptions o;
      o.bootstrap_draws = options.bootstrap_draws;
      o.seed = options.seed;
      o.ci_level = options.ci_level;
      return from_summary(did::fit_group_time_att(panel, derive_adoption(panel), none, o).overall.effect);
    }
    case MethodId::kImputationDid: {
      did::ImputationOptions o;
      o.ci_level = options.ci_level;
      return from_summary(did::fit_imputation_did(panel, derive_adoption(panel), none, o).att);
    }
    case MethodId::kDebiasedAr: {
      ar::ArOptions o;
      o.ci_level = options.ci_level;
      return from_summary(ar::fit_debiased_ar(panel, none, o).gamma);
    }
    case MethodId::kStaggeredAscm: {
      scm::StaggeredAscmOptions o;
      o.ci_level = options.ci_level;
      const auto est = scm::fit_staggered_ascm(panel, derive_adoption(panel), o);
      if (!std::isfinite(est.se)) return point_only(est.att);
      return from_summary(summarize(est.att, est.se, options.ci_level));
    }
  }
  fail(ErrorCode::kInvalidConfig, "unknown method");
}

double truth_for(MethodId method, const Truth& truth) {
  switch (method) {
    case MethodId::kIts:
    case MethodId::kItsMultiBaseline:
    case MethodId::kCits:
      return truth.first_period;
    case MethodId::kGroupTimeDid:
    case MethodId::kStaggeredAscm:
      return truth.cohort_weighted;
    default:
      return truth.overall;
  }
}

std::size_t thread_count(std::size_t requested) {
  std::size_t n = requested > 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PANELCAUSE_THREADS")) {
    if (auto cap = csv::parse_integer(env); cap && *cap > 0) n = std::min(n, static_cast<std::size_t>(*cap));
  }
  return std::max<std::size_t>(1, n);
}

std::vector<MethodMetrics> summarize_records(const std::vector<ReplicationRecord>& records,
                                             const std::vector<DgpConfig>& configs, double ci_level) {
  (void)ci_level;
  std::vector<MethodMetrics> out;
  std::size_t i = 0;
  while (i < records.size()) {
    std::size_t j = i;
    while (j < records.size() && records[j].config == records[i].config && records[j].method == records[i].method) ++j;
    MethodMetrics m;
    m.config = records[i].config;
    m.method = records[i].method;
    for (const auto& c : configs) {
      if (c.name == m.config) m.null_config = c.is_null();
    }
    m.reps = j - i;
    std::vector<const ReplicationRecord*> ok;
    double seconds = 0.0;
    for (std::size_t k = i; k < j; ++k) {
      seconds += records[k].seconds;
      if (records[k].ok) ok.push_back(&records[k]);
    }
    m.failures = m.reps - ok.size();
    m.mean_seconds = seconds / static_cast<double>(m.reps);
    const double nan = std::nan("");
    const double n = static_cast<double>(ok.size());
    if (ok.empty()) {
      m.mean_estimate = m.mean_truth = m.bias = m.sd = m.rmse = m.mean_se = m.coverage = m.type_i = nan;
    } else {
      double se_sum = 0.0;
      std::size_t se_n = 0;
      std::size_t covered = 0;
      std::size_t rejected = 0;
      std::size_t with_ci = 0;
      double sq = 0.0;
      for (const auto* r : ok) {
        m.mean_estimate += r->outcome.estimate / n;
        m.mean_truth += r->truth / n;
        m.bias += (r->outcome.estimate - r->truth) / n;
        sq += (r->outcome.estimate - r->truth) * (r->outcome.estimate - r->truth);
        if (std::isfinite(r->outcome.se)) {
          se_sum += r->outcome.se;
          ++se_n;
        }
        if (std::isfinite(r->outcome.ci_lower) && std::isfinite(r->outcome.ci_upper)) {
          ++with_ci;
          if (r->outcome.ci_lower <= r->truth && r->truth <= r->outcome.ci_upper) ++covered;
          if (r->outcome.ci_lower > 0.0 || r->outcome.ci_upper < 0.0) ++rejected;
        }
      }
      double ss = 0.0;
      for (const auto* r : ok) ss += (r->outcome.estimate - m.mean_estimate) * (r->outcome.estimate - m.mean_estimate);
      m.sd = ok.size() > 1 ? std::sqrt(ss / (n - 1.0)) : nan;
      m.rmse = std::sqrt(sq / n);
      m.mean_se = se_n > 0 ? se_sum / static_cast<double>(se_n) : nan;
      m.coverage = with_ci > 0 ? static_cast<double>(covered) / static_cast<double>(with_ci) : nan;
      m.type_i = (m.null_config && with_ci > 0) ? static_cast<double>(rejected) / static_cast<double>(with_ci) : nan;
    }
    out.push_back(m);
    i = j;
  }
  return out;
}

Evaluation evaluate(const std::vector<DgpConfig>& configs, const std::vector<MethodId>& methods, std::size_t reps,
                    const EvalOptions& options) {
  Evaluation out;
  std::set<std::string> names;
  for (const auto& c : configs) {
    c.validate();
    if (!names.insert(c.name).second) fail(ErrorCode::kInvalidConfig, "duplicate config name '" + c.name + "'");
  }

  // Methods retained per config after the viability check.
  std::vector<std::vector<MethodId>> plan(configs.size());
  for (std::size_t c = 0; c < configs.size(); ++c) {
    if (!options.check_viability) {
      plan[c] = methods;
      continue;
    }
    const auto sample = simulate_panel(configs[c], 0);
    const auto schedule = derive_adoption(sample.panel);
    std::optional<advisor::MethodRecommendation> rec;
    std::string why;
    try {
      rec = advisor::recommend(advisor::derive_features(sample.panel, schedule));
    } catch (const Error& e) {
      why = e.what();
    }
    for (MethodId m : methods) {
      if (rec && rec->advice(m).viable) {
        plan[c].push_back(m);
      } else {
        const std::string reason = rec ? rec->advice(m).reasons.front() : why;
        out.skipped.push_back(configs[c].name + ": " + std::string(advisor::to_string(m)) + " not viable (" + reason + ")");
      }
    }
  }

  // Slots in config, method, rep order.
  std::vector<std::size_t> offset(configs.size() + 1, 0);
  for (std::size_t c = 0; c < configs.size(); ++c) offset[c + 1] = offset[c] + plan[c].size() * reps;
  out.records.resize(offset.back());

  const std::size_t tasks = configs.size() * reps;
  std::atomic<std::size_t> cursor{0};
  auto worker = [&]() {
    for (std::size_t task = cursor++; task < tasks; task = cursor++) {
      const std::size_t c = task / reps;
      const std::size_t rep = task % reps;
      if (plan[c].empty()) continue;
      const auto sim = simulate_panel(configs[c], rep);
      for (std::size_t m = 0; m < plan[c].size(); ++m) {
        ReplicationRecord& rec = out.records[offset[c] + m * reps + rep];
        rec.config = configs[c].name;
        rec.method = plan[c][m];
        rec.rep = rep;
        rec.truth = truth_for(plan[c][m], sim.truth);
        RunOptions ro;
        ro.ci_level = options.ci_level;
        ro.bootstrap_draws = options.bootstrap_draws;
        ro.seed = rng::substream_key(configs[c].seed, {rep, static_cast<std::uint64_t>(plan[c][m])});
        const auto start = std::chrono::steady_clock::now();
        try {
          rec.outcome = run_method(sim.panel, plan[c][m], ro);
          rec.ok = std::isfinite(rec.outcome.estimate);
          if (!rec.ok) rec.error = "NON_FINITE_ESTIMATE";
        } catch (const Error& e) {
          rec.error = std::string(to_string(e.code()));
        } catch (const std::exception& e) {
          rec.error = std::string("INTERNAL: ") + e.what();
        }
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      }
    }
  };
  const std::size_t n_threads = std::min(thread_count(options.threads), std::max<std::size_t>(tasks, 1));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  out.metrics = summarize_records(out.records, configs, options.ci_level);
  return out;
}

namespace {

std::string fmt(double v) { return csv::format_double(v); }

}  // namespace

void write_replications(std::ostream& out, const std::vector<ReplicationRecord>& records) {
  out << "config,method,rep,ok,error,estimate,se,ci_lower,ci_upper,p_value,truth\n";
  for (const auto& r : records) {
    out << csv::quote_if_needed(r.config) << ',' << advisor::to_string(r.method) << ',' << r.rep << ','
        << (r.ok ? 1 : 0) << ',' << csv::quote_if_needed(r.error) << ',';
    if (r.ok) {
      out << fmt(r.outcome.estimate) << ',' << fmt(r.outcome.se) << ',' << fmt(r.outcome.ci_lower) << ','
          << fmt(r.outcome.ci_upper) << ',' << fmt(r.outcome.p_value);
    } else {
      out << ",,,,";
    }
    out << ',' << fmt(r.truth) << '\n';
  }
}

void write_metrics(std::ostream& out, const std::vector<MethodMetrics>& metrics) {
  out << "config,method,null_config,reps,failures,mean_estimate,mean_truth,bias,sd,rmse,mean_se,coverage,type_i\n";
  for (const auto& m : metrics) {
    out << csv::quote_if_needed(m.config) << ',' << advisor::to_string(m.method) << ',' << (m.null_config ? 1 : 0)
        << ',' << m.reps << ',' << m.failures << ',' << fmt(m.mean_estimate) << ',' << fmt(m.mean_truth) << ','
        << fmt(m.bias) << ',' << fmt(m.sd) << ',' << fmt(m.rmse) << ',' << fmt(m.mean_se) << ','
        << fmt(m.coverage) << ',' << fmt(m.type_i) << '\n';
  }
}

void write_runtime(std::ostream& out, const std::vector<MethodMetrics>& metrics) {
  out << "config,method,reps,mean_seconds\n";
  for (const auto& m : metrics) {
    out << csv::quote_if_needed(m.config) << ',' << advisor::to_string(m.method) << ',' << m.reps << ','
        << fmt(m.mean_seconds) << '\n';
  }
}

}  // namespace panelcause::sim
