#include "panelcause/report.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "panelcause/ar.hpp"
#include "panelcause/csv.hpp"
#include "panelcause/did.hpp"
#include "panelcause/error.hpp"
#include "panelcause/its.hpp"
#include "panelcause/scm.hpp"

namespace panelcause::report {

using advisor::MethodId;

namespace {

json summary(const EffectSummary& s) {
  return {{"estimate", s.estimate}, {"se", s.se}, {"ci_lower", s.ci_lower}, {"ci_upper", s.ci_upper},
          {"p_value", s.p_value}};
}

json point(double estimate) {
  return {{"estimate", estimate}, {"se", nullptr}, {"ci_lower", nullptr}, {"ci_upper", nullptr}, {"p_value", nullptr}};
}

json coefficient_table(const linreg::FitResult& fit) {
  json rows = json::array();
  for (std::size_t j = 0; j < fit.names.size(); ++j) {
    rows.push_back({{"name", fit.names[j]},
                    {"coefficient", fit.coefficients(static_cast<Eigen::Index>(j))},
                    {"se", std::sqrt(std::max(0.0, fit.vcov(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j))))}});
  }
  json dropped = json::array();
  for (const auto& d : fit.dropped_columns) dropped.push_back({{"name", d.name}, {"reason", d.reason}});
  return {{"n", fit.n}, {"rank", fit.rank}, {"clusters", fit.cluster_count}, {"coefficients", rows},
          {"dropped_columns", dropped}};
}

class Options {
 public:
  Options(const std::map<std::string, std::string>& values, MethodId method) : values_(values) {
    const auto allowed = option_keys(method);
    for (const auto& [key, value] : values) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        fail(ErrorCode::kConfigError, "option '" + key + "' is not recognized by " +
                                          std::string(advisor::to_string(method)));
      }
    }
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::string& text(const std::string& key) const { return values_.at(key); }

  double number(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    auto v = csv::parse_double(text(key));
    if (!v) fail(ErrorCode::kConfigError, "option '" + key + "' expects a number, got '" + text(key) + "'");
    return *v;
  }

  long long integer(const std::string& key, long long fallback) const {
    if (!has(key)) return fallback;
    auto v = csv::parse_integer(text(key));
    if (!v) fail(ErrorCode::kConfigError, "option '" + key + "' expects an integer, got '" + text(key) + "'");
    return *v;
  }

  bool flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& v = text(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(ErrorCode::kConfigError, "option '" + key + "' expects true or false, got '" + v + "'");
  }

  std::vector<std::string> list(const std::string& key) const {
    std::vector<std::string> out;
    if (!has(key)) return out;
    std::string item;
    for (char c : text(key)) {
      if (c == ',' || c == ';') {
        if (!item.empty()) out.push_back(item);
        item.clear();
      } else {
        item.push_back(c);
      }
    }
    if (!item.empty()) out.push_back(item);
    return out;
  }

 private:
  const std::map<std::string, std::string>& values_;
};

std::string single_treated(const PanelDataset& panel, const Options& opts) {
  if (opts.has("treated")) return opts.text("treated");
  const auto schedule = derive_adoption(panel);
  if (schedule.treated_count() != 1) {
    fail(ErrorCode::kConfigError, "several treated units; name one with --option treated=<unit>");
  }
  return panel.units()[schedule.cohorts.begin()->second.front()];
}

json scm_details(const PanelDataset& panel, const scm::ScmEstimate& est) {
  json weights = json::object();
  for (std::size_t j = 0; j < est.weights.donors.size(); ++j) {
    weights[panel.units()[est.weights.donors[j]]] = est.weights.weights(static_cast<Eigen::Index>(j));
  }
  json gaps = json::array();
  for (const auto& [t, g] : est.pre_gaps) gaps.push_back({{"time", panel.time_label(t)}, {"gap", g}});
  for (const auto& [t, g] : est.gaps) gaps.push_back({{"time", panel.time_label(t)}, {"gap", g}});
  json d{{"treated", est.treated},
         {"adoption", panel.time_label(est.adoption_time)},
         {"weights", weights},
         {"negative_allowed", est.weights.negative_allowed},
         {"pre_period_rmspe", est.weights.pre_period_rmspe},
         {"objective_value", est.weights.objective_value},
         {"solver_iterations", est.weights.iterations},
         {"gaps", gaps}};
  if (est.lambda) d["lambda"] = *est.lambda;
  return d;
}

json placebo_json(const PanelDataset& panel, const scm::PlaceboResult& p) {
  json units = json::array();
  for (const auto& u : p.placebos) {
    units.push_back({{"unit", panel.units()[u.unit]},
                     {"pre_rmspe", u.pre_rmspe},
                     {"post_rmspe", u.post_rmspe},
                     {"ratio", std::isfinite(u.ratio) ? json(u.ratio) : json("Inf")},
                     {"excluded", u.excluded}});
  }
  return {{"cutoff", p.cutoff},
          {"treated_pre_rmspe", p.treated_pre_rmspe},
          {"treated_ratio", std::isfinite(p.treated_ratio) ? json(p.treated_ratio) : json("Inf")},
          {"treated_rank", p.treated_rank},
          {"retained", p.retained},
          {"p_value", p.p_value},
          {"placebos", units}};
}

json gaps_by_event_time(const scm::ScmEstimate& est) {
  json out = json::array();
  for (const auto& [t, g] : est.gaps) {
    json row = point(g);
    row["event_time"] = t - est.adoption_time;
    out.push_back(row);
  }
  return out;
}

}  // namespace

std::vector<std::string> option_keys(MethodId method) {
  std::vector<std::string> keys{"balance"};
  auto add = [&](std::initializer_list<const char*> more) { keys.insert(keys.end(), more.begin(), more.end()); };
  switch (method) {
    case MethodId::kIts:
    case MethodId::kItsMultiBaseline:
    case MethodId::kDidTwfe:
      break;
    case MethodId::kCits: add({"unit_effects"}); break;
    case MethodId::kEventStudy: add({"leads", "lags"}); break;
    case MethodId::kGroupTimeDid: add({"comparison", "draws"}); break;
    case MethodId::kImputationDid: add({"weight", "jackknife"}); break;
    case MethodId::kDebiasedAr: add({"jackknife", "tolerance", "max_iterations"}); break;
    case MethodId::kScm: add({"treated", "donors", "placebo", "cutoff"}); break;
    case MethodId::kAscm: add({"treated", "donors", "lambda"}); break;
    case MethodId::kStaggeredAscm: add({"nu", "lambda", "jackknife"}); break;
  }
  return keys;
}

json describe(const PanelDataset& panel) {
  const auto balance = balance_report(panel);
  const auto schedule = derive_adoption(panel);
  json doc;
  doc["panel"] = {{"units", panel.unit_count()},
                  {"periods", panel.time_count()},
                  {"first_period", panel.time_labels().front()},
                  {"last_period", panel.time_labels().back()},
                  {"time_step", panel.time_step()},
                  {"rows", panel.row_count()},
                  {"covariates", panel.covariate_names()}};
  json ranges = json::array();
  for (const auto& r : balance.unit_ranges) {
    ranges.push_back({{"unit", r.unit}, {"first", r.first}, {"last", r.last}, {"complete_cells", r.complete_cells}});
  }
  json cohort_periods = json::array();
  for (const auto& c : balance.cohort_periods) {
    cohort_periods.push_back({{"cohort", c.cohort}, {"units", c.units}, {"pre_periods", c.pre_periods},
                              {"post_periods", c.post_periods}});
  }
  doc["balance"] = {{"is_balanced", balance.is_balanced},
                    {"missing_cells", balance.missing_cell_count},
                    {"unit_ranges", ranges},
                    {"cohort_periods", cohort_periods}};
  json cohorts = json::array();
  for (const auto& [g, members] : schedule.cohorts) {
    json names = json::array();
    for (std::size_t u : members) names.push_back(panel.units()[u]);
    cohorts.push_back({{"adoption", panel.time_label(g)}, {"size", members.size()}, {"units", names}});
  }
  json never = json::array();
  for (std::size_t u : schedule.never_treated) never.push_back(panel.units()[u]);
  json cumulative = json::array();
  for (int t = 0; t < static_cast<int>(panel.time_count()); ++t) {
    cumulative.push_back({{"time", panel.time_label(t)}, {"with_policy", schedule.treated_at(t)}});
  }
  doc["adoption"] = {{"timing_class", to_string(schedule.timing_class)},
                     {"cohorts", cohorts},
                     {"never_treated", never},
                     {"cumulative_with_policy", cumulative}};
  return doc;
}

json features(const PanelDataset& panel, const advisor::DesignFeatures& f) {
  (void)panel;
  json sizes = json::array();
  for (const auto& [label, n] : f.cohort_sizes) sizes.push_back({{"cohort", label}, {"size", n}});
  return {{"n_treated", f.n_treated},
          {"n_control", f.n_control},
          {"timing_class", to_string(f.timing_class)},
          {"cohort_sizes", sizes},
          {"pre_periods_min", f.pre_periods_min},
          {"post_periods_min", f.post_periods_min},
          {"has_missing", f.has_missing},
          {"singleton_cohorts", f.singleton_cohorts}};
}

json recommendation(const advisor::DesignFeatures& f, const advisor::MethodRecommendation& rec) {
  (void)f;
  json methods = json::array();
  json viable = json::array();
  for (const auto& m : rec.methods) {
    methods.push_back({{"id", advisor::to_string(m.id)},
                       {"viable", m.viable},
                       {"reasons", m.reasons},
                       {"assumptions", m.assumptions},
                       {"heterogeneity", {{"by_time", m.heterogeneity_by_time},
                                          {"by_cohort", m.heterogeneity_by_cohort},
                                          {"note", m.heterogeneity_note}}},
                       {"data_considerations", m.data_considerations},
                       {"cautions", m.cautions}});
    if (m.viable) viable.push_back(advisor::to_string(m.id));
  }
  return {{"setting", rec.setting}, {"viable", viable}, {"methods", methods}};
}

json fit(const PanelDataset& input, const FitRequest& req) {
  const Options opts(req.options, req.method);
  PanelDataset panel = input;
  json warnings = json::array();
  if (opts.has("balance")) {
    const auto& mode = opts.text("balance");
    if (mode == "balanced") {
      panel = balance_panel(input, BalanceMode::kBalanced).first;
    } else if (mode != "unbalanced") {
      fail(ErrorCode::kConfigError, "balance must be 'balanced' or 'unbalanced'");
    }
  }
  const auto schedule = derive_adoption(panel);
  const auto& cov = req.covariates;

  json doc;
  doc["by_event_time"] = json::array();
  doc["by_cohort"] = json::array();
  doc["details"] = json::object();
  auto add_warnings = [&](const std::vector<std::string>& w) {
    for (const auto& s : w) warnings.push_back(s);
  };
  auto cohort_label = [&](int g) { return panel.time_label(g); };

  switch (req.method) {
    case MethodId::kIts: {
      const auto est = its::fit_its(panel, cov, {req.ci_level});
      doc["estimand"] = "level change at adoption";
      doc["estimate"] = summary(est.level_change);
      doc["details"] = {{"slope_change", summary(est.slope_change)},
                        {"baseline_intercept", est.baseline_intercept},
                        {"baseline_slope", est.baseline_slope},
                        {"adoption", cohort_label(est.adoption_time)},
                        {"fit", coefficient_table(est.fit)}};
      add_warnings(est.warnings);
      break;
    }
    case MethodId::kItsMultiBaseline: {
      const auto est = its::fit_its_multiple_baseline(panel, schedule, cov, {req.ci_level});
      doc["estimand"] = "cohort-size-weighted level change at adoption";
      doc["estimate"] = summary(est.pooled_level_change);
      for (const auto& [g, e] : est.per_cohort) {
        json row = summary(e.level_change);
        row["cohort"] = cohort_label(g);
        row["weight"] = est.weights.at(g);
        row["slope_change"] = summary(e.slope_change);
        doc["by_cohort"].push_back(row);
      }
      doc["details"] = {{"pooled_slope_change", summary(est.pooled_slope_change)}};
      break;
    }
    case MethodId::kCits: {
      its::CitsOptions o;
      o.ci_level = req.ci_level;
      o.unit_effects = opts.flag("unit_effects", true);
      const auto est = its::fit_cits(panel, cov, o);
      doc["estimand"] = "difference in level change (treated minus control)";
      doc["estimate"] = summary(est.diff_level_change);
      doc["details"] = {{"diff_slope_change", summary(est.diff_slope_change)},
                        {"coefficients", est.coefficients},
                        {"dropped", est.dropped},
                        {"adoption", cohort_label(est.adoption_time)},
                        {"fit", coefficient_table(est.fit)}};
      break;
    }
    case MethodId::kScm: {
      scm::ScmOptions o;
      o.match_covariates = cov;
      const auto treated = single_treated(panel, opts);
      const auto donors = opts.list("donors");
      const auto est = scm::fit_scm(panel, treated, donors, o);
      doc["estimand"] = "mean post-adoption gap (treated minus synthetic)";
      json headline = point(est.att);
      json details = scm_details(panel, est);
      if (opts.flag("placebo", true)) {
        scm::PlaceboOptions p;
        p.cutoff = opts.number("cutoff", 5.0);
        p.scm = o;
        const auto placebo = scm::placebo_inference(panel, treated, donors, p);
        headline["p_value"] = placebo.p_value;
        details["placebo"] = placebo_json(panel, placebo);
      }
      doc["estimate"] = headline;
      doc["by_event_time"] = gaps_by_event_time(est);
      doc["details"] = details;
      add_warnings(est.warnings);
      break;
    }
    case MethodId::kAscm: {
      scm::AscmOptions o;
      o.scm.match_covariates = cov;
      if (opts.has("lambda") && opts.text("lambda") != "cv") o.lambda = opts.number("lambda", 0.0);
      const auto est = scm::fit_ascm(panel, single_treated(panel, opts), opts.list("donors"), o);
      doc["estimand"] = "mean post-adoption gap (treated minus ridge-augmented synthetic)";
      doc["estimate"] = point(est.att);
      doc["by_event_time"] = gaps_by_event_time(est);
      doc["details"] = scm_details(panel, est);
      add_warnings(est.warnings);
      break;
    }
    case MethodId::kDidTwfe: {
      const auto est = did::fit_did_twfe(panel, cov, {req.ci_level});
      doc["estimand"] = est.estimand_label;
      doc["estimate"] = summary(est.att);
      doc["details"] = {{"fit", coefficient_table(est.fit)}};
      add_warnings(est.warnings);
      break;
    }
    case MethodId::kEventStudy: {
      did::EventStudyOptions o;
      o.ci_level = req.ci_level;
      if (opts.has("leads")) o.leads = static_cast<int>(opts.integer("leads", 0));
      if (opts.has("lags")) o.lags = static_cast<int>(opts.integer("lags", 0));
      const auto est = did::fit_event_study(panel, cov, o);
      double total = 0.0;
      double weighted = 0.0;
      std::vector<std::string> names;
      std::vector<double> w;
      for (const auto& c : est.coefficients) {
        json row = summary(c.effect);
        row["event_time"] = c.event_time;
        row["label"] = c.label;
        row["binned"] = c.binned;
        row["support"] = c.support;
        doc["by_event_time"].push_back(row);
        if (c.event_time >= 0) {
          names.push_back("event:" + c.label);
          w.push_back(static_cast<double>(c.support));
          total += static_cast<double>(c.support);
          weighted += static_cast<double>(c.support) * c.effect.estimate;
        }
      }
      doc["estimand"] = "support-weighted mean of post-adoption event-time effects (relative to k = -1)";
      if (names.empty()) {
        doc["estimate"] = point(std::nan(""));
      } else {
        Eigen::VectorXd wv(static_cast<Eigen::Index>(w.size()));
        for (std::size_t i = 0; i < w.size(); ++i) wv(static_cast<Eigen::Index>(i)) = w[i] / total;
        const double se = std::sqrt(std::max(0.0, wv.dot(est.fit.vcov_block(names) * wv)));
        doc["estimate"] = summary(summarize(weighted / total, se, req.ci_level));
      }
      doc["details"] = {{"reference_period", est.reference_period},
                        {"pretrend_statistic", est.pretrend_statistic ? json(*est.pretrend_statistic) : json(nullptr)},
                        {"pretrend_p_value", est.pretrend_p_value ? json(*est.pretrend_p_value) : json(nullptr)},
                        {"pretrend_df", est.pretrend_df},
                        {"unsupported_event_times", est.unsupported_event_times},
                        {"dropped_event_times", est.dropped_event_times},
                        {"fit", coefficient_table(est.fit)}};
      add_warnings(est.warnings);
      break;
    }
    case MethodId::kGroupTimeDid: {
      did::GroupTimeOptions o;
      o.ci_level = req.ci_level;
      o.seed = req.seed;
      o.bootstrap_draws = static_cast<std::size_t>(opts.integer("draws", 999));
      if (opts.has("comparison")) {
        const auto& c = opts.text("comparison");
        if (c == "never" || c == "never_treated" || c == "NEVER_TREATED") {
          o.comparison = did::ComparisonGroup::kNeverTreated;
        } else if (c == "not-yet" || c == "not_yet_treated" || c == "NOT_YET_TREATED") {
          o.comparison = did::ComparisonGroup::kNotYetTreated;
        } else {
          fail(ErrorCode::kConfigError, "comparison must be 'never' or 'not-yet'");
        }
      }
      const auto est = did::fit_group_time_att(panel, schedule, cov, o);
      doc["estimand"] = "cohort-size-weighted mean of per-cohort group-time ATTs";
      doc["estimate"] = summary(est.overall.effect);
      for (const auto& [e, agg] : est.by_event_time) {
        json row = summary(agg.effect);
        row["event_time"] = e;
        doc["by_event_time"].push_back(row);
      }
      for (const auto& [g, agg] : est.by_cohort) {
        json row = summary(agg.effect);
        row["cohort"] = cohort_label(g);
        doc["by_cohort"].push_back(row);
      }
      json cells = json::array();
      for (const auto& c : est.cells) {
        json row = summary(c.effect);
        row["cohort"] = cohort_label(c.cohort);
        row["time"] = panel.time_label(c.time);
        row["treated_units"] = c.treated_units;
        row["comparison_units"] = c.comparison_units;
        cells.push_back(row);
      }
      json overall_weights = json::array();
      for (const auto& [c, wt] : est.overall.weights) {
        overall_weights.push_back({{"cohort", cohort_label(est.cells[c].cohort)},
                                   {"time", panel.time_label(est.cells[c].time)},
                                   {"weight", wt}});
      }
      json empty = json::array();
      for (const auto& [g, t] : est.empty_comparison) {
        empty.push_back({{"cohort", cohort_label(g)}, {"time", panel.time_label(t)}});
      }
      doc["details"] = {{"comparison", did::to_string(est.comparison)},
                        {"bootstrap_draws", est.bootstrap_draws},
                        {"seed", o.seed},
                        {"cells", cells},
                        {"overall_weights", overall_weights},
                        {"empty_comparison", empty}};
      add_warnings(est.warnings);
      break;
    }
    case MethodId::kImputationDid: {
      did::ImputationOptions o;
      o.ci_level = req.ci_level;
      if (opts.has("weight")) o.weight_column = opts.text("weight");
      o.jackknife = opts.flag("jackknife", true);
      const auto est = did::fit_imputation_did(panel, schedule, cov, o);
      doc["estimand"] = "mean of observed minus imputed untreated outcome over treated cells";
      doc["estimate"] = summary(est.att);
      for (const auto& [e, v] : est.by_event_time) {
        json row = point(v);
        row["event_time"] = e;
        doc["by_event_time"].push_back(row);
      }
      for (const auto& [g, v] : est.by_cohort) {
        json row = point(v);
        row["cohort"] = cohort_label(g);
        doc["by_cohort"].push_back(row);
      }
      json cells = json::array();
      for (const auto& e : est.unit_time_effects) {
        cells.push_back({{"unit", panel.units()[e.unit]}, {"time", panel.time_label(e.time)},
                         {"effect", e.effect}, {"weight", e.weight}});
      }
      json dropped = json::array();
      for (int t : est.dropped_periods) dropped.push_back(panel.time_label(t));
      doc["details"] = {{"unit_time_effects", cells},
                        {"dropped_periods", dropped},
                        {"jackknife_folds", est.jackknife_folds},
                        {"untreated_fit", coefficient_table(est.untreated_fit)}};
      add_warnings(est.warnings);
      break;
    }
    case MethodId::kDebiasedAr: {
      ar::ArOptions o;
      o.ci_level = req.ci_level;
      o.jackknife = opts.flag("jackknife", false);
      o.tolerance = opts.number("tolerance", o.tolerance);
      o.max_iterations = static_cast<std::size_t>(opts.integer("max_iterations", 200));
      const auto est = ar::fit_debiased_ar(panel, cov, o);
      doc["estimand"] = "policy effect gamma in the debiased autoregressive model";
      doc["estimate"] = summary(est.gamma);
      json time_effects = json::array();
      for (const auto& [t, v] : est.time_effects) time_effects.push_back({{"time", panel.time_label(t)}, {"effect", v}});
      doc["details"] = {{"beta_lag", est.beta_lag},
                        {"intercept", est.intercept},
                        {"time_effects", time_effects},
                        {"covariate_betas", est.covariate_betas},
                        {"iterations", est.iterations},
                        {"converged", est.converged},
                        {"profile_fallback", est.profile_fallback},
                        {"gamma_path", est.gamma_path},
                        {"jackknife_se", est.jackknife_se ? json(*est.jackknife_se) : json(nullptr)},
                        {"fit", coefficient_table(est.fit)}};
      add_warnings(est.warnings);
      break;
    }
    case MethodId::kStaggeredAscm: {
      if (!cov.empty()) fail(ErrorCode::kCovariatesUnsupported, "STAGGERED_ASCM does not take covariates");
      scm::StaggeredAscmOptions o;
      o.ci_level = req.ci_level;
      if (opts.has("nu") && opts.text("nu") != "auto") o.nu = opts.number("nu", 0.0);
      if (opts.has("lambda") && opts.text("lambda") != "cv") o.ascm.lambda = opts.number("lambda", 0.0);
      o.jackknife = opts.flag("jackknife", true);
      const auto est = scm::fit_staggered_ascm(panel, schedule, o);
      doc["estimand"] = "cohort-size-weighted mean of per-cohort synthetic-control ATTs";
      doc["estimate"] = std::isfinite(est.se) ? summary(summarize(est.att, est.se, req.ci_level)) : point(est.att);
      json cohorts = json::object();
      for (const auto& [g, e] : est.per_cohort) {
        json row = point(e.att);
        row["cohort"] = cohort_label(g);
        row["weight"] = est.cohort_weights.at(g);
        doc["by_cohort"].push_back(row);
        cohorts[std::to_string(cohort_label(g))] = scm_details(panel, e);
      }
      doc["details"] = {{"nu", est.nu},
                        {"nu_auto", est.nu_auto},
                        {"pooled_prefit", est.pooled_prefit},
                        {"separate_prefit", est.separate_prefit},
                        {"jackknife_folds", est.jackknife_folds},
                        {"cohorts", cohorts}};
      add_warnings(est.warnings);
      break;
    }
  }
  doc["warnings"] = warnings;
  return doc;
}

namespace {

std::string cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_number()) return csv::format_double(v.get<double>());
  if (v.is_string()) return csv::quote_if_needed(v.get<std::string>());
  return csv::quote_if_needed(v.dump());
}

void csv_row(std::ostringstream& out, const std::string& section, const std::string& key, const json& s) {
  out << section << ',' << csv::quote_if_needed(key) << ',' << cell(s.value("estimate", json())) << ','
      << cell(s.value("se", json())) << ',' << cell(s.value("ci_lower", json())) << ','
      << cell(s.value("ci_upper", json())) << ',' << cell(s.value("p_value", json())) << '\n';
}

std::string num(const json& v) {
  if (v.is_null()) return "-";
  if (v.is_number()) {
    std::ostringstream s;
    s.precision(6);
    s << v.get<double>();
    return s.str();
  }
  return v.is_string() ? v.get<std::string>() : v.dump();
}

}  // namespace

std::string fit_csv(const json& doc) {
  std::ostringstream out;
  out << "section,key,estimate,se,ci_lower,ci_upper,p_value\n";
  const auto& fit = doc.at("result");
  csv_row(out, "overall", fit.at("estimand").get<std::string>(), fit.at("estimate"));
  for (const auto& row : fit.at("by_event_time")) {
    csv_row(out, "event_time", row.contains("label") ? row.at("label").get<std::string>()
                                                     : std::to_string(row.at("event_time").get<int>()),
            row);
  }
  for (const auto& row : fit.at("by_cohort")) csv_row(out, "cohort", std::to_string(row.at("cohort").get<long long>()), row);
  return out.str();
}

std::string fit_text(const json& doc) {
  std::ostringstream out;
  const auto& fit = doc.at("result");
  const auto& e = fit.at("estimate");
  out << doc.at("method").get<std::string>() << (doc.at("forced").get<bool>() ? " (forced)" : "") << '\n';
  out << "estimand: " << fit.at("estimand").get<std::string>() << '\n';
  out << "estimate " << num(e.at("estimate")) << "  se " << num(e.at("se")) << "  ci [" << num(e.at("ci_lower"))
      << ", " << num(e.at("ci_upper")) << "]  p " << num(e.at("p_value")) << '\n';
  if (!fit.at("by_event_time").empty()) {
    out << "by event time:\n";
    for (const auto& row : fit.at("by_event_time")) {
      out << "  " << (row.contains("label") ? row.at("label").get<std::string>() : std::to_string(row.at("event_time").get<int>()))
          << "  " << num(row.at("estimate")) << "  se " << num(row.value("se", json())) << '\n';
    }
  }
  if (!fit.at("by_cohort").empty()) {
    out << "by cohort:\n";
    for (const auto& row : fit.at("by_cohort")) {
      out << "  " << row.at("cohort").get<long long>() << "  " << num(row.at("estimate")) << "  se "
          << num(row.value("se", json())) << '\n';
    }
  }
  out << "assumptions:";
  for (const auto& a : doc.at("assumptions")) out << ' ' << a.get<std::string>() << ';';
  out << '\n';
  for (const auto& w : fit.at("warnings")) out << "warning: " << w.get<std::string>() << '\n';
  return out.str();
}

std::string describe_text(const json& doc) {
  std::ostringstream out;
  const auto& p = doc.at("panel");
  out << "units " << p.at("units") << ", periods " << p.at("periods") << " (" << p.at("first_period") << ".."
      << p.at("last_period") << "), rows " << p.at("rows") << '\n';
  const auto& b = doc.at("balance");
  out << "balanced: " << (b.at("is_balanced").get<bool>() ? "yes" : "no") << ", missing cells "
      << b.at("missing_cells") << '\n';
  const auto& a = doc.at("adoption");
  out << "timing: " << a.at("timing_class").get<std::string>() << '\n';
  for (const auto& c : a.at("cohorts")) {
    out << "  cohort " << c.at("adoption") << ": " << c.at("size") << " unit(s)\n";
  }
  out << "  never treated: " << a.at("never_treated").size() << " unit(s)\n";
  return out.str();
}

std::string recommend_text(const json& doc) {
  std::ostringstream out;
  const auto& rec = doc.at("recommendation");
  out << "setting: " << rec.at("setting").get<std::string>() << '\n';
  out << "viable:";
  for (const auto& v : rec.at("viable")) out << ' ' << v.get<std::string>();
  out << '\n';
  for (const auto& m : rec.at("methods")) {
    out << "  " << m.at("id").get<std::string>() << ": " << (m.at("viable").get<bool>() ? "viable" : "not viable");
    for (const auto& r : m.at("reasons")) out << " - " << r.get<std::string>();
    out << '\n';
    for (const auto& c : m.at("cautions")) out << "      caution: " << c.get<std::string>() << '\n';
  }
  return out.str();
}

}  // namespace panelcause::report
