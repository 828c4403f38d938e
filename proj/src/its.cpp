#include "panelcause/its.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "panelcause/error.hpp"
#include "rows.hpp"

namespace panelcause::its {

namespace {

using detail::Row;

struct Clock {
  int adoption;
  std::vector<std::size_t> treated;
  std::vector<std::size_t> controls;
};

Clock single_clock(const PanelDataset& panel, const AdoptionSchedule& schedule) {
  if (schedule.cohorts.empty()) fail(ErrorCode::kNoTreated, "panel has no treated units");
  if (schedule.cohorts.size() > 1) {
    fail(ErrorCode::kStaggeredInput,
         std::to_string(schedule.cohorts.size()) +
             " adoption cohorts found; use the multiple-baseline variant or a staggered-adoption "
             "estimator");
  }
  Clock clock;
  clock.adoption = schedule.cohorts.begin()->first;
  clock.treated = schedule.cohorts.begin()->second;
  clock.controls = schedule.never_treated;
  (void)panel;
  return clock;
}

void require_periods(const std::vector<Row>& rows, int adoption, const PanelDataset& panel) {
  std::set<int> pre;
  std::set<int> post;
  for (const auto& r : rows) (r.time < adoption ? pre : post).insert(r.time);
  if (pre.size() < 2 || post.size() < 2) {
    fail(ErrorCode::kTooFewPeriods,
         "need at least 2 pre and 2 post periods around adoption at " +
             std::to_string(panel.time_label(adoption)) + "; found " + std::to_string(pre.size()) +
             " pre and " + std::to_string(post.size()) + " post");
  }
}

std::vector<std::size_t> cluster_ids(const std::vector<Row>& rows, std::size_t unit_count) {
  std::vector<std::size_t> ids;
  ids.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ids.push_back(unit_count > 1 ? rows[i].unit : i);
  }
  return ids;
}

void add_unit_dummies(linreg::DesignMatrix& X, const PanelDataset& panel,
                      const std::vector<Row>& rows, const std::vector<std::size_t>& units) {
  for (std::size_t j = 1; j < units.size(); ++j) {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].unit == units[j]) d(static_cast<Eigen::Index>(i)) = 1.0;
    }
    X.add_column("unit:" + panel.units()[units[j]], std::move(d));
  }
}

struct Segments {
  Eigen::VectorXd time, policy, since;
};

Segments segment_columns(const std::vector<Row>& rows, int adoption) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Segments s{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    int t = rows[static_cast<std::size_t>(i)].time;
    s.time(i) = t;
    s.policy(i) = t >= adoption ? 1.0 : 0.0;
    s.since(i) = t >= adoption ? static_cast<double>(t - adoption) : 0.0;
  }
  return s;
}

double coef_or_zero(const linreg::FitResult& fit, const std::string& name) {
  return fit.has(name) ? fit.coef(name) : 0.0;
}

EffectSummary summary_of(const linreg::FitResult& fit, const std::string& name, double level) {
  if (!fit.has(name)) {
    fail(ErrorCode::kNoVariation, "term '" + name + "' is not identified in this panel");
  }
  return summarize(fit.coef(name), fit.se(name), level);
}

}  // namespace

ItsEstimate fit_its(const PanelDataset& panel, std::span<const std::string> covariates,
                    const ItsOptions& options) {
  const auto schedule = derive_adoption(panel);
  const Clock clock = single_clock(panel, schedule);
  const auto cov = panel.resolve_covariates(covariates);

  auto rows = detail::complete_rows(panel, cov, clock.treated);
  require_periods(rows, clock.adoption, panel);

  std::vector<std::size_t> units;
  for (const auto& r : rows) {
    if (units.empty() || units.back() != r.unit) units.push_back(r.unit);
  }

  const Segments seg = segment_columns(rows, clock.adoption);
  linreg::DesignMatrix X(rows.size());
  X.add_intercept();
  X.add_column("time", seg.time);
  X.add_column("policy", seg.policy);
  X.add_column("time_since_policy", seg.since);
  for (std::size_t k = 0; k < cov.size(); ++k) {
    X.add_column(std::string(covariates[k]), detail::covariate_vector(panel, rows, cov[k]));
  }
  add_unit_dummies(X, panel, rows, units);

  const auto clusters = cluster_ids(rows, units.size());
  ItsEstimate est;
  est.fit = linreg::ols_fit(X, detail::outcome_vector(panel, rows), clusters);
  est.level_change = summary_of(est.fit, "policy", options.ci_level);
  est.slope_change = summary_of(est.fit, "time_since_policy", options.ci_level);
  est.baseline_intercept = coef_or_zero(est.fit, std::string(linreg::kIntercept));
  est.baseline_slope = coef_or_zero(est.fit, "time");
  est.adoption_time = clock.adoption;
  est.units = units;
  if (units.size() == 1) {
    est.warnings.push_back("single unit: heteroskedasticity-robust SEs (each period its own cluster)");
  }
  if (!schedule.never_treated.empty()) {
    est.warnings.push_back(std::to_string(schedule.never_treated.size()) +
                           " never-treated unit(s) ignored by ITS");
  }
  for (const auto& d : est.fit.dropped_columns) {
    est.warnings.push_back("dropped column '" + d.name + "': " + d.reason);
  }
  return est;
}

MultiBaselineItsEstimate fit_its_multiple_baseline(const PanelDataset& panel,
                                                   const AdoptionSchedule& schedule,
                                                   std::span<const std::string> covariates,
                                                   const ItsOptions& options) {
  if (schedule.cohorts.size() < 2) {
    fail(ErrorCode::kInvalidConfig, "multiple-baseline ITS needs at least two adoption cohorts, found " +
                                        std::to_string(schedule.cohorts.size()));
  }
  MultiBaselineItsEstimate out;
  double total = 0.0;
  for (const auto& [g, members] : schedule.cohorts) total += static_cast<double>(members.size());

  double level = 0.0;
  double slope = 0.0;
  double level_var = 0.0;
  double slope_var = 0.0;
  for (const auto& [g, members] : schedule.cohorts) {
    const PanelDataset sub = panel.subset_units(members);
    ItsEstimate est;
    try {
      est = fit_its(sub, covariates, options);
    } catch (const Error& e) {
      throw Error(e.code(), "cohort " + std::to_string(panel.time_label(g)) + ": " + e.what());
    }
    // unit indices refer to the sub-panel; map back to the full panel
    est.units = members;
    const double w = static_cast<double>(members.size()) / total;
    out.weights[g] = w;
    level += w * est.level_change.estimate;
    slope += w * est.slope_change.estimate;
    level_var += w * w * est.level_change.se * est.level_change.se;
    slope_var += w * w * est.slope_change.se * est.slope_change.se;
    out.per_cohort.emplace(g, std::move(est));
  }
  out.pooled_level_change = summarize(level, std::sqrt(level_var), options.ci_level);
  out.pooled_slope_change = summarize(slope, std::sqrt(slope_var), options.ci_level);
  return out;
}

CitsEstimate fit_cits(const PanelDataset& panel, std::span<const std::string> covariates,
                      const CitsOptions& options) {
  const auto schedule = derive_adoption(panel);
  const Clock clock = single_clock(panel, schedule);
  if (clock.controls.empty()) fail(ErrorCode::kNoControl, "CITS needs at least one never-treated unit");
  const auto cov = panel.resolve_covariates(covariates);

  std::vector<std::size_t> members = clock.treated;
  members.insert(members.end(), clock.controls.begin(), clock.controls.end());
  std::sort(members.begin(), members.end());
  auto rows = detail::complete_rows(panel, cov, members);
  require_periods(rows, clock.adoption, panel);

  std::vector<std::size_t> units;
  for (const auto& r : rows) {
    if (units.empty() || units.back() != r.unit) units.push_back(r.unit);
  }

  const auto n = static_cast<Eigen::Index>(rows.size());
  const Segments seg = segment_columns(rows, clock.adoption);
  Eigen::VectorXd trt(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    trt(i) = schedule.is_never(rows[static_cast<std::size_t>(i)].unit) ? 0.0 : 1.0;
  }

  // Unit effects precede the treatment indicator so that, being collinear
  // with them, the indicator is the column dropped.
  linreg::DesignMatrix X(rows.size());
  X.add_intercept();
  X.add_column("time", seg.time);
  X.add_column("policy", seg.policy);
  X.add_column("time_since_policy", seg.since);
  if (options.unit_effects) add_unit_dummies(X, panel, rows, units);
  X.add_column("treatment", trt);
  X.add_column("trt_x_time", trt.cwiseProduct(seg.time));
  X.add_column("trt_x_policy", trt.cwiseProduct(seg.policy));
  X.add_column("trt_x_time_since_policy", trt.cwiseProduct(seg.since));
  for (std::size_t k = 0; k < cov.size(); ++k) {
    X.add_column(std::string(covariates[k]), detail::covariate_vector(panel, rows, cov[k]));
  }

  CitsEstimate est;
  est.fit = linreg::ols_fit(X, detail::outcome_vector(panel, rows), detail::unit_ids(rows));
  est.adoption_time = clock.adoption;
  est.diff_level_change = summary_of(est.fit, "trt_x_policy", options.ci_level);
  est.diff_slope_change = summary_of(est.fit, "trt_x_time_since_policy", options.ci_level);
  const std::pair<const char*, const char*> terms[] = {
      {"intercept", "_intercept"},      {"time", "time"},
      {"policy", "policy"},             {"time_since_policy", "time_since_policy"},
      {"treatment", "treatment"},       {"trt_x_time", "trt_x_time"},
      {"trt_x_policy", "trt_x_policy"}, {"trt_x_time_since_policy", "trt_x_time_since_policy"}};
  for (const auto& [label, column] : terms) {
    if (est.fit.has(column)) {
      est.coefficients[label] = est.fit.coef(column);
    } else {
      est.dropped.emplace_back(label);
    }
  }
  return est;
}

}  // namespace panelcause::its
