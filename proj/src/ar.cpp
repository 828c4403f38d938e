#include "panelcause/ar.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "panelcause/error.hpp"
#include "rows.hpp"

namespace panelcause::ar {

namespace {

using detail::Row;

struct Design {
  std::vector<Row> rows;  // rows with a usable lag
  std::vector<std::size_t> cov;
  std::vector<std::string> cov_names;
  int first_time = 0;
};

Design make_design(const PanelDataset& panel, std::span<const std::string> covariates) {
  if (panel.time_count() < 3) fail(ErrorCode::kTooFewPeriods, "need at least 3 periods");
  if (panel.unit_count() < 2) fail(ErrorCode::kInvalidConfig, "need at least 2 units");
  Design d;
  d.cov = panel.resolve_covariates(covariates);
  d.cov_names.assign(covariates.begin(), covariates.end());
  std::vector<std::string> missing;
  std::size_t missing_count = 0;
  const int T = static_cast<int>(panel.time_count());
  for (std::size_t u = 0; u < panel.unit_count(); ++u) {
    bool seen = false;
    for (int t = 0; t < T; ++t) {
      if (!panel.complete(u, t, d.cov)) continue;
      if (!seen) {
        seen = true;  // first usable period has no lag
        continue;
      }
      if (!panel.observed(u, t - 1) || !std::isfinite(panel.outcome(u, t - 1))) {
        if (missing.size() < 10) missing.push_back(panel.units()[u] + "@" + std::to_string(panel.time_label(t - 1)));
        ++missing_count;
        continue;
      }
      d.rows.push_back({u, t});
    }
  }
  if (missing_count > 0) {
    std::ostringstream msg;
    msg << missing_count << " lag cell(s) missing:";
    for (const auto& m : missing) msg << ' ' << m;
    fail(ErrorCode::kMissingLag, msg.str());
  }
  if (d.rows.empty()) fail(ErrorCode::kNoRows, "no rows with an observed lag");
  d.first_time = T;
  for (const auto& r : d.rows) d.first_time = std::min(d.first_time, r.time);
  return d;
}

std::string time_name(const PanelDataset& panel, int t) { return "time:" + std::to_string(panel.time_label(t)); }

// Regressors for a given gamma; the response is y - shift * policy.
linreg::FitResult regress(const PanelDataset& panel, const Design& d, double gamma, double shift) {
  const auto n = d.rows.size();
  linreg::DesignMatrix X(n);
  Eigen::VectorXd lag(static_cast<Eigen::Index>(n));
  Eigen::VectorXd pol(static_cast<Eigen::Index>(n));
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = d.rows[i];
    const auto k = static_cast<Eigen::Index>(i);
    lag(k) = panel.outcome(r.unit, r.time - 1) - gamma * panel.policy(r.unit, r.time - 1);
    pol(k) = panel.policy(r.unit, r.time);
    y(k) = panel.outcome(r.unit, r.time) - shift * pol(k);
  }
  X.add_intercept();
  X.add_column("lag", lag);
  if (shift == 0.0) X.add_column("policy", pol);
  for (std::size_t k = 0; k < d.cov.size(); ++k) {
    X.add_column(d.cov_names[k], detail::covariate_vector(panel, d.rows, d.cov[k]));
  }
  const int T = static_cast<int>(panel.time_count());
  for (int t = d.first_time + 1; t < T; ++t) {
    Eigen::VectorXd dummy(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) dummy(static_cast<Eigen::Index>(i)) = d.rows[i].time == t ? 1.0 : 0.0;
    if (dummy.sum() > 0.0) X.add_column(time_name(panel, t), std::move(dummy));
  }
  return linreg::ols_fit(X, y, detail::unit_ids(d.rows));
}

double profile_rss(const PanelDataset& panel, const Design& d, double gamma) {
  return regress(panel, d, gamma, gamma).residuals.squaredNorm();
}

double profile_search(const PanelDataset& panel, const Design& d, const std::vector<double>& path) {
  const auto [lo_it, hi_it] = std::minmax_element(path.begin(), path.end());
  const double span = std::max(1.0, *hi_it - *lo_it);
  double lo = *lo_it - span;
  double hi = *hi_it + span;
  constexpr int kGrid = 200;
  double best = lo;
  double best_rss = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kGrid; ++i) {
    const double g = lo + (hi - lo) * i / kGrid;
    const double rss = profile_rss(panel, d, g);
    if (rss < best_rss) {
      best_rss = rss;
      best = g;
    }
  }
  // golden-section refinement inside the neighbouring grid cells
  double a = best - (hi - lo) / kGrid;
  double b = best + (hi - lo) / kGrid;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - phi * (b - a);
  double e = a + phi * (b - a);
  double fc = profile_rss(panel, d, c);
  double fe = profile_rss(panel, d, e);
  for (int it = 0; it < 200 && b - a > 1e-12 * std::max(1.0, std::fabs(best)); ++it) {
    if (fc < fe) {
      b = e;
      e = c;
      fe = fc;
      c = b - phi * (b - a);
      fc = profile_rss(panel, d, c);
    } else {
      a = c;
      c = e;
      fc = fe;
      e = a + phi * (b - a);
      fe = profile_rss(panel, d, e);
    }
  }
  const double refined = 0.5 * (a + b);
  return profile_rss(panel, d, refined) <= best_rss ? refined : best;
}

DebiasedArEstimate estimate(const PanelDataset& panel, const Design& d, const ArOptions& options) {
  DebiasedArEstimate est;
  bool lagged_policy = false;
  for (const auto& r : d.rows) lagged_policy = lagged_policy || panel.policy(r.unit, r.time - 1) != 0;

  double gamma = 0.0;
  double profiled = 0.0;
  est.gamma_path.push_back(gamma);
  if (!lagged_policy) {
    est.fit = regress(panel, d, 0.0, 0.0);
    est.gamma_path.push_back(est.fit.has("policy") ? est.fit.coef("policy") : 0.0);
    est.iterations = 1;
    est.converged = true;
  } else {
    for (std::size_t m = 1; m <= options.max_iterations; ++m) {
      est.fit = regress(panel, d, gamma, 0.0);
      if (!est.fit.has("policy")) fail(ErrorCode::kNoVariation, "policy indicator dropped as collinear");
      const double next = est.fit.coef("policy");
      est.gamma_path.push_back(next);
      est.iterations = m;
      if (!std::isfinite(next)) break;
      if (std::fabs(next - gamma) <= options.tolerance) {
        est.converged = true;
        break;
      }
      gamma = next;
    }
    if (!est.converged) {
      profiled = profile_search(panel, d, est.gamma_path);
      if (!std::isfinite(profiled)) {
        std::ostringstream msg;
        msg << "fixed point did not settle in " << options.max_iterations << " iterations; path:";
        for (std::size_t i = std::max<std::size_t>(est.gamma_path.size(), 5) - 5; i < est.gamma_path.size(); ++i) {
          msg << ' ' << est.gamma_path[i];
        }
        fail(ErrorCode::kNoConvergence, msg.str());
      }
      est.profile_fallback = true;
      est.fit = regress(panel, d, profiled, 0.0);
      est.warnings.push_back("fixed-point iteration did not settle; gamma from profile least squares");
    }
  }
  if (est.fit.has("policy")) {
    const double point = est.profile_fallback ? profiled : est.fit.coef("policy");
    est.gamma = summarize(point, est.fit.se("policy"), options.ci_level);
  } else {
    bool treated = false;
    for (const auto& r : d.rows) treated = treated || panel.policy(r.unit, r.time) != 0;
    if (treated) fail(ErrorCode::kNoVariation, "policy indicator dropped as collinear");
    // no treated rows: the plain AR(1) model, gamma identically zero
    est.gamma = summarize(0.0, std::numeric_limits<double>::quiet_NaN(), options.ci_level);
    est.warnings.push_back("no treated rows: gamma fixed at 0");
  }
  est.beta_lag = est.fit.has("lag") ? est.fit.coef("lag") : 0.0;
  est.intercept = est.fit.coef(linreg::kIntercept);
  for (int t = d.first_time; t < static_cast<int>(panel.time_count()); ++t) {
    if (t == d.first_time) {
      est.time_effects[t] = 0.0;
    } else if (est.fit.has(time_name(panel, t))) {
      est.time_effects[t] = est.fit.coef(time_name(panel, t));
    }
  }
  for (const auto& name : d.cov_names) {
    if (est.fit.has(name)) est.covariate_betas[name] = est.fit.coef(name);
  }
  for (const auto& dc : est.fit.dropped_columns) {
    est.warnings.push_back("dropped column '" + dc.name + "': " + dc.reason);
  }
  return est;
}

}  // namespace

linreg::FitResult fit_ar_regression(const PanelDataset& panel, std::span<const std::string> covariates,
                                    double gamma) {
  return regress(panel, make_design(panel, covariates), gamma, 0.0);
}

DebiasedArEstimate fit_debiased_ar(const PanelDataset& panel, std::span<const std::string> covariates,
                                   const ArOptions& options) {
  const Design d = make_design(panel, covariates);
  DebiasedArEstimate est = estimate(panel, d, options);
  if (options.jackknife) {
    std::vector<double> folds;
    std::vector<std::size_t> units = detail::unit_ids(d.rows);
    units.erase(std::unique(units.begin(), units.end()), units.end());
    for (std::size_t left_out : units) {
      Design sub = d;
      sub.rows.clear();
      for (const auto& r : d.rows) {
        if (r.unit != left_out) sub.rows.push_back(r);
      }
      try {
        folds.push_back(estimate(panel, sub, options).gamma.estimate);
      } catch (const Error& e) {
        est.warnings.push_back("jackknife fold without '" + panel.units()[left_out] + "' skipped: " + e.what());
      }
    }
    if (folds.size() >= 2) {
      const double F = static_cast<double>(folds.size());
      const double mean = std::accumulate(folds.begin(), folds.end(), 0.0) / F;
      double ss = 0.0;
      for (double f : folds) ss += (f - mean) * (f - mean);
      est.jackknife_se = std::sqrt((F - 1.0) / F * ss);
    }
  }
  return est;
}

}  // namespace panelcause::ar
