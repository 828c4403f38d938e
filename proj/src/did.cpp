#include "panelcause/did.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "panelcause/error.hpp"
#include "panelcause/rng.hpp"
#include "rows.hpp"

namespace panelcause::did {

namespace {

using detail::Row;

struct NamedColumn {
  std::string name;
  Eigen::VectorXd values;
};

// OLS of y on `columns` with unit and time effects absorbed. Columns wiped
// out by the absorption are reported as dropped.
linreg::FitResult twfe_regression(const std::vector<Row>& rows, const Eigen::VectorXd& y,
                                  const std::vector<NamedColumn>& columns,
                                  std::vector<std::string>* warnings) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd M(n, static_cast<Eigen::Index>(columns.size()) + 1);
  M.col(0) = y;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    M.col(static_cast<Eigen::Index>(j) + 1) = columns[j].values;
  }
  const auto units = detail::unit_ids(rows);
  const auto times = detail::time_ids(rows);
  auto absorbed = linreg::absorb_fixed_effects(units, times, {}, M);
  if (warnings) {
    warnings->insert(warnings->end(), absorbed.warnings.begin(), absorbed.warnings.end());
  }

  linreg::DesignMatrix X(rows.size());
  std::vector<linreg::DroppedColumn> absorbed_columns;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    Eigen::VectorXd col = absorbed.columns.col(static_cast<Eigen::Index>(j) + 1);
    const double before = columns[j].values.norm();
    if (!(before > 0.0) || col.norm() <= 1e-10 * before) {
      absorbed_columns.push_back({columns[j].name, "absorbed by fixed effects"});
      continue;
    }
    X.add_column(columns[j].name, std::move(col));
  }
  if (X.cols() == 0) {
    linreg::FitResult empty;
    empty.n = rows.size();
    empty.dropped_columns = absorbed_columns;
    empty.residuals = absorbed.columns.col(0);
    empty.fitted = y - empty.residuals;
    return empty;
  }
  linreg::OlsOptions ols;
  ols.absorbed_dof = absorbed.time_levels > 1 ? absorbed.time_levels - 1 : 0;
  auto fit = linreg::ols_fit(X, absorbed.columns.col(0), units, ols);
  fit.dropped_columns.insert(fit.dropped_columns.begin(), absorbed_columns.begin(),
                             absorbed_columns.end());
  return fit;
}

void check_design(const AdoptionSchedule& schedule) {
  if (schedule.cohorts.empty()) fail(ErrorCode::kNoTreated, "panel has no treated units");
  if (schedule.never_treated.empty() && schedule.cohorts.size() < 2) {
    fail(ErrorCode::kNoControl, "no never-treated units and a single adoption cohort");
  }
}

std::vector<NamedColumn> covariate_columns(const PanelDataset& panel, const std::vector<Row>& rows,
                                           std::span<const std::string> names,
                                           const std::vector<std::size_t>& idx) {
  std::vector<NamedColumn> out;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    out.push_back({std::string(names[k]), detail::covariate_vector(panel, rows, idx[k])});
  }
  return out;
}

double sample_sd(const Eigen::VectorXd& draws) {
  if (draws.size() < 2) return 0.0;
  const double mean = draws.mean();
  return std::sqrt((draws.array() - mean).square().sum() / static_cast<double>(draws.size() - 1));
}

}  // namespace

std::string_view to_string(ComparisonGroup group) {
  return group == ComparisonGroup::kNeverTreated ? "NEVER_TREATED" : "NOT_YET_TREATED";
}

std::string_view to_string(BaconKind kind) {
  switch (kind) {
    case BaconKind::kTreatedVsNever: return "TREATED_VS_NEVER";
    case BaconKind::kEarlyVsLate: return "EARLY_VS_LATE";
    case BaconKind::kLateVsEarly: return "LATE_VS_EARLY";
  }
  return "UNKNOWN";
}

// ---------------------------------------------------------------------------
// TWFE

DidEstimate fit_did_twfe(const PanelDataset& panel, std::span<const std::string> covariates,
                         const DidOptions& options) {
  const auto schedule = derive_adoption(panel);
  check_design(schedule);
  const auto cov = panel.resolve_covariates(covariates);
  const auto rows = detail::complete_rows(panel, cov);

  Eigen::VectorXd policy(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    policy(static_cast<Eigen::Index>(i)) = panel.policy(rows[i].unit, rows[i].time);
  }
  if (policy.minCoeff() == policy.maxCoeff()) {
    fail(ErrorCode::kNoVariation, "policy is constant across all usable rows");
  }

  std::vector<NamedColumn> columns{{"policy", policy}};
  auto extra = covariate_columns(panel, rows, covariates, cov);
  columns.insert(columns.end(), extra.begin(), extra.end());

  DidEstimate est;
  est.fit = twfe_regression(rows, detail::outcome_vector(panel, rows), columns, &est.warnings);
  if (!est.fit.has("policy")) {
    fail(ErrorCode::kNoVariation, "policy indicator is collinear with the fixed effects");
  }
  est.att = summarize(est.fit.coef("policy"), est.fit.se("policy"), options.ci_level);
  if (schedule.cohorts.size() > 1) {
    est.warnings.push_back(
        "staggered adoption: the TWFE coefficient averages all 2x2 comparisons, including "
        "already-treated controls; see the Goodman-Bacon decomposition");
  }
  return est;
}

// ---------------------------------------------------------------------------
// Event study

EventStudyEstimate fit_event_study(const PanelDataset& panel,
                                   std::span<const std::string> covariates,
                                   const EventStudyOptions& options) {
  const auto schedule = derive_adoption(panel);
  check_design(schedule);
  const auto cov = panel.resolve_covariates(covariates);
  const auto rows = detail::complete_rows(panel, cov);

  int min_e = 0;
  int max_e = 0;
  for (const auto& r : rows) {
    int g = schedule.adoption_time[r.unit];
    if (g == kNever) continue;
    min_e = std::min(min_e, r.time - g);
    max_e = std::max(max_e, r.time - g);
  }
  const int leads = options.leads ? *options.leads : -min_e;
  const int lags = options.lags ? *options.lags : max_e;
  if (leads < 0 || lags < 0) fail(ErrorCode::kInvalidConfig, "leads and lags must be non-negative");

  struct Indicator {
    int k;
    bool lower_bin;
    bool upper_bin;
  };
  std::vector<Indicator> indicators;
  for (int k = -leads; k <= -2; ++k) {
    indicators.push_back({k, k == -leads && options.leads.has_value(), false});
  }
  for (int k = 0; k <= lags; ++k) {
    indicators.push_back({k, false, k == lags && options.lags.has_value()});
  }

  EventStudyEstimate est;
  std::vector<NamedColumn> columns;
  std::vector<EventTimeCoefficient> meta;
  for (const auto& ind : indicators) {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rows.size()));
    std::size_t support = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      int g = schedule.adoption_time[rows[i].unit];
      if (g == kNever) continue;
      int e = rows[i].time - g;
      bool hit = e == ind.k || (ind.lower_bin && e < ind.k) || (ind.upper_bin && e > ind.k);
      if (hit) {
        d(static_cast<Eigen::Index>(i)) = 1.0;
        ++support;
      }
    }
    if (support == 0) {
      est.unsupported_event_times.push_back(ind.k);
      continue;
    }
    EventTimeCoefficient c;
    c.event_time = ind.k;
    c.binned = ind.lower_bin || ind.upper_bin;
    c.label = ind.lower_bin ? "<=" + std::to_string(ind.k)
              : ind.upper_bin ? ">=" + std::to_string(ind.k)
                              : std::to_string(ind.k);
    c.support = support;
    columns.push_back({"event:" + c.label, std::move(d)});
    meta.push_back(c);
  }
  if (columns.empty()) fail(ErrorCode::kNoVariation, "no event-time indicator has support");

  auto extra = covariate_columns(panel, rows, covariates, cov);
  columns.insert(columns.end(), extra.begin(), extra.end());
  if (!cov.empty()) {
    est.warnings.push_back(
        "time-varying covariates in an event study can absorb part of the policy effect");
  }

  est.fit = twfe_regression(rows, detail::outcome_vector(panel, rows), columns, &est.warnings);
  std::vector<std::string> lead_names;
  for (const auto& c : meta) {
    const std::string name = "event:" + c.label;
    if (!est.fit.has(name)) {
      est.dropped_event_times.push_back(c.event_time);
      continue;
    }
    EventTimeCoefficient out = c;
    out.effect = summarize(est.fit.coef(name), est.fit.se(name), options.ci_level);
    est.coefficients.push_back(out);
    if (c.event_time <= -2) lead_names.push_back(name);
  }
  if (!est.dropped_event_times.empty()) {
    std::ostringstream msg;
    msg << "COLLINEAR_EVENT_TIME: dropped k =";
    for (int k : est.dropped_event_times) msg << ' ' << k;
    est.warnings.push_back(msg.str());
  }

  if (!lead_names.empty()) {
    Eigen::VectorXd b(static_cast<Eigen::Index>(lead_names.size()));
    for (std::size_t j = 0; j < lead_names.size(); ++j) {
      b(static_cast<Eigen::Index>(j)) = est.fit.coef(lead_names[j]);
    }
    Eigen::MatrixXd V = est.fit.vcov_block(lead_names);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(V);
    const double stat = b.dot(cod.solve(b));
    est.pretrend_df = static_cast<std::size_t>(cod.rank());
    if (est.pretrend_df > 0 && std::isfinite(stat)) {
      est.pretrend_statistic = stat;
      est.pretrend_p_value = chi_squared_sf(stat, static_cast<double>(est.pretrend_df));
    }
  }
  return est;
}

// ---------------------------------------------------------------------------
// Group-time ATT

GroupTimeAtts fit_group_time_att(const PanelDataset& panel, const AdoptionSchedule& schedule,
                                 std::span<const std::string> covariates,
                                 const GroupTimeOptions& options) {
  if (schedule.timing_class == TimingClass::kNoTreated) {
    fail(ErrorCode::kNoTreated, "panel has no treated units");
  }
  const auto cov = panel.resolve_covariates(covariates);
  const int T = static_cast<int>(panel.time_count());
  const std::size_t N = panel.unit_count();

  GroupTimeAtts out;
  out.comparison = options.comparison;
  std::vector<Eigen::VectorXd> influence;  // per cell, length N

  for (const auto& [g, members] : schedule.cohorts) {
    if (members.size() == 1) {
      out.warnings.push_back("SINGLETON_COHORT: cohort " + std::to_string(panel.time_label(g)) +
                             " has one unit; its SE is unreliable");
    }
    if (g == 0) {
      out.warnings.push_back("cohort " + std::to_string(panel.time_label(g)) +
                             " is treated in the first period and has no base period");
      continue;
    }
    const int base = g - 1;
    for (int t = g; t < T; ++t) {
      std::vector<std::size_t> treated;
      for (std::size_t u : members) {
        if (panel.complete(u, t, {}) && panel.complete(u, base, cov)) treated.push_back(u);
      }
      std::vector<std::size_t> control;
      for (std::size_t u = 0; u < N; ++u) {
        const int a = schedule.adoption_time[u];
        const bool eligible = options.comparison == ComparisonGroup::kNeverTreated
                                  ? a == kNever
                                  : (a == kNever || a > t);
        if (eligible && panel.complete(u, t, {}) && panel.complete(u, base, cov)) control.push_back(u);
      }
      if (control.empty() || treated.empty()) {
        out.empty_comparison.emplace_back(g, t);
        continue;
      }

      auto delta = [&](std::size_t u) { return panel.outcome(u, t) - panel.outcome(u, base); };
      Eigen::VectorXd psi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(N));
      double att = 0.0;
      const double nG = static_cast<double>(treated.size());
      const double nC = static_cast<double>(control.size());

      if (cov.empty()) {
        double mean_g = 0.0;
        double mean_c = 0.0;
        for (std::size_t u : treated) mean_g += delta(u);
        for (std::size_t u : control) mean_c += delta(u);
        mean_g /= nG;
        mean_c /= nC;
        att = mean_g - mean_c;
        for (std::size_t u : treated) psi(static_cast<Eigen::Index>(u)) += (delta(u) - mean_g) / nG;
        for (std::size_t u : control) psi(static_cast<Eigen::Index>(u)) -= (delta(u) - mean_c) / nC;
      } else {
        const auto p = static_cast<Eigen::Index>(cov.size() + 1);
        auto z_of = [&](std::size_t u) {
          Eigen::VectorXd z(p);
          z(0) = 1.0;
          for (std::size_t k = 0; k < cov.size(); ++k) {
            z(static_cast<Eigen::Index>(k) + 1) = panel.covariate(cov[k], u, base);
          }
          return z;
        };
        Eigen::MatrixXd Z(static_cast<Eigen::Index>(control.size()), p);
        Eigen::VectorXd dC(static_cast<Eigen::Index>(control.size()));
        for (std::size_t i = 0; i < control.size(); ++i) {
          Z.row(static_cast<Eigen::Index>(i)) = z_of(control[i]).transpose();
          dC(static_cast<Eigen::Index>(i)) = delta(control[i]);
        }
        Eigen::MatrixXd ZtZ = Z.transpose() * Z;
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(ZtZ);
        Eigen::VectorXd beta = cod.solve(Z.transpose() * dC);
        Eigen::VectorXd z_bar = Eigen::VectorXd::Zero(p);
        for (std::size_t u : treated) z_bar += z_of(u);
        z_bar /= nG;
        for (std::size_t u : treated) att += delta(u) - z_of(u).dot(beta);
        att /= nG;
        for (std::size_t u : treated) {
          psi(static_cast<Eigen::Index>(u)) += (delta(u) - z_of(u).dot(beta) - att) / nG;
        }
        Eigen::VectorXd lever = cod.solve(z_bar);
        for (std::size_t i = 0; i < control.size(); ++i) {
          const std::size_t u = control[i];
          const double resid = dC(static_cast<Eigen::Index>(i)) - Z.row(static_cast<Eigen::Index>(i)).dot(beta);
          psi(static_cast<Eigen::Index>(u)) -= lever.dot(z_of(u)) * resid;
        }
      }

      GroupTimeCell cell;
      cell.cohort = g;
      cell.time = t;
      cell.treated_units = treated.size();
      cell.comparison_units = control.size();
      cell.effect.estimate = att;
      out.cells.push_back(cell);
      influence.push_back(std::move(psi));
    }
  }
  if (out.cells.empty()) {
    fail(ErrorCode::kNoControl, "no (cohort, time) cell has both treated and comparison units");
  }
  for (const auto& [g, t] : out.empty_comparison) {
    out.warnings.push_back("EMPTY_COMPARISON: cell (" + std::to_string(panel.time_label(g)) + ", " +
                           std::to_string(panel.time_label(t)) + ") omitted");
  }

  // Multiplier bootstrap: deviation of every cell for every draw.
  const std::size_t C = out.cells.size();
  const std::size_t B = options.bootstrap_draws;
  out.bootstrap_draws = B;
  Eigen::MatrixXd Psi(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(C));
  for (std::size_t c = 0; c < C; ++c) Psi.col(static_cast<Eigen::Index>(c)) = influence[c];
  Eigen::MatrixXd deviations(static_cast<Eigen::Index>(B), static_cast<Eigen::Index>(C));
  Eigen::VectorXd xi(static_cast<Eigen::Index>(N));
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t u = 0; u < N; ++u) xi(static_cast<Eigen::Index>(u)) = rng::rademacher(options.seed, b, u);
    deviations.row(static_cast<Eigen::Index>(b)) = xi.transpose() * Psi;
  }

  auto finish = [&](std::vector<std::pair<std::size_t, double>> weights) {
    Aggregation agg;
    double estimate = 0.0;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(C));
    for (const auto& [c, wt] : weights) {
      estimate += wt * out.cells[c].effect.estimate;
      w(static_cast<Eigen::Index>(c)) += wt;
    }
    const double se = B > 1 ? sample_sd(deviations * w) : 0.0;
    agg.effect = summarize(estimate, se, options.ci_level);
    agg.weights = std::move(weights);
    return agg;
  };

  for (std::size_t c = 0; c < C; ++c) {
    const double se = B > 1 ? sample_sd(deviations.col(static_cast<Eigen::Index>(c))) : 0.0;
    out.cells[c].effect = summarize(out.cells[c].effect.estimate, se, options.ci_level);
  }

  std::map<int, std::vector<std::size_t>> cells_of_cohort;
  std::map<int, std::vector<std::size_t>> cells_of_event;
  for (std::size_t c = 0; c < C; ++c) {
    cells_of_cohort[out.cells[c].cohort].push_back(c);
    cells_of_event[out.cells[c].time - out.cells[c].cohort].push_back(c);
  }

  double total_units = 0.0;
  for (const auto& [g, cells] : cells_of_cohort) {
    total_units += static_cast<double>(schedule.cohorts.at(g).size());
  }
  std::vector<std::pair<std::size_t, double>> overall;
  for (const auto& [g, cells] : cells_of_cohort) {
    std::vector<std::pair<std::size_t, double>> w;
    const double share = static_cast<double>(schedule.cohorts.at(g).size()) / total_units;
    for (std::size_t c : cells) {
      w.emplace_back(c, 1.0 / static_cast<double>(cells.size()));
      overall.emplace_back(c, share / static_cast<double>(cells.size()));
    }
    out.by_cohort.emplace(g, finish(std::move(w)));
  }
  out.overall = finish(std::move(overall));

  for (const auto& [e, cells] : cells_of_event) {
    double mass = 0.0;
    for (std::size_t c : cells) mass += static_cast<double>(schedule.cohorts.at(out.cells[c].cohort).size());
    std::vector<std::pair<std::size_t, double>> w;
    for (std::size_t c : cells) {
      w.emplace_back(c, static_cast<double>(schedule.cohorts.at(out.cells[c].cohort).size()) / mass);
    }
    out.by_event_time.emplace(e, finish(std::move(w)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Imputation

namespace {

struct ImputationCore {
  std::vector<UnitTimeEffect> effects;
  std::vector<int> dropped_periods;
  linreg::FitResult fit;
  std::vector<double> unit_effects;
  std::vector<double> time_effects;
  double att = 0.0;
};

ImputationCore impute(const PanelDataset& panel, const std::vector<Row>& rows,
                      std::span<const std::string> covariates, const std::vector<std::size_t>& cov,
                      const std::optional<std::size_t>& weight_idx) {
  const std::size_t N = panel.unit_count();
  const int T = static_cast<int>(panel.time_count());
  std::vector<Row> untreated;
  std::vector<Row> treated;
  for (const auto& r : rows) (panel.policy(r.unit, r.time) ? treated : untreated).push_back(r);
  if (treated.empty()) fail(ErrorCode::kNoTreated, "no treated cells to impute");

  std::vector<int> unit_rows(N, 0);
  std::vector<int> time_rows(static_cast<std::size_t>(T), 0);
  for (const auto& r : untreated) {
    ++unit_rows[r.unit];
    ++time_rows[static_cast<std::size_t>(r.time)];
  }
  for (const auto& r : treated) {
    if (unit_rows[r.unit] == 0) {
      fail(ErrorCode::kUnidentifiedUnitFe,
           "treated unit '" + panel.units()[r.unit] + "' has no untreated rows");
    }
  }

  ImputationCore core;
  Eigen::VectorXd y = detail::outcome_vector(panel, untreated);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cov.size()));
  if (!cov.empty()) {
    std::vector<NamedColumn> columns = covariate_columns(panel, untreated, covariates, cov);
    core.fit = twfe_regression(untreated, y, columns, nullptr);
    for (std::size_t k = 0; k < cov.size(); ++k) {
      const std::string name(covariates[k]);
      if (core.fit.has(name)) beta(static_cast<Eigen::Index>(k)) = core.fit.coef(name);
    }
  }
  auto xb = [&](const Row& r) {
    double s = 0.0;
    for (std::size_t k = 0; k < cov.size(); ++k) {
      s += beta(static_cast<Eigen::Index>(k)) * panel.covariate(cov[k], r.unit, r.time);
    }
    return s;
  };

  // Normal equations for unit and time effects on y - X beta; the first
  // identified period is the reference level.
  std::vector<int> unit_slot(N, -1);
  std::vector<int> time_slot(static_cast<std::size_t>(T), -1);
  int p = 0;
  for (std::size_t u = 0; u < N; ++u) {
    if (unit_rows[u] > 0) unit_slot[u] = p++;
  }
  bool reference = true;
  for (int t = 0; t < T; ++t) {
    if (time_rows[static_cast<std::size_t>(t)] == 0) continue;
    if (reference) {
      reference = false;
      continue;
    }
    time_slot[static_cast<std::size_t>(t)] = p++;
  }
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(p);
  for (const auto& r : untreated) {
    const double resid = panel.outcome(r.unit, r.time) - xb(r);
    const int a = unit_slot[r.unit];
    const int b = time_slot[static_cast<std::size_t>(r.time)];
    A(a, a) += 1.0;
    rhs(a) += resid;
    if (b >= 0) {
      A(b, b) += 1.0;
      A(a, b) += 1.0;
      A(b, a) += 1.0;
      rhs(b) += resid;
    }
  }
  Eigen::VectorXd sol = A.ldlt().solve(rhs);
  if (!sol.allFinite() || (A * sol - rhs).norm() > 1e-8 * std::max(1.0, rhs.norm())) {
    sol = A.completeOrthogonalDecomposition().solve(rhs);
  }
  core.unit_effects.assign(N, std::nan(""));
  core.time_effects.assign(static_cast<std::size_t>(T), std::nan(""));
  for (std::size_t u = 0; u < N; ++u) {
    if (unit_slot[u] >= 0) core.unit_effects[u] = sol(unit_slot[u]);
  }
  for (int t = 0; t < T; ++t) {
    if (time_rows[static_cast<std::size_t>(t)] == 0) continue;
    const int b = time_slot[static_cast<std::size_t>(t)];
    core.time_effects[static_cast<std::size_t>(t)] = b >= 0 ? sol(b) : 0.0;
  }

  Eigen::VectorXd resid(static_cast<Eigen::Index>(untreated.size()));
  for (std::size_t i = 0; i < untreated.size(); ++i) {
    const auto& r = untreated[i];
    resid(static_cast<Eigen::Index>(i)) = panel.outcome(r.unit, r.time) - xb(r) -
                                          core.unit_effects[r.unit] -
                                          core.time_effects[static_cast<std::size_t>(r.time)];
  }
  core.fit.residuals = resid;
  core.fit.fitted = y - resid;
  core.fit.n = untreated.size();
  core.fit.rank = static_cast<std::size_t>(p) + cov.size();

  std::set<int> dropped;
  double num = 0.0;
  double den = 0.0;
  for (const auto& r : treated) {
    if (time_rows[static_cast<std::size_t>(r.time)] == 0) {
      dropped.insert(r.time);
      continue;
    }
    const double y_hat =
        core.unit_effects[r.unit] + core.time_effects[static_cast<std::size_t>(r.time)] + xb(r);
    UnitTimeEffect e;
    e.unit = r.unit;
    e.time = r.time;
    e.effect = panel.outcome(r.unit, r.time) - y_hat;
    e.weight = weight_idx ? panel.covariate(*weight_idx, r.unit, r.time) : 1.0;
    if (!(e.weight > 0.0)) {
      fail(ErrorCode::kInvalidConfig, "weight for unit '" + panel.units()[r.unit] + "' is not positive");
    }
    num += e.weight * e.effect;
    den += e.weight;
    core.effects.push_back(e);
  }
  if (core.effects.empty()) fail(ErrorCode::kNoTreated, "every treated cell lies in an unidentified period");
  core.dropped_periods.assign(dropped.begin(), dropped.end());
  core.att = num / den;
  return core;
}

}  // namespace

ImputationEstimate fit_imputation_did(const PanelDataset& panel, const AdoptionSchedule& schedule,
                                      std::span<const std::string> covariates,
                                      const ImputationOptions& options) {
  if (schedule.cohorts.empty()) fail(ErrorCode::kNoTreated, "panel has no treated units");
  const auto cov = panel.resolve_covariates(covariates);
  std::vector<std::size_t> needed = cov;
  std::optional<std::size_t> weight_idx;
  if (options.weight_column) {
    auto k = panel.covariate_index(*options.weight_column);
    if (!k) fail(ErrorCode::kConfigError, "unknown weight column '" + *options.weight_column + "'");
    weight_idx = *k;
    needed.push_back(*k);
  }
  const auto rows = detail::complete_rows(panel, needed);
  auto core = impute(panel, rows, covariates, cov, weight_idx);

  ImputationEstimate est;
  est.unit_time_effects = core.effects;
  est.untreated_fit = core.fit;
  est.unit_effects = core.unit_effects;
  est.time_effects = core.time_effects;
  est.dropped_periods = core.dropped_periods;
  for (int t : est.dropped_periods) {
    est.warnings.push_back("UNIDENTIFIED_TIME_FE: no untreated rows at " +
                           std::to_string(panel.time_label(t)) + "; its treated cells are dropped");
  }

  std::map<int, std::pair<double, double>> by_event;
  std::map<int, std::pair<double, double>> by_cohort;
  for (const auto& e : est.unit_time_effects) {
    const int g = schedule.adoption_time[e.unit];
    by_event[e.time - g].first += e.weight * e.effect;
    by_event[e.time - g].second += e.weight;
    by_cohort[g].first += e.weight * e.effect;
    by_cohort[g].second += e.weight;
  }
  for (const auto& [k, v] : by_event) est.by_event_time[k] = v.first / v.second;
  for (const auto& [g, v] : by_cohort) est.by_cohort[g] = v.first / v.second;

  double se = std::nan("");
  if (options.jackknife) {
    std::vector<double> folds;
    std::set<std::size_t> units;
    for (const auto& r : rows) units.insert(r.unit);
    for (std::size_t left_out : units) {
      std::vector<Row> kept;
      for (const auto& r : rows) {
        if (r.unit != left_out) kept.push_back(r);
      }
      try {
        folds.push_back(impute(panel, kept, covariates, cov, weight_idx).att);
      } catch (const Error& e) {
        est.warnings.push_back("jackknife fold without '" + panel.units()[left_out] +
                               "' skipped: " + e.what());
      }
    }
    est.jackknife_folds = folds.size();
    if (folds.size() >= 2) {
      const double F = static_cast<double>(folds.size());
      const double mean = std::accumulate(folds.begin(), folds.end(), 0.0) / F;
      double ss = 0.0;
      for (double f : folds) ss += (f - mean) * (f - mean);
      se = std::sqrt((F - 1.0) / F * ss);
    }
  }
  est.att = summarize(core.att, se, options.ci_level);
  return est;
}

}  // namespace panelcause::did
