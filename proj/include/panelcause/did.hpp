#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "panelcause/inference.hpp"
#include "panelcause/linreg.hpp"
#include "panelcause/panel.hpp"

namespace panelcause::did {

struct DidOptions {
  double ci_level = 0.95;
};

struct DidEstimate {
  EffectSummary att;
  linreg::FitResult fit;
  std::string estimand_label = "ATT under parallel trends";
  std::vector<std::string> warnings;
};

/// Two-way fixed effects DID: outcome on policy_it (+ covariates) with unit
/// and time effects absorbed; unit-clustered CR1 standard errors.
/// Errors: NO_TREATED, NO_CONTROL, NO_VARIATION.
DidEstimate fit_did_twfe(const PanelDataset& panel, std::span<const std::string> covariates,
                         const DidOptions& options = {});

struct EventStudyOptions {
  // nullopt: the full observed lead / lag support, no end-point binning.
  std::optional<int> leads;
  std::optional<int> lags;
  double ci_level = 0.95;
};

struct EventTimeCoefficient {
  int event_time = 0;
  std::string label;  // "-3", "0", or a terminal bin "<=-4" / ">=5"
  bool binned = false;
  std::size_t support = 0;  // treated cells in this indicator
  EffectSummary effect;
};

struct EventStudyEstimate {
  std::vector<EventTimeCoefficient> coefficients;  // ascending event time
  int reference_period = -1;
  std::optional<double> pretrend_statistic;  // Wald over the leads
  std::optional<double> pretrend_p_value;
  std::size_t pretrend_df = 0;
  std::vector<int> unsupported_event_times;  // requested but without treated cells
  std::vector<int> dropped_event_times;      // COLLINEAR_EVENT_TIME
  linreg::FitResult fit;
  std::vector<std::string> warnings;
};

/// Event-time indicators relative to each treated unit's adoption, zero for
/// never-treated units, k = -1 omitted, unit and time effects absorbed.
EventStudyEstimate fit_event_study(const PanelDataset& panel,
                                   std::span<const std::string> covariates,
                                   const EventStudyOptions& options = {});

enum class ComparisonGroup { kNeverTreated, kNotYetTreated };

std::string_view to_string(ComparisonGroup group);

struct GroupTimeOptions {
  ComparisonGroup comparison = ComparisonGroup::kNeverTreated;
  std::size_t bootstrap_draws = 999;
  std::uint64_t seed = 20240501;
  double ci_level = 0.95;
};

struct GroupTimeCell {
  int cohort = 0;
  int time = 0;
  std::size_t treated_units = 0;
  std::size_t comparison_units = 0;
  EffectSummary effect;
};

/// A weighted combination of cells; `weights` pairs cell index and weight.
struct Aggregation {
  EffectSummary effect;
  std::vector<std::pair<std::size_t, double>> weights;
};

struct GroupTimeAtts {
  std::vector<GroupTimeCell> cells;
  ComparisonGroup comparison = ComparisonGroup::kNeverTreated;
  Aggregation overall;
  std::map<int, Aggregation> by_event_time;
  std::map<int, Aggregation> by_cohort;
  std::vector<std::pair<int, int>> empty_comparison;  // EMPTY_COMPARISON (g, t)
  std::vector<std::string> warnings;
  std::size_t bootstrap_draws = 0;
};

/// att(g, t) = [Y_g(t) - Y_g(g-1)] - [Y_C(t) - Y_C(g-1)] for t >= g, with
/// covariates entering through a regression of the comparison units' change
/// on base-period covariates. Overall = cohort-size-weighted mean of per-cohort
/// means; by event time = cohort-size-weighted over cohorts observed at g+e;
/// by cohort = mean of that cohort's cells. SEs by Rademacher multiplier
/// bootstrap over units from the estimates' influence functions.
GroupTimeAtts fit_group_time_att(const PanelDataset& panel, const AdoptionSchedule& schedule,
                                 std::span<const std::string> covariates,
                                 const GroupTimeOptions& options = {});

struct ImputationOptions {
  double ci_level = 0.95;
  // covariate column supplying cell weights (e.g. population); equal if unset
  std::optional<std::string> weight_column;
  bool jackknife = true;
};

struct UnitTimeEffect {
  std::size_t unit = 0;
  int time = 0;
  double effect = 0.0;  // Y_obs - Y_hat
  double weight = 1.0;
};

struct ImputationEstimate {
  std::vector<UnitTimeEffect> unit_time_effects;
  EffectSummary att;
  std::map<int, double> by_event_time;
  std::map<int, double> by_cohort;
  linreg::FitResult untreated_fit;  // covariate slopes and untreated-row residuals
  std::vector<double> unit_effects;  // per unit index, NaN if not estimated
  std::vector<double> time_effects;  // per period, NaN if not identified
  std::vector<int> dropped_periods;   // UNIDENTIFIED_TIME_FE
  std::size_t jackknife_folds = 0;
  std::vector<std::string> warnings;
};

/// Fits unit + time effects (+ covariates) on untreated rows, imputes the
/// untreated outcome of every treated cell, and averages Y - Y_hat.
/// SE by leave-one-unit-out jackknife. Errors: NO_TREATED, UNIDENTIFIED_UNIT_FE.
ImputationEstimate fit_imputation_did(const PanelDataset& panel, const AdoptionSchedule& schedule,
                                      std::span<const std::string> covariates,
                                      const ImputationOptions& options = {});

enum class BaconKind { kTreatedVsNever, kEarlyVsLate, kLateVsEarly };

std::string_view to_string(BaconKind kind);

struct BaconComparison {
  int treated_cohort = 0;
  std::optional<int> control_cohort;  // nullopt: the untreated group
  BaconKind kind = BaconKind::kTreatedVsNever;
  double estimate = 0.0;
  double weight = 0.0;
};

struct BaconDecomposition {
  std::vector<BaconComparison> comparisons;
  double weighted_sum = 0.0;
  double twfe_estimate = 0.0;  // computed directly, for the identity check
};

/// Decomposes the TWFE coefficient on a balanced, covariate-free panel into
/// all timing-group 2x2 comparisons. Units whose policy never changes inside
/// the window (never- or always-treated) form the untreated group.
/// Errors: UNBALANCED_INPUT, COVARIATES_UNSUPPORTED, NO_VARIATION, NO_CONTROL.
BaconDecomposition goodman_bacon_decompose(const PanelDataset& panel,
                                           std::span<const std::string> covariates = {});

}  // namespace panelcause::did
