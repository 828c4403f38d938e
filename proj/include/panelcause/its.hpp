#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "panelcause/inference.hpp"
#include "panelcause/linreg.hpp"
#include "panelcause/panel.hpp"

namespace panelcause::its {

struct ItsOptions {
  double ci_level = 0.95;
};

/// Segmented regression on the treated units:
///   y = b0 + b1 time + b2 policy + b3 time_since_policy (+ covariates, unit effects)
/// time_since_policy is t - g from the adoption period g on (0 at g), so b2
/// is the jump at the first treated period and b3 the post-period slope change.
struct ItsEstimate {
  EffectSummary level_change;  // b2
  EffectSummary slope_change;  // b3
  double baseline_intercept = 0.0;
  double baseline_slope = 0.0;
  int adoption_time = 0;
  std::vector<std::size_t> units;
  linreg::FitResult fit;
  std::vector<std::string> warnings;
};

/// Errors: NO_TREATED, STAGGERED_INPUT, TOO_FEW_PERIODS. Never-treated units
/// are ignored (ITS has no comparison group).
ItsEstimate fit_its(const PanelDataset& panel, std::span<const std::string> covariates,
                    const ItsOptions& options = {});

struct MultiBaselineItsEstimate {
  std::map<int, ItsEstimate> per_cohort;  // keyed by adoption period
  std::map<int, double> weights;          // cohort-size shares, summing to one
  EffectSummary pooled_level_change;
  EffectSummary pooled_slope_change;
};

/// One ITS per cohort on that cohort's units, pooled with cohort-size weights
/// and SE sqrt(sum w^2 se^2) (cohorts treated as independent).
MultiBaselineItsEstimate fit_its_multiple_baseline(const PanelDataset& panel,
                                                   const AdoptionSchedule& schedule,
                                                   std::span<const std::string> covariates,
                                                   const ItsOptions& options = {});

struct CitsOptions {
  double ci_level = 0.95;
  bool unit_effects = true;
};

/// Comparative ITS. Controls share the treated cohort's interruption clock.
/// `coefficients` is keyed intercept, time, policy, time_since_policy,
/// treatment, trt_x_time, trt_x_policy, trt_x_time_since_policy; a term
/// absorbed by the unit effects (treatment) is listed in `dropped`.
struct CitsEstimate {
  EffectSummary diff_level_change;  // b6
  EffectSummary diff_slope_change;  // b7
  std::map<std::string, double> coefficients;
  std::vector<std::string> dropped;
  int adoption_time = 0;
  linreg::FitResult fit;
};

/// Errors: NO_TREATED, NO_CONTROL, STAGGERED_INPUT, TOO_FEW_PERIODS.
CitsEstimate fit_cits(const PanelDataset& panel, std::span<const std::string> covariates,
                      const CitsOptions& options = {});

}  // namespace panelcause::its
