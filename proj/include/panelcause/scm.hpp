#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "panelcause/panel.hpp"
#include "panelcause/simplex.hpp"

namespace panelcause::scm {

struct ScmWeights {
  std::vector<std::size_t> donors;  // unit indices, aligned with `weights`
  Eigen::VectorXd weights;
  double pre_period_rmspe = 0.0;
  double objective_value = 0.0;  // ||v .* (x_treated - X_donors w)||^2
  bool negative_allowed = false;
  std::size_t iterations = 0;
  bool converged = true;
};

struct PlaceboUnit {
  std::size_t unit = 0;
  double pre_rmspe = 0.0;
  double post_rmspe = 0.0;
  double ratio = 0.0;
  bool excluded = false;
};

struct PlaceboResult {
  std::vector<PlaceboUnit> placebos;
  double treated_pre_rmspe = 0.0;
  double treated_ratio = 0.0;
  std::size_t treated_rank = 1;  // 1 + placebos with ratio >= treated
  std::size_t retained = 0;      // J
  double p_value = 1.0;
  double cutoff = 5.0;
};

struct ScmEstimate {
  std::string treated;  // unit name, or a description of an averaged series
  int adoption_time = 0;
  ScmWeights weights;
  std::map<int, double> gaps;      // t >= adoption: treated - synthetic
  std::map<int, double> pre_gaps;  // t < adoption
  double att = 0.0;                // mean of `gaps`
  std::optional<double> lambda;    // ridge penalty of the augmentation
  std::optional<PlaceboResult> placebo;
  std::vector<std::string> warnings;
};

struct ScmOptions {
  // covariates matched through their pre-period means, after the outcomes
  std::vector<std::string> match_covariates;
  // predictor importance v, one per predictor; uniform if unset
  std::optional<std::vector<double>> predictor_weights;
  // adoption period for a never-treated target (placebo use)
  std::optional<int> adoption_time;
  simplex::SolverOptions solver;
};

/// Classic synthetic control: w >= 0, sum(w) = 1, minimizing the v-weighted
/// squared distance of the pre-period predictors. Empty `donors` means every
/// never-treated unit. Errors: MISSING_CELLS, TOO_FEW_DONORS, TOO_FEW_PERIODS,
/// NO_CONVERGENCE, UNKNOWN_UNIT.
ScmEstimate fit_scm(const PanelDataset& panel, const std::string& treated,
                    std::span<const std::string> donors, const ScmOptions& options = {});

struct PlaceboOptions {
  double cutoff = 5.0;
  ScmOptions scm;
};

/// In-space placebos: each donor in turn is the pseudo-treated unit with the
/// remaining donors as its pool. Placebos whose pre-RMSPE exceeds cutoff x the
/// treated pre-RMSPE are excluded. p = (#{ratio >= treated} + 1) / (J + 1).
/// Errors: ALL_EXCLUDED plus those of fit_scm.
PlaceboResult placebo_inference(const PanelDataset& panel, const std::string& treated,
                                std::span<const std::string> donors,
                                const PlaceboOptions& options = {});

struct AscmOptions {
  // nullopt: leave-one-donor-out cross-validation over `lambda_grid`
  std::optional<double> lambda;
  // multiples of the mean eigenvalue of the centered donor Gram matrix
  std::vector<double> lambda_grid{1e-4, 1e-3, 1e-2, 1e-1, 1, 10, 100, 1e3, 1e4};
  ScmOptions scm;
};

/// Ridge-augmented SCM: w_aug = w + Xc~ (Xc~'Xc~ + lambda I)^-1 (x_treated - Xc'w)
/// on the pre-period outcomes, with Xc~ the donor-centered matrix. Weights sum
/// to one and may be negative. Same errors as fit_scm.
ScmEstimate fit_ascm(const PanelDataset& panel, const std::string& treated,
                     std::span<const std::string> donors, const AscmOptions& options = {});

/// fit_ascm with the treated series replaced by the mean of `treated_units`,
/// all of which must share one adoption period.
ScmEstimate fit_ascm_average(const PanelDataset& panel, std::span<const std::size_t> treated_units,
                             std::span<const std::size_t> donors, const AscmOptions& options = {});

struct StaggeredAscmOptions {
  std::optional<double> nu;  // nullopt: AUTO
  std::vector<double> nu_grid{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  AscmOptions ascm;
  bool jackknife = true;
  double ci_level = 0.95;
};

struct StaggeredAscmEstimate {
  double nu = 0.0;
  bool nu_auto = false;
  std::map<int, ScmEstimate> per_cohort;  // treated series = cohort mean
  std::map<int, double> cohort_weights;   // cohort-size shares
  double att = 0.0;
  double se = 0.0;
  std::size_t jackknife_folds = 0;
  double pooled_prefit = 0.0;    // RMS over event times of the cohort-mean pre gap
  double separate_prefit = 0.0;  // RMS over cohorts and event times of the pre gap
  std::vector<std::string> warnings;
};

/// Partially pooled synthetic controls for staggered adoption. Per cohort the
/// target is the cohort's mean series; pre gaps are aligned in event time and
/// the simplex weights minimize
///   nu * sum_k (mean_g gap_g(k))^2 + (1 - nu) * sum_g sum_k gap_g(k)^2,
/// followed by per-cohort ridge augmentation. Donors are never-treated units.
/// AUTO picks the smallest grid nu whose pooled pre-fit is within 10% of the
/// nu = 1 pooled pre-fit. Errors: NO_NEVER_TREATED, TOO_FEW_DONORS and
/// per-cohort errors prefixed with the cohort.
StaggeredAscmEstimate fit_staggered_ascm(const PanelDataset& panel,
                                         const AdoptionSchedule& schedule,
                                         const StaggeredAscmOptions& options = {});

}  // namespace panelcause::scm
