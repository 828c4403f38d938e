#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "panelcause/inference.hpp"
#include "panelcause/linreg.hpp"
#include "panelcause/panel.hpp"

namespace panelcause::ar {

struct ArOptions {
  double tolerance = 1e-8;
  std::size_t max_iterations = 200;
  bool jackknife = false;
  double ci_level = 0.95;
};

struct DebiasedArEstimate {
  EffectSummary gamma;
  double beta_lag = 0.0;
  double intercept = 0.0;
  std::map<int, double> time_effects;  // relative to the first period used
  std::map<std::string, double> covariate_betas;
  std::size_t iterations = 0;
  bool converged = false;
  bool profile_fallback = false;  // gamma taken from the profile least-squares search
  std::vector<double> gamma_path;  // gamma^0 = 0, gamma^1, ...
  std::optional<double> jackknife_se;
  linreg::FitResult fit;  // final regression
  std::vector<std::string> warnings;
};

/// One regression of Y_it on [1, Y_{i,t-1} - gamma * policy_{i,t-1}, policy_it,
/// covariates, time dummies], clustered by unit. With gamma = 0 this is the
/// plain AR(1) model with time effects.
linreg::FitResult fit_ar_regression(const PanelDataset& panel, std::span<const std::string> covariates,
                                    double gamma);

/// Debiased autoregressive model, estimated by fixed-point iteration on gamma
/// from gamma = 0 until successive values differ by at most the tolerance.
/// When the lagged policy is zero on every used row a single regression is
/// run (iterations = 1). If the iteration does not settle, gamma minimizing
/// the profiled residual sum of squares is used instead.
/// Errors: MISSING_LAG, TOO_FEW_PERIODS, NO_CONVERGENCE.
DebiasedArEstimate fit_debiased_ar(const PanelDataset& panel, std::span<const std::string> covariates,
                                   const ArOptions& options = {});

}  // namespace panelcause::ar
