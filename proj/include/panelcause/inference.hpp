#pragma once

namespace panelcause {

/// Point estimate with normal-reference interval and two-sided p-value.
struct EffectSummary {
  double estimate = 0.0;
  double se = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  double p_value = 1.0;
};

EffectSummary summarize(double estimate, double se, double ci_level);

double normal_quantile(double p);
double normal_cdf(double z);
/// Upper tail of the chi-squared distribution.
double chi_squared_sf(double statistic, double df);

}  // namespace panelcause
