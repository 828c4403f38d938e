#include "panelcause/inference.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <limits>

namespace panelcause {

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double normal_cdf(double z) {
  return boost::math::cdf(boost::math::normal_distribution<double>(), z);
}

double chi_squared_sf(double statistic, double df) {
  if (!(statistic >= 0.0) || !(df > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<double>(df),
                                                  statistic));
}

EffectSummary summarize(double estimate, double se, double ci_level) {
  EffectSummary s;
  s.estimate = estimate;
  s.se = se;
  const double z = normal_quantile(0.5 + ci_level / 2.0);
  s.ci_lower = estimate - z * se;
  s.ci_upper = estimate + z * se;
  if (se > 0.0 && std::isfinite(se)) {
    s.p_value = 2.0 * normal_cdf(-std::fabs(estimate / se));
  } else {
    s.p_value = estimate == 0.0 ? 1.0 : 0.0;
    if (!std::isfinite(se)) s.p_value = std::numeric_limits<double>::quiet_NaN();
  }
  return s;
}

}  // namespace panelcause
