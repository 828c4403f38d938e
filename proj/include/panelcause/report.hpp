#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "panelcause/advisor.hpp"
#include "panelcause/panel.hpp"

namespace panelcause::report {

using nlohmann::json;

json describe(const PanelDataset& panel);
json recommendation(const advisor::DesignFeatures& features, const advisor::MethodRecommendation& rec);
json features(const PanelDataset& panel, const advisor::DesignFeatures& features);

struct FitRequest {
  advisor::MethodId method = advisor::MethodId::kDidTwfe;
  std::vector<std::string> covariates;
  std::map<std::string, std::string> options;  // method options, key=value
  double ci_level = 0.95;
  std::uint64_t seed = 20240501;
};

/// Runs the estimator and renders the estimate with its breakdowns. The
/// result has "estimand", "estimate", "by_event_time", "by_cohort",
/// "details" and "warnings". Unknown option keys raise CONFIG_ERROR.
json fit(const PanelDataset& panel, const FitRequest& request);

/// Option keys understood by a method.
std::vector<std::string> option_keys(advisor::MethodId method);

/// Flat section,key,estimate,se,ci_lower,ci_upper,p_value rendering of a fit document.
std::string fit_csv(const json& document);
std::string fit_text(const json& document);
std::string describe_text(const json& document);
std::string recommend_text(const json& document);

}  // namespace panelcause::report
