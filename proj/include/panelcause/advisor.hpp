#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "panelcause/panel.hpp"

namespace panelcause::advisor {

enum class MethodId {
  kIts,
  kItsMultiBaseline,
  kScm,
  kAscm,
  kDidTwfe,
  kEventStudy,
  kCits,
  kGroupTimeDid,
  kImputationDid,
  kDebiasedAr,
  kStaggeredAscm,
};

inline constexpr std::array<MethodId, 11> kAllMethods{
    MethodId::kIts,          MethodId::kItsMultiBaseline, MethodId::kScm,
    MethodId::kAscm,         MethodId::kDidTwfe,          MethodId::kEventStudy,
    MethodId::kCits,         MethodId::kGroupTimeDid,     MethodId::kImputationDid,
    MethodId::kDebiasedAr,   MethodId::kStaggeredAscm,
};

std::string_view to_string(MethodId id);
/// Accepts the canonical id (GROUP_TIME_DID) or a short alias (gt, did, its, ...).
std::optional<MethodId> parse_method(std::string_view text);

struct DesignFeatures {
  std::size_t n_treated = 0;
  std::size_t n_control = 0;  // never-treated units
  TimingClass timing_class = TimingClass::kNoTreated;
  std::map<TimeLabel, std::size_t> cohort_sizes;
  std::size_t pre_periods_min = 0;
  std::size_t post_periods_min = 0;
  bool has_missing = false;
  std::size_t singleton_cohorts = 0;
};

DesignFeatures derive_features(const PanelDataset& panel, const AdoptionSchedule& schedule);

struct AdvisorConfig {
  std::size_t min_pre_periods = 2;
  std::size_t min_post_periods = 1;
};

struct MethodAdvice {
  MethodId id = MethodId::kIts;
  bool viable = false;
  std::vector<std::string> reasons;
  std::vector<std::string> assumptions;
  bool heterogeneity_by_time = false;
  bool heterogeneity_by_cohort = false;
  std::string heterogeneity_note;
  std::string data_considerations;
  std::vector<std::string> cautions;
};

struct MethodRecommendation {
  std::vector<MethodAdvice> methods;  // every method, in kAllMethods order
  std::string setting;                // design setting the features fall in

  std::vector<MethodId> viable() const;
  const MethodAdvice& advice(MethodId id) const;
};

/// Rule table over the design setting: number of treated units, adoption
/// timing and presence of never-treated units. Errors: NO_TREATED_UNITS.
MethodRecommendation recommend(const DesignFeatures& features, const AdvisorConfig& config = {});

}  // namespace panelcause::advisor
