#include "panelcause/advisor.hpp"

#include <algorithm>
#include <cctype>

#include "panelcause/error.hpp"

namespace panelcause::advisor {

namespace {

struct Profile {
  MethodId id;
  std::string_view name;
  std::vector<std::string_view> aliases;
  std::vector<std::string> assumptions;
  bool by_time;
  bool by_cohort;
  std::string_view heterogeneity;
  std::string_view data;
};

const std::vector<Profile>& profiles() {
  static const std::vector<Profile> table{
      {MethodId::kIts, "ITS", {"its"},
       {"Ignorability", "No anticipation", "Consistency"}, true, false,
       "level and slope change; single cohort, effects homogeneous within it",
       "Number of repeated measures, policy and outcome definition"},
      {MethodId::kItsMultiBaseline, "ITS_MULTI_BASELINE", {"its-multi", "its_multi", "multiple-baseline"},
       {"Ignorability", "No anticipation", "Consistency", "No spillover effects"}, true, true,
       "per-cohort fits can be compared; cohort differences are not formally tested",
       "Number of repeated measures, policy and outcome definition; sufficient pre-period data"},
      {MethodId::kScm, "SCM", {"scm"},
       {"Ignorability", "Positivity", "No anticipation", "Consistency", "No spillover effects"}, true, false,
       "time-specific gaps for the single treated unit",
       "Number of repeated measures, policy and outcome definition"},
      {MethodId::kAscm, "ASCM", {"ascm"},
       {"Ignorability", "Positivity", "No anticipation", "Consistency", "No spillover effects"}, true, false,
       "time-specific gaps for the single treated unit",
       "Number of repeated measures, policy and outcome definition"},
      {MethodId::kDidTwfe, "DID_TWFE", {"did", "twfe"},
       {"Positivity", "No anticipation", "Consistency", "No spillover effects", "Parallel trends"}, false, false,
       "single averaged effect; use the event study for time-specific effects",
       "Policy and outcome definition"},
      {MethodId::kEventStudy, "EVENT_STUDY", {"event-study", "event_study", "es"},
       {"Ignorability", "Positivity", "No anticipation", "Consistency", "No spillover effects",
        "Parallel trends"},
       true, false, "one effect per event time relative to the period before adoption",
       "Number of repeated measures, policy and outcome definition"},
      {MethodId::kCits, "CITS", {"cits"},
       {"Positivity", "No anticipation", "Consistency", "No spillover effects"}, true, false,
       "difference in level and slope change; a single interruption",
       "Number of repeated measures, policy and outcome definition"},
      {MethodId::kGroupTimeDid, "GROUP_TIME_DID", {"gt", "group-time", "cohort-did", "cs"},
       {"Positivity", "No anticipation", "Consistency", "No spillover effects", "Parallel trends"}, true, true,
       "cohort-by-period effects aggregated by event time and by cohort",
       "Number of repeated measures, policy and outcome definition, policy treatment cohorts"},
      {MethodId::kImputationDid, "IMPUTATION_DID", {"imputation", "imputation-did", "bjs"},
       {"Positivity", "No anticipation", "Consistency", "No spillover effects", "Parallel trends"}, true, true,
       "unit-by-period effects aggregated by event time and by cohort",
       "Number of repeated measures, policy and outcome definition, policy treatment cohorts"},
      {MethodId::kDebiasedAr, "DEBIASED_AR", {"ar", "debiased-ar"},
       {"Ignorability (conditional on prior outcomes absent treatment)", "Positivity", "No anticipation",
        "Consistency", "No spillover effects"},
       false, false,
       "single policy coefficient here; dynamic and cohort interactions are not implemented",
       "Number of repeated measures, policy and outcome definition"},
      {MethodId::kStaggeredAscm, "STAGGERED_ASCM", {"staggered-ascm", "sascm"},
       {"Ignorability", "No anticipation", "Consistency", "No spillover effects"}, true, true,
       "one synthetic control per cohort with time-specific gaps",
       "Number of repeated measures, policy and outcome definition, policy treatment cohorts"},
  };
  return table;
}

const Profile& profile(MethodId id) {
  for (const auto& p : profiles()) {
    if (p.id == id) return p;
  }
  fail(ErrorCode::kInvalidConfig, "unknown method");
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

std::string_view to_string(MethodId id) { return profile(id).name; }

std::optional<MethodId> parse_method(std::string_view text) {
  const std::string key = lower(text);
  for (const auto& p : profiles()) {
    if (key == lower(p.name)) return p.id;
    for (auto a : p.aliases) {
      if (key == a) return p.id;
    }
  }
  return std::nullopt;
}

DesignFeatures derive_features(const PanelDataset& panel, const AdoptionSchedule& schedule) {
  DesignFeatures f;
  f.n_treated = schedule.treated_count();
  f.n_control = schedule.never_treated.size();
  f.timing_class = schedule.timing_class;
  const auto T = panel.time_count();
  bool first = true;
  for (const auto& [g, members] : schedule.cohorts) {
    f.cohort_sizes[panel.time_label(g)] = members.size();
    if (members.size() == 1) ++f.singleton_cohorts;
    const auto pre = static_cast<std::size_t>(g);
    const auto post = T - static_cast<std::size_t>(g);
    f.pre_periods_min = first ? pre : std::min(f.pre_periods_min, pre);
    f.post_periods_min = first ? post : std::min(f.post_periods_min, post);
    first = false;
  }
  f.has_missing = panel.missing_cell_count() > 0;
  return f;
}

std::vector<MethodId> MethodRecommendation::viable() const {
  std::vector<MethodId> out;
  for (const auto& m : methods) {
    if (m.viable) out.push_back(m.id);
  }
  return out;
}

const MethodAdvice& MethodRecommendation::advice(MethodId id) const {
  for (const auto& m : methods) {
    if (m.id == id) return m;
  }
  fail(ErrorCode::kInvalidConfig, "method missing from recommendation");
}

MethodRecommendation recommend(const DesignFeatures& f, const AdvisorConfig& config) {
  if (f.n_treated == 0 || f.timing_class == TimingClass::kNoTreated) {
    fail(ErrorCode::kNoTreatedUnits, "no unit adopts the policy; there is nothing to evaluate");
  }
  const bool staggered = f.timing_class == TimingClass::kStaggered;
  const bool single_unit = f.timing_class == TimingClass::kSingleTreated;
  const bool controls = f.n_control > 0;

  MethodRecommendation rec;
  if (!controls) {
    rec.setting = staggered ? "multiple treatment cohorts (staggered adoption), no comparison units"
                            : "single treated unit or cohort, no comparison units";
  } else if (staggered) {
    rec.setting = "multiple treatment cohorts (staggered adoption), with comparison units";
  } else if (single_unit) {
    rec.setting = "single treated unit, with comparison units";
  } else {
    rec.setting = "single treatment cohort (simultaneous adoption), with comparison units";
  }

  for (MethodId id : kAllMethods) {
    const Profile& p = profile(id);
    MethodAdvice a;
    a.id = id;
    a.assumptions = p.assumptions;
    a.heterogeneity_by_time = p.by_time;
    a.heterogeneity_by_cohort = p.by_cohort;
    a.heterogeneity_note = std::string(p.heterogeneity);
    a.data_considerations = std::string(p.data);

    auto reject = [&](std::string why) {
      a.viable = false;
      a.reasons.push_back(std::move(why));
    };
    auto accept = [&](std::string why) {
      a.viable = true;
      a.reasons.push_back(std::move(why));
    };

    switch (id) {
      case MethodId::kIts:
        if (controls) reject("comparison units are available; use a comparison-based design");
        else if (staggered) reject("several adoption cohorts; use ITS with multiple baselines");
        else accept("single treated unit or cohort without comparison units");
        break;
      case MethodId::kItsMultiBaseline:
        if (controls) reject("comparison units are available; use a comparison-based design");
        else if (!staggered) reject("requires two or more adoption cohorts");
        else accept("staggered adoption without comparison units");
        break;
      case MethodId::kScm:
      case MethodId::kAscm:
        if (!single_unit) reject("requires exactly one treated unit");
        else if (f.n_control < 2) reject("requires at least two comparison (donor) units");
        else accept("single treated unit with a donor pool of " + std::to_string(f.n_control));
        break;
      case MethodId::kDidTwfe:
      case MethodId::kEventStudy:
      case MethodId::kCits:
        if (!controls) reject("requires comparison units");
        else if (staggered) reject("staggered adoption with heterogeneous effects biases single-cohort designs");
        else accept("single adoption time with comparison units");
        if (a.viable && single_unit) {
          a.cautions.push_back("one treated unit: cluster-robust inference rests on a single treated cluster");
        }
        break;
      case MethodId::kGroupTimeDid:
      case MethodId::kImputationDid:
      case MethodId::kDebiasedAr:
      case MethodId::kStaggeredAscm:
        if (!controls) reject("requires comparison units");
        else if (!staggered) reject("designed for staggered adoption (two or more cohorts)");
        else accept("staggered adoption with comparison units");
        break;
    }

    if (a.viable) {
      if (f.pre_periods_min < config.min_pre_periods) {
        a.cautions.push_back("a cohort has fewer than " + std::to_string(config.min_pre_periods) +
                             " pre-adoption periods");
      }
      if (f.post_periods_min < config.min_post_periods) {
        a.cautions.push_back("a cohort has no post-adoption period");
      }
      if (f.has_missing) {
        a.cautions.push_back("missing cells present; consider balancing the panel");
      }
      if (f.singleton_cohorts > 0 && (id == MethodId::kGroupTimeDid || id == MethodId::kStaggeredAscm ||
                                      id == MethodId::kItsMultiBaseline)) {
        a.cautions.push_back(std::to_string(f.singleton_cohorts) +
                             " single-unit cohort(s): cohort-level estimates are imprecise");
      }
    }
    rec.methods.push_back(std::move(a));
  }
  return rec;
}

}  // namespace panelcause::advisor
