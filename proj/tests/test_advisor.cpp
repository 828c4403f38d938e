#include "doctest.h"

#include <algorithm>
#include <set>

#include "panelcause/advisor.hpp"
#include "support.hpp"

using namespace panelcause;
using namespace panelcause::advisor;

namespace {

std::set<MethodId> viable_set(const MethodRecommendation& r) {
  const auto v = r.viable();
  return {v.begin(), v.end()};
}

DesignFeatures single_treated(std::size_t controls) {
  DesignFeatures f;
  f.n_treated = 1;
  f.n_control = controls;
  f.timing_class = TimingClass::kSingleTreated;
  f.cohort_sizes = {{2015, 1}};
  f.pre_periods_min = 10;
  f.post_periods_min = 3;
  return f;
}

}  // namespace

TEST_CASE("case study: four viable methods") {
  const auto p = support::load_case_study();
  const auto f = derive_features(p, derive_adoption(p));
  CHECK(f.n_treated == 44);
  CHECK(f.n_control == 6);
  CHECK(f.timing_class == TimingClass::kStaggered);
  CHECK(f.singleton_cohorts == 2);
  const auto rec = recommend(f);
  CHECK(viable_set(rec) == std::set<MethodId>{MethodId::kGroupTimeDid, MethodId::kImputationDid,
                                              MethodId::kDebiasedAr, MethodId::kStaggeredAscm});
  CHECK_FALSE(rec.advice(MethodId::kGroupTimeDid).cautions.empty());
}

TEST_CASE("one treated unit, no controls: ITS only") {
  CHECK(viable_set(recommend(single_treated(0))) == std::set<MethodId>{MethodId::kIts});
}

TEST_CASE("one treated unit, ten controls") {
  const auto rec = recommend(single_treated(10));
  const auto v = viable_set(rec);
  for (auto id : {MethodId::kScm, MethodId::kAscm, MethodId::kCits, MethodId::kDidTwfe, MethodId::kEventStudy}) {
    CHECK(v.count(id) == 1);
  }
  for (auto id : {MethodId::kCits, MethodId::kDidTwfe, MethodId::kEventStudy}) {
    const auto& c = rec.advice(id).cautions;
    CHECK(std::any_of(c.begin(), c.end(), [](const std::string& s) { return s.find("cluster") != std::string::npos; }));
  }
  CHECK(v.count(MethodId::kGroupTimeDid) == 0);
}

TEST_CASE("no treated units") {
  DesignFeatures f;
  f.n_control = 5;
  CHECK(support::error_of([&] { recommend(f); }) == ErrorCode::kNoTreatedUnits);
}

TEST_CASE("rule table properties over the feature lattice") {
  std::set<MethodId> reached;
  const TimingClass timings[] = {TimingClass::kSingleTreated, TimingClass::kSimultaneous, TimingClass::kStaggered};
  for (auto timing : timings) {
    for (std::size_t controls : {0, 1, 2, 10}) {
      for (std::size_t pre : {0, 1, 2, 8}) {
        for (std::size_t post : {0, 1, 4}) {
          for (bool missing : {false, true}) {
            for (std::size_t singletons : {0, 1}) {
              DesignFeatures f;
              f.timing_class = timing;
              f.n_treated = timing == TimingClass::kSingleTreated ? 1 : timing == TimingClass::kSimultaneous ? 4 : 9;
              f.cohort_sizes = timing == TimingClass::kStaggered
                                   ? std::map<TimeLabel, std::size_t>{{3, 4 + 1 - singletons}, {5, 4}, {6, singletons ? 1 : 1}}
                                   : std::map<TimeLabel, std::size_t>{{3, f.n_treated}};
              f.n_control = controls;
              f.pre_periods_min = pre;
              f.post_periods_min = post;
              f.has_missing = missing;
              f.singleton_cohorts = singletons;
              const auto a = recommend(f);
              const auto b = recommend(f);
              CHECK(a.viable() == b.viable());
              CHECK(a.setting == b.setting);
              for (auto id : a.viable()) reached.insert(id);
              CHECK(a.methods.size() == kAllMethods.size());
              // removing every control never adds a comparison-based method
              DesignFeatures none = f;
              none.n_control = 0;
              const auto c = viable_set(recommend(none));
              for (auto id : c) {
                CHECK((id == MethodId::kIts || id == MethodId::kItsMultiBaseline));
              }
            }
          }
        }
      }
    }
  }
  CHECK(reached.size() == kAllMethods.size());
}

TEST_CASE("method names round trip") {
  for (auto id : kAllMethods) {
    CHECK(parse_method(to_string(id)) == id);
    const auto rec = recommend(single_treated(3));
    CHECK_FALSE(rec.advice(id).assumptions.empty());
  }
  CHECK(parse_method("gt") == MethodId::kGroupTimeDid);
  CHECK(parse_method("did") == MethodId::kDidTwfe);
  CHECK_FALSE(parse_method("nonsense").has_value());
}
