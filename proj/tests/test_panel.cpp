#include "doctest.h"

#include <sstream>

#include "panelcause/panel.hpp"
#include "support.hpp"

using namespace panelcause;
using support::error_of;

TEST_CASE("clean 2x3 file loads") {
  const auto p = support::load_csv("unit,time,outcome,policy\nA,2000,1,0\nA,2001,2,0\nA,2002,3,1\n"
                                   "B,2000,1,0\nB,2001,1,0\nB,2002,1,0\n");
  CHECK(p.unit_count() == 2);
  CHECK(p.time_count() == 3);
  CHECK(p.time_label(0) == 2000);
  CHECK(p.outcome(0, 2) == 3.0);
}

TEST_CASE("policy reversal names the unit") {
  try {
    support::load_csv("unit,time,outcome,policy\nA,1,1,0\nA,2,1,1\nA,3,1,0\nB,1,1,0\nB,2,1,0\nB,3,1,0\n");
    FAIL("expected POLICY_REVERSAL");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kPolicyReversal);
    CHECK(std::string(e.what()).find("'A'") != std::string::npos);
  }
}

TEST_CASE("malformed input is rejected") {
  CHECK(error_of([] { support::load_csv("unit,time,outcome,policy\n"); }) == ErrorCode::kNoRows);
  CHECK(error_of([] { support::load_csv("unit,time,outcome,policy\nA,1,1,0\nA,1,2,0\n"); }) ==
        ErrorCode::kDuplicateKey);
  CHECK(error_of([] { support::load_csv("unit,time,outcome,policy\nA,1,1,2\n"); }) ==
        ErrorCode::kNonBinaryPolicy);
  CHECK(error_of([] { support::load_csv("unit,time,outcome,policy\nA,x,1,0\n"); }) ==
        ErrorCode::kUnparseableCell);
  ColumnMapping m;
  m.outcome = "deaths";
  CHECK(error_of([&] { support::load_csv("unit,time,outcome,policy\nA,1,1,0\n", m); }) ==
        ErrorCode::kConfigError);
}

TEST_CASE("case-study adoption table") {
  const auto p = support::load_case_study();
  CHECK(p.unit_count() == 50);
  CHECK(p.time_count() == 19);
  const auto s = derive_adoption(p);
  CHECK(s.timing_class == TimingClass::kStaggered);
  std::vector<std::pair<TimeLabel, std::size_t>> sizes;
  for (const auto& [g, units] : s.cohorts) sizes.emplace_back(p.time_label(g), units.size());
  const std::vector<std::pair<TimeLabel, std::size_t>> expected{{2010, 1}, {2013, 1}, {2014, 8},
                                                                {2015, 8}, {2016, 16}, {2017, 10}};
  CHECK(sizes == expected);
  CHECK(s.never_treated.size() == 6);
  const std::vector<std::size_t> cumulative{1, 1, 1, 2, 10, 18, 34, 44};
  for (int y = 2010; y <= 2017; ++y) {
    CHECK(s.treated_at(*p.time_index(y)) == cumulative[static_cast<std::size_t>(y - 2010)]);
  }
  // every unit in exactly one group, adoption consistent with policy
  std::vector<int> seen(p.unit_count(), 0);
  for (const auto& [g, units] : s.cohorts) {
    for (auto u : units) {
      ++seen[u];
      for (int t = 0; t < static_cast<int>(p.time_count()); ++t) CHECK(p.policy(u, t) == (t >= g ? 1 : 0));
    }
  }
  for (auto u : s.never_treated) ++seen[u];
  for (int c : seen) CHECK(c == 1);
}

TEST_CASE("timing classes") {
  auto zero = [](std::size_t, int) { return 1.0; };
  const auto none = support::make_panel({kNever, kNever, kNever}, 4, zero);
  const auto s0 = derive_adoption(none);
  CHECK(s0.timing_class == TimingClass::kNoTreated);
  CHECK(s0.never_treated.size() == 3);

  const auto both = support::make_panel({5, 5}, 8, zero);
  const auto s1 = derive_adoption(both);
  CHECK(s1.timing_class == TimingClass::kSimultaneous);
  REQUIRE(s1.cohorts.size() == 1);
  CHECK(s1.cohorts.begin()->first == 5);

  CHECK(derive_adoption(support::make_panel({3, kNever}, 6, zero)).timing_class == TimingClass::kSingleTreated);
  CHECK(derive_adoption(support::make_panel({3, 4, kNever}, 6, zero)).timing_class == TimingClass::kStaggered);
}

TEST_CASE("balance_panel") {
  auto y = [](std::size_t u, int t) { return static_cast<double>(u) + 0.1 * t; };
  const auto full = support::make_panel({3, kNever}, 6, y);
  const auto [same, report] = balance_panel(full, BalanceMode::kBalanced);
  CHECK(report.is_balanced);
  CHECK(same.unit_count() == full.unit_count());
  CHECK(same.time_count() == full.time_count());
  for (std::size_t u = 0; u < 2; ++u) {
    for (int t = 0; t < 6; ++t) CHECK(same.outcome(u, t) == full.outcome(u, t));
  }

  std::ostringstream csv;
  csv << "unit,time,outcome,policy\n";
  for (int t = 2000; t <= 2010; ++t) csv << "A," << t << ",1," << (t >= 2007 ? 1 : 0) << "\n";
  for (int t = 2005; t <= 2015; ++t) csv << "B," << t << ",2,0\n";
  const auto ragged = support::load_csv(csv.str());
  const auto [window, wreport] = balance_panel(ragged, BalanceMode::kBalanced);
  CHECK(window.time_labels().front() == 2005);
  CHECK(window.time_labels().back() == 2010);
  CHECK(wreport.window_first == 2005);
  CHECK(wreport.window_last == 2010);
  CHECK(wreport.is_balanced);

  const auto [kept, ureport] = balance_panel(ragged, BalanceMode::kUnbalanced);
  CHECK_FALSE(ureport.is_balanced);
  CHECK(kept.time_count() == 16);
  REQUIRE(ureport.unit_ranges.size() == 2);
  CHECK(ureport.unit_ranges[0].first == 2000);
  CHECK(ureport.unit_ranges[0].last == 2010);
  CHECK(ureport.unit_ranges[1].first == 2005);
  CHECK(ureport.unit_ranges[1].last == 2015);
}

TEST_CASE("missing cells are counted, not imputed") {
  const auto p = support::load_csv("unit,time,outcome,policy\nA,1,1,0\nA,2,,0\nA,3,3,1\nB,1,1,0\nB,3,1,0\n");
  CHECK(p.missing_cell_count() == 2);
  CHECK(std::isnan(p.outcome(0, 1)));
  CHECK_FALSE(p.observed(1, 1));
}

TEST_CASE("write_panel round trip") {
  const auto p = support::load_case_study();
  std::ostringstream out;
  write_panel(out, p);
  std::istringstream in(out.str());
  const auto q = load_panel(in);
  CHECK(q.unit_count() == p.unit_count());
  CHECK(q.time_labels() == p.time_labels());
  CHECK(q.covariate_names() == p.covariate_names());
  for (std::size_t u = 0; u < p.unit_count(); ++u) {
    for (int t = 0; t < static_cast<int>(p.time_count()); ++t) {
      CHECK(q.outcome(u, t) == p.outcome(u, t));
      CHECK(q.policy(u, t) == p.policy(u, t));
    }
  }
}
