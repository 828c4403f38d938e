#include "doctest.h"

#include "panelcause/did.hpp"
#include "support.hpp"

using namespace panelcause;
using namespace panelcause::did;

namespace {

PanelDataset staggered(const std::vector<int>& g, int T, std::uint64_t seed, double noise,
                       const std::function<double(int, int)>& effect) {
  support::Normal z(seed);
  std::vector<double> a, b, e;
  for (std::size_t u = 0; u < g.size(); ++u) a.push_back(z());
  for (int t = 0; t < T; ++t) b.push_back(0.3 * t + z());
  for (std::size_t i = 0; i < g.size() * std::size_t(T); ++i) e.push_back(noise * z());
  return support::make_panel(g, T, [&](std::size_t u, int t) {
    const double d = g[u] != kNever && t >= g[u] ? effect(g[u], t - g[u]) : 0.0;
    return a[u] + b[std::size_t(t)] + d + e[u * std::size_t(T) + std::size_t(t)];
  });
}

}  // namespace

TEST_CASE("one cohort and never-treated") {
  const auto p = staggered({3, 3, kNever, kNever}, 6, 1, 1.0, [](int, int) { return 1.0; });
  const auto d = goodman_bacon_decompose(p);
  REQUIRE(d.comparisons.size() == 1);
  CHECK(d.comparisons[0].weight == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.comparisons[0].kind == BaconKind::kTreatedVsNever);
  CHECK(d.comparisons[0].estimate == doctest::Approx(fit_did_twfe(p, {}).att.estimate).epsilon(1e-10));
}

TEST_CASE("homogeneous effect: every comparison equals it") {
  const auto p = staggered({2, 2, 5, 5, kNever, kNever}, 8, 2, 0.0, [](int, int) { return 1.7; });
  const auto d = goodman_bacon_decompose(p);
  CHECK(d.comparisons.size() == 4);
  for (const auto& c : d.comparisons) CHECK(c.estimate == doctest::Approx(1.7).epsilon(1e-10));
  CHECK(d.weighted_sum == doctest::Approx(1.7).epsilon(1e-10));
}

TEST_CASE("growing effect: late-vs-early flips sign, identity holds") {
  const auto p = staggered({2, 2, 5, 5, kNever, kNever}, 8, 3, 0.0, [](int, int k) { return 2.0 * (k + 1); });
  const auto d = goodman_bacon_decompose(p);
  double late = 0, never = 0;
  for (const auto& c : d.comparisons) {
    if (c.kind == BaconKind::kLateVsEarly) late = c.estimate;
    if (c.kind == BaconKind::kTreatedVsNever) never = c.estimate;
  }
  CHECK(never > 0);
  CHECK(late < 0);
  CHECK(std::abs(d.weighted_sum - fit_did_twfe(p, {}).att.estimate) <= 1e-6);
  double total = 0;
  for (const auto& c : d.comparisons) {
    CHECK(c.weight >= 0);
    total += c.weight;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("always-treated units act as untreated controls") {
  const auto p = staggered({0, 0, 3, 3, 5, 5}, 7, 4, 1.0, [](int, int k) { return 1.0 + k; });
  const auto d = goodman_bacon_decompose(p);
  CHECK(std::abs(d.weighted_sum - fit_did_twfe(p, {}).att.estimate) <= 1e-6);
}

TEST_CASE("bacon errors") {
  const auto p = staggered({3, kNever}, 5, 5, 1.0, [](int, int) { return 1.0; });
  const std::vector<std::string> cov{"x"};
  CHECK(support::error_of([&] { goodman_bacon_decompose(p, cov); }) == ErrorCode::kCovariatesUnsupported);
  const auto gap = support::load_csv("unit,time,outcome,policy\nA,1,1,0\nA,2,2,1\nA,3,2,1\nB,1,1,0\nB,3,1,0\n");
  CHECK(support::error_of([&] { goodman_bacon_decompose(gap); }) == ErrorCode::kUnbalancedInput);
  const auto flat = staggered({kNever, kNever}, 4, 6, 1.0, [](int, int) { return 0.0; });
  CHECK(support::error_of([&] { goodman_bacon_decompose(flat); }) == ErrorCode::kNoVariation);
}
