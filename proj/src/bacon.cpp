#include <cmath>
#include <map>
#include <vector>

#include "panelcause/did.hpp"
#include "panelcause/error.hpp"

namespace panelcause::did {

namespace {

struct Group {
  int g = 0;
  std::vector<std::size_t> units;
  double share = 0.0;  // n_k: fraction of all units
  double dbar = 0.0;   // fraction of periods treated
};

// Mean outcome of `units` over periods [first, last).
double window_mean(const PanelDataset& panel, const std::vector<std::size_t>& units, int first,
                   int last) {
  double s = 0.0;
  for (std::size_t u : units) {
    for (int t = first; t < last; ++t) s += panel.outcome(u, t);
  }
  return s / static_cast<double>(units.size() * static_cast<std::size_t>(last - first));
}

}  // namespace

BaconDecomposition goodman_bacon_decompose(const PanelDataset& panel,
                                           std::span<const std::string> covariates) {
  if (!covariates.empty()) {
    fail(ErrorCode::kCovariatesUnsupported, "the decomposition is defined for covariate-free TWFE");
  }
  const std::size_t N = panel.unit_count();
  const int T = static_cast<int>(panel.time_count());
  for (std::size_t u = 0; u < N; ++u) {
    for (int t = 0; t < T; ++t) {
      if (!panel.observed(u, t) || !std::isfinite(panel.outcome(u, t))) {
        fail(ErrorCode::kUnbalancedInput, "unit '" + panel.units()[u] + "' lacks an outcome at " +
                                              std::to_string(panel.time_label(t)));
      }
    }
  }

  const auto schedule = derive_adoption(panel);
  std::vector<std::size_t> untreated;
  std::vector<Group> groups;
  for (std::size_t u = 0; u < N; ++u) {
    const int g = schedule.adoption_time[u];
    if (g == kNever || g == 0) untreated.push_back(u);
  }
  for (const auto& [g, members] : schedule.cohorts) {
    if (g == 0) continue;
    Group grp;
    grp.g = g;
    grp.units = members;
    grp.share = static_cast<double>(members.size()) / static_cast<double>(N);
    grp.dbar = static_cast<double>(T - g) / static_cast<double>(T);
    groups.push_back(std::move(grp));
  }
  if (groups.empty()) fail(ErrorCode::kNoVariation, "policy does not change within any unit");
  if (untreated.empty() && groups.size() < 2) {
    fail(ErrorCode::kNoControl, "a single timing group without an untreated group");
  }
  const double nU = static_cast<double>(untreated.size()) / static_cast<double>(N);

  BaconDecomposition out;
  for (const auto& k : groups) {
    if (untreated.empty()) break;
    const double est = (window_mean(panel, k.units, k.g, T) - window_mean(panel, k.units, 0, k.g)) -
                       (window_mean(panel, untreated, k.g, T) - window_mean(panel, untreated, 0, k.g));
    const double nkU = k.share / (k.share + nU);
    const double w = std::pow(k.share + nU, 2) * nkU * (1.0 - nkU) * k.dbar * (1.0 - k.dbar);
    out.comparisons.push_back({k.g, std::nullopt, BaconKind::kTreatedVsNever, est, w});
  }
  for (std::size_t a = 0; a < groups.size(); ++a) {
    for (std::size_t b = a + 1; b < groups.size(); ++b) {
      const Group& k = groups[a];  // earlier adopter
      const Group& l = groups[b];
      const double nkl = k.share / (k.share + l.share);
      const double base = nkl * (1.0 - nkl);

      const double early = (window_mean(panel, k.units, k.g, l.g) - window_mean(panel, k.units, 0, k.g)) -
                           (window_mean(panel, l.units, k.g, l.g) - window_mean(panel, l.units, 0, k.g));
      const double w_early = std::pow((k.share + l.share) * (1.0 - l.dbar), 2) * base *
                             ((k.dbar - l.dbar) / (1.0 - l.dbar)) * ((1.0 - k.dbar) / (1.0 - l.dbar));
      out.comparisons.push_back({k.g, l.g, BaconKind::kEarlyVsLate, early, w_early});

      const double late = (window_mean(panel, l.units, l.g, T) - window_mean(panel, l.units, k.g, l.g)) -
                          (window_mean(panel, k.units, l.g, T) - window_mean(panel, k.units, k.g, l.g));
      const double w_late = std::pow((k.share + l.share) * k.dbar, 2) * base * (l.dbar / k.dbar) *
                            ((k.dbar - l.dbar) / k.dbar);
      out.comparisons.push_back({l.g, k.g, BaconKind::kLateVsEarly, late, w_late});
    }
  }
  double total = 0.0;
  for (const auto& c : out.comparisons) total += c.weight;
  for (auto& c : out.comparisons) {
    c.weight /= total;
    out.weighted_sum += c.weight * c.estimate;
  }

  // Direct TWFE slope from the exact within transformation of a balanced panel.
  std::vector<double> unit_mean(N, 0.0);
  std::vector<double> time_mean(static_cast<std::size_t>(T), 0.0);
  double grand = 0.0;
  for (std::size_t u = 0; u < N; ++u) {
    for (int t = 0; t < T; ++t) {
      const double d = panel.policy(u, t);
      unit_mean[u] += d / T;
      time_mean[static_cast<std::size_t>(t)] += d / static_cast<double>(N);
      grand += d / static_cast<double>(N * static_cast<std::size_t>(T));
    }
  }
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t u = 0; u < N; ++u) {
    for (int t = 0; t < T; ++t) {
      const double d = panel.policy(u, t) - unit_mean[u] - time_mean[static_cast<std::size_t>(t)] + grand;
      sxy += d * panel.outcome(u, t);
      sxx += d * d;
    }
  }
  out.twfe_estimate = sxy / sxx;
  return out;
}

}  // namespace panelcause::did
