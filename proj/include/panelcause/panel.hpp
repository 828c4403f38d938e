#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace panelcause {

using TimeLabel = long long;

/// Adoption period of a unit that never adopts within the observed window.
inline constexpr int kNever = std::numeric_limits<int>::max();

/// Maps CSV headers onto the canonical panel fields.
struct ColumnMapping {
  std::string unit = "unit";
  std::string time = "time";
  std::string outcome = "outcome";
  std::string policy = "policy";
  // nullopt: every additional all-numeric column becomes a covariate.
  std::optional<std::vector<std::string>> covariates;
  std::vector<std::string> excluded;
};

/// Long-format unit x time panel, immutable once built.
///
/// Units are sorted lexicographically and times are normalized to the
/// consecutive grid 0..T-1; the original labels are kept for reporting.
/// Cells absent from the source, or with an empty outcome/covariate, are
/// missing and counted, never imputed.
class PanelDataset {
 public:
  PanelDataset() = default;

  std::size_t unit_count() const { return units_.size(); }
  std::size_t time_count() const { return time_labels_.size(); }
  std::size_t covariate_count() const { return covariate_names_.size(); }
  std::size_t row_count() const;

  const std::vector<std::string>& units() const { return units_; }
  const std::vector<TimeLabel>& time_labels() const { return time_labels_; }
  const std::vector<std::string>& covariate_names() const { return covariate_names_; }
  TimeLabel time_label(int t) const { return time_labels_[static_cast<std::size_t>(t)]; }
  TimeLabel time_step() const { return time_step_; }

  std::optional<std::size_t> unit_index(std::string_view name) const;
  std::optional<std::size_t> covariate_index(std::string_view name) const;
  /// Normalized period for a label, if it lies on the grid.
  std::optional<int> time_index(TimeLabel label) const;

  /// A source row exists for (u, t).
  bool observed(std::size_t u, int t) const { return present_[cell(u, t)] != 0; }
  /// NaN when the row is absent or the outcome field was empty.
  double outcome(std::size_t u, int t) const { return outcome_[cell(u, t)]; }
  /// 0 or 1 for observed rows; 0 for absent rows.
  int policy(std::size_t u, int t) const { return policy_[cell(u, t)]; }
  double covariate(std::size_t k, std::size_t u, int t) const {
    return covariates_[k * units_.size() * time_labels_.size() + cell(u, t)];
  }

  /// Row present with finite outcome and finite values for `covariates`.
  bool complete(std::size_t u, int t, std::span<const std::size_t> covariates) const;
  /// Row present with finite outcome and every covariate finite.
  bool complete(std::size_t u, int t) const;
  /// Cells of the full unit x time grid that are not complete.
  std::size_t missing_cell_count() const;

  /// Restricts to units (kept in their original relative order).
  PanelDataset subset_units(std::span<const std::size_t> units) const;
  /// Restricts to periods first..last (inclusive) and renormalizes to 0-based.
  PanelDataset time_window(int first, int last) const;
  /// Same layout with outcomes replaced; `outcomes` is unit-major (u * T + t).
  PanelDataset with_outcomes(std::span<const double> outcomes) const;

  /// Resolves covariate names to indices; throws CONFIG_ERROR on unknown names.
  std::vector<std::size_t> resolve_covariates(std::span<const std::string> names) const;

 private:
  friend class PanelBuilder;

  std::size_t cell(std::size_t u, int t) const {
    return u * time_labels_.size() + static_cast<std::size_t>(t);
  }

  std::vector<std::string> units_;
  std::vector<TimeLabel> time_labels_;
  TimeLabel time_step_ = 1;
  std::vector<std::string> covariate_names_;
  std::vector<unsigned char> present_;
  std::vector<double> outcome_;
  std::vector<unsigned char> policy_;
  std::vector<double> covariates_;  // covariate-major blocks of unit x time
};

/// Accumulates raw records and validates them into a PanelDataset.
class PanelBuilder {
 public:
  explicit PanelBuilder(std::vector<std::string> covariate_names = {});

  /// `outcome` may be NaN (missing). `source_line` is used in error messages.
  void add(std::string unit, TimeLabel time, double outcome, double policy,
           std::vector<double> covariates = {}, std::size_t source_line = 0);

  /// Throws DUPLICATE_KEY, NON_BINARY_POLICY, POLICY_REVERSAL or NO_ROWS.
  PanelDataset build() const;

 private:
  struct Raw {
    std::string unit;
    TimeLabel time;
    double outcome;
    double policy;
    std::vector<double> covariates;
    std::size_t line;
  };
  std::vector<std::string> covariate_names_;
  std::vector<Raw> rows_;
};

PanelDataset load_panel(std::istream& in, const ColumnMapping& mapping = {});
PanelDataset load_panel_file(const std::string& path, const ColumnMapping& mapping = {});

/// Canonical CSV: unit,time,outcome,policy,<covariates>; absent rows omitted,
/// missing values written as empty fields, original time labels restored.
void write_panel(std::ostream& out, const PanelDataset& panel);

enum class TimingClass { kNoTreated, kSingleTreated, kSimultaneous, kStaggered };

std::string_view to_string(TimingClass timing);

struct AdoptionSchedule {
  std::vector<int> adoption_time;  // per unit index; kNever if never treated
  std::map<int, std::vector<std::size_t>> cohorts;
  std::vector<std::size_t> never_treated;
  TimingClass timing_class = TimingClass::kNoTreated;

  bool is_never(std::size_t unit) const { return adoption_time[unit] == kNever; }
  std::size_t treated_count() const { return adoption_time.size() - never_treated.size(); }
  /// Units with policy in effect at period t: sum of cohort sizes with g <= t.
  std::size_t treated_at(int t) const;
};

AdoptionSchedule derive_adoption(const PanelDataset& panel);

enum class BalanceMode { kBalanced, kUnbalanced };

struct UnitRange {
  std::string unit;
  TimeLabel first = 0;
  TimeLabel last = 0;
  std::size_t complete_cells = 0;
};

struct CohortPeriods {
  TimeLabel cohort = 0;
  std::size_t units = 0;
  std::size_t pre_periods = 0;
  std::size_t post_periods = 0;
};

struct BalanceReport {
  bool is_balanced = false;
  std::vector<UnitRange> unit_ranges;
  std::vector<CohortPeriods> cohort_periods;
  std::size_t missing_cell_count = 0;
  TimeLabel window_first = 0;
  TimeLabel window_last = 0;
};

BalanceReport balance_report(const PanelDataset& panel);

/// BALANCED restricts to the common window and rejects interior gaps;
/// UNBALANCED passes the panel through. The report describes the result.
std::pair<PanelDataset, BalanceReport> balance_panel(const PanelDataset& panel, BalanceMode mode);

}  // namespace panelcause
