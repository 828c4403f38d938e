#include "panelcause/panel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "panelcause/csv.hpp"
#include "panelcause/error.hpp"

namespace panelcause {

namespace {

std::string location(std::size_t line) {
  return line > 0 ? "line " + std::to_string(line) : std::string("record");
}

}  // namespace

// ---------------------------------------------------------------------------
// PanelDataset

std::size_t PanelDataset::row_count() const {
  return static_cast<std::size_t>(std::count(present_.begin(), present_.end(), 1));
}

std::optional<std::size_t> PanelDataset::unit_index(std::string_view name) const {
  auto it = std::lower_bound(units_.begin(), units_.end(), name,
                             [](const std::string& a, std::string_view b) { return a < b; });
  if (it == units_.end() || *it != name) return std::nullopt;
  return static_cast<std::size_t>(it - units_.begin());
}

std::optional<std::size_t> PanelDataset::covariate_index(std::string_view name) const {
  for (std::size_t k = 0; k < covariate_names_.size(); ++k) {
    if (covariate_names_[k] == name) return k;
  }
  return std::nullopt;
}

std::optional<int> PanelDataset::time_index(TimeLabel label) const {
  if (time_labels_.empty()) return std::nullopt;
  TimeLabel offset = label - time_labels_.front();
  if (offset < 0 || offset % time_step_ != 0) return std::nullopt;
  TimeLabel t = offset / time_step_;
  if (t >= static_cast<TimeLabel>(time_labels_.size())) return std::nullopt;
  return static_cast<int>(t);
}

bool PanelDataset::complete(std::size_t u, int t, std::span<const std::size_t> covariates) const {
  std::size_t c = cell(u, t);
  if (!present_[c] || !std::isfinite(outcome_[c])) return false;
  std::size_t block = units_.size() * time_labels_.size();
  for (std::size_t k : covariates) {
    if (!std::isfinite(covariates_[k * block + c])) return false;
  }
  return true;
}

bool PanelDataset::complete(std::size_t u, int t) const {
  std::vector<std::size_t> all(covariate_names_.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return complete(u, t, all);
}

std::size_t PanelDataset::missing_cell_count() const {
  std::size_t missing = 0;
  for (std::size_t u = 0; u < unit_count(); ++u) {
    for (int t = 0; t < static_cast<int>(time_count()); ++t) {
      if (!complete(u, t)) ++missing;
    }
  }
  return missing;
}

PanelDataset PanelDataset::subset_units(std::span<const std::size_t> units) const {
  std::vector<std::size_t> keep(units.begin(), units.end());
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());

  PanelDataset out;
  out.time_labels_ = time_labels_;
  out.time_step_ = time_step_;
  out.covariate_names_ = covariate_names_;
  const std::size_t T = time_count();
  const std::size_t block = unit_count() * T;
  const std::size_t new_block = keep.size() * T;
  out.present_.resize(new_block);
  out.outcome_.resize(new_block);
  out.policy_.resize(new_block);
  out.covariates_.resize(covariate_count() * new_block);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.units_.push_back(units_[keep[i]]);
    for (std::size_t t = 0; t < T; ++t) {
      std::size_t src = keep[i] * T + t;
      std::size_t dst = i * T + t;
      out.present_[dst] = present_[src];
      out.outcome_[dst] = outcome_[src];
      out.policy_[dst] = policy_[src];
      for (std::size_t k = 0; k < covariate_count(); ++k) {
        out.covariates_[k * new_block + dst] = covariates_[k * block + src];
      }
    }
  }
  return out;
}

PanelDataset PanelDataset::time_window(int first, int last) const {
  PanelDataset out;
  out.units_ = units_;
  out.time_step_ = time_step_;
  out.covariate_names_ = covariate_names_;
  const std::size_t W = static_cast<std::size_t>(last - first + 1);
  const std::size_t T = time_count();
  const std::size_t block = unit_count() * T;
  const std::size_t new_block = unit_count() * W;
  for (int t = first; t <= last; ++t) out.time_labels_.push_back(time_label(t));
  out.present_.resize(new_block);
  out.outcome_.resize(new_block);
  out.policy_.resize(new_block);
  out.covariates_.resize(covariate_count() * new_block);
  for (std::size_t u = 0; u < unit_count(); ++u) {
    for (std::size_t w = 0; w < W; ++w) {
      std::size_t src = u * T + static_cast<std::size_t>(first) + w;
      std::size_t dst = u * W + w;
      out.present_[dst] = present_[src];
      out.outcome_[dst] = outcome_[src];
      out.policy_[dst] = policy_[src];
      for (std::size_t k = 0; k < covariate_count(); ++k) {
        out.covariates_[k * new_block + dst] = covariates_[k * block + src];
      }
    }
  }
  return out;
}

PanelDataset PanelDataset::with_outcomes(std::span<const double> outcomes) const {
  if (outcomes.size() != outcome_.size()) {
    fail(ErrorCode::kShapeMismatch, "with_outcomes: expected " + std::to_string(outcome_.size()) +
                                        " values, got " + std::to_string(outcomes.size()));
  }
  PanelDataset out = *this;
  out.outcome_.assign(outcomes.begin(), outcomes.end());
  return out;
}

std::vector<std::size_t> PanelDataset::resolve_covariates(std::span<const std::string> names) const {
  std::vector<std::size_t> out;
  for (const auto& name : names) {
    auto k = covariate_index(name);
    if (!k) fail(ErrorCode::kConfigError, "unknown covariate '" + name + "'");
    out.push_back(*k);
  }
  return out;
}

// ---------------------------------------------------------------------------
// PanelBuilder

PanelBuilder::PanelBuilder(std::vector<std::string> covariate_names)
    : covariate_names_(std::move(covariate_names)) {}

void PanelBuilder::add(std::string unit, TimeLabel time, double outcome, double policy,
                       std::vector<double> covariates, std::size_t source_line) {
  if (covariates.size() != covariate_names_.size()) {
    fail(ErrorCode::kShapeMismatch, location(source_line) + ": expected " +
                                        std::to_string(covariate_names_.size()) +
                                        " covariates, got " + std::to_string(covariates.size()));
  }
  rows_.push_back(Raw{std::move(unit), time, outcome, policy, std::move(covariates), source_line});
}

PanelDataset PanelBuilder::build() const {
  if (rows_.empty()) fail(ErrorCode::kNoRows, "panel has no data rows");

  PanelDataset panel;
  panel.covariate_names_ = covariate_names_;

  std::set<std::string> unit_set;
  std::set<TimeLabel> time_set;
  for (const auto& row : rows_) {
    unit_set.insert(row.unit);
    time_set.insert(row.time);
    if (row.policy != 0.0 && row.policy != 1.0) {
      std::ostringstream msg;
      msg << location(row.line) << ": policy for unit '" << row.unit << "' at time " << row.time
          << " is " << row.policy << ", expected 0 or 1";
      fail(ErrorCode::kNonBinaryPolicy, msg.str());
    }
  }
  panel.units_.assign(unit_set.begin(), unit_set.end());

  TimeLabel step = 0;
  TimeLabel first = *time_set.begin();
  for (TimeLabel t : time_set) step = std::gcd(step, t - first);
  if (step == 0) step = 1;
  TimeLabel last = *time_set.rbegin();
  panel.time_step_ = step;
  for (TimeLabel label = first; label <= last; label += step) panel.time_labels_.push_back(label);

  const std::size_t T = panel.time_labels_.size();
  const std::size_t block = panel.units_.size() * T;
  panel.present_.assign(block, 0);
  panel.outcome_.assign(block, std::nan(""));
  panel.policy_.assign(block, 0);
  panel.covariates_.assign(covariate_names_.size() * block, std::nan(""));

  for (const auto& row : rows_) {
    std::size_t u = *panel.unit_index(row.unit);
    int t = *panel.time_index(row.time);
    std::size_t c = panel.cell(u, t);
    if (panel.present_[c]) {
      std::ostringstream msg;
      msg << location(row.line) << ": duplicate key (unit '" << row.unit << "', time " << row.time
          << ")";
      fail(ErrorCode::kDuplicateKey, msg.str());
    }
    panel.present_[c] = 1;
    panel.outcome_[c] = row.outcome;
    panel.policy_[c] = static_cast<unsigned char>(row.policy);
    for (std::size_t k = 0; k < row.covariates.size(); ++k) {
      panel.covariates_[k * block + c] = row.covariates[k];
    }
  }

  for (std::size_t u = 0; u < panel.units_.size(); ++u) {
    bool adopted = false;
    for (std::size_t t = 0; t < T; ++t) {
      std::size_t c = u * T + t;
      if (!panel.present_[c]) continue;
      if (panel.policy_[c]) {
        adopted = true;
      } else if (adopted) {
        std::ostringstream msg;
        msg << "policy reversal for unit '" << panel.units_[u] << "': policy returns to 0 at time "
            << panel.time_labels_[t];
        fail(ErrorCode::kPolicyReversal, msg.str());
      }
    }
  }
  return panel;
}

// ---------------------------------------------------------------------------
// CSV ingestion

namespace {

std::size_t find_column(const std::vector<std::string>& header, const std::string& name,
                        const char* role) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    fail(ErrorCode::kConfigError,
         std::string("mapped ") + role + " column '" + name + "' not found in header");
  }
  return static_cast<std::size_t>(it - header.begin());
}

[[noreturn]] void unparseable(std::size_t line, const std::string& column, const std::string& text,
                              const char* expected) {
  fail(ErrorCode::kUnparseableCell, "line " + std::to_string(line) + ", column '" + column +
                                        "': cannot parse '" + text + "' as " + expected);
}

}  // namespace

PanelDataset load_panel(std::istream& in, const ColumnMapping& mapping) {
  auto records = csv::read_records(in);
  if (records.empty()) fail(ErrorCode::kNoRows, "input is empty (header row required)");
  const auto& header = records.front().fields;
  if (records.size() == 1) fail(ErrorCode::kNoRows, "input has a header but no data rows");

  const std::size_t unit_col = find_column(header, mapping.unit, "unit");
  const std::size_t time_col = find_column(header, mapping.time, "time");
  const std::size_t outcome_col = find_column(header, mapping.outcome, "outcome");
  const std::size_t policy_col = find_column(header, mapping.policy, "policy");
  for (const auto& name : mapping.excluded) find_column(header, name, "excluded");

  std::vector<std::size_t> covariate_cols;
  if (mapping.covariates) {
    for (const auto& name : *mapping.covariates) {
      covariate_cols.push_back(find_column(header, name, "covariate"));
    }
  } else {
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (j == unit_col || j == time_col || j == outcome_col || j == policy_col) continue;
      if (std::find(mapping.excluded.begin(), mapping.excluded.end(), header[j]) !=
          mapping.excluded.end()) {
        continue;
      }
      bool numeric = true;
      for (std::size_t r = 1; r < records.size() && numeric; ++r) {
        const auto& fields = records[r].fields;
        if (j >= fields.size() || csv::is_blank(fields[j])) continue;
        numeric = csv::parse_double(fields[j]).has_value();
      }
      if (numeric) covariate_cols.push_back(j);
    }
  }

  std::vector<std::string> covariate_names;
  for (std::size_t j : covariate_cols) covariate_names.push_back(header[j]);
  PanelBuilder builder(covariate_names);

  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != header.size()) {
      fail(ErrorCode::kUnparseableCell, "line " + std::to_string(rec.line) + ": expected " +
                                            std::to_string(header.size()) + " fields, found " +
                                            std::to_string(rec.fields.size()));
    }
    const std::string& unit = rec.fields[unit_col];
    if (csv::is_blank(unit)) unparseable(rec.line, header[unit_col], unit, "a unit identifier");

    auto time = csv::parse_integer(rec.fields[time_col]);
    if (!time) unparseable(rec.line, header[time_col], rec.fields[time_col], "an integer period");

    double outcome = std::nan("");
    if (!csv::is_blank(rec.fields[outcome_col])) {
      auto v = csv::parse_double(rec.fields[outcome_col]);
      if (!v || !std::isfinite(*v)) {
        unparseable(rec.line, header[outcome_col], rec.fields[outcome_col], "a finite number");
      }
      outcome = *v;
    }

    auto policy = csv::parse_double(rec.fields[policy_col]);
    if (!policy) unparseable(rec.line, header[policy_col], rec.fields[policy_col], "a number");

    std::vector<double> covariates;
    for (std::size_t j : covariate_cols) {
      if (csv::is_blank(rec.fields[j])) {
        covariates.push_back(std::nan(""));
        continue;
      }
      auto v = csv::parse_double(rec.fields[j]);
      if (!v || !std::isfinite(*v)) unparseable(rec.line, header[j], rec.fields[j], "a finite number");
      covariates.push_back(*v);
    }
    builder.add(unit, *time, outcome, *policy, std::move(covariates), rec.line);
  }
  return builder.build();
}

PanelDataset load_panel_file(const std::string& path, const ColumnMapping& mapping) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kConfigError, "cannot open data file '" + path + "'");
  try {
    return load_panel(in, mapping);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

void write_panel(std::ostream& out, const PanelDataset& panel) {
  out << "unit,time,outcome,policy";
  for (const auto& name : panel.covariate_names()) out << ',' << csv::quote_if_needed(name);
  out << '\n';
  for (std::size_t u = 0; u < panel.unit_count(); ++u) {
    for (int t = 0; t < static_cast<int>(panel.time_count()); ++t) {
      if (!panel.observed(u, t)) continue;
      out << csv::quote_if_needed(panel.units()[u]) << ',' << panel.time_label(t) << ',';
      double y = panel.outcome(u, t);
      if (std::isfinite(y)) out << csv::format_double(y);
      out << ',' << panel.policy(u, t);
      for (std::size_t k = 0; k < panel.covariate_count(); ++k) {
        out << ',';
        double x = panel.covariate(k, u, t);
        if (std::isfinite(x)) out << csv::format_double(x);
      }
      out << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Adoption

std::string_view to_string(TimingClass timing) {
  switch (timing) {
    case TimingClass::kNoTreated: return "NO_TREATED";
    case TimingClass::kSingleTreated: return "SINGLE_TREATED";
    case TimingClass::kSimultaneous: return "SIMULTANEOUS";
    case TimingClass::kStaggered: return "STAGGERED";
  }
  return "UNKNOWN";
}

std::size_t AdoptionSchedule::treated_at(int t) const {
  std::size_t n = 0;
  for (const auto& [g, members] : cohorts) {
    if (g <= t) n += members.size();
  }
  return n;
}

AdoptionSchedule derive_adoption(const PanelDataset& panel) {
  AdoptionSchedule schedule;
  schedule.adoption_time.assign(panel.unit_count(), kNever);
  for (std::size_t u = 0; u < panel.unit_count(); ++u) {
    for (int t = 0; t < static_cast<int>(panel.time_count()); ++t) {
      if (panel.observed(u, t) && panel.policy(u, t) == 1) {
        schedule.adoption_time[u] = t;
        break;
      }
    }
    if (schedule.adoption_time[u] == kNever) {
      schedule.never_treated.push_back(u);
    } else {
      schedule.cohorts[schedule.adoption_time[u]].push_back(u);
    }
  }
  if (schedule.cohorts.empty()) {
    schedule.timing_class = TimingClass::kNoTreated;
  } else if (schedule.cohorts.size() >= 2) {
    schedule.timing_class = TimingClass::kStaggered;
  } else if (schedule.cohorts.begin()->second.size() >= 2) {
    schedule.timing_class = TimingClass::kSimultaneous;
  } else {
    schedule.timing_class = TimingClass::kSingleTreated;
  }
  return schedule;
}

// ---------------------------------------------------------------------------
// Balance

BalanceReport balance_report(const PanelDataset& panel) {
  BalanceReport report;
  const int T = static_cast<int>(panel.time_count());
  report.is_balanced = true;
  for (std::size_t u = 0; u < panel.unit_count(); ++u) {
    UnitRange range{panel.units()[u], 0, 0, 0};
    bool seen = false;
    for (int t = 0; t < T; ++t) {
      if (!panel.complete(u, t)) {
        report.is_balanced = false;
        continue;
      }
      if (!seen) range.first = panel.time_label(t);
      range.last = panel.time_label(t);
      seen = true;
      ++range.complete_cells;
    }
    report.unit_ranges.push_back(range);
  }
  report.missing_cell_count = panel.missing_cell_count();
  report.window_first = panel.time_labels().front();
  report.window_last = panel.time_labels().back();

  auto schedule = derive_adoption(panel);
  for (const auto& [g, members] : schedule.cohorts) {
    report.cohort_periods.push_back(CohortPeriods{panel.time_label(g), members.size(),
                                                  static_cast<std::size_t>(g),
                                                  static_cast<std::size_t>(T - g)});
  }
  return report;
}

std::pair<PanelDataset, BalanceReport> balance_panel(const PanelDataset& panel, BalanceMode mode) {
  if (mode == BalanceMode::kUnbalanced) {
    return {panel, balance_report(panel)};
  }

  const int T = static_cast<int>(panel.time_count());
  int lo = 0;
  int hi = T - 1;
  for (std::size_t u = 0; u < panel.unit_count(); ++u) {
    int first = -1;
    int last = -1;
    for (int t = 0; t < T; ++t) {
      if (panel.complete(u, t)) {
        if (first < 0) first = t;
        last = t;
      }
    }
    if (first < 0) {
      fail(ErrorCode::kEmptyIntersection, "unit '" + panel.units()[u] + "' has no complete cells");
    }
    lo = std::max(lo, first);
    hi = std::min(hi, last);
  }
  if (lo > hi) {
    fail(ErrorCode::kEmptyIntersection, "units share no common observation window");
  }

  std::ostringstream gaps;
  std::size_t gap_count = 0;
  for (std::size_t u = 0; u < panel.unit_count(); ++u) {
    for (int t = lo; t <= hi; ++t) {
      if (panel.complete(u, t)) continue;
      if (gap_count < 10) {
        gaps << (gap_count ? ", " : "") << "(" << panel.units()[u] << ", " << panel.time_label(t)
             << ")";
      }
      ++gap_count;
    }
  }
  if (gap_count > 0) {
    fail(ErrorCode::kInteriorMissing, std::to_string(gap_count) +
                                          " missing cell(s) inside the common window: " +
                                          gaps.str() + (gap_count > 10 ? ", ..." : ""));
  }

  PanelDataset balanced = panel.time_window(lo, hi);
  return {balanced, balance_report(balanced)};
}

}  // namespace panelcause
