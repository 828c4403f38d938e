#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "panelcause/advisor.hpp"
#include "panelcause/panel.hpp"

namespace panelcause::sim {

struct CohortPlan {
  int adoption = 0;  // period index 0..n_periods-1
  std::size_t size = 0;
};

enum class EffectKind { kConstant, kDynamic, kCohort };

/// Effect of the policy on a treated cell of cohort g at event time k >= 0.
struct EffectSpec {
  EffectKind kind = EffectKind::kConstant;
  double delta = 0.0;
  double slope = 0.0;                   // dynamic: delta + slope * k
  std::map<int, double> by_event_time;  // dynamic override; last entry carries forward
  std::map<int, double> by_cohort;      // cohort: keyed by adoption period

  double effect(int g, int k) const;
};

enum class Confounding { kNone, kIntercept, kTrend };

struct DgpConfig {
  std::string name = "dgp";
  std::size_t n_units = 50;
  std::size_t n_periods = 10;
  std::vector<CohortPlan> cohorts;
  EffectSpec effect;
  double unit_intercept_sd = 1.0;
  double unit_trend_sd = 0.0;
  double trend_linear = 0.0;
  double trend_quadratic = 0.0;
  double time_shock_sd = 0.0;
  double ar_coef = 0.0;
  double noise_sd = 1.0;
  Confounding confounding = Confounding::kNone;
  double confounding_strength = 0.0;
  std::uint64_t seed = 1;

  /// Throws INVALID_CONFIG on inconsistent fields.
  void validate() const;
  /// True when every treated cell has zero effect.
  bool is_null() const;
};

DgpConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const DgpConfig& config);

/// Known estimands of one simulated panel.
struct Truth {
  double overall = 0.0;          // mean over treated cells
  double cohort_weighted = 0.0;  // cohort-size-weighted mean of per-cohort means
  double first_period = 0.0;     // cohort-size-weighted effect at event time 0
  std::map<int, double> by_event_time;
  std::map<int, double> by_cohort;
};

struct SimulatedPanel {
  PanelDataset panel;
  Truth truth;
  std::vector<double> untreated;  // Y0, unit-major
};

/// Additive unit and time structure with an AR(1) disturbance. A pure function
/// of (config.seed, rep).
SimulatedPanel simulate_panel(const DgpConfig& config, std::size_t rep);

/// Scalar estimate of one method on one panel.
struct MethodOutcome {
  double estimate = 0.0;
  double se = 0.0;  // NaN when the method has no standard error
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  double p_value = 1.0;
};

struct RunOptions {
  double ci_level = 0.95;
  std::uint64_t seed = 1;
  std::size_t bootstrap_draws = 999;
};

/// Runs `method` with its default options and reduces it to one number: the
/// overall ATT, or the level change for ITS-type methods.
MethodOutcome run_method(const PanelDataset& panel, advisor::MethodId method, const RunOptions& options);

/// The truth component a method is scored against.
double truth_for(advisor::MethodId method, const Truth& truth);

struct EvalOptions {
  std::size_t threads = 0;  // 0: PANELCAUSE_THREADS or hardware concurrency
  bool check_viability = true;
  double ci_level = 0.95;
  std::size_t bootstrap_draws = 999;
};

struct ReplicationRecord {
  std::string config;
  advisor::MethodId method = advisor::MethodId::kDidTwfe;
  std::size_t rep = 0;
  bool ok = false;
  std::string error;
  MethodOutcome outcome;
  double truth = 0.0;
  double seconds = 0.0;
};

struct MethodMetrics {
  std::string config;
  advisor::MethodId method = advisor::MethodId::kDidTwfe;
  bool null_config = false;
  std::size_t reps = 0;
  std::size_t failures = 0;
  double mean_estimate = 0.0;
  double mean_truth = 0.0;
  double bias = 0.0;
  double sd = 0.0;
  double rmse = 0.0;
  double mean_se = 0.0;
  double coverage = 0.0;  // NaN without standard errors
  double type_i = 0.0;    // NaN for non-null configurations
  double mean_seconds = 0.0;
};

struct Evaluation {
  std::vector<ReplicationRecord> records;  // config, method, rep order
  std::vector<MethodMetrics> metrics;
  std::vector<std::string> skipped;
};

Evaluation evaluate(const std::vector<DgpConfig>& configs, const std::vector<advisor::MethodId>& methods,
                    std::size_t reps, const EvalOptions& options = {});

/// Metrics recomputed from stored replication records.
std::vector<MethodMetrics> summarize_records(const std::vector<ReplicationRecord>& records,
                                             const std::vector<DgpConfig>& configs, double ci_level);

std::size_t thread_count(std::size_t requested);

void write_replications(std::ostream& out, const std::vector<ReplicationRecord>& records);
void write_metrics(std::ostream& out, const std::vector<MethodMetrics>& metrics);
void write_runtime(std::ostream& out, const std::vector<MethodMetrics>& metrics);

}  // namespace panelcause::sim
