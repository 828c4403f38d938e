#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace panelcause::linreg {

inline constexpr std::string_view kIntercept = "_intercept";

struct DroppedColumn {
  std::string name;
  std::string reason;
};

/// Named regressor columns of equal length. Column order matters: when two
/// columns are collinear the later one is dropped.
class DesignMatrix {
 public:
  explicit DesignMatrix(std::size_t rows) : rows_(rows) {}

  void add_column(std::string name, Eigen::VectorXd values);
  void add_intercept() { add_column(std::string(kIntercept), Eigen::VectorXd::Ones(rows_)); }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  Eigen::MatrixXd matrix() const;
  const Eigen::VectorXd& column(std::size_t j) const { return columns_[j]; }
  std::optional<std::size_t> index(std::string_view name) const;

 private:
  std::size_t rows_;
  std::vector<std::string> names_;
  std::vector<Eigen::VectorXd> columns_;
};

/// Coefficients and unit-clustered sandwich variance of one least-squares fit.
struct FitResult {
  std::vector<std::string> names;
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd vcov;
  Eigen::VectorXd residuals;
  Eigen::VectorXd fitted;
  std::size_t n = 0;
  std::size_t rank = 0;
  std::size_t cluster_count = 0;
  std::size_t absorbed_dof = 0;
  std::vector<DroppedColumn> dropped_columns;

  std::optional<std::size_t> index(std::string_view name) const;
  bool has(std::string_view name) const { return index(name).has_value(); }
  bool dropped(std::string_view name) const;
  /// Throws CONFIG_ERROR when the column is not among the retained names.
  double coef(std::string_view name) const;
  double se(std::string_view name) const;
  /// Sub-block of vcov for the given retained names.
  Eigen::MatrixXd vcov_block(std::span<const std::string> subset) const;
};

struct OlsOptions {
  /// Levels absorbed outside the design that are not nested in the clusters;
  /// they count towards k in the (n-1)/(n-k) factor.
  std::size_t absorbed_dof = 0;
  double pivot_tolerance = 1e-10;
};

/// Indices of columns kept by the sequential rank-revealing pass, with the
/// reasons for the ones dropped (later-listed column loses).
std::vector<std::size_t> independent_columns(const DesignMatrix& X, double tolerance,
                                             std::vector<DroppedColumn>* dropped);

/// Least squares via Householder QR on the retained columns, with the CR1
/// cluster-robust sandwich: factor G/(G-1) * (n-1)/(n-k).
/// Errors: RANK_ZERO, FEWER_CLUSTERS_THAN_TWO, SHAPE_MISMATCH.
FitResult ols_fit(const DesignMatrix& X, const Eigen::VectorXd& y,
                  std::span<const std::size_t> clusters, const OlsOptions& options = {});

/// Ridge regression; the `_intercept` column is not penalized. lambda = 0
/// reduces to ordinary least squares (collinear columns are omitted).
std::map<std::string, double> ridge_fit(const DesignMatrix& X, const Eigen::VectorXd& y,
                                        double lambda);

struct FeDims {
  bool unit = true;
  bool time = true;
};

struct AbsorbOptions {
  double tolerance = 1e-10;
  std::size_t max_iterations = 100000;
};

struct AbsorbResult {
  Eigen::MatrixXd columns;
  std::vector<std::string> warnings;
  std::size_t iterations = 0;
  bool converged = true;
  std::size_t unit_levels = 0;
  std::size_t time_levels = 0;
};

/// Within transformation by alternating projections: each column is demeaned
/// by unit and by time until a sweep changes no entry by more than the
/// tolerance (relative to the column's scale). A dimension with a single
/// level is skipped with a SINGLE_LEVEL warning.
AbsorbResult absorb_fixed_effects(std::span<const std::size_t> unit_of_row,
                                  std::span<const std::size_t> time_of_row, FeDims dims,
                                  Eigen::MatrixXd columns, const AbsorbOptions& options = {});

}  // namespace panelcause::linreg
