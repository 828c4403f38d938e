#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "panelcause/error.hpp"
#include "panelcause/panel.hpp"

namespace support {

using panelcause::PanelDataset;

using OutcomeFn = std::function<double(std::size_t u, int t)>;
using CovariateFn = std::function<std::vector<double>(std::size_t u, int t)>;

/// Balanced panel on periods first..first+T-1; `adoption[u]` is a period
/// index or panelcause::kNever. Units are named u00, u01, ...
PanelDataset make_panel(const std::vector<int>& adoption, int T, const OutcomeFn& y,
                        std::vector<std::string> covariate_names = {}, const CovariateFn& cov = {},
                        long long first = 0);

std::string unit_name(std::size_t u);

PanelDataset load_csv(const std::string& text, const panelcause::ColumnMapping& mapping = {});
PanelDataset load_case_study();
std::string fixture(const std::string& name);

/// Least squares through the normal equations.
Eigen::VectorXd normal_equations(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

/// CR1 sandwich computed term by term.
Eigen::MatrixXd cr1_vcov(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const std::vector<std::size_t>& cluster, std::size_t extra_k = 0);

double simplex_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& x, const Eigen::VectorXd& w);
/// Exact minimum of ||x - Xw||^2 over the simplex by enumerating supports.
double simplex_kkt_oracle(const Eigen::MatrixXd& X, const Eigen::VectorXd& x, Eigen::VectorXd* best_w);
/// Same minimum by grid search over five weights, refined to a 1e-3 lattice.
double simplex_grid_oracle(const Eigen::MatrixXd& X, const Eigen::VectorXd& x);

/// Error code thrown by `f`, or nullopt.
template <typename F>
std::optional<panelcause::ErrorCode> error_of(F&& f) {
  try {
    f();
  } catch (const panelcause::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

/// Deterministic standard normal stream.
class Normal {
 public:
  explicit Normal(std::uint64_t seed);
  double operator()();

 private:
  std::uint64_t state_;
};

}  // namespace support
