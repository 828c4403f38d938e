#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

namespace panelcause::simplex {

/// Euclidean projection onto {w : w >= 0, sum(w) = 1} (sort-based, exact).
Eigen::VectorXd project(const Eigen::VectorXd& v);

/// minimize 0.5 w'Qw - q'w + constant over a product of probability simplices;
/// consecutive blocks of `block_sizes` entries each sum to one.
struct QuadraticProgram {
  Eigen::MatrixXd Q;
  Eigen::VectorXd q;
  double constant = 0.0;
  std::vector<std::size_t> block_sizes;
};

struct SolverOptions {
  double tolerance = 1e-10;
  std::size_t max_iterations = 10000;
};

struct SolverResult {
  Eigen::VectorXd weights;
  double objective = 0.0;
  double gap = 0.0;  // Frank-Wolfe duality gap, an upper bound on f(w) - f*
  std::size_t iterations = 0;
  bool converged = false;
};

/// Accelerated projected gradient (FISTA with adaptive restart) started at
/// the uniform point, followed by an equality-constrained solve on the final
/// support. Stops when the duality gap is at most
/// tolerance * max(1, f(uniform)) or at the iteration cap.
SolverResult solve(const QuadraticProgram& program, const SolverOptions& options = {});

}  // namespace panelcause::simplex
