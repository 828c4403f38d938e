#include "panelcause/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "panelcause/error.hpp"

namespace panelcause::simplex {

Eigen::VectorXd project(const Eigen::VectorXd& v) {
  const Eigen::Index n = v.size();
  std::vector<double> sorted(v.data(), v.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    cumulative += sorted[static_cast<std::size_t>(k)];
    double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[static_cast<std::size_t>(k)] - candidate > 0.0) theta = candidate;
  }
  return (v.array() - theta).cwiseMax(0.0).matrix();
}

namespace {

struct Blocks {
  std::vector<Eigen::Index> offset;
  std::vector<Eigen::Index> size;
};

Eigen::VectorXd project_blocks(const Eigen::VectorXd& v, const Blocks& blocks) {
  Eigen::VectorXd out(v.size());
  for (std::size_t b = 0; b < blocks.size.size(); ++b) {
    out.segment(blocks.offset[b], blocks.size[b]) =
        project(v.segment(blocks.offset[b], blocks.size[b]));
  }
  return out;
}

double duality_gap(const Eigen::VectorXd& w, const Eigen::VectorXd& grad, const Blocks& blocks) {
  double gap = 0.0;
  for (std::size_t b = 0; b < blocks.size.size(); ++b) {
    auto g = grad.segment(blocks.offset[b], blocks.size[b]);
    gap += g.dot(w.segment(blocks.offset[b], blocks.size[b])) - g.minCoeff();
  }
  return std::max(0.0, gap);
}

double objective(const QuadraticProgram& p, const Eigen::VectorXd& w) {
  return 0.5 * w.dot(p.Q * w) - p.q.dot(w) + p.constant;
}

// Stationary point of the quadratic restricted to `support`, with one
// sum-to-one constraint per block. Returns false if it leaves the simplex.
bool polish(const QuadraticProgram& p, const Blocks& blocks, const std::vector<Eigen::Index>& support,
            Eigen::VectorXd* out) {
  const auto s = static_cast<Eigen::Index>(support.size());
  const auto nb = static_cast<Eigen::Index>(blocks.size.size());
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(s + nb, s + nb);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(s + nb);
  for (Eigen::Index a = 0; a < s; ++a) {
    for (Eigen::Index b = 0; b < s; ++b) K(a, b) = p.Q(support[a], support[b]);
    rhs(a) = p.q(support[a]);
    for (Eigen::Index blk = 0; blk < nb; ++blk) {
      if (support[a] >= blocks.offset[blk] && support[a] < blocks.offset[blk] + blocks.size[blk]) {
        K(a, s + blk) = 1.0;
        K(s + blk, a) = 1.0;
      }
    }
  }
  rhs.tail(nb).setOnes();
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(K);
  Eigen::VectorXd sol = cod.solve(rhs);
  if (!sol.allFinite() || (K * sol - rhs).norm() > 1e-9 * std::max(1.0, rhs.norm())) return false;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(p.q.size());
  for (Eigen::Index a = 0; a < s; ++a) {
    if (sol(a) < -1e-14) return false;
    w(support[a]) = std::max(0.0, sol(a));
  }
  for (Eigen::Index blk = 0; blk < nb; ++blk) {
    double total = w.segment(blocks.offset[blk], blocks.size[blk]).sum();
    if (!(total > 0.0)) return false;
    w.segment(blocks.offset[blk], blocks.size[blk]) /= total;
  }
  *out = w;
  return true;
}

}  // namespace

SolverResult solve(const QuadraticProgram& program, const SolverOptions& options) {
  Blocks blocks;
  Eigen::Index total = 0;
  for (std::size_t sz : program.block_sizes) {
    if (sz == 0) fail(ErrorCode::kInvalidConfig, "simplex block of size zero");
    blocks.offset.push_back(total);
    blocks.size.push_back(static_cast<Eigen::Index>(sz));
    total += static_cast<Eigen::Index>(sz);
  }
  if (program.Q.rows() != total || program.Q.cols() != total || program.q.size() != total) {
    fail(ErrorCode::kShapeMismatch, "quadratic program dimensions disagree with block sizes");
  }

  Eigen::VectorXd x(total);
  for (std::size_t b = 0; b < blocks.size.size(); ++b) {
    x.segment(blocks.offset[b], blocks.size[b]).setConstant(1.0 / static_cast<double>(blocks.size[b]));
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(program.Q, Eigen::EigenvaluesOnly);
  const double lipschitz = std::max(eig.eigenvalues().maxCoeff(), 1e-300);
  const double step = 1.0 / lipschitz;

  const double f_start = objective(program, x);
  const double threshold = options.tolerance * std::max(1.0, std::fabs(f_start));

  SolverResult result;
  Eigen::VectorXd y = x;
  double t = 1.0;
  double f_x = f_start;
  Eigen::VectorXd grad = program.Q * x - program.q;
  result.gap = duality_gap(x, grad, blocks);

  std::size_t it = 0;
  while (result.gap > threshold && it < options.max_iterations) {
    ++it;
    Eigen::VectorXd grad_y = program.Q * y - program.q;
    Eigen::VectorXd x_new = project_blocks(y - step * grad_y, blocks);
    double f_new = objective(program, x_new);
    if (f_new > f_x) {
      // adaptive restart: drop momentum and take a plain projected step
      y = x;
      t = 1.0;
      grad_y = program.Q * y - program.q;
      x_new = project_blocks(y - step * grad_y, blocks);
      f_new = objective(program, x_new);
    }
    double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = x_new + ((t - 1.0) / t_new) * (x_new - x);
    x = x_new;
    f_x = f_new;
    t = t_new;
    grad = program.Q * x - program.q;
    result.gap = duality_gap(x, grad, blocks);
  }

  std::vector<Eigen::Index> support;
  for (Eigen::Index j = 0; j < total; ++j) {
    if (x(j) > 1e-9) support.push_back(j);
  }
  Eigen::VectorXd polished;
  if (polish(program, blocks, support, &polished)) {
    Eigen::VectorXd g = program.Q * polished - program.q;
    double gap = duality_gap(polished, g, blocks);
    if (objective(program, polished) <= f_x + 1e-12 * std::max(1.0, std::fabs(f_x)) &&
        gap <= std::max(result.gap, threshold)) {
      x = polished;
      f_x = objective(program, x);
      result.gap = gap;
    }
  }

  result.weights = x;
  result.objective = f_x;
  result.iterations = it;
  result.converged = result.gap <= threshold;
  return result;
}

}  // namespace panelcause::simplex
