#include "panelcause/linreg.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "panelcause/error.hpp"

namespace panelcause::linreg {

void DesignMatrix::add_column(std::string name, Eigen::VectorXd values) {
  if (static_cast<std::size_t>(values.size()) != rows_) {
    fail(ErrorCode::kShapeMismatch, "column '" + name + "' has " + std::to_string(values.size()) +
                                        " rows, design has " + std::to_string(rows_));
  }
  names_.push_back(std::move(name));
  columns_.push_back(std::move(values));
}

Eigen::MatrixXd DesignMatrix::matrix() const {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols()));
  for (std::size_t j = 0; j < cols(); ++j) m.col(static_cast<Eigen::Index>(j)) = columns_[j];
  return m;
}

std::optional<std::size_t> DesignMatrix::index(std::string_view name) const {
  for (std::size_t j = 0; j < names_.size(); ++j) {
    if (names_[j] == name) return j;
  }
  return std::nullopt;
}

std::optional<std::size_t> FitResult::index(std::string_view name) const {
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (names[j] == name) return j;
  }
  return std::nullopt;
}

bool FitResult::dropped(std::string_view name) const {
  return std::any_of(dropped_columns.begin(), dropped_columns.end(),
                     [&](const DroppedColumn& d) { return d.name == name; });
}

double FitResult::coef(std::string_view name) const {
  auto j = index(name);
  if (!j) fail(ErrorCode::kConfigError, "coefficient '" + std::string(name) + "' not in fit");
  return coefficients(static_cast<Eigen::Index>(*j));
}

double FitResult::se(std::string_view name) const {
  auto j = index(name);
  if (!j) fail(ErrorCode::kConfigError, "coefficient '" + std::string(name) + "' not in fit");
  auto jj = static_cast<Eigen::Index>(*j);
  return std::sqrt(std::max(0.0, vcov(jj, jj)));
}

Eigen::MatrixXd FitResult::vcov_block(std::span<const std::string> subset) const {
  std::vector<Eigen::Index> idx;
  for (const auto& name : subset) {
    auto j = index(name);
    if (!j) fail(ErrorCode::kConfigError, "coefficient '" + name + "' not in fit");
    idx.push_back(static_cast<Eigen::Index>(*j));
  }
  Eigen::MatrixXd block(idx.size(), idx.size());
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = 0; b < idx.size(); ++b) block(a, b) = vcov(idx[a], idx[b]);
  }
  return block;
}

std::vector<std::size_t> independent_columns(const DesignMatrix& X, double tolerance,
                                             std::vector<DroppedColumn>* dropped) {
  const auto n = static_cast<Eigen::Index>(X.rows());
  Eigen::MatrixXd basis(n, static_cast<Eigen::Index>(X.cols()));
  Eigen::Index rank = 0;
  std::vector<std::size_t> kept;
  for (std::size_t j = 0; j < X.cols(); ++j) {
    Eigen::VectorXd v = X.column(j);
    const double norm0 = v.norm();
    if (!(norm0 > 0.0) || !std::isfinite(norm0)) {
      if (dropped) dropped->push_back({X.names()[j], "zero or non-finite column"});
      continue;
    }
    // two Gram-Schmidt passes keep the residual accurate near collinearity
    for (int pass = 0; pass < 2 && rank > 0; ++pass) {
      auto Q = basis.leftCols(rank);
      v -= Q * (Q.transpose() * v);
    }
    const double norm = v.norm();
    if (norm <= tolerance * norm0) {
      if (dropped) dropped->push_back({X.names()[j], "collinear with earlier columns"});
      continue;
    }
    basis.col(rank++) = v / norm;
    kept.push_back(j);
  }
  return kept;
}

FitResult ols_fit(const DesignMatrix& X, const Eigen::VectorXd& y,
                  std::span<const std::size_t> clusters, const OlsOptions& options) {
  const auto n = static_cast<Eigen::Index>(X.rows());
  if (y.size() != n || clusters.size() != X.rows()) {
    fail(ErrorCode::kShapeMismatch, "ols_fit: design, outcome and cluster lengths disagree");
  }

  FitResult fit;
  fit.n = X.rows();
  fit.absorbed_dof = options.absorbed_dof;
  auto kept = independent_columns(X, options.pivot_tolerance, &fit.dropped_columns);
  if (kept.empty()) fail(ErrorCode::kRankZero, "ols_fit: no usable columns");

  const auto k = static_cast<Eigen::Index>(kept.size());
  Eigen::MatrixXd Xk(n, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    Xk.col(j) = X.column(kept[static_cast<std::size_t>(j)]);
    fit.names.push_back(X.names()[kept[static_cast<std::size_t>(j)]]);
  }
  fit.rank = kept.size();

  const std::size_t k_total = fit.rank + options.absorbed_dof;
  if (fit.n <= k_total) {
    fail(ErrorCode::kShapeMismatch, "ols_fit: " + std::to_string(fit.n) + " rows for " +
                                        std::to_string(k_total) + " parameters");
  }

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Xk);
  fit.coefficients = qr.solve(y);
  fit.fitted = Xk * fit.coefficients;
  fit.residuals = y - fit.fitted;

  Eigen::MatrixXd R = qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  Eigen::MatrixXd R_inv =
      R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  Eigen::MatrixXd bread = R_inv * R_inv.transpose();

  std::unordered_map<std::size_t, Eigen::Index> cluster_slot;
  for (std::size_t c : clusters) cluster_slot.try_emplace(c, static_cast<Eigen::Index>(cluster_slot.size()));
  const auto G = static_cast<Eigen::Index>(cluster_slot.size());
  fit.cluster_count = static_cast<std::size_t>(G);
  if (G < 2) {
    fail(ErrorCode::kFewerClustersThanTwo,
         "cluster-robust variance needs at least two clusters, found " + std::to_string(G));
  }

  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(G, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    scores.row(cluster_slot[clusters[static_cast<std::size_t>(i)]]) +=
        Xk.row(i) * fit.residuals(i);
  }
  Eigen::MatrixXd meat = scores.transpose() * scores;
  const double factor = (static_cast<double>(G) / static_cast<double>(G - 1)) *
                        (static_cast<double>(fit.n - 1) / static_cast<double>(fit.n - k_total));
  Eigen::MatrixXd V = factor * bread * meat * bread;
  fit.vcov = 0.5 * (V + V.transpose());
  return fit;
}

std::map<std::string, double> ridge_fit(const DesignMatrix& X, const Eigen::VectorXd& y,
                                        double lambda) {
  if (!(lambda >= 0.0)) fail(ErrorCode::kInvalidConfig, "ridge_fit: lambda must be >= 0");
  if (static_cast<std::size_t>(y.size()) != X.rows()) {
    fail(ErrorCode::kShapeMismatch, "ridge_fit: outcome length disagrees with design");
  }
  const auto n = static_cast<Eigen::Index>(X.rows());
  std::map<std::string, double> out;

  if (lambda == 0.0) {
    auto kept = independent_columns(X, 1e-10, nullptr);
    if (kept.empty()) return out;
    Eigen::MatrixXd Xk(n, static_cast<Eigen::Index>(kept.size()));
    for (std::size_t j = 0; j < kept.size(); ++j) Xk.col(static_cast<Eigen::Index>(j)) = X.column(kept[j]);
    Eigen::VectorXd b = Xk.householderQr().solve(y);
    for (std::size_t j = 0; j < kept.size(); ++j) out[X.names()[kept[j]]] = b(static_cast<Eigen::Index>(j));
    return out;
  }

  // Augmented system [X; sqrt(lambda) P] b = [y; 0], P selecting penalized columns.
  const auto p = static_cast<Eigen::Index>(X.cols());
  std::vector<Eigen::Index> penalized;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (X.names()[static_cast<std::size_t>(j)] != kIntercept) penalized.push_back(j);
  }
  const auto m = static_cast<Eigen::Index>(penalized.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + m, p);
  A.topRows(n) = X.matrix();
  const double root = std::sqrt(lambda);
  for (Eigen::Index r = 0; r < m; ++r) A(n + r, penalized[static_cast<std::size_t>(r)]) = root;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + m);
  rhs.head(n) = y;
  Eigen::VectorXd b = A.colPivHouseholderQr().solve(rhs);
  for (Eigen::Index j = 0; j < p; ++j) out[X.names()[static_cast<std::size_t>(j)]] = b(j);
  return out;
}

namespace {

std::vector<std::size_t> compress(std::span<const std::size_t> ids, std::size_t* levels) {
  std::unordered_map<std::size_t, std::size_t> slot;
  std::vector<std::size_t> out(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out[i] = slot.try_emplace(ids[i], slot.size()).first->second;
  }
  *levels = slot.size();
  return out;
}

void demean(Eigen::Ref<Eigen::VectorXd> col, const std::vector<std::size_t>& group,
            const std::vector<double>& counts, std::vector<double>& sums) {
  std::fill(sums.begin(), sums.end(), 0.0);
  for (Eigen::Index i = 0; i < col.size(); ++i) sums[group[static_cast<std::size_t>(i)]] += col(i);
  for (std::size_t g = 0; g < sums.size(); ++g) sums[g] /= counts[g];
  for (Eigen::Index i = 0; i < col.size(); ++i) col(i) -= sums[group[static_cast<std::size_t>(i)]];
}

}  // namespace

AbsorbResult absorb_fixed_effects(std::span<const std::size_t> unit_of_row,
                                  std::span<const std::size_t> time_of_row, FeDims dims,
                                  Eigen::MatrixXd columns, const AbsorbOptions& options) {
  const auto n = static_cast<std::size_t>(columns.rows());
  if ((dims.unit && unit_of_row.size() != n) || (dims.time && time_of_row.size() != n)) {
    fail(ErrorCode::kShapeMismatch, "absorb_fixed_effects: label and column lengths disagree");
  }
  AbsorbResult result;
  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::vector<double>> counts;

  auto add_dim = [&](std::span<const std::size_t> ids, const char* name, std::size_t* levels) {
    auto g = compress(ids, levels);
    if (*levels <= 1) {
      result.warnings.push_back(std::string("SINGLE_LEVEL: ") + name +
                                " dimension has one level; absorption skipped");
      return;
    }
    std::vector<double> c(*levels, 0.0);
    for (std::size_t x : g) c[x] += 1.0;
    groups.push_back(std::move(g));
    counts.push_back(std::move(c));
  };
  if (dims.unit) add_dim(unit_of_row, "unit", &result.unit_levels);
  if (dims.time) add_dim(time_of_row, "time", &result.time_levels);

  if (groups.empty()) {
    result.columns = std::move(columns);
    return result;
  }

  std::vector<double> sums;
  for (Eigen::Index j = 0; j < columns.cols(); ++j) {
    auto col = columns.col(j);
    const double scale = std::max(1.0, col.cwiseAbs().maxCoeff());
    std::size_t it = 0;
    bool converged = false;
    while (it < options.max_iterations) {
      Eigen::VectorXd before = col;
      for (std::size_t d = 0; d < groups.size(); ++d) {
        sums.assign(counts[d].size(), 0.0);
        demean(col, groups[d], counts[d], sums);
      }
      ++it;
      if (groups.size() == 1 || (col - before).cwiseAbs().maxCoeff() <= options.tolerance * scale) {
        converged = true;
        break;
      }
    }
    result.iterations = std::max(result.iterations, it);
    result.converged = result.converged && converged;
  }
  if (!result.converged) {
    result.warnings.push_back("NO_CONVERGENCE: fixed-effect absorption hit the iteration cap");
  }
  result.columns = std::move(columns);
  return result;
}

}  // namespace panelcause::linreg
