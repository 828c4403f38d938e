#include "panelcause/scm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "panelcause/error.hpp"
#include "panelcause/inference.hpp"

namespace panelcause::scm {

namespace {

struct Target {
  std::string name;
  Eigen::VectorXd series;  // all periods
  Eigen::VectorXd covariate_means;
  int adoption = 0;
};

struct Pool {
  std::vector<std::size_t> donors;
  Eigen::MatrixXd Y;  // donors x periods
  Eigen::MatrixXd C;  // donors x matched covariates
};

void require_complete(const PanelDataset& panel, std::size_t u, int adoption,
                      const std::vector<std::size_t>& cov) {
  for (int t = 0; t < static_cast<int>(panel.time_count()); ++t) {
    bool ok = panel.observed(u, t) && std::isfinite(panel.outcome(u, t));
    if (t < adoption) {
      for (std::size_t k : cov) ok = ok && std::isfinite(panel.covariate(k, u, t));
    }
    if (!ok) {
      fail(ErrorCode::kMissingCells, "unit '" + panel.units()[u] + "' has a missing cell at " +
                                         std::to_string(panel.time_label(t)));
    }
  }
}

Eigen::VectorXd series_of(const PanelDataset& panel, std::size_t u) {
  Eigen::VectorXd s(static_cast<Eigen::Index>(panel.time_count()));
  for (int t = 0; t < static_cast<int>(panel.time_count()); ++t) s(t) = panel.outcome(u, t);
  return s;
}

Eigen::VectorXd covariate_means_of(const PanelDataset& panel, std::size_t u, int adoption,
                                   const std::vector<std::size_t>& cov) {
  Eigen::VectorXd m(static_cast<Eigen::Index>(cov.size()));
  for (std::size_t k = 0; k < cov.size(); ++k) {
    double s = 0.0;
    for (int t = 0; t < adoption; ++t) s += panel.covariate(cov[k], u, t);
    m(static_cast<Eigen::Index>(k)) = s / adoption;
  }
  return m;
}

Pool make_pool(const PanelDataset& panel, const std::vector<std::size_t>& donors, int adoption,
               const std::vector<std::size_t>& cov) {
  Pool pool;
  pool.donors = donors;
  pool.Y.resize(static_cast<Eigen::Index>(donors.size()), static_cast<Eigen::Index>(panel.time_count()));
  pool.C.resize(static_cast<Eigen::Index>(donors.size()), static_cast<Eigen::Index>(cov.size()));
  for (std::size_t j = 0; j < donors.size(); ++j) {
    require_complete(panel, donors[j], adoption, cov);
    pool.Y.row(static_cast<Eigen::Index>(j)) = series_of(panel, donors[j]).transpose();
    pool.C.row(static_cast<Eigen::Index>(j)) = covariate_means_of(panel, donors[j], adoption, cov).transpose();
  }
  return pool;
}

Pool drop_donor(const Pool& pool, std::size_t j) {
  Pool out;
  const auto J = static_cast<Eigen::Index>(pool.donors.size());
  out.Y.resize(J - 1, pool.Y.cols());
  out.C.resize(J - 1, pool.C.cols());
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < J; ++i) {
    if (static_cast<std::size_t>(i) == j) continue;
    out.donors.push_back(pool.donors[static_cast<std::size_t>(i)]);
    out.Y.row(r) = pool.Y.row(i);
    out.C.row(r) = pool.C.row(i);
    ++r;
  }
  return out;
}

// Predictor matrix (predictors x donors) and the treated predictor vector.
void predictors(const Target& target, const Pool& pool, Eigen::MatrixXd* X, Eigen::VectorXd* x) {
  const Eigen::Index g = target.adoption;
  const Eigen::Index K = pool.C.cols();
  X->resize(g + K, pool.Y.rows());
  x->resize(g + K);
  X->topRows(g) = pool.Y.leftCols(g).transpose();
  x->head(g) = target.series.head(g);
  if (K > 0) {
    X->bottomRows(K) = pool.C.transpose();
    x->tail(K) = target.covariate_means;
  }
}

Eigen::VectorXd predictor_weights(const Eigen::Index P, const ScmOptions& options) {
  if (!options.predictor_weights) return Eigen::VectorXd::Ones(P);
  const auto& v = *options.predictor_weights;
  if (static_cast<Eigen::Index>(v.size()) != P) {
    fail(ErrorCode::kInvalidConfig, "predictor_weights has " + std::to_string(v.size()) +
                                        " entries for " + std::to_string(P) + " predictors");
  }
  Eigen::VectorXd out(P);
  for (Eigen::Index i = 0; i < P; ++i) {
    if (!(v[static_cast<std::size_t>(i)] >= 0.0)) fail(ErrorCode::kInvalidConfig, "predictor weights must be non-negative");
    out(i) = v[static_cast<std::size_t>(i)];
  }
  return out;
}

// Gaps, att and fit diagnostics for a given weight vector.
void finish(const Target& target, const Pool& pool, const Eigen::VectorXd& w,
            const ScmOptions& options, ScmEstimate* est) {
  const int T = static_cast<int>(target.series.size());
  Eigen::VectorXd synthetic = pool.Y.transpose() * w;
  est->gaps.clear();
  est->pre_gaps.clear();
  double pre_ss = 0.0;
  double post_sum = 0.0;
  for (int t = 0; t < T; ++t) {
    const double gap = target.series(t) - synthetic(t);
    if (t < target.adoption) {
      est->pre_gaps[t] = gap;
      pre_ss += gap * gap;
    } else {
      est->gaps[t] = gap;
      post_sum += gap;
    }
  }
  est->adoption_time = target.adoption;
  est->treated = target.name;
  est->att = post_sum / static_cast<double>(T - target.adoption);
  est->weights.donors = pool.donors;
  est->weights.weights = w;
  est->weights.pre_period_rmspe = std::sqrt(pre_ss / target.adoption);
  Eigen::MatrixXd X;
  Eigen::VectorXd x;
  predictors(target, pool, &X, &x);
  const Eigen::VectorXd v = predictor_weights(X.rows(), options);
  est->weights.objective_value = (v.array() * (x - X * w).array()).matrix().squaredNorm();
}

ScmEstimate fit_core(const Target& target, const Pool& pool, const ScmOptions& options) {
  const auto J = pool.donors.size();
  const int T = static_cast<int>(target.series.size());
  if (J < 2) fail(ErrorCode::kTooFewDonors, "need at least 2 donors, have " + std::to_string(J));
  if (target.adoption < 2) {
    fail(ErrorCode::kTooFewPeriods, "need at least 2 pre-periods, have " + std::to_string(target.adoption));
  }
  if (target.adoption >= T) fail(ErrorCode::kTooFewPeriods, "no post-adoption period");

  Eigen::MatrixXd X;
  Eigen::VectorXd x;
  predictors(target, pool, &X, &x);
  const Eigen::VectorXd v = predictor_weights(X.rows(), options);
  Eigen::MatrixXd A = v.asDiagonal() * X;
  Eigen::VectorXd b = v.asDiagonal() * x;

  simplex::QuadraticProgram qp;
  qp.Q = 2.0 * A.transpose() * A;
  qp.q = 2.0 * A.transpose() * b;
  qp.constant = b.squaredNorm();
  qp.block_sizes = {J};
  const auto sol = simplex::solve(qp, options.solver);
  if (!sol.converged) {
    std::ostringstream msg;
    msg << "simplex solver stopped after " << sol.iterations << " iterations at objective "
        << sol.objective << " (gap " << sol.gap << ")";
    fail(ErrorCode::kNoConvergence, msg.str());
  }
  ScmEstimate est;
  est.weights.iterations = sol.iterations;
  est.weights.converged = true;
  finish(target, pool, sol.weights, options, &est);
  return est;
}

double ridge_scale(const Target& target, const Pool& pool) {
  Eigen::MatrixXd Xc = pool.Y.leftCols(target.adoption);
  Eigen::MatrixXd centered = Xc.rowwise() - Xc.colwise().mean();
  const double scale = centered.squaredNorm() / static_cast<double>(target.adoption);
  return scale > 0.0 ? scale : 1.0;
}

// w + Xc~ (Xc~'Xc~ + lambda I)^-1 (x - Xc'w) on the pre-period outcomes.
Eigen::VectorXd augment(const Target& target, const Pool& pool, const Eigen::VectorXd& w,
                        double lambda) {
  const Eigen::Index g = target.adoption;
  Eigen::MatrixXd Xc = pool.Y.leftCols(g);
  Eigen::MatrixXd centered = Xc.rowwise() - Xc.colwise().mean();
  Eigen::VectorXd imbalance = target.series.head(g) - Xc.transpose() * w;
  Eigen::MatrixXd M = centered.transpose() * centered;
  M.diagonal().array() += lambda;
  Eigen::VectorXd step;
  if (lambda > 0.0) {
    step = M.ldlt().solve(imbalance);
  } else {
    step = M.completeOrthogonalDecomposition().solve(imbalance);
  }
  return w + centered * step;
}

// Leave-one-donor-out prediction error of the last pre-period, per grid point.
double cross_validate(const Target& target, const Pool& pool, const AscmOptions& options,
                      std::vector<std::string>* warnings) {
  const double scale = ridge_scale(target, pool);
  if (target.adoption < 3 || pool.donors.size() < 3 || options.lambda_grid.empty()) {
    warnings->push_back("cross-validation not possible; lambda set to the ridge scale");
    return scale;
  }
  std::vector<double> loss(options.lambda_grid.size(), 0.0);
  std::size_t folds = 0;
  for (std::size_t j = 0; j < pool.donors.size(); ++j) {
    Target sub;
    sub.series = pool.Y.row(static_cast<Eigen::Index>(j)).transpose();
    sub.covariate_means = pool.C.row(static_cast<Eigen::Index>(j)).transpose();
    sub.adoption = target.adoption - 1;
    Pool rest = drop_donor(pool, j);
    ScmEstimate base;
    try {
      base = fit_core(sub, rest, options.scm);
    } catch (const Error&) {
      continue;
    }
    ++folds;
    const Eigen::Index held = target.adoption - 1;
    for (std::size_t i = 0; i < options.lambda_grid.size(); ++i) {
      Eigen::VectorXd w = augment(sub, rest, base.weights.weights, options.lambda_grid[i] * scale);
      const double err = sub.series(held) - rest.Y.col(held).dot(w);
      loss[i] += err * err;
    }
  }
  if (folds == 0) {
    warnings->push_back("every cross-validation fold failed; lambda set to the ridge scale");
    return scale;
  }
  const auto best = std::min_element(loss.begin(), loss.end()) - loss.begin();
  return options.lambda_grid[static_cast<std::size_t>(best)] * scale;
}

ScmEstimate ascm_core(const Target& target, const Pool& pool, const AscmOptions& options,
                      std::optional<double> fixed_lambda = std::nullopt) {
  ScmEstimate est = fit_core(target, pool, options.scm);
  double lambda = 0.0;
  if (fixed_lambda) {
    lambda = *fixed_lambda;
  } else if (options.lambda) {
    lambda = *options.lambda;
  } else {
    lambda = cross_validate(target, pool, options, &est.warnings);
  }
  if (!(lambda >= 0.0)) fail(ErrorCode::kInvalidConfig, "ridge lambda must be non-negative");
  Eigen::VectorXd w = augment(target, pool, est.weights.weights, lambda);
  finish(target, pool, w, options.scm, &est);
  est.weights.negative_allowed = true;
  est.lambda = lambda;
  return est;
}

std::size_t resolve_unit(const PanelDataset& panel, const std::string& name) {
  auto u = panel.unit_index(name);
  if (!u) fail(ErrorCode::kUnknownUnit, "unknown unit '" + name + "'");
  return *u;
}

struct Setup {
  Target target;
  Pool pool;
};

Setup setup(const PanelDataset& panel, const std::string& treated,
            std::span<const std::string> donor_names, const ScmOptions& options) {
  const auto schedule = derive_adoption(panel);
  const std::size_t tu = resolve_unit(panel, treated);
  int adoption = schedule.adoption_time[tu];
  if (options.adoption_time) {
    adoption = *options.adoption_time;
  } else if (adoption == kNever) {
    fail(ErrorCode::kNoTreated, "unit '" + treated + "' is never treated and no adoption period was given");
  }
  std::vector<std::size_t> donors;
  if (donor_names.empty()) {
    for (std::size_t u : schedule.never_treated) {
      if (u != tu) donors.push_back(u);
    }
  } else {
    for (const auto& d : donor_names) {
      const std::size_t u = resolve_unit(panel, d);
      if (u != tu && std::find(donors.begin(), donors.end(), u) == donors.end()) donors.push_back(u);
    }
  }
  const auto cov = panel.resolve_covariates(options.match_covariates);
  if (adoption < 2) {
    fail(ErrorCode::kTooFewPeriods, "need at least 2 pre-periods, have " + std::to_string(std::max(adoption, 0)));
  }
  Setup s;
  require_complete(panel, tu, adoption, cov);
  s.target.name = treated;
  s.target.series = series_of(panel, tu);
  s.target.covariate_means = covariate_means_of(panel, tu, adoption, cov);
  s.target.adoption = adoption;
  s.pool = make_pool(panel, donors, adoption, cov);
  return s;
}

double rmspe(const std::map<int, double>& gaps) {
  double ss = 0.0;
  for (const auto& [t, g] : gaps) ss += g * g;
  return gaps.empty() ? 0.0 : std::sqrt(ss / static_cast<double>(gaps.size()));
}

double ratio(double post, double pre) {
  if (pre > 0.0) return post / pre;
  return post > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

bool at_least(double a, double b) {
  if (a >= b) return true;
  return std::isfinite(a) && std::isfinite(b) &&
         std::fabs(a - b) <= 1e-12 * std::max(std::fabs(a), std::fabs(b));
}

}  // namespace

ScmEstimate fit_scm(const PanelDataset& panel, const std::string& treated,
                    std::span<const std::string> donors, const ScmOptions& options) {
  const auto s = setup(panel, treated, donors, options);
  return fit_core(s.target, s.pool, options);
}

PlaceboResult placebo_inference(const PanelDataset& panel, const std::string& treated,
                                std::span<const std::string> donors, const PlaceboOptions& options) {
  const auto s = setup(panel, treated, donors, options.scm);
  const auto base = fit_core(s.target, s.pool, options.scm);
  PlaceboResult out;
  out.cutoff = options.cutoff;
  out.treated_pre_rmspe = rmspe(base.pre_gaps);
  out.treated_ratio = ratio(rmspe(base.gaps), out.treated_pre_rmspe);

  std::size_t exceed = 0;
  for (std::size_t j = 0; j < s.pool.donors.size(); ++j) {
    Target pseudo;
    pseudo.name = panel.units()[s.pool.donors[j]];
    pseudo.series = s.pool.Y.row(static_cast<Eigen::Index>(j)).transpose();
    pseudo.covariate_means = s.pool.C.row(static_cast<Eigen::Index>(j)).transpose();
    pseudo.adoption = s.target.adoption;
    ScmEstimate fit;
    try {
      fit = fit_core(pseudo, drop_donor(s.pool, j), options.scm);
    } catch (const Error& e) {
      fail(e.code(), "placebo for '" + pseudo.name + "': " + e.what());
    }
    PlaceboUnit p;
    p.unit = s.pool.donors[j];
    p.pre_rmspe = rmspe(fit.pre_gaps);
    p.post_rmspe = rmspe(fit.gaps);
    p.ratio = ratio(p.post_rmspe, p.pre_rmspe);
    p.excluded = p.pre_rmspe > options.cutoff * out.treated_pre_rmspe;
    if (!p.excluded) {
      ++out.retained;
      if (at_least(p.ratio, out.treated_ratio)) ++exceed;
    }
    out.placebos.push_back(p);
  }
  if (out.retained == 0) {
    fail(ErrorCode::kAllExcluded, "every placebo exceeds the pre-fit cutoff of " +
                                      std::to_string(options.cutoff) + "x the treated pre-RMSPE");
  }
  out.treated_rank = exceed + 1;
  out.p_value = static_cast<double>(exceed + 1) / static_cast<double>(out.retained + 1);
  return out;
}

ScmEstimate fit_ascm(const PanelDataset& panel, const std::string& treated,
                     std::span<const std::string> donors, const AscmOptions& options) {
  const auto s = setup(panel, treated, donors, options.scm);
  return ascm_core(s.target, s.pool, options);
}

namespace {

Target average_target(const PanelDataset& panel, std::span<const std::size_t> units, int adoption) {
  Target t;
  t.series = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(panel.time_count()));
  std::ostringstream name;
  name << "mean of " << units.size() << " unit(s)";
  for (std::size_t u : units) {
    require_complete(panel, u, adoption, {});
    t.series += series_of(panel, u);
  }
  t.series /= static_cast<double>(units.size());
  t.name = name.str();
  t.adoption = adoption;
  return t;
}

}  // namespace

ScmEstimate fit_ascm_average(const PanelDataset& panel, std::span<const std::size_t> treated_units,
                             std::span<const std::size_t> donors, const AscmOptions& options) {
  if (treated_units.empty()) fail(ErrorCode::kNoTreated, "no treated units given");
  if (!options.scm.match_covariates.empty()) {
    fail(ErrorCode::kCovariatesUnsupported, "covariate matching is not available for averaged series");
  }
  const auto schedule = derive_adoption(panel);
  const int g = schedule.adoption_time[treated_units[0]];
  for (std::size_t u : treated_units) {
    if (schedule.adoption_time[u] != g || g == kNever) {
      fail(ErrorCode::kStaggeredInput, "averaged units must share one adoption period");
    }
  }
  if (g < 2) fail(ErrorCode::kTooFewPeriods, "need at least 2 pre-periods");
  Target target = average_target(panel, treated_units, g);
  Pool pool = make_pool(panel, std::vector<std::size_t>(donors.begin(), donors.end()), g, {});
  return ascm_core(target, pool, options);
}

// ---------------------------------------------------------------------------
// Staggered

namespace {

struct CohortFit {
  int g;
  Target target;
  double share;
};

std::vector<Eigen::VectorXd> joint_weights(const std::vector<CohortFit>& cohorts, const Pool& pool,
                                           double nu, const ScmOptions& scm) {
  const auto J = static_cast<Eigen::Index>(pool.donors.size());
  const auto G = static_cast<Eigen::Index>(cohorts.size());
  std::vector<Eigen::VectorXd> out;
  if (nu == 0.0) {
    for (const auto& c : cohorts) out.push_back(fit_core(c.target, pool, scm).weights.weights);
    return out;
  }
  int depth = 0;
  for (const auto& c : cohorts) depth = std::max(depth, c.g);

  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> rhs;
  std::vector<double> weight;
  for (int k = -depth; k <= -1; ++k) {
    std::vector<std::size_t> present;
    for (std::size_t i = 0; i < cohorts.size(); ++i) {
      if (cohorts[i].g + k >= 0) present.push_back(i);
    }
    const double inv = 1.0 / static_cast<double>(present.size());
    Eigen::RowVectorXd a = Eigen::RowVectorXd::Zero(G * J);
    double b = 0.0;
    for (std::size_t i : present) {
      const int t = cohorts[i].g + k;
      a.segment(static_cast<Eigen::Index>(i) * J, J) = inv * pool.Y.col(t).transpose();
      b += inv * cohorts[i].target.series(t);
    }
    rows.push_back(a);
    rhs.push_back(b);
    weight.push_back(nu);
    if (nu < 1.0) {
      for (std::size_t i : present) {
        const int t = cohorts[i].g + k;
        Eigen::RowVectorXd s = Eigen::RowVectorXd::Zero(G * J);
        s.segment(static_cast<Eigen::Index>(i) * J, J) = pool.Y.col(t).transpose();
        rows.push_back(s);
        rhs.push_back(cohorts[i].target.series(t));
        weight.push_back(1.0 - nu);
      }
    }
  }
  Eigen::MatrixXd A(static_cast<Eigen::Index>(rows.size()), G * J);
  Eigen::VectorXd b(static_cast<Eigen::Index>(rows.size()));
  Eigen::VectorXd r(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    A.row(static_cast<Eigen::Index>(i)) = rows[i];
    b(static_cast<Eigen::Index>(i)) = rhs[i];
    r(static_cast<Eigen::Index>(i)) = weight[i];
  }
  simplex::QuadraticProgram qp;
  qp.Q = 2.0 * A.transpose() * r.asDiagonal() * A;
  qp.q = 2.0 * A.transpose() * (r.array() * b.array()).matrix();
  qp.constant = (r.array() * b.array().square()).sum();
  qp.block_sizes.assign(cohorts.size(), pool.donors.size());
  const auto sol = simplex::solve(qp, scm.solver);
  if (!sol.converged) {
    std::ostringstream msg;
    msg << "pooled simplex solver stopped at nu = " << nu << " with objective " << sol.objective;
    fail(ErrorCode::kNoConvergence, msg.str());
  }
  for (Eigen::Index i = 0; i < G; ++i) out.push_back(sol.weights.segment(i * J, J));
  return out;
}

// RMS pre-fit: pooled over event times of the cohort-mean gap, and separate.
std::pair<double, double> prefit(const std::vector<CohortFit>& cohorts, const Pool& pool,
                                 const std::vector<Eigen::VectorXd>& w) {
  int depth = 0;
  for (const auto& c : cohorts) depth = std::max(depth, c.g);
  double pooled = 0.0;
  double separate = 0.0;
  std::size_t cells = 0;
  for (int k = -depth; k <= -1; ++k) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < cohorts.size(); ++i) {
      const int t = cohorts[i].g + k;
      if (t < 0) continue;
      const double gap = cohorts[i].target.series(t) - pool.Y.col(t).dot(w[i]);
      sum += gap;
      separate += gap * gap;
      ++n;
      ++cells;
    }
    pooled += (sum / static_cast<double>(n)) * (sum / static_cast<double>(n));
  }
  return {std::sqrt(pooled / depth), std::sqrt(separate / static_cast<double>(cells))};
}

struct StaggeredCore {
  std::map<int, ScmEstimate> per_cohort;
  double att = 0.0;
  double pooled_prefit = 0.0;
  double separate_prefit = 0.0;
};

StaggeredCore staggered_core(const PanelDataset& panel, const std::vector<CohortFit>& cohorts,
                             const Pool& pool, double nu, const AscmOptions& ascm,
                             const std::map<int, double>* lambdas) {
  StaggeredCore core;
  const auto w = joint_weights(cohorts, pool, nu, ascm.scm);
  std::tie(core.pooled_prefit, core.separate_prefit) = prefit(cohorts, pool, w);
  for (std::size_t i = 0; i < cohorts.size(); ++i) {
    const auto& c = cohorts[i];
    ScmEstimate est;
    try {
      double lambda = 0.0;
      if (lambdas) {
        lambda = lambdas->at(c.g);
      } else if (ascm.lambda) {
        lambda = *ascm.lambda;
      } else {
        lambda = cross_validate(c.target, pool, ascm, &est.warnings);
      }
      finish(c.target, pool, augment(c.target, pool, w[i], lambda), ascm.scm, &est);
      est.lambda = lambda;
      est.weights.negative_allowed = true;
    } catch (const Error& e) {
      fail(e.code(), "cohort " + std::to_string(panel.time_label(c.g)) + ": " + e.what());
    }
    core.att += c.share * est.att;
    core.per_cohort.emplace(c.g, std::move(est));
  }
  return core;
}

}  // namespace

StaggeredAscmEstimate fit_staggered_ascm(const PanelDataset& panel,
                                         const AdoptionSchedule& schedule,
                                         const StaggeredAscmOptions& options) {
  if (schedule.cohorts.empty()) fail(ErrorCode::kNoTreated, "panel has no treated units");
  if (schedule.never_treated.empty()) {
    fail(ErrorCode::kNoNeverTreated, "the donor pool (never-treated units) is empty");
  }
  if (!options.ascm.scm.match_covariates.empty()) {
    fail(ErrorCode::kCovariatesUnsupported, "covariate matching is not available for staggered synthetic controls");
  }
  if (options.nu && !(*options.nu >= 0.0 && *options.nu <= 1.0)) {
    fail(ErrorCode::kInvalidConfig, "nu must lie in [0, 1]");
  }
  const int T = static_cast<int>(panel.time_count());
  std::size_t treated_total = 0;
  for (const auto& [g, members] : schedule.cohorts) treated_total += members.size();

  std::vector<CohortFit> cohorts;
  for (const auto& [g, members] : schedule.cohorts) {
    try {
      if (g < 2) fail(ErrorCode::kTooFewPeriods, "need at least 2 pre-periods, have " + std::to_string(g));
      if (g >= T) fail(ErrorCode::kTooFewPeriods, "no post-adoption period");
      CohortFit c;
      c.g = g;
      c.target = average_target(panel, members, g);
      c.share = static_cast<double>(members.size()) / static_cast<double>(treated_total);
      cohorts.push_back(std::move(c));
    } catch (const Error& e) {
      fail(e.code(), "cohort " + std::to_string(panel.time_label(g)) + ": " + e.what());
    }
  }
  Pool pool = make_pool(panel, schedule.never_treated, T, {});
  if (pool.donors.size() < 2) {
    fail(ErrorCode::kTooFewDonors, "need at least 2 never-treated donors, have " + std::to_string(pool.donors.size()));
  }

  StaggeredAscmEstimate out;
  if (options.nu) {
    out.nu = *options.nu;
  } else {
    out.nu_auto = true;
    if (options.nu_grid.empty()) fail(ErrorCode::kInvalidConfig, "empty nu grid");
    std::vector<double> grid = options.nu_grid;
    std::sort(grid.begin(), grid.end());
    const double full = prefit(cohorts, pool, joint_weights(cohorts, pool, 1.0, options.ascm.scm)).first;
    out.nu = 1.0;
    for (double nu : grid) {
      const double pooled = prefit(cohorts, pool, joint_weights(cohorts, pool, nu, options.ascm.scm)).first;
      if (pooled <= 1.1 * full + 1e-12) {
        out.nu = nu;
        break;
      }
    }
    std::ostringstream msg;
    msg << "nu chosen automatically: " << out.nu
        << " (smallest grid value with pooled pre-fit within 10% of full pooling)";
    out.warnings.push_back(msg.str());
  }

  auto core = staggered_core(panel, cohorts, pool, out.nu, options.ascm, nullptr);
  out.per_cohort = core.per_cohort;
  out.att = core.att;
  out.pooled_prefit = core.pooled_prefit;
  out.separate_prefit = core.separate_prefit;
  for (const auto& c : cohorts) out.cohort_weights[c.g] = c.share;

  double se = std::nan("");
  if (options.jackknife && pool.donors.size() >= 3) {
    std::map<int, double> lambdas;
    for (const auto& [g, est] : out.per_cohort) lambdas[g] = est.lambda.value_or(0.0);
    std::vector<double> folds;
    for (std::size_t j = 0; j < pool.donors.size(); ++j) {
      try {
        folds.push_back(staggered_core(panel, cohorts, drop_donor(pool, j), out.nu, options.ascm, &lambdas).att);
      } catch (const Error& e) {
        out.warnings.push_back("jackknife fold without '" + panel.units()[pool.donors[j]] +
                               "' skipped: " + e.what());
      }
    }
    out.jackknife_folds = folds.size();
    if (folds.size() >= 2) {
      const double F = static_cast<double>(folds.size());
      const double mean = std::accumulate(folds.begin(), folds.end(), 0.0) / F;
      double ss = 0.0;
      for (double f : folds) ss += (f - mean) * (f - mean);
      se = std::sqrt((F - 1.0) / F * ss);
    }
  } else if (options.jackknife) {
    out.warnings.push_back("jackknife needs at least 3 donors; SE not computed");
  }
  out.se = se;
  return out;
}

}  // namespace panelcause::scm
