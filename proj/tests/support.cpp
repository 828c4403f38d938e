#include "support.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "panelcause/rng.hpp"

namespace support {

std::string unit_name(std::size_t u) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "u%02zu", u);
  return buf;
}

PanelDataset make_panel(const std::vector<int>& adoption, int T, const OutcomeFn& y,
                        std::vector<std::string> covariate_names, const CovariateFn& cov, long long first) {
  panelcause::PanelBuilder builder(covariate_names);
  for (std::size_t u = 0; u < adoption.size(); ++u) {
    for (int t = 0; t < T; ++t) {
      const double d = adoption[u] != panelcause::kNever && t >= adoption[u] ? 1.0 : 0.0;
      builder.add(unit_name(u), first + t, y(u, t), d, cov ? cov(u, t) : std::vector<double>{});
    }
  }
  return builder.build();
}

PanelDataset load_csv(const std::string& text, const panelcause::ColumnMapping& mapping) {
  std::istringstream in(text);
  return panelcause::load_panel(in, mapping);
}

std::string fixture(const std::string& name) { return std::string(PANELCAUSE_FIXTURES) + "/" + name; }

PanelDataset load_case_study() {
  panelcause::ColumnMapping m;
  m.time = "year";
  m.outcome = "deaths";
  return panelcause::load_panel_file(fixture("case_study.csv"), m);
}

Eigen::VectorXd normal_equations(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const Eigen::MatrixXd XtX = X.transpose() * X;
  return XtX.ldlt().solve(X.transpose() * y);
}

Eigen::MatrixXd cr1_vcov(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const std::vector<std::size_t>& cluster, std::size_t extra_k) {
  const Eigen::VectorXd b = normal_equations(X, y);
  const Eigen::VectorXd e = y - X * b;
  const Eigen::MatrixXd bread = (X.transpose() * X).inverse();
  std::size_t G = 0;
  for (auto c : cluster) G = std::max(G, c + 1);
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(X.cols(), X.cols());
  for (std::size_t g = 0; g < G; ++g) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(X.cols());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      if (cluster[static_cast<std::size_t>(i)] == g) s += X.row(i).transpose() * e(i);
    }
    meat += s * s.transpose();
  }
  const double n = static_cast<double>(X.rows());
  const double k = static_cast<double>(X.cols() + static_cast<Eigen::Index>(extra_k));
  const double Gd = static_cast<double>(G);
  return (Gd / (Gd - 1.0)) * ((n - 1.0) / (n - k)) * bread * meat * bread;
}

double simplex_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& x, const Eigen::VectorXd& w) {
  return (x - X * w).squaredNorm();
}

/// Exact minimum over the simplex by enumerating supports and solving the
/// equality-constrained problem on each.
double simplex_kkt_oracle(const Eigen::MatrixXd& X, const Eigen::VectorXd& x, Eigen::VectorXd* best_w) {
  const int J = int(X.cols());
  double best = std::numeric_limits<double>::infinity();
  for (int mask = 1; mask < (1 << J); ++mask) {
    std::vector<int> s;
    for (int j = 0; j < J; ++j) {
      if (mask & (1 << j)) s.push_back(j);
    }
    const int k = int(s.size());
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(k + 1, k + 1);
    Eigen::VectorXd r = Eigen::VectorXd::Zero(k + 1);
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b) K(a, b) = 2.0 * X.col(s[std::size_t(a)]).dot(X.col(s[std::size_t(b)]));
      K(a, k) = 1.0;
      K(k, a) = 1.0;
      r(a) = 2.0 * X.col(s[std::size_t(a)]).dot(x);
    }
    r(k) = 1.0;
    const Eigen::VectorXd sol = K.fullPivLu().solve(r);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(J);
    bool feasible = true;
    for (int a = 0; a < k; ++a) {
      if (sol(a) < -1e-12) feasible = false;
      w(s[std::size_t(a)]) = std::max(0.0, sol(a));
    }
    if (!feasible) continue;
    w /= w.sum();
    const double f = simplex_objective(X, x, w);
    if (f < best) {
      best = f;
      if (best_w) *best_w = w;
    }
  }
  return best;
}

/// Grid search on the 5-donor simplex: a 1/40 pass, then a 1e-3 pass around the best point.
double simplex_grid_oracle(const Eigen::MatrixXd& X, const Eigen::VectorXd& x) {
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd bw(5);
  const int n = 40;
  Eigen::VectorXd w(5);
  for (int a = 0; a <= n; ++a)
    for (int b = 0; a + b <= n; ++b)
      for (int c = 0; a + b + c <= n; ++c)
        for (int d = 0; a + b + c + d <= n; ++d) {
          w << a, b, c, d, n - a - b - c - d;
          w /= n;
          const double f = simplex_objective(X, x, w);
          if (f < best) {
            best = f;
            bw = w;
          }
        }
  const int m = 25;
  const Eigen::VectorXd centre = bw;
  for (int a = -m; a <= m; ++a)
    for (int b = -m; b <= m; ++b)
      for (int c = -m; c <= m; ++c)
        for (int d = -m; d <= m; ++d) {
          w(0) = std::round(centre(0) * 1000 + a) / 1000;
          w(1) = std::round(centre(1) * 1000 + b) / 1000;
          w(2) = std::round(centre(2) * 1000 + c) / 1000;
          w(3) = std::round(centre(3) * 1000 + d) / 1000;
          w(4) = 1.0 - w(0) - w(1) - w(2) - w(3);
          if (w.minCoeff() < -1e-12) continue;
          best = std::min(best, simplex_objective(X, x, w));
        }
  return best;
}

Normal::Normal(std::uint64_t seed) : state_(seed) {}

double Normal::operator()() {
  // Box-Muller on two splitmix64 uniforms
  auto uniform = [this] {
    state_ += 0x9E3779B97F4A7C15ULL;
    return (static_cast<double>(panelcause::rng::splitmix64(state_) >> 11) + 0.5) * 0x1.0p-53;
  };
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace support
