#pragma once

// Row selection shared by the regression-based estimators.

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "panelcause/panel.hpp"

namespace panelcause::detail {

struct Row {
  std::size_t unit;
  int time;
};

/// Complete (unit, time) cells for `units` (all units when empty), in
/// unit-major order.
inline std::vector<Row> complete_rows(const PanelDataset& panel,
                                      std::span<const std::size_t> covariates,
                                      std::span<const std::size_t> units = {}) {
  std::vector<Row> rows;
  auto visit = [&](std::size_t u) {
    for (int t = 0; t < static_cast<int>(panel.time_count()); ++t) {
      if (panel.complete(u, t, covariates)) rows.push_back({u, t});
    }
  };
  if (units.empty()) {
    for (std::size_t u = 0; u < panel.unit_count(); ++u) visit(u);
  } else {
    for (std::size_t u : units) visit(u);
  }
  return rows;
}

inline Eigen::VectorXd outcome_vector(const PanelDataset& panel, const std::vector<Row>& rows) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    y(static_cast<Eigen::Index>(i)) = panel.outcome(rows[i].unit, rows[i].time);
  }
  return y;
}

inline Eigen::VectorXd covariate_vector(const PanelDataset& panel, const std::vector<Row>& rows,
                                        std::size_t k) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    x(static_cast<Eigen::Index>(i)) = panel.covariate(k, rows[i].unit, rows[i].time);
  }
  return x;
}

inline std::vector<std::size_t> unit_ids(const std::vector<Row>& rows) {
  std::vector<std::size_t> ids;
  ids.reserve(rows.size());
  for (const auto& r : rows) ids.push_back(r.unit);
  return ids;
}

inline std::vector<std::size_t> time_ids(const std::vector<Row>& rows) {
  std::vector<std::size_t> ids;
  ids.reserve(rows.size());
  for (const auto& r : rows) ids.push_back(static_cast<std::size_t>(r.time));
  return ids;
}

}  // namespace panelcause::detail
