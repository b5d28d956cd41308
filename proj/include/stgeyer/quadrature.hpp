#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "stgeyer/geometry.hpp"
#include "stgeyer/model.hpp"
#include "stgeyer/rng.hpp"

namespace stgeyer {

/// Partition of the window into nx * ny * nt equal-volume cells, each seeded
/// with dummy_per_cell dummy points.
struct QuadGridSpec {
  int nx = 1;
  int ny = 1;
  int nt = 1;
  int dummy_per_cell = 1;

  /// Cube-grid resolution giving roughly 4n dummies for an n-point pattern.
  static QuadGridSpec default_for(std::size_t n_points);
};

/// Quadrature points (data entries first, then dummies) with weights and the
/// data/dummy indicator. `offsets` is the per-point log-trend slot; scheme
/// builders leave it zero and fitters fill it.
struct QuadratureScheme {
  std::vector<EventPoint> points;
  std::vector<std::uint8_t> is_data;
  std::vector<double> weights;
  std::vector<double> offsets;
  SpacetimeWindow window;
  std::size_t n_data = 0;

  std::size_t size() const { return points.size(); }
};

/// Counting-weight scheme: deterministic dummies per cell, each point
/// weighted by cell volume over the number of scheme points sharing its
/// cell. Weights sum to the window volume.
QuadratureScheme counting_weights(const PointPattern& pattern, const QuadGridSpec& grid);

/// Poisson(rho) dummy scheme for logistic estimation: dummy count drawn
/// Poisson(rho * |W|), positions uniform. Weights are unused downstream and
/// set to 1.
QuadratureScheme poisson_dummies(const PointPattern& pattern, double rho, Rng& rng);

/// Matrix of saturation statistics, one row per quadrature point, one column
/// per scale. Data rows use the data-point form (base state: pattern without
/// that point); dummy rows use the insertion form.
Eigen::MatrixXd design_matrix(std::span<const ScaleShape> shapes,
                              const QuadratureScheme& scheme,
                              const PointPattern& source_pattern);

/// Audit export: x,y,t,is_data,weight[,S_1..S_m].
void write_scheme_csv(std::ostream& os, const QuadratureScheme& scheme,
                      const Eigen::MatrixXd* stats = nullptr);

}  // namespace stgeyer
