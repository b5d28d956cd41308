#include "stgeyer/quadrature.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "stgeyer/format.hpp"

namespace stgeyer {

namespace {

int cell_index_1d(double v, double lo, double inv_cell, int n) {
  const int i = static_cast<int>((v - lo) * inv_cell);
  return i < 0 ? 0 : (i >= n ? n - 1 : i);
}

double capped(double s, double count) { return count < s ? count : s; }

}  // namespace

QuadGridSpec QuadGridSpec::default_for(std::size_t n_points) {
  const double target = 4.0 * static_cast<double>(n_points);
  const int side = std::max(1, static_cast<int>(std::ceil(std::cbrt(target))));
  return QuadGridSpec{side, side, side, 1};
}

QuadratureScheme counting_weights(const PointPattern& pattern, const QuadGridSpec& grid) {
  if (grid.nx < 1 || grid.ny < 1 || grid.nt < 1) {
    throw std::invalid_argument("quadrature grid needs at least one cell per axis");
  }
  if (grid.dummy_per_cell < 1) {
    throw std::invalid_argument("quadrature grid needs at least one dummy per cell");
  }

  const auto& w = pattern.window();
  const double lx = w.x_range().length(), ly = w.y_range().length(), lt = w.t_range().length();
  const double inv_cx = grid.nx / lx, inv_cy = grid.ny / ly, inv_ct = grid.nt / lt;

  QuadratureScheme scheme{.points = {},
                          .is_data = {},
                          .weights = {},
                          .offsets = {},
                          .window = w,
                          .n_data = pattern.size()};

  for (const auto& p : pattern.points()) {
    scheme.points.push_back(p);
    scheme.is_data.push_back(1);
  }

  // Dummies at deterministic stratified positions: dummy d of a cell sits at
  // fraction (d + 1/2) / dummy_per_cell along each axis of the cell.
  for (int it = 0; it < grid.nt; ++it) {
    for (int iy = 0; iy < grid.ny; ++iy) {
      for (int ix = 0; ix < grid.nx; ++ix) {
        for (int d = 0; d < grid.dummy_per_cell; ++d) {
          const double f = (d + 0.5) / grid.dummy_per_cell;
          scheme.points.push_back({w.x_range().lo + (ix + f) * lx / grid.nx,
                                   w.y_range().lo + (iy + f) * ly / grid.ny,
                                   w.t_range().lo + (it + f) * lt / grid.nt});
          scheme.is_data.push_back(0);
        }
      }
    }
  }

  // Counting weights: cell volume split evenly over the scheme points that
  // share the cell. Every cell holds at least one dummy, so the weights sum
  // to the window volume.
  const std::size_t n_cells =
      static_cast<std::size_t>(grid.nx) * static_cast<std::size_t>(grid.ny) * static_cast<std::size_t>(grid.nt);
  const double cell_volume = w.volume() / static_cast<double>(n_cells);
  std::vector<int> occupancy(n_cells, 0);
  std::vector<std::size_t> cell_of(scheme.points.size());
  for (std::size_t k = 0; k < scheme.points.size(); ++k) {
    const auto& p = scheme.points[k];
    const int ix = cell_index_1d(p.x, w.x_range().lo, inv_cx, grid.nx);
    const int iy = cell_index_1d(p.y, w.y_range().lo, inv_cy, grid.ny);
    const int it = cell_index_1d(p.t, w.t_range().lo, inv_ct, grid.nt);
    cell_of[k] = (static_cast<std::size_t>(it) * grid.ny + iy) * grid.nx + ix;
    ++occupancy[cell_of[k]];
  }
  scheme.weights.resize(scheme.points.size());
  for (std::size_t k = 0; k < scheme.points.size(); ++k) {
    scheme.weights[k] = cell_volume / occupancy[cell_of[k]];
  }
  scheme.offsets.assign(scheme.points.size(), 0.0);
  return scheme;
}

QuadratureScheme poisson_dummies(const PointPattern& pattern, double rho, Rng& rng) {
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw std::invalid_argument("dummy intensity rho must be positive");
  }
  const auto& w = pattern.window();
  QuadratureScheme scheme{.points = {},
                          .is_data = {},
                          .weights = {},
                          .offsets = {},
                          .window = w,
                          .n_data = pattern.size()};
  for (const auto& p : pattern.points()) {
    scheme.points.push_back(p);
    scheme.is_data.push_back(1);
  }
  const auto n_dummy = rng.poisson(rho * w.volume());
  for (std::int64_t d = 0; d < n_dummy; ++d) {
    scheme.points.push_back({rng.uniform(w.x_range().lo, w.x_range().hi),
                             rng.uniform(w.y_range().lo, w.y_range().hi),
                             rng.uniform(w.t_range().lo, w.t_range().hi)});
    scheme.is_data.push_back(0);
  }
  scheme.weights.assign(scheme.points.size(), 1.0);
  scheme.offsets.assign(scheme.points.size(), 0.0);
  return scheme;
}

Eigen::MatrixXd design_matrix(std::span<const ScaleShape> shapes,
                              const QuadratureScheme& scheme,
                              const PointPattern& source_pattern) {
  if (scheme.n_data != source_pattern.size()) {
    throw std::invalid_argument("quadrature scheme was not built from this pattern");
  }
  for (std::size_t i = 0; i < scheme.n_data; ++i) {
    if (!scheme.is_data[i] || !same_location(scheme.points[i], source_pattern[i])) {
      throw std::invalid_argument("quadrature scheme was not built from this pattern");
    }
  }

  const auto p = static_cast<Eigen::Index>(scheme.size());
  const auto m = static_cast<Eigen::Index>(shapes.size());
  Eigen::MatrixXd stats = Eigen::MatrixXd::Zero(p, m);
  if (m == 0 || source_pattern.empty()) return stats;

  double r_max = 0, q_max = 0;
  for (const auto& sh : shapes) {
    r_max = std::max(r_max, sh.r);
    q_max = std::max(q_max, sh.q);
  }
  const NeighborIndex index(source_pattern, r_max, q_max);
  const std::size_t n = source_pattern.size();

  // Per-scale neighbor counts of every data point, computed once and shared
  // across all rows.
  Eigen::MatrixXd data_counts(static_cast<Eigen::Index>(n), m);
  for (std::size_t i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      data_counts(static_cast<Eigen::Index>(i), j) = index.count(
          source_pattern[i], shapes[j].r, shapes[j].q, /*exclude_center=*/true);
    }
  }

  std::vector<int> nbrs;
  std::vector<double> direct_row(static_cast<std::size_t>(m));
  for (Eigen::Index k = 0; k < p; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    const EventPoint& u = scheme.points[kk];
    const bool is_data = scheme.is_data[kk] != 0;

    // Entries coordinate-identical to u besides u itself break the +/-1
    // count bookkeeping below; route those rows through the direct form.
    const int coincident = index.count(u, shapes[0].r, shapes[0].q, false) -
                           index.count(u, shapes[0].r, shapes[0].q, true) - (is_data ? 1 : 0);
    if (coincident > 0) {
      sufficient_statistics(shapes, source_pattern.points(), u, direct_row);
      for (Eigen::Index j = 0; j < m; ++j) stats(k, j) = direct_row[static_cast<std::size_t>(j)];
      continue;
    }

    for (Eigen::Index j = 0; j < m; ++j) {
      const double s = shapes[j].s;
      nbrs.clear();
      index.gather(u, shapes[j].r, shapes[j].q, nbrs);
      double value = capped(s, static_cast<double>(nbrs.size()));
      if (is_data) {
        // Base state is the pattern without u: each neighbor holds one
        // count less than in the full pattern.
        for (int y : nbrs) {
          const double c = data_counts(y, j);
          value += capped(s, c) - capped(s, c - 1.0);
        }
      } else {
        for (int y : nbrs) {
          const double c = data_counts(y, j);
          value += capped(s, c + 1.0) - capped(s, c);
        }
      }
      stats(k, j) = value;
    }
  }

  return stats;
}

void write_scheme_csv(std::ostream& os, const QuadratureScheme& scheme,
                      const Eigen::MatrixXd* stats) {
  os << "x,y,t,is_data,weight";
  if (stats) {
    for (Eigen::Index j = 0; j < stats->cols(); ++j) os << ",S_" << (j + 1);
  }
  os << "\n";
  for (std::size_t k = 0; k < scheme.size(); ++k) {
    os << format_double(scheme.points[k].x) << ',' << format_double(scheme.points[k].y) << ','
       << format_double(scheme.points[k].t) << ',' << int(scheme.is_data[k]) << ','
       << format_double(scheme.weights[k]);
    if (stats) {
      for (Eigen::Index j = 0; j < stats->cols(); ++j) {
        os << ',' << format_double((*stats)(static_cast<Eigen::Index>(k), j));
      }
    }
    os << "\n";
  }
}

}  // namespace stgeyer
