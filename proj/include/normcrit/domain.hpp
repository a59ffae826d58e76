#pragma once

#include "normcrit/types.hpp"

#include <array>
#include <optional>
#include <string>

namespace normcrit {

enum class DomainKind { Interval, Rectangle, Box };

/// Axis-aligned catalog domain: interval, rectangle or box.
/// Extents are stored as per-axis [lo, hi) pairs; unused axes are ignored.
struct DomainSpec {
  DomainKind kind = DomainKind::Interval;
  int dimension = 1;
  std::array<double, 3> lo{0.0, 0.0, 0.0};
  std::array<double, 3> hi{1.0, 1.0, 1.0};
  // Reference point for the boundary weight x -> (x - x0) . n. Catalog
  // domains are star-shaped with respect to any interior point; defaults
  // to the centroid in build_domain().
  std::optional<std::array<double, 3>> star_center;

  double extent(int axis) const { return hi[axis] - lo[axis]; }
  double volume() const;
  double boundary_measure() const;
  std::array<double, 3> centroid() const;
  bool contains_interior(const std::array<double, 3>& x) const;
  std::string describe() const;
};

DomainSpec make_interval(double a, double b);
DomainSpec make_rectangle(double ax, double bx, double ay, double by);
DomainSpec make_box(double ax, double bx, double ay, double by, double az,
                    double bz);

/// Validates extents/dimension and fills in the default star center.
DomainSpec build_domain(DomainSpec spec);

/// Boundary operator selector: alpha u + zeta du/dn - gamma g(u).
/// Legal combinations are (1,0,0), (0,1,0) and (1,1,1).
struct BoundaryMode {
  int alpha = 1;
  int zeta = 0;
  int gamma = 0;

  bool is_dirichlet() const { return alpha == 1 && zeta == 0 && gamma == 0; }
  bool is_neumann() const { return alpha == 0 && zeta == 1 && gamma == 0; }
  bool is_robin() const { return alpha == 1 && zeta == 1 && gamma == 1; }
  bool valid() const { return is_dirichlet() || is_neumann() || is_robin(); }
  std::string name() const;
};

inline BoundaryMode dirichlet_mode() { return {1, 0, 0}; }
inline BoundaryMode neumann_mode() { return {0, 1, 0}; }
inline BoundaryMode robin_mode() { return {1, 1, 1}; }

BoundaryMode parse_mode(const std::string& name);

}  // namespace normcrit
