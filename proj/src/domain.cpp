#include "normcrit/domain.hpp"

#include <sstream>

namespace normcrit {

double DomainSpec::volume() const {
  double v = 1.0;
  for (int d = 0; d < dimension; ++d) v *= extent(d);
  return v;
}

double DomainSpec::boundary_measure() const {
  switch (dimension) {
    case 1:
      return 2.0;  // two endpoint atoms of unit weight
    case 2:
      return 2.0 * (extent(0) + extent(1));
    case 3:
      return 2.0 * (extent(0) * extent(1) + extent(0) * extent(2) +
                    extent(1) * extent(2));
  }
  fail(ErrorCode::UnsupportedDimension, "dimension must be 1, 2 or 3");
}

std::array<double, 3> DomainSpec::centroid() const {
  std::array<double, 3> c{0.0, 0.0, 0.0};
  for (int d = 0; d < dimension; ++d) c[d] = 0.5 * (lo[d] + hi[d]);
  return c;
}

bool DomainSpec::contains_interior(const std::array<double, 3>& x) const {
  for (int d = 0; d < dimension; ++d)
    if (!(x[d] > lo[d] && x[d] < hi[d])) return false;
  return true;
}

std::string DomainSpec::describe() const {
  std::ostringstream os;
  switch (kind) {
    case DomainKind::Interval: os << "interval"; break;
    case DomainKind::Rectangle: os << "rectangle"; break;
    case DomainKind::Box: os << "box"; break;
  }
  for (int d = 0; d < dimension; ++d)
    os << (d == 0 ? " (" : " x (") << lo[d] << "," << hi[d] << ")";
  return os.str();
}

DomainSpec make_interval(double a, double b) {
  DomainSpec s;
  s.kind = DomainKind::Interval;
  s.dimension = 1;
  s.lo = {a, 0.0, 0.0};
  s.hi = {b, 1.0, 1.0};
  return s;
}

DomainSpec make_rectangle(double ax, double bx, double ay, double by) {
  DomainSpec s;
  s.kind = DomainKind::Rectangle;
  s.dimension = 2;
  s.lo = {ax, ay, 0.0};
  s.hi = {bx, by, 1.0};
  return s;
}

DomainSpec make_box(double ax, double bx, double ay, double by, double az,
                    double bz) {
  DomainSpec s;
  s.kind = DomainKind::Box;
  s.dimension = 3;
  s.lo = {ax, ay, az};
  s.hi = {bx, by, bz};
  return s;
}

DomainSpec build_domain(DomainSpec spec) {
  const int expected = spec.kind == DomainKind::Interval    ? 1
                       : spec.kind == DomainKind::Rectangle ? 2
                                                            : 3;
  if (spec.dimension != expected)
    fail(ErrorCode::UnsupportedDimension,
         "dimension " + std::to_string(spec.dimension) +
             " does not match domain kind");
  for (int d = 0; d < spec.dimension; ++d)
    if (!(spec.extent(d) > 0.0))
      fail(ErrorCode::NonPositiveExtent,
           "axis " + std::to_string(d) + " has non-positive extent");
  if (spec.star_center) {
    if (!spec.contains_interior(*spec.star_center))
      fail(ErrorCode::CenterOutsideDomain,
           "star center must be strictly interior");
  } else {
    spec.star_center = spec.centroid();
  }
  return spec;
}

std::string BoundaryMode::name() const {
  if (is_dirichlet()) return "dirichlet";
  if (is_neumann()) return "neumann";
  if (is_robin()) return "robin";
  return "invalid";
}

BoundaryMode parse_mode(const std::string& name) {
  if (name == "dirichlet") return dirichlet_mode();
  if (name == "neumann") return neumann_mode();
  if (name == "robin") return robin_mode();
  fail(ErrorCode::ConfigInvalid, "unknown boundary mode '" + name + "'");
}

}  // namespace normcrit
