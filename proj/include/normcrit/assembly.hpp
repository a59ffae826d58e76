#pragma once

#include "normcrit/domain.hpp"
#include "normcrit/types.hpp"

#include <array>
#include <string>
#include <vector>

namespace normcrit {

/// Tensor-product multilinear discretization (P1 in 1D, Q1 in 2D/3D).
///
/// K, M, B realize the bilinear forms  int grad u . grad v,  int u v  and
/// int_bdry u v  exactly on the discrete space; P approximates the boundary
/// functional  v -> int_bdry v (x - x0) . n.  In 1D the boundary measure is
/// the two endpoint atoms of unit weight.
struct Discretization {
  DomainSpec domain;
  int n_per_axis = 0;
  std::array<Index, 3> nodes_per_axis{0, 0, 0};
  Index num_nodes = 0;
  double h = 0.0;  // largest axis spacing

  SparseMatrix K;  // stiffness, symmetric PSD, constants in kernel
  SparseMatrix M;  // interior mass, symmetric PD
  SparseMatrix B;  // boundary mass, symmetric PSD, supported on boundary dofs
  Vector P;        // Pohozaev boundary weights for x0 = domain.star_center

  std::vector<bool> on_boundary;       // per node
  std::vector<Index> interior_nodes;   // indices with on_boundary == false
  std::vector<Index> boundary_nodes;

  Index node_index(Index ix, Index iy = 0, Index iz = 0) const {
    return ix + nodes_per_axis[0] * (iy + nodes_per_axis[1] * iz);
  }
  std::array<double, 3> node_coords(Index node) const;
  double axis_spacing(int axis) const {
    return domain.extent(axis) / n_per_axis;
  }
};

/// Assembles the tensor-product grid with n_per_axis cells per axis.
Discretization assemble(const DomainSpec& domain, int n_per_axis);

/// Boundary weights  P_i ~ int_bdry phi_i (x - x0) . n dsigma  for a given
/// reference point; entries are nonnegative for interior x0.
Vector pohozaev_weights(const Discretization& disc,
                        const std::array<double, 3>& x0);

/// Restriction to / prolongation from the Dirichlet-interior subspace.
Vector restrict_interior(const Discretization& disc, const Vector& full);
Vector prolong_interior(const Discretization& disc, const Vector& reduced);
SparseMatrix restrict_matrix(const Discretization& disc, const SparseMatrix& A);

/// Binary cache. 16-byte header (magic, version, N, n as little-endian u32)
/// followed by length-prefixed little-endian f64 arrays.
void save_cache(const Discretization& disc, const std::string& path);
Discretization load_cache(const std::string& path);
std::string cache_key(const DomainSpec& domain, int n_per_axis);

}  // namespace normcrit
