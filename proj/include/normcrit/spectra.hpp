#pragma once

#include "normcrit/assembly.hpp"
#include "normcrit/domain.hpp"
#include "normcrit/types.hpp"

#include <vector>

namespace normcrit {

/// Smallest eigenpairs of the mode's generalized pencil (A, M), sorted
/// ascending and M-orthonormal.  Vectors are stored full length (zero on
/// the boundary in Dirichlet mode).  distinct_index[k] groups eigenvalues
/// equal within 1e-9 relative; groups are numbered from 1.
struct Spectrum {
  BoundaryMode mode;
  std::vector<double> lambdas;
  std::vector<Vector> vectors;
  std::vector<int> distinct_index;
  std::vector<double> residuals;

  int num_distinct() const {
    return distinct_index.empty() ? 0 : distinct_index.back();
  }
  double lambda_of_group(int j) const;       // j >= 1
  Index first_in_group(int j) const;
};

/// Solves for the count smallest eigenpairs.  Dense below dimension 2000,
/// otherwise shift-invert Lanczos with full reorthogonalization.
Spectrum solve_eigs(const Discretization& disc, const BoundaryMode& mode,
                    int count);

/// Smallest value of (u^T (K+B) u) / (u^T B u) over the discrete space,
/// taken on the complement of the kernel of the boundary form (interior
/// components are eliminated by a harmonic-extension Schur complement).
/// Equals 1 for every catalog domain since constants attain it.
double lambda_tilde(const Discretization& disc);

/// Eigenspace splitting for the symmetric multiplicity construction.
struct FountainFrame {
  int j = 0;          // distinct-eigenvalue group index, >= 2
  double lambda_j = 0.0;
  Matrix Y;           // columns: all eigenvectors with lambda <= lambda_j
  Matrix Z;           // columns: computed eigenvectors M-orthogonal to Y_{j-1}
  double rho = 0.0;   // sqrt(mu lambda_j)
  double xi = 0.0;    // sqrt(((k-1)/k) mu lambda_j)
};

FountainFrame fountain_frame(const Spectrum& spec, int j, double mu,
                             double k_tune);

}  // namespace normcrit
