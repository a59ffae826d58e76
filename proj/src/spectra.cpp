#include "normcrit/spectra.hpp"

#include "normcrit/energy.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace normcrit {

namespace {

constexpr Index kDenseLimit = 2000;
constexpr double kGroupTol = 1e-9;

struct EigPairs {
  std::vector<double> lambdas;
  std::vector<Vector> vectors;  // reduced-space coordinates, M-orthonormal
};

EigPairs dense_eigs(const SparseMatrix& A, const SparseMatrix& M, int count) {
  Matrix Ad(A), Md(M);
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(Ad, Md);
  if (es.info() != Eigen::Success)
    fail(ErrorCode::SolverNoConvergence, "dense generalized eigensolver failed");
  EigPairs out;
  for (int k = 0; k < count; ++k) {
    out.lambdas.push_back(es.eigenvalues()[k]);
    out.vectors.emplace_back(es.eigenvectors().col(k));
  }
  return out;
}

// Shift-invert Lanczos at sigma = 0 on the SPD pencil (A, M): M-orthonormal
// Krylov basis of A^{-1} M with full reorthogonalization, so the smallest
// pencil eigenvalues are reciprocals of the dominant Ritz values.  A single
// Krylov space carries one copy of each eigenvalue, so converged pairs are
// locked and the sweep restarts in their M-orthogonal complement until
// repeated eigenvalues are resolved.
EigPairs lanczos_eigs(const SparseMatrix& A, const SparseMatrix& M,
                      int count) {
  const Index n = A.rows();
  Eigen::SimplicialLDLT<SparseMatrix> solver(A);
  if (solver.info() != Eigen::Success)
    fail(ErrorCode::SolverNoConvergence, "operator factorization failed");

  std::mt19937_64 rng(0x9e3779b97f4a7c15ull);  // fixed seed: deterministic
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  std::vector<Vector> locked;
  std::vector<double> locked_lam;
  const int sweep_len = static_cast<int>(
      std::min<Index>(n, std::max(80, 10 * count)));

  for (int restart = 0; restart < 8 && static_cast<int>(locked.size()) < count;
       ++restart) {
    Matrix V(n, sweep_len + 1);
    std::vector<double> alpha, beta;

    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = unif(rng);
    for (const Vector& q : locked) v -= q.dot(M * v) * q;
    v /= std::sqrt(v.dot(M * v));
    V.col(0) = v;

    int m = 0;
    for (int step = 0; step < sweep_len; ++step) {
      Vector w = solver.solve(M * V.col(step));
      alpha.push_back(V.col(step).dot(M * w));
      // full reorthogonalization against locked + current basis, two passes
      for (int pass = 0; pass < 2; ++pass) {
        for (const Vector& q : locked) w -= q.dot(M * w) * q;
        for (int i = 0; i <= step; ++i) w -= V.col(i).dot(M * w) * V.col(i);
      }
      const double b = std::sqrt(std::max(0.0, w.dot(M * w)));
      m = step + 1;
      if (b < 1e-14) break;
      beta.push_back(b);
      V.col(step + 1) = w / b;
    }

    Matrix T = Matrix::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      T(i, i) = alpha[static_cast<size_t>(i)];
      if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[static_cast<size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(T);
    if (es.info() != Eigen::Success)
      fail(ErrorCode::SolverNoConvergence, "tridiagonal eigensolver failed");

    // Harvest converged Ritz pairs from the dominant end.
    for (int col = m - 1; col >= 0; --col) {
      const double theta = es.eigenvalues()[col];
      if (!(theta > 0.0)) break;
      Vector y = V.leftCols(m) * es.eigenvectors().col(col);
      for (const Vector& q : locked) y -= q.dot(M * y) * q;
      const double nrm = std::sqrt(y.dot(M * y));
      if (!(nrm > 1e-8)) continue;
      y /= nrm;
      const double lam = y.dot(A * y) / y.dot(M * y);
      const double res = (A * y - lam * (M * y)).norm();
      if (res > 1e-10 * (1.0 + std::abs(lam))) break;
      locked.push_back(std::move(y));
      locked_lam.push_back(lam);
      if (static_cast<int>(locked.size()) >= count + 2) break;
    }
  }
  if (static_cast<int>(locked.size()) < count)
    fail(ErrorCode::SolverNoConvergence,
         "Lanczos locked only " + std::to_string(locked.size()) + " of " +
             std::to_string(count) + " pairs");

  std::vector<size_t> order(locked.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return locked_lam[a] < locked_lam[b];
  });
  EigPairs out;
  for (int k = 0; k < count; ++k) {
    out.lambdas.push_back(locked_lam[order[static_cast<size_t>(k)]]);
    out.vectors.push_back(locked[order[static_cast<size_t>(k)]]);
  }
  return out;
}

// Final M-orthonormalization pass (modified Gram-Schmidt, two sweeps).
void orthonormalize(const SparseMatrix& M, EigPairs& pairs) {
  for (size_t k = 0; k < pairs.vectors.size(); ++k) {
    Vector& v = pairs.vectors[k];
    for (int pass = 0; pass < 2; ++pass)
      for (size_t i = 0; i < k; ++i)
        v -= pairs.vectors[i].dot(M * v) * pairs.vectors[i];
    v /= std::sqrt(v.dot(M * v));
  }
}

}  // namespace

double Spectrum::lambda_of_group(int j) const {
  return lambdas[static_cast<size_t>(first_in_group(j))];
}

Index Spectrum::first_in_group(int j) const {
  for (size_t k = 0; k < distinct_index.size(); ++k)
    if (distinct_index[k] == j) return static_cast<Index>(k);
  fail(ErrorCode::CountExceedsDimension,
       "distinct group " + std::to_string(j) + " not computed");
}

Spectrum solve_eigs(const Discretization& disc, const BoundaryMode& mode,
                    int count) {
  const ModeOperators ops = build_operators(disc, mode);
  if (count < 1 || count > ops.dim)
    fail(ErrorCode::CountExceedsDimension,
         "count must lie in [1, " + std::to_string(ops.dim) + "]");

  EigPairs pairs = ops.dim < kDenseLimit ? dense_eigs(ops.A, ops.M, count)
                                         : lanczos_eigs(ops.A, ops.M, count);
  orthonormalize(ops.M, pairs);

  Spectrum spec;
  spec.mode = mode;
  for (int k = 0; k < count; ++k) {
    const Vector& v = pairs.vectors[static_cast<size_t>(k)];
    const double lam = pairs.lambdas[static_cast<size_t>(k)];
    const double res = (ops.A * v - lam * (ops.M * v)).norm();
    if (res > 1e-9 * std::max(1.0, std::abs(lam)))
      fail(ErrorCode::SolverNoConvergence,
           "eigenpair residual " + std::to_string(res) + " too large");
    spec.lambdas.push_back(lam);
    spec.residuals.push_back(res);
    spec.vectors.push_back(ops.reduced ? prolong_interior(disc, v) : v);
  }
  // Distinct-value grouping at 1e-9 relative tolerance.
  int group = 0;
  double prev = -std::numeric_limits<double>::infinity();
  for (double lam : spec.lambdas) {
    if (group == 0 ||
        std::abs(lam - prev) > kGroupTol * std::max(1.0, std::abs(lam)))
      ++group;
    spec.distinct_index.push_back(group);
    prev = lam;
  }
  return spec;
}

double lambda_tilde(const Discretization& disc) {
  const auto& bn = disc.boundary_nodes;
  const auto& in = disc.interior_nodes;
  if (bn.empty()) fail(ErrorCode::DegenerateBoundaryForm, "no boundary dofs");
  const Index nb = static_cast<Index>(bn.size());
  const Index ni = static_cast<Index>(in.size());

  // Partition K + B by interior/boundary dofs and eliminate the interior
  // block (the minimizing extension), leaving a dense pencil on the trace.
  std::vector<Index> pos(disc.num_nodes, -1);
  for (Index i = 0; i < ni; ++i) pos[in[static_cast<size_t>(i)]] = i;
  std::vector<Index> bpos(disc.num_nodes, -1);
  for (Index i = 0; i < nb; ++i) bpos[bn[static_cast<size_t>(i)]] = i;

  const SparseMatrix KB = disc.K + disc.B;
  std::vector<Triplet> tii, tib, tbb, tBbb;
  for (Index k = 0; k < KB.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(KB, k); it; ++it) {
      const Index r = it.row(), c = it.col();
      if (pos[r] >= 0 && pos[c] >= 0) tii.emplace_back(pos[r], pos[c], it.value());
      else if (pos[r] >= 0 && bpos[c] >= 0) tib.emplace_back(pos[r], bpos[c], it.value());
      else if (bpos[r] >= 0 && bpos[c] >= 0) tbb.emplace_back(bpos[r], bpos[c], it.value());
    }
  for (Index k = 0; k < disc.B.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(disc.B, k); it; ++it)
      if (bpos[it.row()] >= 0 && bpos[it.col()] >= 0)
        tBbb.emplace_back(bpos[it.row()], bpos[it.col()], it.value());

  SparseMatrix Kii(ni, ni), Kib(ni, nb), Kbb(nb, nb), Bbb(nb, nb);
  Kii.setFromTriplets(tii.begin(), tii.end());
  Kib.setFromTriplets(tib.begin(), tib.end());
  Kbb.setFromTriplets(tbb.begin(), tbb.end());
  Bbb.setFromTriplets(tBbb.begin(), tBbb.end());

  Matrix S(Kbb);
  if (ni > 0) {
    Eigen::SimplicialLDLT<SparseMatrix> solver(Kii);
    if (solver.info() != Eigen::Success)
      fail(ErrorCode::SolverNoConvergence, "interior block factorization failed");
    const Matrix X = solver.solve(Matrix(Kib));
    S -= Matrix(Kib).transpose() * X;
  }
  Matrix Bd(Bbb);
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(S, Bd);
  if (es.info() != Eigen::Success)
    fail(ErrorCode::DegenerateBoundaryForm, "trace pencil solve failed");
  return es.eigenvalues()[0];
}

FountainFrame fountain_frame(const Spectrum& spec, int j, double mu,
                             double k_tune) {
  if (j < 2) fail(ErrorCode::ConfigInvalid, "frame index j must be >= 2");
  if (!(k_tune > 1.0)) fail(ErrorCode::ConfigInvalid, "k_tune must exceed 1");
  if (spec.num_distinct() < j)
    fail(ErrorCode::CountExceedsDimension,
         "spectrum holds fewer than j distinct eigenvalues");
  const double lam_j = spec.lambda_of_group(j);
  const double lam_prev = spec.lambda_of_group(j - 1);
  if (std::abs(lam_j - lam_prev) <= kGroupTol * std::max(1.0, std::abs(lam_j)))
    fail(ErrorCode::NonDistinctEigenvalue,
         "lambda_j ties lambda_{j-1} within grouping tolerance");

  FountainFrame frame;
  frame.j = j;
  frame.lambda_j = lam_j;
  std::vector<Index> ycols, zcols;
  for (size_t k = 0; k < spec.lambdas.size(); ++k) {
    if (spec.distinct_index[k] <= j) ycols.push_back(static_cast<Index>(k));
    if (spec.distinct_index[k] >= j) zcols.push_back(static_cast<Index>(k));
  }
  const Index n = spec.vectors.front().size();
  frame.Y.resize(n, static_cast<Index>(ycols.size()));
  for (size_t c = 0; c < ycols.size(); ++c)
    frame.Y.col(static_cast<Index>(c)) =
        spec.vectors[static_cast<size_t>(ycols[c])];
  frame.Z.resize(n, static_cast<Index>(zcols.size()));
  for (size_t c = 0; c < zcols.size(); ++c)
    frame.Z.col(static_cast<Index>(c)) =
        spec.vectors[static_cast<size_t>(zcols[c])];
  frame.rho = std::sqrt(mu * lam_j);
  frame.xi = std::sqrt((k_tune - 1.0) / k_tune * mu * lam_j);
  return frame;
}

}  // namespace normcrit
