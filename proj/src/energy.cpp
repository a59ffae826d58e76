#include "normcrit/energy.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <limits>

namespace normcrit {

ModeOperators build_operators(const Discretization& disc,
                              const BoundaryMode& mode, double shift) {
  if (!mode.valid()) fail(ErrorCode::ModeUnsupported, "illegal (alpha,zeta,gamma)");
  ModeOperators ops;
  const Vector w_full = disc.M * Vector::Ones(disc.num_nodes);
  const Vector wB_full = disc.B * Vector::Ones(disc.num_nodes);
  if (mode.is_dirichlet()) {
    ops.reduced = true;
    ops.M = restrict_matrix(disc, disc.M);
    ops.A = restrict_matrix(disc, disc.K);
    if (shift != 0.0) ops.A = ops.A + shift * ops.M;
    ops.w = restrict_interior(disc, w_full);
    ops.wB = Vector::Zero(ops.w.size());
    ops.shift = shift;
  } else if (mode.is_neumann()) {
    // Work with the shifted operator -Lap + I so the quadratic form is a norm.
    ops.M = disc.M;
    ops.shift = 1.0 + shift;
    ops.A = disc.K + ops.shift * ops.M;
    ops.w = w_full;
    ops.wB = Vector::Zero(ops.w.size());
  } else {
    ops.M = disc.M;
    ops.A = disc.K + disc.B;
    if (shift != 0.0) ops.A = ops.A + shift * ops.M;
    ops.w = w_full;
    ops.wB = wB_full;
    ops.shift = shift;
  }
  ops.A.makeCompressed();
  ops.M.makeCompressed();
  ops.dim = ops.A.rows();
  return ops;
}

PenalizedProblem make_problem(std::shared_ptr<const Discretization> disc,
                              const BoundaryMode& mode,
                              const NonlinearitySpec& f,
                              std::optional<NonlinearitySpec> g, double mu,
                              double r, const Tolerances& tol,
                              double operator_shift) {
  if (!(mu > 0.0)) fail(ErrorCode::ConfigInvalid, "mu must be positive");
  if (!(r > 1.0)) fail(ErrorCode::ConfigInvalid, "r must exceed 1");
  if (mode.is_robin() != g.has_value())
    fail(ErrorCode::ConfigInvalid,
         "boundary nonlinearity g is required exactly in Robin mode");
  PenalizedProblem prob;
  prob.disc = std::move(disc);
  prob.mode = mode;
  prob.f = f;
  prob.g = std::move(g);
  prob.mu = mu;
  prob.r = r;
  prob.operator_shift = operator_shift;
  prob.tol = tol;
  prob.ops = build_operators(*prob.disc, mode, operator_shift);
  return prob;
}

namespace {

// Public entry points accept either full-length nodal vectors or the
// reduced Dirichlet coordinates; internally everything runs reduced.
Vector ops_coords(const PenalizedProblem& prob, const Vector& u) {
  if (u.size() == prob.ops.dim) return u;
  if (prob.ops.reduced && u.size() == prob.disc->num_nodes)
    return restrict_interior(*prob.disc, u);
  fail(ErrorCode::ConfigInvalid, "vector length does not match problem");
}

}  // namespace

double mass_of(const PenalizedProblem& prob, const Vector& u_in) {
  const Vector u = ops_coords(prob, u_in);
  return u.dot(prob.ops.M * u);
}

EnergyBreakdown energy(const PenalizedProblem& prob, const Vector& u_in) {
  const Vector u = ops_coords(prob, u_in);
  EnergyBreakdown e;
  e.quad = 0.5 * u.dot(prob.ops.A * u);
  e.psi = prob.ops.w.dot(apply_F(prob.f, u));
  if (prob.g) e.psi += prob.ops.wB.dot(apply_F(*prob.g, u));
  e.mass = u.dot(prob.ops.M * u);
  e.total_unpenalized = e.quad - e.psi;
  if (e.mass >= prob.mu) {
    // +inf sentinel: line searches treat the far side of the wall as
    // infeasible instead of aborting.
    e.mass_at_or_above_mu = true;
    e.pen = std::numeric_limits<double>::infinity();
    e.total_penalized = std::numeric_limits<double>::infinity();
  } else {
    e.pen = penalty(e.mass / prob.mu, prob.r).f;
    e.total_penalized = e.quad - e.psi - e.pen;
  }
  return e;
}

Vector grad_energy(const PenalizedProblem& prob, const Vector& u_in) {
  const Vector u = ops_coords(prob, u_in);
  const double mass = u.dot(prob.ops.M * u);
  if (mass >= prob.mu)
    fail(ErrorCode::MassAtOrAboveMu, "gradient undefined at or past the wall");
  Vector g = prob.ops.A * u;
  g -= prob.ops.w.cwiseProduct(apply_f(prob.f, u));
  if (prob.g) g -= prob.ops.wB.cwiseProduct(apply_f(*prob.g, u));
  const double df = penalty(mass / prob.mu, prob.r).df;
  g -= (2.0 / prob.mu * df) * (prob.ops.M * u);
  if (u_in.size() != prob.ops.dim) return prolong_interior(*prob.disc, g);
  return g;
}

double truncated_energy(const PenalizedProblem& prob, const Vector& u) {
  const double mass = mass_of(prob, u);
  if (mass >= prob.mu) return -1.0;
  return beta_truncation(energy(prob, u).total_penalized);
}

HessianParts hessian_parts(const PenalizedProblem& prob, const Vector& u_in) {
  const Vector u = ops_coords(prob, u_in);
  const double mass = u.dot(prob.ops.M * u);
  if (mass >= prob.mu)
    fail(ErrorCode::MassAtOrAboveMu, "Hessian undefined at or past the wall");
  const PenaltyValue pv = penalty(mass / prob.mu, prob.r);
  HessianParts hp;
  hp.H0 = pde_jacobian(prob, u, 2.0 / prob.mu * pv.df);
  hp.rank1 = prob.ops.M * u;
  hp.rank1_coeff = -4.0 / (prob.mu * prob.mu) * pv.d2f;
  return hp;
}

SparseMatrix pde_jacobian(const PenalizedProblem& prob, const Vector& u_in,
                          double lambda) {
  const Vector u = ops_coords(prob, u_in);
  SparseMatrix J = prob.ops.A;
  SparseMatrix D(J.rows(), J.cols());
  Vector d = prob.ops.w.cwiseProduct(apply_fprime(prob.f, u));
  if (prob.g) d += prob.ops.wB.cwiseProduct(apply_fprime(*prob.g, u));
  std::vector<Triplet> t;
  t.reserve(d.size());
  for (Index i = 0; i < d.size(); ++i)
    if (d[i] != 0.0) t.emplace_back(i, i, d[i]);
  D.setFromTriplets(t.begin(), t.end());
  J = J - D - SparseMatrix(lambda * prob.ops.M);
  J.makeCompressed();
  return J;
}

Vector pde_residual_vector(const PenalizedProblem& prob, const Vector& u_in,
                           double lambda) {
  const Vector u = ops_coords(prob, u_in);
  Vector res = prob.ops.A * u - lambda * (prob.ops.M * u) -
               prob.ops.w.cwiseProduct(apply_f(prob.f, u));
  if (prob.g) res -= prob.ops.wB.cwiseProduct(apply_f(*prob.g, u));
  return res;
}

double pde_residual_norm(const PenalizedProblem& prob, const Vector& u,
                         double lambda) {
  const Vector res = pde_residual_vector(prob, u, lambda);
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(prob.ops.M);
  if (ldlt.info() != Eigen::Success)
    fail(ErrorCode::SolverNoConvergence, "mass matrix factorization failed");
  return std::sqrt(std::max(0.0, res.dot(ldlt.solve(res))));
}

}  // namespace normcrit
