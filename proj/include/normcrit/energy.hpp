#pragma once

#include "normcrit/assembly.hpp"
#include "normcrit/domain.hpp"
#include "normcrit/nonlinearity.hpp"
#include "normcrit/penalty.hpp"
#include "normcrit/types.hpp"

#include <memory>
#include <optional>

namespace normcrit {

/// Tolerance bundle.  grad / mass / distinct / pen / drift are relative
/// factors (to the gradient scale, mu, sqrt(mu), 1, sqrt(mu)); resid and
/// lambda_zero are absolute on the scaled residual and on lambda/lambda_1.
struct Tolerances {
  double grad = 1e-10;
  double mass = 1e-8;
  double resid = 1e-7;
  double distinct = 1e-4;
  double pen = 1e-6;
  double drift = 1e-5;
  double lambda_zero = 1e-6;
};

/// Quadratic-form operators of one boundary mode, reduced for Dirichlet.
///
/// A = K (+ B for Robin) + shift * M realizes the squared norm of the mode;
/// w and wB are the lumped interior/boundary quadrature weights.  The
/// Lagrange multiplier of the original PDE is the machinery multiplier
/// minus `shift` (Neumann runs with shift = 1, i.e. the -Lap + I operator).
struct ModeOperators {
  SparseMatrix A;
  SparseMatrix M;
  Vector w;        // lumped interior weights, M * 1 restricted
  Vector wB;       // lumped boundary weights, B * 1 restricted (Robin)
  double shift = 0.0;
  bool reduced = false;  // true iff Dirichlet elimination was applied
  Index dim = 0;
};

ModeOperators build_operators(const Discretization& disc,
                              const BoundaryMode& mode, double shift = 0.0);

/// Bundles everything a solve needs.  Immutable after construction.
struct PenalizedProblem {
  std::shared_ptr<const Discretization> disc;
  BoundaryMode mode;
  NonlinearitySpec f;
  std::optional<NonlinearitySpec> g;  // Robin boundary term
  double mu = 1.0;
  double r = 2.0;
  double operator_shift = 0.0;  // extra s*M added to the quadratic form
  Tolerances tol;
  ModeOperators ops;
};

PenalizedProblem make_problem(std::shared_ptr<const Discretization> disc,
                              const BoundaryMode& mode,
                              const NonlinearitySpec& f,
                              std::optional<NonlinearitySpec> g, double mu,
                              double r, const Tolerances& tol = {},
                              double operator_shift = 0.0);

/// Energy parts; total_penalized = quad - psi - pen and is +inf with the
/// mass_at_or_above_mu flag set once u^T M u >= mu.
struct EnergyBreakdown {
  double quad = 0.0;
  double psi = 0.0;
  double pen = 0.0;
  double total_penalized = 0.0;
  double total_unpenalized = 0.0;
  double mass = 0.0;
  bool mass_at_or_above_mu = false;
};

EnergyBreakdown energy(const PenalizedProblem& prob, const Vector& u);
Vector grad_energy(const PenalizedProblem& prob, const Vector& u);
double truncated_energy(const PenalizedProblem& prob, const Vector& u);

/// Hessian of the penalized energy split into its sparse part H0 and the
/// rank-one barrier part  -(4/mu^2) f_r''(s) (Mu)(Mu)^T.
struct HessianParts {
  SparseMatrix H0;
  Vector rank1;        // Mu
  double rank1_coeff;  // -(4/mu^2) f_r''(s)
};

HessianParts hessian_parts(const PenalizedProblem& prob, const Vector& u);

/// Same pieces without the barrier, with multiplier lambda in its place:
/// H = A - lambda M - diag(w f'(u)) [- diag(wB g'(u))].
SparseMatrix pde_jacobian(const PenalizedProblem& prob, const Vector& u,
                          double lambda);

/// Residual of the stationarity equation A u = lambda M u + w f(u) [+ wB g(u)]
/// for a given multiplier, and its M^{-1}-weighted norm.
Vector pde_residual_vector(const PenalizedProblem& prob, const Vector& u,
                           double lambda);
double pde_residual_norm(const PenalizedProblem& prob, const Vector& u,
                         double lambda);

double mass_of(const PenalizedProblem& prob, const Vector& u);

}  // namespace normcrit
