#pragma once

#include "normcrit/energy.hpp"
#include "normcrit/spectra.hpp"
#include "normcrit/types.hpp"

#include <string>
#include <vector>

namespace normcrit {

enum class SolveCase { MassAttained, MassDeficitLambdaZero, NoConverge };

const char* solve_case_name(SolveCase c);

/// One stage of the r-continuation, as traced to CSV.
struct StageRow {
  double r = 0.0;
  double energy_penalized = 0.0;
  double energy = 0.0;
  double mass = 0.0;
  double lambda = 0.0;  // (2/mu) f_r'(mass/mu), the barrier multiplier
  double grad_norm = 0.0;
  int newton_iters = 0;
};

/// Converged critical point.  `lambda` is the multiplier of the machinery
/// (nonnegative at mass-attained limits); `lambda_pde` subtracts the
/// operator shift and multiplies u in the original equation (Neumann runs
/// carry shift 1).  In Dirichlet/Robin runs without extra shift the two
/// coincide.
struct CriticalPointRecord {
  Vector u;  // full-length nodal coefficients
  double r_final = 0.0;
  double lambda = 0.0;
  double lambda_pde = 0.0;
  double mass = 0.0;
  double energy_unpenalized = 0.0;
  double energy_penalized = 0.0;  // at r_final, before the sphere polish
  double pde_residual = 0.0;      // M^{-1}-weighted stationarity residual
  double grad_norm = 0.0;
  double cerami_norm = 0.0;       // (1 + ||u||_A) * grad_norm
  std::string seed_id;
  SolveCase solve_case = SolveCase::NoConverge;
  std::vector<StageRow> trace;
  std::vector<int> deflation_parents;
  int sign_changes = 0;
  bool is_constant = false;
  bool positive_level = true;  // penalized energy stayed positive
};

struct ContinuationSchedule {
  double r0 = 2.0;
  double growth = 2.0;
  double r_max = 16384.0;  // 2^14
  int newton_budget = 200;
  bool warm_start = true;
  bool polish = true;  // Newton on the sphere after the last stage
};

/// Deflation against previously found solutions: the gradient field is
/// multiplied by prod_i (1 + 1/||u - u_i||_M^2)(1 + 1/||u + u_i||_M^2).
struct Deflation {
  std::vector<Vector> solutions;  // reduced-space coordinates
};

/// Damped Newton search for a critical point of E_{r,mu} from `seed`
/// (full-length vector).  Line searches never cross the mass wall.
CriticalPointRecord critical_point(const PenalizedProblem& prob,
                                   const Vector& seed,
                                   int newton_budget = 200,
                                   const Deflation* deflation = nullptr);

/// Runs critical_point along the r-schedule with warm starts, then lands on
/// the constraint sphere (or classifies the mass-deficit alternative).
CriticalPointRecord continue_in_r(const PenalizedProblem& prob,
                                  const Vector& seed,
                                  const ContinuationSchedule& schedule,
                                  const Deflation* deflation = nullptr);

/// Amplitude of the path maximum t -> E_{r,mu}(t * profile) where `profile`
/// has mass mu; golden-section search on (0, 1).
double path_max_amplitude(const PenalizedProblem& prob, const Vector& profile);

/// Seeds solution 1 from phi_1 and solution i >= 2 from the xi-scaled
/// phi_{k_i}, deflating previously found +-u.  Returns whatever subset
/// converged, ordered by energy.
std::vector<CriticalPointRecord> multiplicity(
    const PenalizedProblem& prob, int m, const Spectrum& spectrum,
    const std::vector<FountainFrame>& frames, const ContinuationSchedule& sch);

/// True iff the nodal variance is <= 1e-10 * mean^2 (Neumann constants).
bool detect_constant(const Vector& u, const Discretization& disc);

/// Nodal-domain count minus one: 0 for a one-bump profile, k - 1 for k
/// alternating bumps along a line.
int count_sign_changes(const Vector& u, const Discretization& disc);

/// M-weighted distance used by the pairwise-distinct check.
double solution_distance(const PenalizedProblem& prob, const Vector& a,
                         const Vector& b);

}  // namespace normcrit
