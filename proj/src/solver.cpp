#include "normcrit/solver.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace normcrit {

namespace {

Vector as_ops_coords(const PenalizedProblem& prob, const Vector& u) {
  if (u.size() == prob.ops.dim) return u;
  if (prob.ops.reduced && u.size() == prob.disc->num_nodes)
    return restrict_interior(*prob.disc, u);
  fail(ErrorCode::ConfigInvalid, "vector length does not match problem");
}

Vector to_full(const PenalizedProblem& prob, const Vector& z) {
  return prob.ops.reduced ? prolong_interior(*prob.disc, z) : z;
}

double energy_norm(const PenalizedProblem& prob, const Vector& z) {
  return std::sqrt(std::max(0.0, z.dot(prob.ops.A * z)));
}

double grad_scale(const PenalizedProblem& prob, const Vector& z) {
  return std::max(1.0, (prob.ops.A * z).norm());
}

double rayleigh(const PenalizedProblem& prob, const Vector& z) {
  const double m = mass_of(prob, z);
  if (!(m > 0.0)) return 1.0;
  return z.dot(prob.ops.A * z) / m;
}

// Scalar deflation factor in log space together with its u-gradient:
// log d = sum_i log(1 + 1/s_i) + log(1 + 1/t_i) with s/t the squared
// M-distances to +-u_i.  The deflated Newton step is the undeflated one
// scaled by 1 / (1 - grad(log d) . step).
struct DeflationState {
  double log_d = 0.0;
  Vector grad_log_d;  // zero-sized when inactive
};

DeflationState deflation_state(const PenalizedProblem& prob,
                               const Deflation* defl, const Vector& z) {
  DeflationState st;
  if (defl == nullptr || defl->solutions.empty()) return st;
  st.grad_log_d = Vector::Zero(z.size());
  for (const Vector& ui : defl->solutions) {
    for (double sign : {1.0, -1.0}) {
      const Vector diff = z - sign * ui;
      const Vector Md = prob.ops.M * diff;
      const double s = std::max(diff.dot(Md), 1e-300);
      st.log_d += std::log1p(1.0 / s);
      st.grad_log_d -= 2.0 / (s * (s + 1.0)) * Md;
    }
  }
  return st;
}

double deflate_scale(const DeflationState& ds, const Vector& step) {
  if (ds.grad_log_d.size() == 0) return 1.0;
  const double denom = 1.0 - ds.grad_log_d.dot(step);
  return std::abs(denom) > 1e-8 ? 1.0 / denom : 1.0;
}

// Solves (H0 + c v v^T) x = b through a sparse LU of H0 (Sherman-Morrison),
// regularizing the diagonal if the factorization breaks down.
class HessianSolver {
 public:
  void factor(const HessianParts& hp) {
    hp_ = &hp;
    SparseMatrix H0 = hp.H0;
    double reg = 0.0;
    bool ok = false;
    for (int attempt = 0; attempt < 6 && !ok; ++attempt) {
      lu_.compute(H0);
      ok = lu_.info() == Eigen::Success;
      if (!ok) {
        reg = reg == 0.0 ? 1e-10 : reg * 100.0;
        SparseMatrix R(hp.H0.rows(), hp.H0.cols());
        R.setIdentity();
        H0 = hp.H0 + SparseMatrix(reg * R);
      }
    }
    if (!ok)
      fail(ErrorCode::SolverNoConvergence, "Hessian factorization failed");
    H0inv_v_ = lu_.solve(hp.rank1);
  }

  Vector solve(const Vector& b) const {
    Vector x = lu_.solve(b);
    const double c = hp_->rank1_coeff;
    const double denom = 1.0 + c * hp_->rank1.dot(H0inv_v_);
    if (std::abs(denom) < 1e-14) return x;
    return x - (c * hp_->rank1.dot(x) / denom) * H0inv_v_;
  }

  Vector apply(const Vector& x) const {
    return hp_->H0 * x + hp_->rank1_coeff * hp_->rank1.dot(x) * hp_->rank1;
  }

 private:
  const HessianParts* hp_ = nullptr;
  Eigen::SparseLU<SparseMatrix> lu_;
  Vector H0inv_v_;
};

SolveCase classify(const PenalizedProblem& prob, double mass, double lambda,
                   double lambda_scale) {
  if (std::abs(mass - prob.mu) <= prob.tol.mass * prob.mu)
    return SolveCase::MassAttained;
  if (lambda <= prob.tol.lambda_zero * lambda_scale)
    return SolveCase::MassDeficitLambdaZero;
  return SolveCase::NoConverge;
}

void finish_record(const PenalizedProblem& prob, CriticalPointRecord& rec,
                   const Vector& z, double lambda_machinery,
                   double stationarity_norm) {
  rec.u = to_full(prob, z);
  rec.lambda = lambda_machinery;
  rec.lambda_pde = lambda_machinery - prob.ops.shift;
  rec.mass = mass_of(prob, z);
  rec.energy_unpenalized = energy(prob, z).total_unpenalized;
  rec.grad_norm = stationarity_norm;
  rec.cerami_norm = (1.0 + energy_norm(prob, z)) * stationarity_norm;
  rec.pde_residual = pde_residual_norm(prob, z, lambda_machinery);
  rec.sign_changes = count_sign_changes(rec.u, *prob.disc);
  rec.is_constant = detect_constant(rec.u, *prob.disc);
}

}  // namespace

const char* solve_case_name(SolveCase c) {
  switch (c) {
    case SolveCase::MassAttained: return "MassAttained";
    case SolveCase::MassDeficitLambdaZero: return "MassDeficitLambdaZero";
    case SolveCase::NoConverge: return "NoConverge";
  }
  return "Unknown";
}

CriticalPointRecord critical_point(const PenalizedProblem& prob,
                                   const Vector& seed, int newton_budget,
                                   const Deflation* deflation) {
  Vector z = as_ops_coords(prob, seed);
  if (mass_of(prob, z) >= prob.mu)
    fail(ErrorCode::MassAtOrAboveMu, "seed mass must be below mu");

  const double wall = prob.mu * (1.0 - 1e-12);
  Vector g = grad_energy(prob, z);
  bool converged = g.norm() <= prob.tol.grad * grad_scale(prob, z);

  for (int iter = 0; iter < newton_budget && !converged; ++iter) {
    const HessianParts hp = hessian_parts(prob, z);
    HessianSolver hs;
    hs.factor(hp);
    const DeflationState ds = deflation_state(prob, deflation, z);

    Vector newton = -hs.solve(g);
    newton *= deflate_scale(ds, newton);
    const double cap = 10.0 * (1.0 + std::sqrt(prob.mu));
    const double znorm = std::sqrt(mass_of(prob, z));
    if (std::sqrt(newton.dot(prob.ops.M * newton)) > cap + znorm)
      newton *= (cap + znorm) / std::sqrt(newton.dot(prob.ops.M * newton));

    const double merit = ds.log_d + std::log(g.norm());
    bool accepted = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      // Newton first; steepest descent on ||grad||^2 when it stalls.
      const Vector dir = attempt == 0 ? newton : Vector(-hs.apply(g));
      double tau = 1.0;
      for (int ls = 0; ls < 40; ++ls, tau *= 0.5) {
        Vector zn = z + tau * dir;
        if (mass_of(prob, zn) >= wall) continue;
        Vector gn = grad_energy(prob, zn);
        const double merit_n =
            deflation_state(prob, deflation, zn).log_d + std::log(gn.norm());
        if (merit_n < merit - 1e-14 || gn.norm() == 0.0) {
          z = std::move(zn);
          g = std::move(gn);
          accepted = true;
          break;
        }
      }
    }
    if (!accepted)
      fail(ErrorCode::NoConverge,
           "line search stalled at |grad| = " + std::to_string(g.norm()));
    converged = g.norm() <= prob.tol.grad * grad_scale(prob, z);
  }
  if (!converged) fail(ErrorCode::NoConverge, "Newton budget exhausted");
  if (std::sqrt(mass_of(prob, z)) <= 1e-8 * std::sqrt(prob.mu))
    fail(ErrorCode::CollapsedToZero, "search collapsed to the trivial point");

  const EnergyBreakdown e = energy(prob, z);
  const double lambda = 2.0 / prob.mu * penalty(e.mass / prob.mu, prob.r).df;

  CriticalPointRecord rec;
  rec.r_final = prob.r;
  rec.energy_penalized = e.total_penalized;
  rec.positive_level = e.total_penalized > 0.0;
  finish_record(prob, rec, z, lambda, g.norm());
  rec.solve_case = classify(prob, rec.mass, lambda, rayleigh(prob, z));
  return rec;
}

double path_max_amplitude(const PenalizedProblem& prob, const Vector& profile) {
  const Vector z = as_ops_coords(prob, profile);
  const double m0 = mass_of(prob, z);
  if (!(m0 > 0.0)) fail(ErrorCode::ConfigInvalid, "profile must be nonzero");
  const double to_wall = std::sqrt(m0 / prob.mu);  // wall at t = 1/to_wall
  auto value = [&](double t) {
    const EnergyBreakdown e = energy(prob, Vector((t / to_wall) * z));
    return e.mass_at_or_above_mu ? -std::numeric_limits<double>::infinity()
                                 : e.total_penalized;
  };
  const int grid = 128;
  double best_t = 0.5, best_v = -std::numeric_limits<double>::infinity();
  for (int i = 1; i < grid; ++i) {
    const double t = static_cast<double>(i) / grid;
    const double v = value(t);
    if (v > best_v) {
      best_v = v;
      best_t = t;
    }
  }
  double a = std::max(1e-6, best_t - 1.0 / grid);
  double b = std::min(1.0 - 1e-9, best_t + 1.0 / grid);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = value(c), fd = value(d);
  for (int it = 0; it < 80; ++it) {
    if (fc > fd) {
      b = d; d = c; fd = fc;
      c = b - gr * (b - a);
      fc = value(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + gr * (b - a);
      fd = value(d);
    }
  }
  return 0.5 * (a + b) / to_wall;
}

namespace {

// Newton on the bordered stationarity system on the sphere:
//   A z - lambda M z - w f(z) [- wB g(z)] = 0,   z^T M z = mu.
bool polish_on_sphere(const PenalizedProblem& prob, Vector& z, double& lambda,
                      const Deflation* deflation) {
  const Index n = z.size();
  auto fnorm = [&](const Vector& zz, double ll) {
    const Vector F1 = pde_residual_vector(prob, zz, ll);
    const double F2 = 0.5 * (prob.mu - mass_of(prob, zz));
    return std::sqrt(F1.squaredNorm() + F2 * F2);
  };
  const double target = 1e-13 * (1.0 + std::abs(lambda)) * grad_scale(prob, z);
  const double fallback = 1e-9 * (1.0 + std::abs(lambda)) * grad_scale(prob, z);

  for (int iter = 0; iter < 60; ++iter) {
    const double fn = fnorm(z, lambda);
    if (fn <= target) return true;

    SparseMatrix J = pde_jacobian(prob, z, lambda);
    const Vector Mz = prob.ops.M * z;
    std::vector<Triplet> t;
    t.reserve(J.nonZeros() + 2 * static_cast<size_t>(n));
    for (Index k = 0; k < J.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(J, k); it; ++it)
        t.emplace_back(it.row(), it.col(), it.value());
    for (Index i = 0; i < n; ++i)
      if (Mz[i] != 0.0) {
        t.emplace_back(i, n, -Mz[i]);
        t.emplace_back(n, i, -Mz[i]);
      }
    SparseMatrix Jb(n + 1, n + 1);
    Jb.setFromTriplets(t.begin(), t.end());
    Eigen::SparseLU<SparseMatrix> lu(Jb);
    if (lu.info() != Eigen::Success) return fn <= fallback;

    Vector rhs(n + 1);
    rhs.head(n) = -pde_residual_vector(prob, z, lambda);
    rhs[n] = -0.5 * (prob.mu - mass_of(prob, z));
    Vector step = lu.solve(rhs);
    const DeflationState ds = deflation_state(prob, deflation, z);
    step *= deflate_scale(ds, Vector(step.head(n)));

    double tau = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 30; ++ls, tau *= 0.5) {
      Vector zn = z + tau * step.head(n);
      const double ln = lambda + tau * step[n];
      if (fnorm(zn, ln) < fn * (1.0 - 1e-4 * tau)) {
        z = std::move(zn);
        lambda = ln;
        moved = true;
        break;
      }
    }
    if (!moved) return fn <= fallback;
  }
  return fnorm(z, lambda) <= fallback;
}

// Newton for the unconstrained lambda = 0 stationarity equation; confirms
// the mass-deficit alternative.
bool polish_lambda_zero(const PenalizedProblem& prob, Vector& z) {
  for (int iter = 0; iter < 60; ++iter) {
    const Vector F = pde_residual_vector(prob, z, 0.0);
    if (F.norm() <= 1e-13 * grad_scale(prob, z)) return true;
    Eigen::SparseLU<SparseMatrix> lu(pde_jacobian(prob, z, 0.0));
    if (lu.info() != Eigen::Success) return false;
    const Vector step = -lu.solve(F);
    double tau = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 30; ++ls, tau *= 0.5) {
      Vector zn = z + tau * step;
      if (pde_residual_vector(prob, zn, 0.0).norm() <
          F.norm() * (1.0 - 1e-4 * tau)) {
        z = std::move(zn);
        moved = true;
        break;
      }
    }
    if (!moved) return false;
  }
  return pde_residual_vector(prob, z, 0.0).norm() <=
         1e-10 * grad_scale(prob, z);
}

}  // namespace

CriticalPointRecord continue_in_r(const PenalizedProblem& prob,
                                  const Vector& seed,
                                  const ContinuationSchedule& schedule,
                                  const Deflation* deflation) {
  if (!(schedule.r0 > 1.0) || !(schedule.growth > 1.0) ||
      !(schedule.r_max >= schedule.r0))
    fail(ErrorCode::ConfigInvalid, "invalid continuation schedule");

  PenalizedProblem stage = prob;
  Vector warm = as_ops_coords(prob, seed);
  std::vector<StageRow> trace;
  CriticalPointRecord last_stage;
  Vector last_z;
  bool have_stage = false;

  for (double r = schedule.r0; r <= schedule.r_max * (1.0 + 1e-12);
       r *= schedule.growth) {
    stage.r = r;
    // The barrier weakens as r grows, so the previous solution sits far
    // below the new stage's hill: re-amplify along its ray to the new
    // path maximum before the Newton search.
    Vector profile = warm * std::sqrt(prob.mu / mass_of(prob, warm));
    const double t_star = path_max_amplitude(stage, to_full(stage, profile));
    CriticalPointRecord rec;
    try {
      rec = critical_point(stage, to_full(stage, Vector(t_star * profile)),
                           schedule.newton_budget, deflation);
    } catch (const Error&) {
      if (!have_stage) throw;
      break;  // keep the stages we have and land from them
    }
    Vector z = as_ops_coords(stage, rec.u);

    StageRow row;
    row.r = r;
    row.energy_penalized = rec.energy_penalized;
    row.energy = rec.energy_unpenalized;
    row.mass = rec.mass;
    row.lambda = rec.lambda;
    row.grad_norm = rec.grad_norm;
    trace.push_back(row);

    double drift = std::numeric_limits<double>::infinity();
    if (have_stage) {
      const Vector d = z - last_z;
      drift = std::sqrt(std::max(0.0, d.dot(prob.ops.M * d)));
    }
    last_z = z;
    last_stage = rec;
    have_stage = true;
    if (schedule.warm_start) warm = z;

    const double pen_value = penalty(rec.mass / prob.mu, r).f;
    if (pen_value <= prob.tol.pen &&
        drift <= prob.tol.drift * std::sqrt(prob.mu))
      break;
  }
  if (!have_stage)
    fail(ErrorCode::NoConverge, "no continuation stage converged");

  CriticalPointRecord result = last_stage;
  result.trace = trace;

  // Land on the constraint sphere (case i) or confirm the lambda = 0
  // mass-deficit alternative (case ii).
  const double lambda_scale = rayleigh(stage, last_z);
  if (schedule.polish) {
    Vector z = last_z;
    double lambda = last_stage.lambda;
    if (polish_on_sphere(stage, z, lambda, deflation)) {
      result.solve_case = SolveCase::MassAttained;
      const double res = (pde_residual_vector(stage, z, lambda)).norm();
      finish_record(stage, result, z, lambda, res);
      return result;
    }
    if (last_stage.lambda <= prob.tol.lambda_zero * lambda_scale) {
      Vector z0 = last_z;
      if (polish_lambda_zero(stage, z0)) {
        result.solve_case = SolveCase::MassDeficitLambdaZero;
        const double res = pde_residual_vector(stage, z0, 0.0).norm();
        finish_record(stage, result, z0, 0.0, res);
        return result;
      }
    }
    result.solve_case = SolveCase::NoConverge;
    return result;
  }
  result.solve_case =
      classify(prob, result.mass, result.lambda, lambda_scale);
  return result;
}

std::vector<CriticalPointRecord> multiplicity(
    const PenalizedProblem& prob, int m, const Spectrum& spectrum,
    const std::vector<FountainFrame>& frames,
    const ContinuationSchedule& sch) {
  if (!prob.f.odd)
    fail(ErrorCode::ConfigInvalid, "multiplicity requires an odd nonlinearity");
  if (prob.g && !prob.g->odd)
    fail(ErrorCode::ConfigInvalid, "multiplicity requires an odd boundary term");
  if (m < 1) fail(ErrorCode::ConfigInvalid, "m must be >= 1");
  if (static_cast<int>(frames.size()) < m - 1)
    fail(ErrorCode::ConfigInvalid, "need m - 1 fountain frames");

  std::vector<CriticalPointRecord> records;
  Deflation defl;
  for (int i = 0; i < m; ++i) {
    int frame_j = 1;
    Vector profile = spectrum.vectors.front();
    if (i > 0) {
      const FountainFrame& fr = frames[static_cast<size_t>(i - 1)];
      frame_j = fr.j;
      profile =
          spectrum.vectors[static_cast<size_t>(spectrum.first_in_group(fr.j))];
    }
    Vector z = as_ops_coords(prob, profile);
    z *= std::sqrt(prob.mu / mass_of(prob, z));
    PenalizedProblem seed_prob = prob;
    seed_prob.r = sch.r0;
    const double t_star = path_max_amplitude(seed_prob, to_full(prob, z));

    for (int attempt = 0; attempt < 3; ++attempt) {
      const double s =
          t_star * (attempt == 0 ? 1.0 : attempt == 1 ? 0.7 : 1.2);
      CriticalPointRecord rec;
      try {
        rec = continue_in_r(prob, to_full(prob, Vector(s * z)), sch, &defl);
      } catch (const Error&) {
        continue;
      }
      if (rec.solve_case != SolveCase::MassAttained) continue;
      const Vector zr = as_ops_coords(prob, rec.u);
      bool distinct = true;
      for (const Vector& old : defl.solutions) {
        const double dist = std::min(solution_distance(prob, zr, old),
                                     solution_distance(prob, zr, Vector(-old)));
        if (dist < prob.tol.distinct * std::sqrt(prob.mu)) {
          distinct = false;
          break;
        }
      }
      if (!distinct) continue;
      rec.seed_id = i == 0 ? "phi_1" : "phi_group_" + std::to_string(frame_j);
      for (size_t p = 0; p < records.size(); ++p)
        rec.deflation_parents.push_back(static_cast<int>(p));
      defl.solutions.push_back(zr);
      records.push_back(std::move(rec));
      break;
    }
  }
  std::sort(records.begin(), records.end(),
            [](const CriticalPointRecord& a, const CriticalPointRecord& b) {
              return a.energy_unpenalized < b.energy_unpenalized;
            });
  return records;
}

bool detect_constant(const Vector& u, const Discretization& disc) {
  const Vector w = disc.M * Vector::Ones(disc.num_nodes);
  const double vol = w.sum();
  const double mean = w.dot(u) / vol;
  double var = 0.0;
  for (Index i = 0; i < u.size(); ++i)
    var += w[i] * (u[i] - mean) * (u[i] - mean);
  var /= vol;
  return var <= 1e-10 * mean * mean;
}

int count_sign_changes(const Vector& u, const Discretization& disc) {
  // Nodal domains of the grid graph; a k-bump profile has k of them.
  const double cutoff = 1e-8 * u.cwiseAbs().maxCoeff();
  std::vector<int> label(static_cast<size_t>(disc.num_nodes), -1);
  int components = 0;
  std::vector<Index> stack;
  const int N = disc.domain.dimension;
  for (Index start = 0; start < disc.num_nodes; ++start) {
    if (label[static_cast<size_t>(start)] >= 0 ||
        std::abs(u[start]) <= cutoff)
      continue;
    ++components;
    stack.assign(1, start);
    label[static_cast<size_t>(start)] = components;
    const int sgn = u[start] > 0.0 ? 1 : -1;
    while (!stack.empty()) {
      const Index node = stack.back();
      stack.pop_back();
      Index coords[3], rem = node;
      for (int d = 0; d < N; ++d) {
        coords[d] = rem % disc.nodes_per_axis[d];
        rem /= disc.nodes_per_axis[d];
      }
      for (int d = 0; d < N; ++d) {
        for (int dir : {-1, 1}) {
          const Index c = coords[d] + dir;
          if (c < 0 || c >= disc.nodes_per_axis[d]) continue;
          Index nb = node + dir * (d == 0 ? 1
                                   : d == 1
                                       ? disc.nodes_per_axis[0]
                                       : disc.nodes_per_axis[0] *
                                             disc.nodes_per_axis[1]);
          if (label[static_cast<size_t>(nb)] >= 0) continue;
          if (std::abs(u[nb]) <= cutoff) continue;
          if ((u[nb] > 0.0 ? 1 : -1) != sgn) continue;
          label[static_cast<size_t>(nb)] = components;
          stack.push_back(nb);
        }
      }
    }
  }
  return std::max(0, components - 1);
}

double solution_distance(const PenalizedProblem& prob, const Vector& a,
                         const Vector& b) {
  const Vector za = as_ops_coords(prob, a);
  const Vector zb = as_ops_coords(prob, b);
  const Vector d = za - zb;
  return std::sqrt(std::max(0.0, d.dot(prob.ops.M * d)));
}

}  // namespace normcrit
