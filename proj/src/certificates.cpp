#include "normcrit/certificates.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

namespace normcrit {

const char* gn_mode_name(GNMode mode) {
  switch (mode) {
    case GNMode::Interior: return "interior";
    case GNMode::InteriorH1: return "interior-h1";
    case GNMode::Trace: return "trace";
    case GNMode::NeumannH1: return "neumann-h1";
  }
  return "unknown";
}

namespace {

double beta_exponent(int N, double p) {
  return N * (0.5 - 1.0 / p);
}

// Gauss-Legendre rule on [0,1]; 4 points integrate |Q1|^p exactly for the
// polynomial exponents used here, so the discrete L^p norm is that of the
// interpolant itself and the sampled supremum stays below the true constant.
struct GaussRule {
  std::array<double, 4> x{0.06943184420297371, 0.33000947820757187,
                          0.6699905217924281, 0.9305681557970262};
  std::array<double, 4> w{0.1739274225687269, 0.3260725774312731,
                          0.3260725774312731, 0.1739274225687269};
};

// int_Omega |u_h|^p of the multilinear interpolant, with its gradient with
// respect to the full-length nodal values accumulated into grad.
double interior_lp(const Discretization& disc, const Vector& u, double p,
                   Vector* grad) {
  const GaussRule gauss;
  const int N = disc.domain.dimension;
  const Index n = disc.n_per_axis;
  double hs[3] = {1.0, 1.0, 1.0};
  double vol = 1.0;
  for (int d = 0; d < N; ++d) {
    hs[d] = disc.axis_spacing(d);
    vol *= hs[d];
  }
  const Index sx = 1;
  const Index sy = disc.nodes_per_axis[0];
  const Index sz = disc.nodes_per_axis[0] * disc.nodes_per_axis[1];
  const Index ex = N >= 1 ? n : 1, ey = N >= 2 ? n : 1, ez = N >= 3 ? n : 1;
  const int gx = 4, gy = N >= 2 ? 4 : 1, gz = N >= 3 ? 4 : 1;

  double total = 0.0;
  for (Index kz = 0; kz < ez; ++kz)
    for (Index ky = 0; ky < ey; ++ky)
      for (Index kx = 0; kx < ex; ++kx) {
        const Index base = kx * sx + ky * sy + kz * sz;
        for (int a = 0; a < gx; ++a)
          for (int b = 0; b < gy; ++b)
            for (int c = 0; c < gz; ++c) {
              const double wq = vol * gauss.w[a] * (N >= 2 ? gauss.w[b] : 1.0) *
                                (N >= 3 ? gauss.w[c] : 1.0);
              const double shapes[3][2] = {
                  {1.0 - gauss.x[a], gauss.x[a]},
                  {1.0 - gauss.x[b], gauss.x[b]},
                  {1.0 - gauss.x[c], gauss.x[c]}};
              double val = 0.0;
              double phi[8];
              int corner = 0;
              for (int dz = 0; dz < (N >= 3 ? 2 : 1); ++dz)
                for (int dy = 0; dy < (N >= 2 ? 2 : 1); ++dy)
                  for (int dx = 0; dx < 2; ++dx, ++corner) {
                    double s = shapes[0][dx];
                    if (N >= 2) s *= shapes[1][dy];
                    if (N >= 3) s *= shapes[2][dz];
                    phi[corner] = s;
                    val += s * u[base + dx * sx + dy * sy + dz * sz];
                  }
              const double av = std::abs(val);
              if (av == 0.0) continue;
              total += wq * std::pow(av, p);
              if (grad != nullptr) {
                const double coeff = wq * p * std::pow(av, p - 2.0) * val;
                corner = 0;
                for (int dz = 0; dz < (N >= 3 ? 2 : 1); ++dz)
                  for (int dy = 0; dy < (N >= 2 ? 2 : 1); ++dy)
                    for (int dx = 0; dx < 2; ++dx, ++corner)
                      (*grad)[base + dx * sx + dy * sy + dz * sz] +=
                          coeff * phi[corner];
              }
            }
      }
  return total;
}

// int_bdry |u_h|^l over the trace; endpoint atoms in 1D.
double trace_lp(const Discretization& disc, const Vector& u, double p,
                Vector* grad) {
  const GaussRule gauss;
  const int N = disc.domain.dimension;
  const Index n = disc.n_per_axis;
  const Index strides[3] = {1, disc.nodes_per_axis[0],
                            disc.nodes_per_axis[0] * disc.nodes_per_axis[1]};
  double total = 0.0;
  if (N == 1) {
    for (Index node : {Index(0), n}) {
      const double av = std::abs(u[node]);
      total += std::pow(av, p);
      if (grad != nullptr && av > 0.0)
        (*grad)[node] += p * std::pow(av, p - 2.0) * u[node];
    }
    return total;
  }
  for (int d = 0; d < N; ++d) {
    // tangential axes of the face with normal axis d
    int tan[2] = {d == 0 ? 1 : 0, d == 2 ? 1 : 2};
    if (N == 2) tan[0] = 1 - d;
    double area = disc.axis_spacing(tan[0]);
    if (N == 3) area *= disc.axis_spacing(tan[1]);
    const Index e0 = n, e1 = N == 3 ? n : 1;
    const int g1 = N == 3 ? 4 : 1;
    for (Index side : {Index(0), n}) {
      for (Index k1 = 0; k1 < e1; ++k1)
        for (Index k0 = 0; k0 < e0; ++k0) {
          const Index base = side * strides[d] + k0 * strides[tan[0]] +
                             (N == 3 ? k1 * strides[tan[1]] : 0);
          for (int a = 0; a < 4; ++a)
            for (int b = 0; b < g1; ++b) {
              const double wq =
                  area * gauss.w[a] * (N == 3 ? gauss.w[b] : 1.0);
              const double sh0[2] = {1.0 - gauss.x[a], gauss.x[a]};
              const double sh1[2] = {1.0 - gauss.x[b], gauss.x[b]};
              double val = 0.0;
              double phi[4];
              int corner = 0;
              for (int d1 = 0; d1 < (N == 3 ? 2 : 1); ++d1)
                for (int d0 = 0; d0 < 2; ++d0, ++corner) {
                  double s = sh0[d0];
                  if (N == 3) s *= sh1[d1];
                  phi[corner] = s;
                  val += s * u[base + d0 * strides[tan[0]] +
                               (N == 3 ? d1 * strides[tan[1]] : 0)];
                }
              const double av = std::abs(val);
              if (av == 0.0) continue;
              total += wq * std::pow(av, p);
              if (grad != nullptr) {
                const double coeff = wq * p * std::pow(av, p - 2.0) * val;
                corner = 0;
                for (int d1 = 0; d1 < (N == 3 ? 2 : 1); ++d1)
                  for (int d0 = 0; d0 < 2; ++d0, ++corner)
                    (*grad)[base + d0 * strides[tan[0]] +
                            (N == 3 ? d1 * strides[tan[1]] : 0)] +=
                        coeff * phi[corner];
              }
            }
        }
    }
  }
  return total;
}

struct GNContext {
  const Discretization* disc = nullptr;
  GNMode mode;
  double p = 0.0;
  double beta = 0.0;
  SparseMatrix A;  // norm operator of the mode
  SparseMatrix M;  // consistent mass for the L2 factor
  bool reduced = false;
};

GNContext make_context(const Discretization& disc, GNMode mode, double p) {
  GNContext ctx;
  ctx.disc = &disc;
  ctx.mode = mode;
  ctx.p = p;
  ctx.beta = beta_exponent(disc.domain.dimension, p);
  switch (mode) {
    case GNMode::Interior:
      ctx.reduced = true;
      ctx.A = restrict_matrix(disc, disc.K);
      ctx.M = restrict_matrix(disc, disc.M);
      break;
    case GNMode::InteriorH1:
    case GNMode::Trace:
      ctx.A = disc.K + disc.B;
      ctx.M = disc.M;
      break;
    case GNMode::NeumannH1:
      ctx.A = disc.K + disc.M;
      ctx.M = disc.M;
      break;
  }
  return ctx;
}

double numerator_lp(const GNContext& ctx, const Vector& u, Vector* grad) {
  const Discretization& disc = *ctx.disc;
  Vector full = ctx.reduced ? prolong_interior(disc, u) : u;
  Vector gfull;
  Vector* gp = nullptr;
  if (grad != nullptr) {
    gfull = Vector::Zero(disc.num_nodes);
    gp = &gfull;
  }
  const double value = ctx.mode == GNMode::Trace
                           ? trace_lp(disc, full, ctx.p, gp)
                           : interior_lp(disc, full, ctx.p, gp);
  if (grad != nullptr)
    *grad = ctx.reduced ? restrict_interior(disc, gfull) : gfull;
  return value;
}

// log of the maximized ratio; -inf when a needed factor degenerates.
double log_ratio(const GNContext& ctx, const Vector& u) {
  const double num = numerator_lp(ctx, u, nullptr);
  if (!(num > 0.0)) return -std::numeric_limits<double>::infinity();
  double den = 0.0;
  if (ctx.mode == GNMode::Interior || ctx.mode == GNMode::NeumannH1) {
    const double l2 = u.dot(ctx.M * u);
    const double grad = u.dot(ctx.A * u);
    if (!(l2 > 0.0)) return -std::numeric_limits<double>::infinity();
    if (ctx.beta > 0.0 && !(grad > 0.0))
      return -std::numeric_limits<double>::infinity();
    den = 0.5 * (1.0 - ctx.beta) * ctx.p * std::log(l2) +
          0.5 * ctx.beta * ctx.p * std::log(std::max(grad, 1e-300));
  } else {
    const double nrm = u.dot(ctx.A * u);
    if (!(nrm > 0.0)) return -std::numeric_limits<double>::infinity();
    den = 0.5 * ctx.p * std::log(nrm);
  }
  return std::log(num) - den;
}

Vector log_ratio_gradient(const GNContext& ctx, const Vector& u) {
  Vector g;
  const double num = numerator_lp(ctx, u, &g);
  g /= num;
  if (ctx.mode == GNMode::Interior || ctx.mode == GNMode::NeumannH1) {
    const double l2 = u.dot(ctx.M * u);
    const double grad = u.dot(ctx.A * u);
    g -= ((1.0 - ctx.beta) * ctx.p / l2) * (ctx.M * u);
    if (ctx.beta > 0.0) g -= (ctx.beta * ctx.p / grad) * (ctx.A * u);
  } else {
    const double nrm = u.dot(ctx.A * u);
    g -= (ctx.p / nrm) * (ctx.A * u);
  }
  return g;
}

double ascend(const GNContext& ctx, Vector u, Vector* best_u) {
  u /= std::max(u.norm(), 1e-300);
  double val = log_ratio(ctx, u);
  double step = 0.1;
  for (int iter = 0; iter < 2000; ++iter) {
    const Vector g = log_ratio_gradient(ctx, u);
    bool improved = false;
    for (int tries = 0; tries < 25; ++tries) {
      Vector un = u + step * g;
      un /= std::max(un.norm(), 1e-300);
      const double vn = log_ratio(ctx, un);
      if (vn > val) {
        u = std::move(un);
        val = vn;
        step *= 1.5;
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved || step < 1e-14) break;
  }
  if (best_u != nullptr) *best_u = u;
  return val;
}

}  // namespace

double gn_ratio(const Discretization& disc, GNMode mode, double p,
                const Vector& u) {
  const GNContext ctx = make_context(disc, mode, p);
  Vector z = u;
  if (ctx.reduced && u.size() == disc.num_nodes)
    z = restrict_interior(disc, u);
  return std::exp(log_ratio(ctx, z));
}

GNEstimate estimate_gn_constant(const Discretization& disc, double p,
                                GNMode mode, uint64_t seed, int num_starts) {
  const int N = disc.domain.dimension;
  const double pmax = mode == GNMode::Trace ? critical_exponent_trace(N)
                                            : critical_exponent_interior(N);
  if (!(p >= 2.0) || !(p < pmax))
    fail(ErrorCode::ExponentOutOfRange,
         "p = " + std::to_string(p) + " outside [2, " + std::to_string(pmax) +
             ")");
  const GNContext ctx = make_context(disc, mode, p);
  const Index dim = ctx.A.rows();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  double best = -std::numeric_limits<double>::infinity();
  Vector best_u;
  // ground-state start: a few inverse power iterations give a phi_1 profile
  {
    Eigen::SimplicialLDLT<SparseMatrix> solver(ctx.A);
    Vector u = Vector::Ones(dim);
    if (solver.info() == Eigen::Success)
      for (int it = 0; it < 3; ++it) {
        u = solver.solve(ctx.M * u);
        u /= std::max(u.norm(), 1e-300);
      }
    Vector cand;
    const double val = ascend(ctx, u, &cand);
    if (val > best) {
      best = val;
      best_u = cand;
    }
  }
  for (int s = 0; s < num_starts; ++s) {
    Vector u(dim);
    for (Index i = 0; i < dim; ++i) u[i] = gauss(rng);
    Vector cand;
    const double val = ascend(ctx, u, &cand);
    if (val > best) {
      best = val;
      best_u = cand;
    }
  }
  // Validity sweep: the reported constant dominates every sampled ratio.
  for (int s = 0; s < 200; ++s) {
    Vector u(dim);
    for (Index i = 0; i < dim; ++i) u[i] = gauss(rng);
    best = std::max(best, log_ratio(ctx, u));
  }

  GNEstimate est;
  est.mode = mode;
  est.p = p;
  est.beta_p = ctx.beta;
  est.value = std::exp(best);
  est.maximizer =
      ctx.reduced ? prolong_interior(disc, best_u) : best_u;
  est.resolution = disc.n_per_axis;
  est.lower_bound = true;
  return est;
}

double threshold_mu_star(double K2, double Kp, double p, double q,
                         double lambda1, int N, double M, double C_pN) {
  if (!(K2 >= 0.0) || !(K2 < lambda1))
    fail(ErrorCode::HypothesisViolated, "need 0 <= K2 < lambda_1");
  if (!(Kp > 0.0) || !(C_pN > 0.0))
    fail(ErrorCode::HypothesisViolated, "need Kp > 0 and C > 0");
  if (!(p > 2.0) || !(p < critical_exponent_interior(N)))
    fail(ErrorCode::ExponentOutOfRange, "p outside (2, 2*)");
  const double e = 2.0 / (p - 2.0);
  if (p <= 2.0 + 4.0 / N)
    return std::pow((lambda1 - K2) / (Kp * C_pN), e) *
           std::pow(lambda1, -0.5 * N);
  if (!(q > 2.0) || !(M > 0.0))
    fail(ErrorCode::HypothesisViolated, "supercritical branch needs q > 2, M > 0");
  return std::pow((lambda1 - K2) / (Kp * C_pN * lambda1), e) *
         std::pow(2.0 * q * M / (q - 2.0), e - 0.5 * N);
}

double threshold_mu_star_energy_form(double K2, double Kp, double p, double q,
                                     double lambda1, int N, double C_pN) {
  // M = lambda_1 / 2 specialization: the two-branch closed form
  if (!(K2 >= 0.0) || !(K2 < lambda1))
    fail(ErrorCode::HypothesisViolated, "need 0 <= K2 < lambda_1");
  const double e = 2.0 / (p - 2.0);
  if (p <= 2.0 + 4.0 / N)
    return std::pow((lambda1 - K2) / (Kp * C_pN), e) *
           std::pow(lambda1, -0.5 * N);
  if (!(q > 2.0))
    fail(ErrorCode::HypothesisViolated, "supercritical branch needs q > 2");
  return std::pow((lambda1 - K2) / (Kp * C_pN), e) *
         std::pow(q / (q - 2.0), e - 0.5 * N) * std::pow(lambda1, -0.5 * N);
}

double mu0_exclusion_bound(double lambda1, double K2, double Kp, double C_pN,
                           double p, int N) {
  if (p > 2.0 + 4.0 / N)
    fail(ErrorCode::ExponentOutOfRange,
         "closed-form exclusion bound needs p <= 2 + 4/N");
  return std::pow((lambda1 - K2) / (Kp * C_pN), 2.0 / (p - 2.0)) *
         std::pow(lambda1, -0.5 * N);
}

double mu0_exclusion_bound_supercritical(double lambda1, double K2, double Kp,
                                         double C_pN, double p, int N,
                                         double R) {
  const double beta = beta_exponent(N, p);
  const double denom = Kp * C_pN * std::pow(R, beta * p - 2.0) * lambda1;
  return std::pow((lambda1 - K2) / denom, 2.0 / ((1.0 - beta) * p));
}

double threshold_mu_doublestar(double K2, double Kp, double p, double K2g,
                               double Kl, double l, double lambda_hat,
                               double lambda_tilde, double q, double M,
                               double C_p, double C_l) {
  if (!(K2 < lambda_hat / 4.0) || !(K2g < lambda_tilde / 4.0))
    fail(ErrorCode::HypothesisViolated,
         "need K2 < lambda_hat/4 and K2_g < lambda_tilde/4");
  if (!(q > 2.0) || !(M > 0.0))
    fail(ErrorCode::HypothesisViolated, "need q > 2 and M > 0");
  const double rhs = 1.0 - K2 / lambda_hat - K2g / lambda_tilde;
  if (!(rhs > 0.0)) fail(ErrorCode::HypothesisViolated, "degenerate budget");
  const double amp = 2.0 * q * M / (q - 2.0);
  auto lhs = [&](double mu) {
    double v = Kp * C_p * std::pow(amp * mu, p - 2.0);
    if (Kl > 0.0) v += Kl * C_l * std::pow(amp * mu, l - 2.0);
    return v;
  };
  double hi = 1.0;
  while (lhs(hi) < rhs && hi < 1e30) hi *= 2.0;
  double lo = hi;
  while (lhs(lo) >= rhs && lo > 1e-300) lo *= 0.5;
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    (lhs(mid) < rhs ? lo : hi) = mid;
    if (hi - lo <= 1e-12 * std::max(1.0, lo)) break;
  }
  return lo;
}

double required_lambda1_single(double mu, double q, int N, double p,
                               double KpC) {
  if (!(p > 2.0 + 4.0 / N) || !(p < critical_exponent_interior(N)))
    fail(ErrorCode::ExponentOutOfRange, "needs 2 + 4/N < p < 2*");
  const double denom = 4.0 + 2.0 * N - N * p;
  if (denom == 0.0) fail(ErrorCode::ExponentOutOfRange, "formula pole");
  return (q - 2.0) / q * std::pow(mu, 2.0 * (p - 2.0) / denom) *
         std::pow(KpC, 4.0 / denom);
}

double required_lambda1_two_power(double mu, double a, double p_lo, double p,
                                  double q, int N, double C_pN) {
  if (!(2.0 + 4.0 / N < p_lo) || !(p_lo < p) ||
      !(p < critical_exponent_interior(N)))
    fail(ErrorCode::ExponentOutOfRange, "needs 2 + 4/N < p' < p < 2*");
  // mu*(lambda_1) with K2 = lambda_1/2 and the absorbed two-power Kp;
  // decreasing near 0+, diverging as lambda_1 -> 0+.  lambda* solves
  // mu*(lambda*) = mu by bisection.
  auto mu_star_of = [&](double lam) {
    const double Kp = a + a * std::pow(lam / (2.0 * a), (p_lo - p) / (p_lo - 2.0));
    return threshold_mu_star_energy_form(lam / 2.0, Kp, p, q, lam, N, C_pN);
  };
  double lo = 1e-12, hi = 1.0;
  while (mu_star_of(hi) > mu && hi < 1e12) hi *= 2.0;
  while (mu_star_of(lo) < mu && lo > 1e-300) lo *= 0.5;
  for (int it = 0; it < 300; ++it) {
    const double mid = std::sqrt(lo * hi);
    (mu_star_of(mid) >= mu ? lo : hi) = mid;
  }
  return lo;
}

double pohozaev_multiplier_lower(double lambda1, double q, int N) {
  if (N < 3) fail(ErrorCode::ModeUnsupported, "multiplier bound needs N >= 3");
  const double two_star = critical_exponent_interior(N);
  return N * lambda1 * (q - two_star) / (two_star * (q - 2.0));
}

double ground_state_lambda_lower(double lambda1, double q, int N) {
  if (N < 3) fail(ErrorCode::ModeUnsupported, "multiplier bound needs N >= 3");
  if (!(q > 2.0 + 4.0 / N))
    fail(ErrorCode::HypothesisViolated, "needs q > 2 + 4/N");
  const double two_star = critical_exponent_interior(N);
  return 2.0 * lambda1 * (q - two_star) / (two_star * (q - 2.0 - 4.0 / N));
}

double mu_star_shifted(double lambda1, double s, double K2, double Kp,
                       double p, double q, int N, double C_pN) {
  const double lam = lambda1 + s;
  return std::pow((lam - K2) / (Kp * C_pN), 2.0 / (p - 2.0)) *
         std::pow(q / (q - 2.0), 2.0 / (p - 2.0) - 0.5 * N) *
         std::pow(lam, -0.5 * N);
}

namespace {

// |grad u|^2 at a boundary node from second-order one-sided differences
// along each grid line (Dirichlet boundary data makes these exact to h^2).
double boundary_grad_sq(const Discretization& disc, const Vector& u,
                        Index node) {
  const int N = disc.domain.dimension;
  Index coords[3], rem = node;
  Index stride[3] = {1, 0, 0};
  for (int d = 0; d < N; ++d) {
    coords[d] = rem % disc.nodes_per_axis[d];
    rem /= disc.nodes_per_axis[d];
    if (d == 1) stride[1] = disc.nodes_per_axis[0];
    if (d == 2) stride[2] = disc.nodes_per_axis[0] * disc.nodes_per_axis[1];
  }
  double g2 = 0.0;
  for (int d = 0; d < N; ++d) {
    const double h = disc.axis_spacing(d);
    const Index i = coords[d];
    const Index last = disc.nodes_per_axis[d] - 1;
    double du;
    if (i == 0)
      du = (-3.0 * u[node] + 4.0 * u[node + stride[d]] -
            u[node + 2 * stride[d]]) /
           (2.0 * h);
    else if (i == last)
      du = (3.0 * u[node] - 4.0 * u[node - stride[d]] +
            u[node - 2 * stride[d]]) /
           (2.0 * h);
    else
      du = (u[node + stride[d]] - u[node - stride[d]]) / (2.0 * h);
    g2 += du * du;
  }
  return g2;
}

}  // namespace

double pohozaev_residual(const CriticalPointRecord& rec,
                         const Discretization& disc,
                         const std::array<double, 3>& x0,
                         const NonlinearitySpec& f) {
  const int N = disc.domain.dimension;
  if (N < 2)
    fail(ErrorCode::ModeUnsupported, "Pohozaev residual needs N >= 2");
  const Vector P = pohozaev_weights(disc, x0);
  const Vector& u = rec.u;
  if (u.size() != disc.num_nodes)
    fail(ErrorCode::ConfigInvalid, "record does not match discretization");

  const double dirichlet_energy = u.dot(disc.K * u);
  double boundary_term = 0.0;
  for (Index node : disc.boundary_nodes)
    boundary_term += P[node] * boundary_grad_sq(disc, u, node);
  const Vector w = disc.M * Vector::Ones(disc.num_nodes);
  const double psi = w.dot(apply_F(f, u));
  const double mass = u.dot(disc.M * u);

  return std::abs((N - 2.0) / (2.0 * N) * dirichlet_energy +
                  boundary_term / (2.0 * N) -
                  0.5 * rec.lambda_pde * mass - psi);
}

Mu0ScanResult threshold_mu0_scan(const PenalizedProblem& prob,
                                 const Spectrum& spectrum, double M,
                                 double C_pN) {
  Mu0ScanResult out;
  const auto& cert = prob.f.certificate;
  const double lambda1 = spectrum.lambdas.front();
  out.exclusion_bound = mu0_exclusion_bound(lambda1, cert.K2, cert.Kp, C_pN,
                                            cert.p, prob.disc->domain.dimension);

  // Multi-start Newton on the lambda = 0 equation from scaled eigenvectors.
  double min_mass = std::numeric_limits<double>::infinity();
  double min_energy = 0.0;
  for (size_t k = 0; k < spectrum.vectors.size(); ++k) {
    for (double amp_factor : {0.5, 1.0, 2.0, 4.0}) {
      Vector z = prob.ops.reduced
                     ? restrict_interior(*prob.disc, spectrum.vectors[k])
                     : spectrum.vectors[k];
      // amplitude where the linear and nonlinear terms balance
      const double lam = spectrum.lambdas[k];
      const double t0 = std::pow(lam, 1.0 / (cert.p - 2.0)) * amp_factor;
      z *= t0 / std::sqrt(std::max(z.dot(prob.ops.M * z), 1e-300));
      // damped Newton on A z = w f(z)
      bool ok = false;
      for (int iter = 0; iter < 80; ++iter) {
        const Vector F = pde_residual_vector(prob, z, 0.0);
        if (F.norm() <= 1e-11 * std::max(1.0, (prob.ops.A * z).norm())) {
          ok = true;
          break;
        }
        Eigen::SparseLU<SparseMatrix> lu(pde_jacobian(prob, z, 0.0));
        if (lu.info() != Eigen::Success) break;
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
        if (!moved) break;
      }
      if (!ok) continue;
      const double mass = z.dot(prob.ops.M * z);
      if (mass <= 1e-14) continue;  // trivial state
      const double e = energy(prob, z).total_unpenalized;
      if (e > M) continue;
      if (mass < min_mass) {
        min_mass = mass;
        min_energy = e;
      }
    }
  }
  if (std::isfinite(min_mass)) {
    out.found = true;
    out.min_mass = min_mass;
    out.min_energy = min_energy;
    out.consistent = min_mass >= out.exclusion_bound;
  }
  return out;
}

SolutionVerdict verify_solution(const CriticalPointRecord& rec,
                                const PenalizedProblem& prob,
                                double lambda_ref) {
  SolutionVerdict v;
  v.mass_error = std::abs(rec.mass - prob.mu);
  v.mass_ok = v.mass_error <= prob.tol.mass * prob.mu;
  v.pde_residual = rec.pde_residual;
  v.residual_ok = rec.pde_residual <= prob.tol.resid;
  const double tol_lambda = 1e-6 * std::max(1.0, lambda_ref);
  if (prob.mode.is_neumann()) {
    v.lambda_lo = -1.0 - tol_lambda;
    v.lambda_hi = std::numeric_limits<double>::infinity();
    v.lambda_in_range = rec.lambda_pde >= v.lambda_lo;
    // energy bound for the shifted functional at the shifted eigenvalue
    v.energy_bound = 0.5 * prob.mu * lambda_ref + 1e-6;
  } else {
    v.lambda_lo = -tol_lambda;
    v.lambda_hi = lambda_ref + tol_lambda;
    v.lambda_in_range =
        rec.lambda_pde >= v.lambda_lo && rec.lambda_pde <= v.lambda_hi;
    v.energy_bound = 0.5 * prob.mu * lambda_ref + 1e-6;
  }
  v.energy_ok = rec.energy_unpenalized <= v.energy_bound;
  v.is_constant = rec.is_constant;
  v.pass = v.mass_ok && v.residual_ok && v.lambda_in_range && v.energy_ok;
  return v;
}

GroundStateReport ground_state_report(
    const std::vector<CriticalPointRecord>& records,
    const PenalizedProblem& prob, double lambda1, double C_pN) {
  if (records.empty()) fail(ErrorCode::EmptyRecordSet, "no records to rank");
  GroundStateReport rep;
  const int N = prob.disc->domain.dimension;
  const auto& cert = prob.f.certificate;

  int best = -1;
  for (size_t i = 0; i < records.size(); ++i) {
    if (records[i].lambda_pde < -1e-10 * std::max(1.0, lambda1)) continue;
    if (best < 0 ||
        records[i].energy_unpenalized < records[static_cast<size_t>(best)].energy_unpenalized)
      best = static_cast<int>(i);
  }
  if (best < 0) return rep;  // S+ empty, flagged by default

  const CriticalPointRecord& gs = records[static_cast<size_t>(best)];
  rep.s_plus_empty = false;
  rep.ground_state_index = best;
  rep.ground_state_energy = gs.energy_unpenalized;
  rep.lambda_u = gs.lambda_pde;

  // N+ membership: <E'(u), u> = ||u||^2 - int f(u) u = lambda mass at a
  // solution; nonnegative multiplier is the discrete version of the check.
  const Vector z = prob.ops.reduced ? restrict_interior(*prob.disc, gs.u) : gs.u;
  const double quad = z.dot(prob.ops.A * z);
  double fu = prob.ops.w.dot(z.cwiseProduct(apply_f(prob.f, z)));
  if (prob.g) fu += prob.ops.wB.dot(z.cwiseProduct(apply_f(*prob.g, z)));
  rep.nplus_member = quad - fu >= -1e-8 * std::max(1.0, quad);

  if (N >= 3 && cert.q > 2.0 + 4.0 / N) {
    rep.pohozaev_lower_bound = pohozaev_multiplier_lower(lambda1, cert.q, N);
    rep.lambda_lower_bound = ground_state_lambda_lower(lambda1, cert.q, N);
    const bool energy_small =
        gs.energy_unpenalized <= 0.5 * prob.mu * lambda1 + 1e-9;
    rep.lambda_bound_ok =
        !energy_small || rep.lambda_u >= rep.lambda_lower_bound - 1e-9;
    rep.shift_s = std::max(0.0, -rep.lambda_lower_bound);
    rep.mu_star_s = mu_star_shifted(lambda1, rep.shift_s, cert.K2, cert.Kp,
                                    cert.p, cert.q, N, C_pN);
  }
  return rep;
}

}  // namespace normcrit
