// Acceptance suite: one quantitative criterion per run line, all tolerances
// fixed in code.  Exits nonzero if any criterion fails.

#include <Eigen/SparseCholesky>

#include <normcrit/assembly.hpp>
#include <normcrit/certificates.hpp>
#include <normcrit/energy.hpp>
#include <normcrit/penalty.hpp>
#include <normcrit/solver.hpp>
#include <normcrit/spectra.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

using namespace normcrit;

namespace {

constexpr double kPi = std::numbers::pi;

struct Criterion {
  std::string name;
  bool pass = true;
  std::vector<std::string> details;

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      details.push_back(what);
    }
  }
  template <typename T>
  void expect_le(T value, T bound, const std::string& what) {
    std::ostringstream os;
    os << what << ": " << value << " <= " << bound;
    expect(value <= bound, os.str());
  }
};

int g_failures = 0;

void run(const std::string& name, double budget_seconds,
         const std::function<void(Criterion&)>& body) {
  Criterion c;
  c.name = name;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.pass = false;
    c.details.push_back(std::string("exception: ") + e.what());
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  if (secs >= budget_seconds) {
    c.pass = false;
    std::ostringstream os;
    os << "runtime " << secs << " s exceeded the " << budget_seconds
       << " s budget";
    c.details.push_back(os.str());
  }
  std::printf("[%s] %s (%.2f s)\n", c.pass ? "PASS" : "FAIL", name.c_str(),
              secs);
  for (const auto& d : c.details) std::printf("       %s\n", d.c_str());
  if (!c.pass) ++g_failures;
}

Vector eig_profile(const PenalizedProblem& prob, const Spectrum& spec, int k) {
  Vector v = spec.vectors[static_cast<size_t>(k)];
  v *= std::sqrt(prob.mu / v.dot(prob.disc->M * v));
  return v;
}

CriticalPointRecord solve_ground(const PenalizedProblem& prob,
                                 const Spectrum& spec) {
  const Vector profile = eig_profile(prob, spec, 0);
  const double t = path_max_amplitude(prob, profile);
  return continue_in_r(prob, Vector(t * profile), ContinuationSchedule{});
}

// Independent oracle for criterion 9: integrates w'' = -w^3 from w(0) = 0,
// w'(0) = 1 with RK4, locates the first return to zero, and rescales to the
// positive stationary state of the lambda = 0 cubic equation on (0,1).
double shooting_mass_cubic() {
  auto deriv = [](double w, double v) { return std::pair<double, double>{v, -w * w * w}; };
  const double h = 1e-5;
  double w = 0.0, v = 1.0, x = 0.0, mass_integral = 0.0;
  double prev_w = 0.0, prev_x = 0.0;
  while (x < 10.0) {
    prev_w = w;
    prev_x = x;
    const auto [k1w, k1v] = deriv(w, v);
    const auto [k2w, k2v] = deriv(w + 0.5 * h * k1w, v + 0.5 * h * k1v);
    const auto [k3w, k3v] = deriv(w + 0.5 * h * k2w, v + 0.5 * h * k2v);
    const auto [k4w, k4v] = deriv(w + h * k3w, v + h * k3v);
    const double wn = w + h / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w);
    const double vn = v + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
    x += h;
    mass_integral += 0.5 * h * (w * w + wn * wn);
    w = wn;
    v = vn;
    if (x > 1.0 && w <= 0.0) break;
  }
  // linear interpolation of the zero crossing and of the mass tail
  const double frac = prev_w / (prev_w - w);
  const double x0 = prev_x + frac * h;
  mass_integral -= 0.5 * (h - frac * h) * (w * w + prev_w * prev_w);
  // u(y) = x0 w(x0 y) on (0,1): mass = x0 * int_0^{x0} w^2
  return x0 * mass_integral;
}

void criterion_penalty(Criterion& c) {
  const PenaltyValue v = penalty(0.5, 2.0);
  c.expect_le(std::abs(v.f - 0.5), 1e-12, "f(0.5;2) spot");
  c.expect_le(std::abs(v.df - 3.0), 1e-12, "f'(0.5;2) spot");
  c.expect_le(std::abs(v.d2f - 16.0), 1e-12, "f''(0.5;2) spot");
  c.expect_le(std::abs(v.h - 1.0), 1e-12, "h(0.5;2) spot");
  for (double r : {2.0, 4.0, 8.0, 16.0}) {
    double prev_h = 0.0;
    for (int i = 1; i <= 99; ++i) {
      const double s = 0.01 * i;
      const PenaltyValue pv = penalty(s, r);
      c.expect(pv.d2f > 0.0, "convexity on grid");
      c.expect(pv.h > prev_h, "h monotone on grid");
      c.expect(pv.df > r / s * pv.f, "sharpened derivative bound");
      prev_h = pv.h;
    }
  }
}

void criterion_gradient(Criterion& c) {
  auto disc = std::make_shared<Discretization>(
      assemble(make_rectangle(0, 1, 0, 1), 128));
  const auto f = make_nonlinearity({{1.0, 4.0}}, NonlinearityRole::Interior, 2);
  const auto g = make_nonlinearity({{1.0, 3.0}}, NonlinearityRole::Boundary, 2);
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> gauss;

  std::vector<PenalizedProblem> probs;
  probs.push_back(make_problem(disc, dirichlet_mode(), f, std::nullopt, 0.3, 3.0));
  probs.push_back(make_problem(disc, neumann_mode(), f, std::nullopt, 0.3, 3.0));
  probs.push_back(make_problem(disc, robin_mode(), f, g, 0.3, 3.0));
  for (const auto& prob : probs) {
    // random H^1-representative states: one smoothing solve keeps the
    // energies O(1) so the stated step resolves the directional derivative
    Eigen::SimplicialLDLT<SparseMatrix> smooth(prob.ops.A);
    auto random_smooth = [&](double scale) {
      Vector noise(prob.ops.dim);
      for (Index i = 0; i < noise.size(); ++i) noise[i] = gauss(rng);
      Vector z = smooth.solve(prob.ops.M * noise);
      z *= std::sqrt(scale / z.dot(prob.ops.M * z));
      return z;
    };
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const Vector z =
          random_smooth(0.9 * prob.mu * (0.1 + 0.9 * trial / 100.0));
      Vector dir = random_smooth(1.0);
      dir /= dir.norm();
      const double h = 1e-6 * z.norm();
      const double fd = (energy(prob, Vector(z + h * dir)).total_penalized -
                         energy(prob, Vector(z - h * dir)).total_penalized) /
                        (2 * h);
      const double an = grad_energy(prob, z).dot(dir);
      worst = std::max(worst, std::abs(fd - an) / std::max(1e-12, std::abs(an)));
    }
    c.expect_le(worst, 1e-6, prob.mode.name() + " worst FD error");
  }
}

void criterion_spectra(Criterion& c) {
  const Spectrum iv =
      solve_eigs(assemble(make_interval(0, 1), 512), dirichlet_mode(), 1);
  c.expect_le(std::abs(iv.lambdas[0] - kPi * kPi) / (kPi * kPi), 1e-3,
              "interval lambda_1 vs pi^2");

  const Spectrum sq = solve_eigs(assemble(make_rectangle(0, kPi, 0, kPi), 64),
                                 dirichlet_mode(), 1);
  c.expect_le(std::abs(sq.lambdas[0] - 2.0) / 2.0, 5e-3,
              "square lambda_1 vs 2");

  const Spectrum nm =
      solve_eigs(assemble(make_interval(0, 1), 256), neumann_mode(), 1);
  c.expect_le(std::abs(nm.lambdas[0] - 1.0), 1e-10, "shifted Neumann lambda_1");
  const Vector& v = nm.vectors[0];
  c.expect_le((v - Vector::Constant(v.size(), v[0])).norm(), 1e-9,
              "constant eigenvector");

  for (double scale : {2.0, 4.0}) {
    const Spectrum base =
        solve_eigs(assemble(make_interval(0, 1), 256), dirichlet_mode(), 1);
    const Spectrum scaled = solve_eigs(assemble(make_interval(0, scale), 256),
                                       dirichlet_mode(), 1);
    c.expect_le(std::abs(scaled.lambdas[0] - base.lambdas[0] / (scale * scale)) /
                    scaled.lambdas[0],
                5e-3, "scaling law");
  }
}

void criterion_existence(Criterion& c) {
  auto disc =
      std::make_shared<Discretization>(assemble(make_interval(0, 1), 256));
  const auto f = make_nonlinearity({{1.0, 4.0}}, NonlinearityRole::Interior, 1);
  const double mu = 0.05;
  auto prob = make_problem(disc, dirichlet_mode(), f, std::nullopt, mu, 2.0);
  const Spectrum spec = solve_eigs(*disc, dirichlet_mode(), 1);
  const CriticalPointRecord rec = solve_ground(prob, spec);

  c.expect(rec.solve_case == SolveCase::MassAttained, "case MassAttained");
  c.expect_le(std::abs(rec.mass - mu), 1e-8, "mass error");
  c.expect(rec.lambda_pde >= -1e-6, "lambda >= -1e-6");
  c.expect_le(rec.lambda_pde, kPi * kPi + 0.01, "lambda <= pi^2 + 0.01");
  c.expect_le(rec.pde_residual, 1e-6, "PDE residual");
  c.expect_le(rec.energy_unpenalized, mu * kPi * kPi / 2 + 1e-6,
              "energy vs mu pi^2 / 2");
  c.expect(rec.trace.size() >= 3, "recorded stages");
  for (size_t i = 1; i < rec.trace.size(); ++i)
    c.expect(rec.trace[i].energy_penalized >=
                 rec.trace[i - 1].energy_penalized - 1e-9,
             "stage levels non-decreasing");
}

void criterion_constant_neumann(Criterion& c) {
  auto disc =
      std::make_shared<Discretization>(assemble(make_interval(0, 1), 128));
  const auto f = make_nonlinearity({{1.0, 4.0}}, NonlinearityRole::Interior, 1);
  auto prob = make_problem(disc, neumann_mode(), f, std::nullopt, 1.0, 2.0);
  const Spectrum spec = solve_eigs(*disc, neumann_mode(), 1);
  const CriticalPointRecord rec = solve_ground(prob, spec);
  c.expect(rec.solve_case == SolveCase::MassAttained, "case MassAttained");
  c.expect_le(std::abs(rec.lambda_pde + 1.0), 1e-10, "lambda = -1");
  c.expect_le((rec.u - Vector::Ones(rec.u.size())).cwiseAbs().maxCoeff(),
              1e-10, "u = 1 nodally");
  c.expect(detect_constant(rec.u, *disc), "detect_constant");
}

void criterion_multiplicity(Criterion& c) {
  auto disc =
      std::make_shared<Discretization>(assemble(make_interval(0, 1), 256));
  const auto f = make_nonlinearity({{1.0, 4.0}}, NonlinearityRole::Interior, 1);
  const double mu = 0.002;
  auto prob = make_problem(disc, dirichlet_mode(), f, std::nullopt, mu, 2.0);
  const Spectrum spec = solve_eigs(*disc, dirichlet_mode(), 6);
  const std::vector<FountainFrame> frames{fountain_frame(spec, 2, mu, 100.0),
                                          fountain_frame(spec, 3, mu, 100.0)};
  const auto recs = multiplicity(prob, 3, spec, frames, ContinuationSchedule{});
  c.expect(recs.size() == 3, "three records");
  if (recs.size() != 3) return;
  for (int i = 0; i < 3; ++i) {
    c.expect(recs[static_cast<size_t>(i)].sign_changes == i,
             "sign-change count " + std::to_string(i));
    c.expect_le(recs[static_cast<size_t>(i)].energy_unpenalized,
                0.5 * mu * spec.lambdas[static_cast<size_t>(i)] + 1e-6,
                "energy vs mu lambda_k / 2");
  }
  c.expect(recs[0].energy_unpenalized < recs[1].energy_unpenalized &&
               recs[1].energy_unpenalized < recs[2].energy_unpenalized,
           "energies strictly increasing");
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < i; ++j) {
      const double d = std::min(
          solution_distance(prob, recs[static_cast<size_t>(i)].u,
                            recs[static_cast<size_t>(j)].u),
          solution_distance(prob, recs[static_cast<size_t>(i)].u,
                            Vector(-recs[static_cast<size_t>(j)].u)));
      c.expect(d >= 1e-4 * std::sqrt(mu), "pairwise distance");
    }
}

void criterion_pohozaev(Criterion& c) {
  const auto f = make_nonlinearity({{1.0, 6.0}}, NonlinearityRole::Interior, 2);
  auto residual_at = [&](int n) {
    auto disc = std::make_shared<Discretization>(
        assemble(make_rectangle(-1, 1, -1, 1), n));
    auto prob = make_problem(disc, dirichlet_mode(), f, std::nullopt, 0.01, 2.0);
    const Spectrum spec = solve_eigs(*disc, dirichlet_mode(), 1);
    const CriticalPointRecord rec = solve_ground(prob, spec);
    if (rec.solve_case != SolveCase::MassAttained) return -1.0;
    return pohozaev_residual(rec, *disc, {0.0, 0.0, 0.0}, f);
  };
  const double r32 = residual_at(32);
  const double r64 = residual_at(64);
  c.expect(r32 > 0.0 && r64 > 0.0, "both runs converged");
  c.expect(r32 / r64 >= 3.0,
           "decay factor " + std::to_string(r32 / r64) + " >= 3");
}

void criterion_thresholds(Criterion& c) {
  c.expect_le(std::abs(threshold_mu_star(0, 1, 3, 4, 1, 1, 0.5, 1) - 1.0),
              1e-12, "unit mu*");
  const double q = 4.0, M = (q - 2.0) / (2.0 * q);
  c.expect_le(std::abs(threshold_mu_doublestar(0, 1, 4, 0, 1, 4, 1, 1, q, M, 1,
                                               1) -
                       std::pow(2.0, -0.5)),
              1e-12, "unit mu**");
  c.expect_le(std::abs(required_lambda1_single(1, 4, 3, 5, 1) - 0.5), 1e-12,
              "unit lambda*");
  double prev = 0.0;
  for (double lam : {1.0, 2.0, 4.0, 8.0}) {
    const double v = threshold_mu_star(0.2, 1, 3, 4, lam, 1, 0.5, 1);
    c.expect(v > prev, "mu* increasing in lambda_1");
    prev = v;
  }
  prev = std::numeric_limits<double>::infinity();
  for (double Kp : {0.5, 1.0, 2.0, 4.0}) {
    const double v = threshold_mu_star(0.2, Kp, 3, 4, 2, 1, 0.5, 1);
    c.expect(v < prev, "mu* decreasing in Kp");
    prev = v;
  }
}

void criterion_nonexistence(Criterion& c) {
  const Discretization disc = assemble(make_interval(0, 1), 1024);
  const Spectrum spec = solve_eigs(assemble(make_interval(0, 1), 512),
                                   dirichlet_mode(), 1);
  const GNEstimate gn = estimate_gn_constant(disc, 4.0, GNMode::Interior, 1);
  const double bound =
      mu0_exclusion_bound(spec.lambdas[0], 0.0, 1.0, gn.value, 4.0, 1);
  const double mass = shooting_mass_cubic();
  {
    std::ostringstream os;
    os << "shooting mass " << mass << " vs exclusion bound " << bound;
    c.details.push_back(os.str());
  }
  c.expect(std::abs(mass - 2 * kPi) < 1e-4, "oracle sanity: mass = 2 pi");
  c.expect(mass > bound, "shooting mass exceeds the exclusion bound");

  // every scan point below the certificate threshold attains the mass
  const double mu_star = threshold_mu_star_energy_form(
      0.0, 1.0, 4.0, 4.0, spec.lambdas[0], 1, gn.value);
  c.expect(mu_star > 1.0, "certificate covers the scan grid");
  auto dshared =
      std::make_shared<Discretization>(assemble(make_interval(0, 1), 256));
  const auto f = make_nonlinearity({{1.0, 4.0}}, NonlinearityRole::Interior, 1);
  const Spectrum sspec = solve_eigs(*dshared, dirichlet_mode(), 1);
  for (int i = 0; i < 7; ++i) {
    const double mu =
        std::exp(std::log(1e-4) + i / 6.0 * (std::log(1.0) - std::log(1e-4)));
    if (mu >= mu_star) continue;
    auto prob = make_problem(dshared, dirichlet_mode(), f, std::nullopt, mu, 2.0);
    const CriticalPointRecord rec = solve_ground(prob, sspec);
    c.expect(rec.solve_case == SolveCase::MassAttained,
             "scan point mu = " + std::to_string(mu));
  }
}

void criterion_robin(Criterion& c) {
  auto disc =
      std::make_shared<Discretization>(assemble(make_interval(0, 1), 256));
  const auto f = make_nonlinearity({{1.0, 4.0}}, NonlinearityRole::Interior, 1);
  const auto g = make_nonlinearity({{1.0, 3.0}}, NonlinearityRole::Boundary, 1);
  const double mu = 0.01;
  auto prob = make_problem(disc, robin_mode(), f, g, mu, 2.0);
  const Spectrum spec = solve_eigs(*disc, robin_mode(), 1);
  const CriticalPointRecord rec = solve_ground(prob, spec);
  c.expect(rec.solve_case == SolveCase::MassAttained, "case MassAttained");
  c.expect(rec.lambda_pde >= -1e-6, "lambda >= -1e-6");
  c.expect_le(rec.lambda_pde, spec.lambdas[0] + 0.01,
              "lambda <= lambda_hat + 0.01");
  c.expect_le(std::abs(rec.mass - mu), 1e-8, "mass error");
  c.expect_le(rec.pde_residual, 1e-6, "PDE residual");
  c.expect_le(rec.energy_unpenalized, 0.5 * mu * spec.lambdas[0] + 1e-6,
              "energy vs mu lambda_hat / 2");

  // boundary terms enter energy and gradient consistently
  std::mt19937_64 rng(99);
  std::normal_distribution<double> gauss;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Vector z(prob.ops.dim), dir(prob.ops.dim);
    for (Index i = 0; i < z.size(); ++i) z[i] = gauss(rng);
    for (Index i = 0; i < dir.size(); ++i) dir[i] = gauss(rng);
    z *= std::sqrt(0.5 * mu / z.dot(prob.ops.M * z));
    dir /= dir.norm();
    const double h = 1e-6 * z.norm();
    const double fd = (energy(prob, Vector(z + h * dir)).total_penalized -
                       energy(prob, Vector(z - h * dir)).total_penalized) /
                      (2 * h);
    const double an = grad_energy(prob, z).dot(dir);
    worst = std::max(worst, std::abs(fd - an) / std::max(1e-12, std::abs(an)));
  }
  c.expect_le(worst, 1e-6, "boundary-mode FD consistency");
}

}  // namespace

int main() {
  run("01 penalty-calculus", 1.0, criterion_penalty);
  run("02 gradient-consistency", 30.0, criterion_gradient);
  run("03 spectral-accuracy", 60.0, criterion_spectra);
  run("04 existence-run", 60.0, criterion_existence);
  run("05 constant-neumann", 5.0, criterion_constant_neumann);
  run("06 multiplicity", 300.0, criterion_multiplicity);
  run("07 pohozaev-decay", 300.0, criterion_pohozaev);
  run("08 threshold-formulas", 1.0, criterion_thresholds);
  run("09 nonexistence-corroboration", 300.0, criterion_nonexistence);
  run("10 robin-mode", 60.0, criterion_robin);
  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
