#include <doctest.h>

#include <normcrit/assembly.hpp>
#include <normcrit/certificates.hpp>
#include <normcrit/energy.hpp>
#include <normcrit/solver.hpp>
#include <normcrit/spectra.hpp>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

using namespace normcrit;

namespace {
constexpr double kPi = std::numbers::pi;

bool throws_code(ErrorCode code, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code() == code;
  }
  return false;
}
}  // namespace

TEST_CASE("interpolation estimate is exact in the p = 2 identity case") {
  const Discretization disc = assemble(make_interval(0, 1), 64);
  const GNEstimate est = estimate_gn_constant(disc, 2.0, GNMode::Interior, 1, 5);
  CHECK(std::abs(est.value - 1.0) < 1e-6);
  CHECK(est.beta_p == 0.0);
  CHECK(est.lower_bound);
}

TEST_CASE("interpolation estimate is stable under refinement") {
  const GNEstimate ref =
      estimate_gn_constant(assemble(make_interval(0, 1), 2048), 4.0,
                           GNMode::Interior, 1);
  const GNEstimate coarse =
      estimate_gn_constant(assemble(make_interval(0, 1), 512), 4.0,
                           GNMode::Interior, 1);
  CHECK(coarse.value >= 0.9 * ref.value);
  CHECK(coarse.value <= ref.value * (1.0 + 1e-4));
  // nested spaces: the sampled supremum cannot drop under refinement
  const GNEstimate mid =
      estimate_gn_constant(assemble(make_interval(0, 1), 1024), 4.0,
                           GNMode::Interior, 1);
  CHECK(mid.value >= coarse.value * (1.0 - 1e-4));
  CHECK(ref.value >= mid.value * (1.0 - 1e-4));
}

TEST_CASE("estimated constant dominates random discrete samples") {
  const Discretization disc = assemble(make_interval(0, 1), 128);
  const GNEstimate est = estimate_gn_constant(disc, 4.0, GNMode::Interior, 1);
  std::mt19937_64 rng(123);
  std::normal_distribution<double> gauss;
  for (int s = 0; s < 10000; ++s) {
    Vector u(static_cast<Index>(disc.interior_nodes.size()));
    for (Index i = 0; i < u.size(); ++i) u[i] = gauss(rng);
    CHECK(gn_ratio(disc, GNMode::Interior, 4.0, u) <= est.value + 1e-9);
  }
}

TEST_CASE("quadrature of constants is exact for every ratio mode") {
  // u = 1: all norms have closed forms, so the ratios are exact fractions
  const Discretization sq = assemble(make_rectangle(0, 1, 0, 1), 8);
  const Vector ones2 = Vector::Ones(sq.num_nodes);
  // trace: |bdry| / ||1||^l with ||1||^2 = |bdry| = 4
  CHECK(gn_ratio(sq, GNMode::Trace, 3.0, ones2) ==
        doctest::Approx(4.0 / 8.0).epsilon(1e-13));
  // interior embedding: |Omega| / ||1||^p = 1 / 16
  CHECK(gn_ratio(sq, GNMode::InteriorH1, 4.0, ones2) ==
        doctest::Approx(1.0 / 16.0).epsilon(1e-13));
  // Neumann interpolation: |Omega|=1, ||1||_2=1, ||1||_{K+M}=1
  CHECK(gn_ratio(sq, GNMode::NeumannH1, 4.0, ones2) ==
        doctest::Approx(1.0).epsilon(1e-13));

  const Discretization box = assemble(make_box(0, 1, 0, 1, 0, 1), 4);
  const Vector ones3 = Vector::Ones(box.num_nodes);
  CHECK(gn_ratio(box, GNMode::Trace, 3.0, ones3) ==
        doctest::Approx(6.0 / std::pow(6.0, 1.5)).epsilon(1e-13));
  CHECK(gn_ratio(box, GNMode::InteriorH1, 4.0, ones3) ==
        doctest::Approx(1.0 / 36.0).epsilon(1e-13));

  // a non-constant closed form: u = x on (0,1), p = 4
  const Discretization iv = assemble(make_interval(0, 1), 16);
  Vector lin(iv.num_nodes);
  for (Index i = 0; i < iv.num_nodes; ++i) lin[i] = iv.node_coords(i)[0];
  // int x^4 = 1/5, ||x||_2^2 = 1/3, ||x||_{K+M}^2 = 4/3, beta_4 = 1/4
  CHECK(gn_ratio(iv, GNMode::NeumannH1, 4.0, lin) ==
        doctest::Approx((1.0 / 5.0) /
                        (std::pow(1.0 / 3.0, 1.5) *
                         std::pow(4.0 / 3.0, 0.5)))
            .epsilon(1e-13));
}

TEST_CASE("estimate rejects out-of-range exponents") {
  const Discretization box = assemble(make_box(0, 1, 0, 1, 0, 1), 4);
  CHECK(throws_code(ErrorCode::ExponentOutOfRange, [&] {
    estimate_gn_constant(box, 6.0, GNMode::Interior, 1, 1);  // 2* = 6
  }));
}

TEST_CASE("mass threshold formulas reproduce unit cases") {
  // subcritical branch with unit inputs
  CHECK(std::abs(threshold_mu_star(0.0, 1.0, 3.0, 4.0, 1.0, 1, 0.5, 1.0) -
                 1.0) < 1e-12);
  CHECK(std::abs(threshold_mu_star_energy_form(0.0, 1.0, 3.0, 4.0, 1.0, 1,
                                               1.0) -
                 1.0) < 1e-12);
  // lambda_1 = pi^2, p = 4, N = 1: mu* = pi / C
  const double C = 0.57;
  CHECK(threshold_mu_star(0.0, 1.0, 4.0, 4.0, kPi * kPi, 1, 0.5, C) ==
        doctest::Approx(kPi / C).epsilon(1e-12));
  CHECK(throws_code(ErrorCode::HypothesisViolated, [] {
    threshold_mu_star(1.0, 1.0, 3.0, 4.0, 1.0, 1, 0.5, 1.0);
  }));
  // the M = lambda1/2 wrapper agrees with the general form on both branches
  for (double p : {3.0, 6.5}) {
    const double lam = 2.7;
    CHECK(threshold_mu_star(0.1, 2.0, p, 4.0, lam, 1, lam / 2, 0.8) ==
          doctest::Approx(
              threshold_mu_star_energy_form(0.1, 2.0, p, 4.0, lam, 1, 0.8))
              .epsilon(1e-13));
  }
}

TEST_CASE("mass threshold monotonicity on the subcritical branch") {
  double prev = 0.0;
  for (double lam : {1.0, 2.0, 4.0, 8.0}) {
    const double v = threshold_mu_star(0.2, 1.0, 3.0, 4.0, lam, 1, 0.5, 1.0);
    CHECK(v > prev);
    prev = v;
  }
  prev = std::numeric_limits<double>::infinity();
  for (double Kp : {0.5, 1.0, 2.0, 4.0}) {
    const double v = threshold_mu_star(0.2, Kp, 3.0, 4.0, 2.0, 1, 0.5, 1.0);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("two-term boundary threshold: symmetric case and closed form") {
  // symmetric unit case: 2 mu^2 = 1
  const double q = 4.0, M = (q - 2.0) / (2.0 * q);  // makes 2qM/(q-2) = 1
  const double mu2 = threshold_mu_doublestar(0.0, 1.0, 4.0, 0.0, 1.0, 4.0, 1.0,
                                             1.0, q, M, 1.0, 1.0);
  CHECK(std::abs(mu2 - std::pow(2.0, -0.5)) < 1e-12);

  // single-term closed form when the l-term is absent
  const double K2 = 0.05, Kp = 1.3, p = 3.5, lhat = 2.0, ltil = 1.0, M2 = 0.7;
  const double bisected =
      threshold_mu_doublestar(K2, Kp, p, 0.0, 0.0, 3.0, lhat, ltil, q, M2, 0.9,
                              1.0);
  const double closed = std::pow((1.0 - K2 / lhat) / (Kp * 0.9), 1.0 / (p - 2.0)) *
                        (q - 2.0) / (2.0 * q * M2);
  CHECK(bisected == doctest::Approx(closed).epsilon(1e-9));

  CHECK(throws_code(ErrorCode::HypothesisViolated, [] {
    threshold_mu_doublestar(1.0, 1.0, 4.0, 0.0, 1.0, 4.0, 2.0, 1.0, 4.0, 0.5,
                            1.0, 1.0);  // K2 = lambda_hat / 2
  }));
}

TEST_CASE("lambda_1 smallness thresholds") {
  // printed instance: mu=1, q=4, N=3, p=5, KpC=1 -> 0.5
  CHECK(std::abs(required_lambda1_single(1.0, 4.0, 3, 5.0, 1.0) - 0.5) < 1e-12);
  CHECK(throws_code(ErrorCode::ExponentOutOfRange, [] {
    required_lambda1_single(1.0, 4.0, 3, 2.0 + 4.0 / 3.0, 1.0);
  }));
  // negative mu exponent: threshold decreases in mu
  CHECK(required_lambda1_single(10.0, 4.0, 3, 5.0, 1.0) <
        required_lambda1_single(1.0, 4.0, 3, 5.0, 1.0));

  // two-power variant solves mu*(lambda*) = mu
  const double mu = 0.3, a = 1.0, p_lo = 4.0, p = 4.5, q = 4.0;
  const int N = 3;
  const double C = 0.8;
  const double lam_star = required_lambda1_two_power(mu, a, p_lo, p, q, N, C);
  const double Kp =
      a + a * std::pow(lam_star / (2 * a), (p_lo - p) / (p_lo - 2.0));
  const double mu_at = threshold_mu_star_energy_form(lam_star / 2, Kp, p, q,
                                                     lam_star, N, C);
  CHECK(mu_at == doctest::Approx(mu).epsilon(1e-6));
  // well below lambda* the admissible mass is strictly larger
  const double Kp2 = a + a * std::pow(lam_star / (4 * a), (p_lo - p) / (p_lo - 2.0));
  CHECK(threshold_mu_star_energy_form(lam_star / 4, Kp2, p, q, lam_star / 2, N,
                                      C) > mu);
}

TEST_CASE("multiplier bounds and shifted threshold") {
  const double lam = 3.3;
  // N=3, q=4, 2*=6: printed arithmetic gives -lambda/2 and -lambda
  CHECK(pohozaev_multiplier_lower(lam, 4.0, 3) == doctest::Approx(-lam / 2));
  CHECK(ground_state_lambda_lower(lam, 4.0, 3) == doctest::Approx(-lam));
  CHECK(throws_code(ErrorCode::ModeUnsupported,
                    [] { pohozaev_multiplier_lower(1.0, 4.0, 2); }));
  // shifted threshold reduces to the plain one at s = 0
  CHECK(mu_star_shifted(lam, 0.0, 0.0, 1.0, 5.0, 4.0, 3, 1.0) ==
        doctest::Approx(
            threshold_mu_star_energy_form(0.0, 1.0, 5.0, 4.0, lam, 3, 1.0)));
  CHECK(mu_star_shifted(lam, 1.0, 0.0, 1.0, 5.0, 4.0, 3, 1.0) > 0.0);
}

TEST_CASE("lambda = 0 corroboration scan against the exclusion bound") {
  auto disc =
      std::make_shared<Discretization>(assemble(make_interval(0, 1), 256));
  const auto f = make_nonlinearity({{1.0, 4.0}}, NonlinearityRole::Interior, 1);
  auto prob = make_problem(disc, dirichlet_mode(), f, std::nullopt, 1.0, 2.0);
  const Spectrum spec = solve_eigs(*disc, dirichlet_mode(), 4);
  const GNEstimate gn = estimate_gn_constant(*disc, 4.0, GNMode::Interior, 1);

  const Mu0ScanResult res =
      threshold_mu0_scan(prob, spec, 100.0, gn.value);
  REQUIRE(res.found);
  // the positive lambda = 0 state of the cubic on (0,1) has mass 2 pi
  CHECK(res.min_mass == doctest::Approx(2 * kPi).epsilon(1e-3));
  CHECK(res.consistent);
  CHECK(res.min_mass > res.exclusion_bound);

  // energy ceiling excludes everything -> vacuously consistent
  const Mu0ScanResult tiny = threshold_mu0_scan(prob, spec, 1e-12, gn.value);
  CHECK(!tiny.found);
  CHECK(tiny.consistent);

  // vanishing nonlinearity: solutions move out past any mass window
  const auto f_eps =
      make_nonlinearity({{1e-12, 4.0}}, NonlinearityRole::Interior, 1);
  auto prob_eps =
      make_problem(disc, dirichlet_mode(), f_eps, std::nullopt, 1.0, 2.0);
  const Mu0ScanResult vac = threshold_mu0_scan(prob_eps, spec, 0.5, gn.value);
  CHECK(!vac.found);
}

TEST_CASE("verify_solution accepts the converged run and flags corruption") {
  auto disc =
      std::make_shared<Discretization>(assemble(make_interval(0, 1), 128));
  const auto f = make_nonlinearity({{1.0, 4.0}}, NonlinearityRole::Interior, 1);
  const double mu = 0.05;
  auto prob = make_problem(disc, dirichlet_mode(), f, std::nullopt, mu, 2.0);
  const Spectrum spec = solve_eigs(*disc, dirichlet_mode(), 1);
  Vector profile = spec.vectors[0];
  profile *= std::sqrt(mu / profile.dot(disc->M * profile));
  const double t = path_max_amplitude(prob, profile);
  CriticalPointRecord rec =
      continue_in_r(prob, Vector(t * profile), ContinuationSchedule{});

  const SolutionVerdict good = verify_solution(rec, prob, spec.lambdas[0]);
  CHECK(good.mass_ok);
  CHECK(good.residual_ok);
  CHECK(good.lambda_in_range);
  CHECK(good.energy_ok);
  CHECK(good.pass);

  CriticalPointRecord bad = rec;
  bad.u *= 1.01;
  bad.mass = bad.u.dot(disc->M * bad.u);
  bad.pde_residual = pde_residual_norm(prob, restrict_interior(*disc, bad.u),
                                       bad.lambda);
  const SolutionVerdict verdict = verify_solution(bad, prob, spec.lambdas[0]);
  CHECK(!verdict.residual_ok);
  CHECK(!verdict.pass);
}

TEST_CASE("shift consistency: same state, multiplier moved by exactly s") {
  auto disc =
      std::make_shared<Discretization>(assemble(make_interval(0, 1), 128));
  const auto f = make_nonlinearity({{1.0, 4.0}}, NonlinearityRole::Interior, 1);
  const double mu = 0.05, s = 1.0;
  const Spectrum spec = solve_eigs(*disc, dirichlet_mode(), 1);

  auto run = [&](double shift) {
    auto prob = make_problem(disc, dirichlet_mode(), f, std::nullopt, mu, 2.0,
                             Tolerances{}, shift);
    Vector profile = spec.vectors[0];
    profile *= std::sqrt(mu / profile.dot(disc->M * profile));
    const double t = path_max_amplitude(prob, profile);
    return continue_in_r(prob, Vector(t * profile), ContinuationSchedule{});
  };
  const auto base = run(0.0);
  const auto shifted = run(s);
  CHECK((base.u - shifted.u).norm() < 1e-7 * base.u.norm());
  CHECK(std::abs(shifted.lambda - base.lambda - s) < 1e-9);
  CHECK(std::abs(shifted.lambda_pde - base.lambda_pde) < 1e-9);
}

TEST_CASE("Pohozaev residual: preconditions, zero state, converged decay") {
  const Discretization iv = assemble(make_interval(0, 1), 16);
  const auto f1 = make_nonlinearity({{1.0, 4.0}}, NonlinearityRole::Interior, 1);
  CriticalPointRecord dummy;
  dummy.u = Vector::Zero(iv.num_nodes);
  CHECK(throws_code(ErrorCode::ModeUnsupported, [&] {
    pohozaev_residual(dummy, iv, {0.5, 0.0, 0.0}, f1);
  }));

  const auto f = make_nonlinearity({{1.0, 6.0}}, NonlinearityRole::Interior, 2);
  auto run = [&](int n) {
    auto disc = std::make_shared<Discretization>(
        assemble(make_rectangle(-1, 1, -1, 1), n));
    auto prob = make_problem(disc, dirichlet_mode(), f, std::nullopt, 0.01, 2.0);
    const Spectrum spec = solve_eigs(*disc, dirichlet_mode(), 1);
    Vector profile = spec.vectors[0];
    profile *= std::sqrt(0.01 / profile.dot(disc->M * profile));
    const double t = path_max_amplitude(prob, profile);
    const CriticalPointRecord rec =
        continue_in_r(prob, Vector(t * profile), ContinuationSchedule{});
    return std::pair<CriticalPointRecord, std::shared_ptr<Discretization>>(
        rec, disc);
  };
  auto [rec0, disc0] = run(16);
  CriticalPointRecord zero = rec0;
  zero.u = Vector::Zero(disc0->num_nodes);
  zero.lambda_pde = 0.0;
  CHECK(pohozaev_residual(zero, *disc0, {0.0, 0.0, 0.0}, f) == 0.0);

  auto [rec1, disc1] = run(32);
  const double res0 = pohozaev_residual(rec0, *disc0, {0.0, 0.0, 0.0}, f);
  const double res1 = pohozaev_residual(rec1, *disc1, {0.0, 0.0, 0.0}, f);
  CHECK(res0 > 0.0);
  CHECK(res0 / res1 >= 3.0);
}

TEST_CASE("ground-state report ranks nonnegative-multiplier records") {
  auto disc =
      std::make_shared<Discretization>(assemble(make_box(0, 1, 0, 1, 0, 1), 6));
  const auto f = make_nonlinearity({{1.0, 4.0}}, NonlinearityRole::Interior, 3);
  auto prob = make_problem(disc, dirichlet_mode(), f, std::nullopt, 0.1, 2.0);

  CHECK(throws_code(ErrorCode::EmptyRecordSet, [&] {
    ground_state_report({}, prob, 3.0, 1.0);
  }));

  CriticalPointRecord a, b, c;
  const Index dim = prob.ops.dim;
  a.u = prolong_interior(*disc, Vector::Constant(dim, 0.1));
  a.lambda_pde = 1.0;
  a.energy_unpenalized = 2.0;
  b = a;
  b.energy_unpenalized = 1.0;
  c = a;
  c.lambda_pde = -5.0;
  c.energy_unpenalized = 0.1;  // negative multiplier: not an S+ candidate

  const GroundStateReport rep = ground_state_report({a, b, c}, prob, 3.0, 1.0);
  CHECK(!rep.s_plus_empty);
  CHECK(rep.ground_state_index == 1);
  CHECK(rep.ground_state_energy == doctest::Approx(1.0));
  CHECK(rep.pohozaev_lower_bound == doctest::Approx(-1.5));
  CHECK(rep.lambda_lower_bound == doctest::Approx(-3.0));
  CHECK(rep.shift_s == doctest::Approx(3.0));
  CHECK(rep.mu_star_s > 0.0);

  const GroundStateReport empty = ground_state_report({c}, prob, 3.0, 1.0);
  CHECK(empty.s_plus_empty);
}
