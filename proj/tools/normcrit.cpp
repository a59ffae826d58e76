// normcrit: normalized critical points of -Lap u = lambda u + f(u) on
// catalog domains under the mass constraint int u^2 = mu.
//
// Subcommands: solve, eigs, thresholds, multiplicity, verify, scan-mu.

#include <CLI11.hpp>

#include "normcrit/certificates.hpp"
#include "normcrit/config.hpp"
#include "normcrit/io.hpp"
#include "normcrit/solver.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <thread>

namespace nc = normcrit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRunFailed = 1;
constexpr int kExitConfigInvalid = 2;

struct RunContext {
  nc::RunConfig cfg;
  std::shared_ptr<const nc::Discretization> disc;
  std::string out_dir;
};

RunContext make_context(const std::string& config_path,
                        const std::string& out_override, uint64_t seed_override,
                        bool has_seed_override) {
  RunContext ctx;
  ctx.cfg = nc::load_run_config(config_path);
  if (!out_override.empty()) ctx.cfg.out_dir = out_override;
  if (has_seed_override) ctx.cfg.seed = seed_override;
  ctx.out_dir = ctx.cfg.out_dir;
  nc::ensure_directory(ctx.out_dir);

  if (ctx.cfg.cache) {
    const std::string key =
        ctx.out_dir + "/" + nc::cache_key(ctx.cfg.domain, ctx.cfg.n);
    if (std::filesystem::exists(key)) {
      ctx.disc = std::make_shared<nc::Discretization>(nc::load_cache(key));
      return ctx;
    }
    auto disc =
        std::make_shared<nc::Discretization>(nc::assemble(ctx.cfg.domain, ctx.cfg.n));
    nc::save_cache(*disc, key);
    ctx.disc = disc;
    return ctx;
  }
  ctx.disc =
      std::make_shared<nc::Discretization>(nc::assemble(ctx.cfg.domain, ctx.cfg.n));
  return ctx;
}

nc::NonlinearitySpec interior_nonlinearity(const RunContext& ctx) {
  return nc::make_nonlinearity(ctx.cfg.f_terms, nc::NonlinearityRole::Interior,
                               ctx.cfg.domain.dimension);
}

std::optional<nc::NonlinearitySpec> boundary_nonlinearity(const RunContext& ctx) {
  if (!ctx.cfg.mode.is_robin()) return std::nullopt;
  return nc::make_nonlinearity(ctx.cfg.g_terms, nc::NonlinearityRole::Boundary,
                               ctx.cfg.domain.dimension);
}

nc::PenalizedProblem make_problem(const RunContext& ctx, double mu, double r) {
  return nc::make_problem(ctx.disc, ctx.cfg.mode, interior_nonlinearity(ctx),
                          boundary_nonlinearity(ctx), mu, r, ctx.cfg.tol,
                          ctx.cfg.shift);
}

nc::Vector mountain_pass_seed(const nc::PenalizedProblem& prob,
                              const nc::Spectrum& spectrum) {
  nc::Vector profile = spectrum.vectors.front();
  const double m = profile.dot(prob.disc->M * profile);
  profile *= std::sqrt(prob.mu / m);
  nc::PenalizedProblem seed_prob = prob;
  const double t = nc::path_max_amplitude(seed_prob, profile);
  return nc::Vector(t * profile);
}

int spectrum_count_for(const RunContext& ctx, int wanted_distinct) {
  const int dim = static_cast<int>(
      ctx.cfg.mode.is_dirichlet() ? ctx.disc->interior_nodes.size()
                                  : ctx.disc->num_nodes);
  // tensor domains carry multiplicities; over-solve generously
  return std::min(dim, std::max(ctx.cfg.eigs, 3 * wanted_distinct + 4));
}

nc::CertificateReport make_certificate(const RunContext& ctx, double mu) {
  const nc::NonlinearitySpec f = interior_nonlinearity(ctx);
  const auto g = boundary_nonlinearity(ctx);
  const auto& cert = f.certificate;
  const int N = ctx.cfg.domain.dimension;

  nc::CertificateReport rep;
  rep.mode = ctx.cfg.mode.name();
  rep.f_certificate = cert;
  if (g) rep.g_certificate = g->certificate;
  const nc::Spectrum spectrum =
      nc::solve_eigs(*ctx.disc, ctx.cfg.mode, spectrum_count_for(ctx, 2));
  rep.lambda1 = ctx.cfg.overrides.lambda1.value_or(spectrum.lambdas.front());
  double ltil = 1.0;
  if (ctx.cfg.mode.is_robin()) {
    rep.lambda_hat = rep.lambda1;
    rep.lambda_tilde_computed = nc::lambda_tilde(*ctx.disc);
    ltil = rep.lambda_tilde_computed;
  }
  rep.flags = nc::hypothesis_check(f, g ? &*g : nullptr, ctx.cfg.mode, N,
                                   rep.lambda1, ltil);

  const nc::GNMode interior_mode = ctx.cfg.mode.is_dirichlet()
                                       ? nc::GNMode::Interior
                                       : ctx.cfg.mode.is_neumann()
                                             ? nc::GNMode::NeumannH1
                                             : nc::GNMode::InteriorH1;
  nc::GNEstimate gn_interior = nc::estimate_gn_constant(
      *ctx.disc, cert.p, interior_mode, ctx.cfg.seed);
  if (ctx.cfg.overrides.gn_c) gn_interior.value = *ctx.cfg.overrides.gn_c;
  rep.gn.push_back(gn_interior);

  const double M = ctx.cfg.overrides.energy_M.value_or(0.5 * rep.lambda1);
  if (ctx.cfg.mode.is_robin()) {
    nc::GNEstimate gn_trace = nc::estimate_gn_constant(
        *ctx.disc, g->certificate.p, nc::GNMode::Trace, ctx.cfg.seed + 1);
    if (ctx.cfg.overrides.gn_c_trace)
      gn_trace.value = *ctx.cfg.overrides.gn_c_trace;
    rep.gn.push_back(gn_trace);
    rep.mu_double_star = nc::threshold_mu_doublestar(
        cert.K2, cert.Kp, cert.p, g->certificate.K2, g->certificate.Kp,
        g->certificate.p, rep.lambda1, ltil, std::min(cert.q, g->certificate.q),
        M, gn_interior.value, gn_trace.value);
  } else {
    rep.mu_star = nc::threshold_mu_star(cert.K2, cert.Kp, cert.p, cert.q,
                                        rep.lambda1, N, M, gn_interior.value);
    rep.mu_star_energy_form = nc::threshold_mu_star_energy_form(
        cert.K2, cert.Kp, cert.p, cert.q, rep.lambda1, N, gn_interior.value);
    if (cert.p <= 2.0 + 4.0 / N)
      rep.mu0 = nc::mu0_exclusion_bound(rep.lambda1, cert.K2, cert.Kp,
                                        gn_interior.value, cert.p, N);
    if (cert.K2 == 0.0 && cert.p > 2.0 + 4.0 / N)
      rep.lambda_star = nc::required_lambda1_single(
          mu, cert.q, N, cert.p, cert.Kp * gn_interior.value);
    if (f.terms.size() >= 2) {
      double p_lo = cert.p, a = 0.0;
      for (const auto& t : f.terms) {
        p_lo = std::min(p_lo, t.p);
        a = std::max(a, t.a);
      }
      if (p_lo > 2.0 + 4.0 / N && p_lo < cert.p)
        rep.lambda_star = nc::required_lambda1_two_power(
            mu, a, p_lo, cert.p, cert.q, N, gn_interior.value);
    }
    if (N >= 3 && cert.q > 2.0 + 4.0 / N) {
      rep.pohozaev_lower = nc::pohozaev_multiplier_lower(rep.lambda1, cert.q, N);
      rep.ground_state_lower =
          nc::ground_state_lambda_lower(rep.lambda1, cert.q, N);
      rep.shift_s = std::max(0.0, -*rep.ground_state_lower);
      rep.mu_star_shifted_value =
          nc::mu_star_shifted(rep.lambda1, *rep.shift_s, cert.K2, cert.Kp,
                              cert.p, cert.q, N, gn_interior.value);
    }
    if (ctx.cfg.corroborate_mu0 && cert.p <= 2.0 + 4.0 / N) {
      nc::PenalizedProblem prob = make_problem(ctx, mu, 2.0);
      rep.mu0_scan =
          nc::threshold_mu0_scan(prob, spectrum, M, gn_interior.value);
    }
  }
  rep.estimate_based = !ctx.cfg.overrides.gn_c.has_value();
  return rep;
}

void write_solution_artifacts(const RunContext& ctx,
                              const std::vector<nc::CriticalPointRecord>& recs) {
  nc::write_records_json(ctx.out_dir + "/records.json", recs);
  nc::write_trace_csv(ctx.out_dir + "/trace.csv", recs);
  for (size_t i = 0; i < recs.size(); ++i) {
    const std::string csv = "solution_" + std::to_string(i) + ".csv";
    nc::write_solution_csv(ctx.out_dir + "/" + csv, *ctx.disc, recs[i].u);
    nc::write_plot_script(ctx.out_dir + "/plot_" + std::to_string(i) + ".gp",
                          csv, ctx.cfg.domain.dimension);
  }
}

int run_solve(const RunContext& ctx, bool with_verdicts) {
  const double mu = ctx.cfg.mu_value();
  nc::PenalizedProblem prob = make_problem(ctx, mu, ctx.cfg.schedule.r0);
  const nc::Spectrum spectrum =
      nc::solve_eigs(*ctx.disc, ctx.cfg.mode, spectrum_count_for(ctx, 1));
  const nc::Vector seed = mountain_pass_seed(prob, spectrum);
  nc::CriticalPointRecord rec =
      nc::continue_in_r(prob, seed, ctx.cfg.schedule);
  rec.seed_id = "phi_1";
  std::vector<nc::CriticalPointRecord> recs{rec};
  write_solution_artifacts(ctx, recs);
  nc::write_certificate_json(ctx.out_dir + "/certificate.json",
                             make_certificate(ctx, mu));

  bool pass = rec.solve_case == nc::SolveCase::MassAttained;
  if (with_verdicts) {
    std::vector<nc::SolutionVerdict> verdicts;
    for (const auto& r : recs)
      verdicts.push_back(
          nc::verify_solution(r, prob, spectrum.lambdas.front()));
    nc::write_verdicts_json(ctx.out_dir + "/verdicts.json", verdicts);
    for (const auto& v : verdicts) pass = pass && v.pass;
  }
  std::cout << "case=" << nc::solve_case_name(rec.solve_case)
            << " lambda=" << rec.lambda_pde << " energy=" << rec.energy_unpenalized
            << " mass_error=" << std::abs(rec.mass - mu) << "\n";
  return pass ? kExitOk : kExitRunFailed;
}

int run_eigs(const RunContext& ctx, bool dump_vectors) {
  const nc::Spectrum spec =
      nc::solve_eigs(*ctx.disc, ctx.cfg.mode, ctx.cfg.eigs);
  nc::write_spectrum_json(ctx.out_dir + "/spectrum.json", spec);
  if (dump_vectors)
    nc::write_eigenvectors_bin(ctx.out_dir + "/eigenvectors.bin", spec);
  for (size_t k = 0; k < spec.lambdas.size(); ++k)
    std::cout << "lambda_" << k + 1 << " = " << spec.lambdas[k] << "\n";
  return kExitOk;
}

int run_thresholds(const RunContext& ctx) {
  const double mu = ctx.cfg.mu ? *ctx.cfg.mu
                               : (ctx.cfg.mu_scan ? ctx.cfg.mu_scan->from : 1.0);
  const nc::CertificateReport rep = make_certificate(ctx, mu);
  nc::write_certificate_json(ctx.out_dir + "/certificate.json", rep);
  std::cout << "lambda1=" << rep.lambda1;
  if (rep.mu_star) std::cout << " mu_star=" << *rep.mu_star;
  if (rep.mu_double_star) std::cout << " mu_double_star=" << *rep.mu_double_star;
  std::cout << "\n";
  return kExitOk;
}

int run_multiplicity(const RunContext& ctx) {
  const double mu = ctx.cfg.mu_value();
  const int m = ctx.cfg.multiplicity_m;
  nc::PenalizedProblem prob = make_problem(ctx, mu, ctx.cfg.schedule.r0);

  nc::Spectrum spectrum =
      nc::solve_eigs(*ctx.disc, ctx.cfg.mode, spectrum_count_for(ctx, m));
  int count = spectrum_count_for(ctx, m);
  const int dim = static_cast<int>(ctx.cfg.mode.is_dirichlet()
                                       ? ctx.disc->interior_nodes.size()
                                       : ctx.disc->num_nodes);
  while (spectrum.num_distinct() < m && count < dim) {
    count = std::min(dim, 2 * count);
    spectrum = nc::solve_eigs(*ctx.disc, ctx.cfg.mode, count);
  }
  std::vector<nc::FountainFrame> frames;
  for (int j = 2; j <= m; ++j)
    frames.push_back(nc::fountain_frame(spectrum, j, mu, ctx.cfg.k_tune));

  const auto recs =
      nc::multiplicity(prob, m, spectrum, frames, ctx.cfg.schedule);
  write_solution_artifacts(ctx, recs);
  nc::write_certificate_json(ctx.out_dir + "/certificate.json",
                             make_certificate(ctx, mu));
  std::cout << "found " << recs.size() << " of " << m << " solutions";
  if (ctx.cfg.mode.is_neumann()) {
    // the constant states are solutions too; report the nonconstant count
    size_t nonconstant = 0;
    for (const auto& r : recs) nonconstant += r.is_constant ? 0 : 1;
    std::cout << " (" << nonconstant << " nonconstant)";
  }
  std::cout << "\n";
  if (static_cast<int>(recs.size()) < m) {
    std::cerr << "FoundFewer(" << recs.size() << ")\n";
    return kExitRunFailed;
  }
  return kExitOk;
}

int run_scan_mu(const RunContext& ctx, int jobs) {
  if (!ctx.cfg.mu_scan)
    nc::fail(nc::ErrorCode::ConfigInvalid, "scan-mu needs a mu_scan block");
  const std::vector<double> grid = ctx.cfg.mu_scan->grid();
  std::vector<nc::ScanRow> rows(grid.size());

  const nc::Spectrum spectrum =
      nc::solve_eigs(*ctx.disc, ctx.cfg.mode, spectrum_count_for(ctx, 1));

  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= grid.size()) return;
      nc::ScanRow row;
      row.mu = grid[i];
      try {
        nc::PenalizedProblem prob =
            make_problem(ctx, grid[i], ctx.cfg.schedule.r0);
        const nc::Vector seed = mountain_pass_seed(prob, spectrum);
        const nc::CriticalPointRecord rec =
            nc::continue_in_r(prob, seed, ctx.cfg.schedule);
        row.converged = rec.solve_case != nc::SolveCase::NoConverge;
        row.lambda = rec.lambda_pde;
        row.energy = rec.energy_unpenalized;
        row.mass_error = std::abs(rec.mass - grid[i]);
        row.solve_case = rec.solve_case;
      } catch (const nc::Error&) {
        row.converged = false;
      }
      rows[i] = row;
    }
  };
  const int nthreads = std::max(1, jobs);
  std::vector<std::thread> pool;
  for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  nc::write_scan_csv(ctx.out_dir + "/scan.csv", rows);
  double largest_attained = 0.0;
  for (const auto& r : rows)
    if (r.solve_case == nc::SolveCase::MassAttained)
      largest_attained = std::max(largest_attained, r.mu);
  const nc::CertificateReport rep = make_certificate(ctx, grid.front());
  nc::write_certificate_json(ctx.out_dir + "/certificate.json", rep);
  std::cout << "largest MassAttained mu in scan: " << largest_attained;
  if (rep.mu_star) std::cout << "  (certificate mu_star: " << *rep.mu_star << ")";
  if (rep.mu_double_star)
    std::cout << "  (certificate mu_double_star: " << *rep.mu_double_star << ")";
  std::cout << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"normalized solutions of mass-constrained semilinear problems"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  uint64_t seed = 0;
  bool has_seed = false;
  int jobs = 1;
  bool dump_vectors = false;

  app.add_option("--config", config_path, "run configuration file")
      ->required();
  app.add_option("--out", out_dir, "output directory override");
  app.add_option("--jobs", jobs, "concurrent rows for scan-mu");
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed override");

  auto* solve = app.add_subcommand("solve", "single continuation run");
  auto* eigs = app.add_subcommand("eigs", "eigenpairs of the mode's pencil");
  eigs->add_flag("--vectors", dump_vectors, "dump eigenvectors as binary f64");
  auto* thresholds =
      app.add_subcommand("thresholds", "certificate of closed-form constants");
  auto* mult =
      app.add_subcommand("multiplicity", "deflated multi-solution search");
  auto* verify = app.add_subcommand("verify", "solve and emit verdicts");
  auto* scan = app.add_subcommand("scan-mu", "sweep the mass grid");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfigInvalid;
  }
  has_seed = seed_opt->count() > 0;

  if (std::getenv("NORMCRIT_FP_STRICT") != nullptr)
    jobs = 1;  // value-safe codegen is compiled in; this pins row order too

  try {
    const RunContext ctx = make_context(config_path, out_dir, seed, has_seed);
    if (solve->parsed()) return run_solve(ctx, false);
    if (eigs->parsed()) return run_eigs(ctx, dump_vectors);
    if (thresholds->parsed()) return run_thresholds(ctx);
    if (mult->parsed()) return run_multiplicity(ctx);
    if (verify->parsed()) return run_solve(ctx, true);
    if (scan->parsed()) return run_scan_mu(ctx, jobs);
  } catch (const nc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == nc::ErrorCode::ConfigInvalid ? kExitConfigInvalid
                                                    : kExitRunFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRunFailed;
  }
  return kExitConfigInvalid;
}
