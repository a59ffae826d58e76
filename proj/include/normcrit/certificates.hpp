#pragma once

#include "normcrit/energy.hpp"
#include "normcrit/nonlinearity.hpp"
#include "normcrit/solver.hpp"
#include "normcrit/spectra.hpp"
#include "normcrit/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace normcrit {

/// Which interpolation / embedding ratio is being maximized.
enum class GNMode {
  Interior,        // ||u||_p^p <= C ||u||_2^((1-b)p) ||grad u||_2^(bp), H_0^1
  InteriorH1,      // ||u||_p^p <= C ||u||^p with the Robin norm
  Trace,           // ||u||_{L^l(bdry)}^l <= C ||u||^l with the Robin norm
  NeumannH1,       // ||u||_p^p <= C ||u||_2^((1-b)p) ||u||_{K+M}^(bp)
};

const char* gn_mode_name(GNMode mode);

/// Discrete supremum of the ratio; a lower bound of the true constant, so
/// thresholds derived from it are flagged estimate-based.
struct GNEstimate {
  GNMode mode = GNMode::Interior;
  double p = 0.0;
  double beta_p = 0.0;
  double value = 0.0;       // the estimated constant
  Vector maximizer;         // full-length snapshot
  int resolution = 0;
  bool lower_bound = true;  // always true for a sampled supremum
};

GNEstimate estimate_gn_constant(const Discretization& disc, double p,
                                GNMode mode, uint64_t seed = 1,
                                int num_starts = 20);

/// Ratio of one discrete function under the given mode (used by the
/// validity sweep; the reported constant dominates every sampled ratio).
double gn_ratio(const Discretization& disc, GNMode mode, double p,
                const Vector& u);

/// Mass thresholds.  The general form takes the energy bound M; the
/// convenience wrapper specializes M = lambda_1 / 2.
double threshold_mu_star(double K2, double Kp, double p, double q,
                         double lambda1, int N, double M, double C_pN);
double threshold_mu_star_energy_form(double K2, double Kp, double p, double q,
                                     double lambda1, int N, double C_pN);

/// Exclusion bound for the lambda = 0 equation, subcritical branch
/// (p <= 2 + 4/N); identical in form to the first mu* branch.
double mu0_exclusion_bound(double lambda1, double K2, double Kp, double C_pN,
                           double p, int N);
/// Supercritical diagnostic with an explicit a-priori radius R.
double mu0_exclusion_bound_supercritical(double lambda1, double K2, double Kp,
                                         double C_pN, double p, int N,
                                         double R);

/// Largest mu with
///   Kp C (2qM/(q-2))^(p-2) mu^(p-2) + Kl C' (2qM/(q-2))^(l-2) mu^(l-2)
///     < 1 - K2/lambda_hat - K2g/lambda_tilde,
/// solved by bisection to 1e-12 (formula kept exactly as stated).
double threshold_mu_doublestar(double K2, double Kp, double p, double K2g,
                               double Kl, double l, double lambda_hat,
                               double lambda_tilde, double q, double M,
                               double C_p, double C_l);

/// Smallness thresholds on lambda_1 guaranteeing existence at fixed mu.
double required_lambda1_single(double mu, double q, int N, double p,
                               double KpC);
double required_lambda1_two_power(double mu, double a, double p_lo, double p,
                                  double q, int N, double C_pN);

/// Multiplier bounds and the shifted-norm construction.
double pohozaev_multiplier_lower(double lambda1, double q, int N);
double ground_state_lambda_lower(double lambda1, double q, int N);
double mu_star_shifted(double lambda1, double s, double K2, double Kp,
                       double p, double q, int N, double C_pN);

/// Pohozaev identity defect of a converged Dirichlet record:
///   | (N-2)/(2N) u^T K u + 1/(2N) <P, |grad u|^2_bdry>
///     - (lambda/2) mass - Psi(u) |
/// with |grad u|^2 recovered at boundary nodes by one-sided second-order
/// differences along grid lines.
double pohozaev_residual(const CriticalPointRecord& rec,
                         const Discretization& disc,
                         const std::array<double, 3>& x0,
                         const NonlinearitySpec& f);

/// Newton corroboration of the small-mass exclusion: multi-start search for
/// nontrivial lambda = 0 states below energy M; reports the smallest mass.
struct Mu0ScanResult {
  bool found = false;
  double min_mass = 0.0;
  double min_energy = 0.0;
  double exclusion_bound = 0.0;
  bool consistent = true;  // min_mass >= exclusion_bound (vacuous if !found)
};

Mu0ScanResult threshold_mu0_scan(const PenalizedProblem& prob,
                                 const Spectrum& spectrum, double M,
                                 double C_pN);

struct SolutionVerdict {
  double mass_error = 0.0;
  double pde_residual = 0.0;
  bool mass_ok = false;
  bool residual_ok = false;
  bool lambda_in_range = false;
  bool energy_ok = false;
  double lambda_lo = 0.0;
  double lambda_hi = 0.0;
  double energy_bound = 0.0;
  bool is_constant = false;
  bool pass = false;
};

/// Checks a record against the mode's multiplier interval and energy bound:
/// [0, lambda_1] / [0, lambda_hat] with bound mu lambda/2, or [-1, inf) for
/// Neumann with the shifted bound.
SolutionVerdict verify_solution(const CriticalPointRecord& rec,
                                const PenalizedProblem& prob,
                                double lambda_ref);

struct GroundStateReport {
  bool s_plus_empty = true;
  int ground_state_index = -1;
  double ground_state_energy = 0.0;
  double lambda_u = 0.0;
  bool nplus_member = false;       // <E'(u), u> >= -tol
  bool lambda_bound_ok = false;    // lambda_u >= ground-state lower bound
  double lambda_lower_bound = 0.0;
  double pohozaev_lower_bound = 0.0;
  double shift_s = 0.0;
  double mu_star_s = 0.0;
};

/// Ranks records with nonnegative multiplier, reports the minimizer and the
/// shifted-construction constants (N >= 3 only for the multiplier bounds).
GroundStateReport ground_state_report(
    const std::vector<CriticalPointRecord>& records,
    const PenalizedProblem& prob, double lambda1, double C_pN);

/// Everything the thresholds subcommand emits.
struct CertificateReport {
  std::string mode;
  GrowthCertificate f_certificate;
  std::optional<GrowthCertificate> g_certificate;
  double lambda1 = 0.0;
  double lambda_hat = 0.0;
  double lambda_tilde_computed = 0.0;
  double lambda_tilde_asserted = 1.0;
  std::vector<GNEstimate> gn;
  std::optional<double> mu0;
  std::optional<double> mu_star;
  std::optional<double> mu_star_energy_form;
  std::optional<double> mu_double_star;
  std::optional<double> lambda_star;
  std::optional<double> pohozaev_lower;
  std::optional<double> ground_state_lower;
  std::optional<double> shift_s;
  std::optional<double> mu_star_shifted_value;
  std::optional<Mu0ScanResult> mu0_scan;
  HypothesisFlags flags;
  bool estimate_based = true;
};

}  // namespace normcrit
