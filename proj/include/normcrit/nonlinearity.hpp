#pragma once

#include "normcrit/domain.hpp"
#include "normcrit/types.hpp"

#include <utility>
#include <vector>

namespace normcrit {

/// One power term a |t|^(p-2) t with a > 0 and p > 2.
struct PowerTerm {
  double a = 1.0;
  double p = 4.0;
};

enum class NonlinearityRole { Interior, Boundary };

/// Growth certificate (K2, Kp, p, q) valid for the power sum:
///   |f(t)| <= K2 |t| + Kp |t|^(p-1)   with p = max p_i,
///   0 <= q F(t) <= f(t) t             with q = min p_i.
/// K2 = 0 for a single term; otherwise the sub-maximal powers are absorbed
/// through |t|^(p_i - 1) <= |t| + |t|^(p-1), which is valid but not sharp.
struct GrowthCertificate {
  double K2 = 0.0;
  double Kp = 0.0;
  double p = 0.0;  // max exponent
  double q = 0.0;  // min exponent (AR constant)
};

/// Odd power-sum nonlinearity f(t) = sum_i a_i |t|^{p_i - 2} t.
struct NonlinearitySpec {
  std::vector<PowerTerm> terms;
  NonlinearityRole role = NonlinearityRole::Interior;
  bool odd = true;  // structural for power sums
  GrowthCertificate certificate;
};

/// Critical exponents: 2* interior, 2(N-1)/(N-2) on the boundary trace.
/// Both are +inf below the dimensions where they bind.
double critical_exponent_interior(int dimension);
double critical_exponent_trace(int dimension);

/// Validates terms against the dimension's exponent range and computes the
/// growth certificate (verified on a dense sample of |t| <= 1e6).
NonlinearitySpec make_nonlinearity(std::vector<PowerTerm> terms,
                                   NonlinearityRole role, int dimension);

/// Pointwise f(t) and primitive F(t).
std::pair<double, double> eval_f(const NonlinearitySpec& spec, double t);
double eval_fprime(const NonlinearitySpec& spec, double t);

/// Vectorized nodal evaluations.
Vector apply_f(const NonlinearitySpec& spec, const Vector& u);
Vector apply_F(const NonlinearitySpec& spec, const Vector& u);
Vector apply_fprime(const NonlinearitySpec& spec, const Vector& u);

struct HypothesisFlags {
  bool f1 = false;         // K2 < lambda_1 (Dirichlet)
  bool f1_prime = false;   // K2 < lambda_hat / 4 (Robin)
  bool f1_dprime = false;  // K2 < 1 (shifted Neumann)
  bool f2 = true;          // sign / monotone quotient, structural
  bool f3 = true;          // superquadratic F, structural
  bool f4 = true;          // AR condition with q = min p_i
  bool g1 = true;          // K2^g < lambda_tilde / 4 and l < trace critical
  bool g2 = true;          // AR condition for g
  bool interior_exponents_ok = false;  // every p_i < 2*
  bool boundary_exponents_ok = true;   // every l_i < 2(N-1)/(N-2)
  bool all(const BoundaryMode& mode) const;
};

/// Checks the growth hypotheses against the mode's spectral constants.
/// lambda_ref is lambda_1 (Dirichlet), lambda_hat (Robin) or 1 (Neumann).
HypothesisFlags hypothesis_check(const NonlinearitySpec& f,
                                 const NonlinearitySpec* g,
                                 const BoundaryMode& mode, int dimension,
                                 double lambda_ref, double lambda_tilde);

}  // namespace normcrit
