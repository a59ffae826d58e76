#include "normcrit/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace normcrit {

double critical_exponent_interior(int dimension) {
  if (dimension >= 3)
    return 2.0 * dimension / (dimension - 2.0);
  return std::numeric_limits<double>::infinity();
}

double critical_exponent_trace(int dimension) {
  if (dimension >= 3)
    return 2.0 * (dimension - 1.0) / (dimension - 2.0);
  return std::numeric_limits<double>::infinity();
}

namespace {

GrowthCertificate build_certificate(const std::vector<PowerTerm>& terms) {
  GrowthCertificate c;
  c.p = 0.0;
  c.q = std::numeric_limits<double>::infinity();
  for (const auto& t : terms) {
    c.p = std::max(c.p, t.p);
    c.q = std::min(c.q, t.p);
  }
  for (const auto& t : terms) {
    c.Kp += t.a;
    if (t.p < c.p) c.K2 += t.a;  // |t|^{p_i-1} <= |t| on |t| <= 1
  }
  return c;
}

void verify_certificate(const NonlinearitySpec& spec) {
  // Dense sample check of |f(t)| <= K2 |t| + Kp |t|^{p-1} on |t| <= 1e6.
  const auto& c = spec.certificate;
  for (int i = 0; i <= 600; ++i) {
    const double t = std::pow(10.0, -9.0 + 15.0 * i / 600.0);
    const double lhs = std::abs(eval_f(spec, t).first);
    const double rhs = c.K2 * t + c.Kp * std::pow(t, c.p - 1.0);
    if (lhs > rhs * (1.0 + 1e-12))
      fail(ErrorCode::HypothesisViolated,
           "growth certificate failed sample check at t=" + std::to_string(t));
  }
}

}  // namespace

NonlinearitySpec make_nonlinearity(std::vector<PowerTerm> terms,
                                   NonlinearityRole role, int dimension) {
  if (terms.empty())
    fail(ErrorCode::ConfigInvalid, "nonlinearity needs at least one term");
  const double pmax = role == NonlinearityRole::Interior
                          ? critical_exponent_interior(dimension)
                          : critical_exponent_trace(dimension);
  for (const auto& t : terms) {
    if (!(t.a > 0.0))
      fail(ErrorCode::ConfigInvalid, "term coefficient must be positive");
    if (!(t.p > 2.0) || !(t.p < pmax))
      fail(ErrorCode::ExponentOutOfRange,
           "exponent " + std::to_string(t.p) + " outside (2, " +
               std::to_string(pmax) + ")");
  }
  NonlinearitySpec spec;
  spec.terms = std::move(terms);
  spec.role = role;
  spec.odd = true;
  spec.certificate = build_certificate(spec.terms);
  verify_certificate(spec);
  return spec;
}

std::pair<double, double> eval_f(const NonlinearitySpec& spec, double t) {
  double f = 0.0, F = 0.0;
  const double at = std::abs(t);
  if (at == 0.0) return {0.0, 0.0};
  for (const auto& term : spec.terms) {
    const double pw = std::pow(at, term.p - 2.0);
    f += term.a * pw * t;
    F += term.a / term.p * pw * at * at;
  }
  return {f, F};
}

double eval_fprime(const NonlinearitySpec& spec, double t) {
  double d = 0.0;
  const double at = std::abs(t);
  if (at == 0.0) return 0.0;
  for (const auto& term : spec.terms)
    d += term.a * (term.p - 1.0) * std::pow(at, term.p - 2.0);
  return d;
}

Vector apply_f(const NonlinearitySpec& spec, const Vector& u) {
  Vector out(u.size());
  for (Index i = 0; i < u.size(); ++i) out[i] = eval_f(spec, u[i]).first;
  return out;
}

Vector apply_F(const NonlinearitySpec& spec, const Vector& u) {
  Vector out(u.size());
  for (Index i = 0; i < u.size(); ++i) out[i] = eval_f(spec, u[i]).second;
  return out;
}

Vector apply_fprime(const NonlinearitySpec& spec, const Vector& u) {
  Vector out(u.size());
  for (Index i = 0; i < u.size(); ++i) out[i] = eval_fprime(spec, u[i]);
  return out;
}

bool HypothesisFlags::all(const BoundaryMode& mode) const {
  bool ok = f2 && f3 && f4 && interior_exponents_ok;
  if (mode.is_dirichlet()) ok = ok && f1;
  if (mode.is_neumann()) ok = ok && f1_dprime;
  if (mode.is_robin()) ok = ok && f1_prime && g1 && g2 && boundary_exponents_ok;
  return ok;
}

HypothesisFlags hypothesis_check(const NonlinearitySpec& f,
                                 const NonlinearitySpec* g,
                                 const BoundaryMode& mode, int dimension,
                                 double lambda_ref, double lambda_tilde) {
  HypothesisFlags flags;
  const double K2 = f.certificate.K2;
  flags.f1 = mode.is_dirichlet() && K2 < lambda_ref;
  flags.f1_prime = mode.is_robin() && K2 < lambda_ref / 4.0;
  flags.f1_dprime = mode.is_neumann() && K2 < lambda_ref;
  const double pstar = critical_exponent_interior(dimension);
  flags.interior_exponents_ok = std::all_of(
      f.terms.begin(), f.terms.end(),
      [&](const PowerTerm& t) { return t.p > 2.0 && t.p < pstar; });
  if (g != nullptr) {
    const double lstar = critical_exponent_trace(dimension);
    flags.boundary_exponents_ok = std::all_of(
        g->terms.begin(), g->terms.end(),
        [&](const PowerTerm& t) { return t.p > 2.0 && t.p < lstar; });
    flags.g1 = g->certificate.K2 < lambda_tilde / 4.0 &&
               flags.boundary_exponents_ok;
    flags.g2 = true;
  } else if (mode.is_robin()) {
    flags.g1 = false;
    flags.g2 = false;
  }
  return flags;
}

}  // namespace normcrit
