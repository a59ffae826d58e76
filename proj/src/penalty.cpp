#include "normcrit/penalty.hpp"

#include <cmath>
#include <limits>

namespace normcrit {

PenaltyValue penalty(double s, double r) {
  if (!(s >= 0.0) || s >= 1.0)
    fail(ErrorCode::SOutOfRange, "s must lie in [0, 1)");
  if (!(r > 1.0)) fail(ErrorCode::SOutOfRange, "r must exceed 1");

  PenaltyValue v;
  if (s == 0.0) {
    // s^(r-2) at s=0: zero for r > 2, one for r = 2, +inf for r < 2.
    v.d2f = r > 2.0 ? 0.0
            : r == 2.0
                ? 2.0
                : std::numeric_limits<double>::infinity();
    return v;
  }
  const double g = 1.0 - s;
  // exp/log form keeps s^r accurate for very large r near the wall
  const double logs = std::log(s);
  const double sr = std::exp(r * logs);
  const double sr1 = std::exp((r - 1.0) * logs);
  const double sr2 = std::exp((r - 2.0) * logs);
  v.f = sr / g;
  v.df = r * sr1 / g + sr / (g * g);
  v.d2f = r * (r - 1.0) * sr2 / g + 2.0 * r * sr1 / (g * g) +
          2.0 * sr / (g * g * g);
  v.h = v.df * s - v.f;
  return v;
}

namespace {

constexpr double beta_blend(double x) {
  return -1.0 + x * x * x * (6.0 + x * (-8.0 + 3.0 * x));
}

// dense compile-time sample: the quintic blend is monotone and nonpositive
constexpr bool beta_blend_valid() {
  double prev = -1.0;
  for (int i = 0; i <= 1000; ++i) {
    const double b = beta_blend(i / 1000.0);
    if (b < prev || b > 0.0) return false;
    prev = b;
  }
  return prev == 0.0;
}
static_assert(beta_blend_valid());

}  // namespace

double beta_truncation(double t) {
  if (t >= 0.0) return t;
  if (t <= -1.0) return -1.0;
  return beta_blend(t + 1.0);
}

double beta_truncation_derivative(double t) {
  if (t >= 0.0) return 1.0;
  if (t <= -1.0) return 0.0;
  const double x = t + 1.0;
  return x * x * (18.0 + x * (-32.0 + 15.0 * x));
}

}  // namespace normcrit
