#pragma once

#include "normcrit/types.hpp"

namespace normcrit {

/// Barrier calculus at s = ||u||_2^2 / mu:
///   f(s)  = s^r / (1 - s)
///   df    = r s^(r-1)/(1-s) + s^r/(1-s)^2
///   d2f   = r(r-1) s^(r-2)/(1-s) + 2 r s^(r-1)/(1-s)^2 + 2 s^r/(1-s)^3
///   h     = df * s - f
/// All four blow up as s -> 1; df > (r/s) f > 0 and d2f > 0 on (0,1).
struct PenaltyValue {
  double f = 0.0;
  double df = 0.0;
  double d2f = 0.0;
  double h = 0.0;
};

/// Evaluates the barrier and its derivatives for s in [0,1) and r > 1.
PenaltyValue penalty(double s, double r);

/// Smooth truncation used to extend the penalized energy by -1 outside the
/// mass ball: identity on t >= 0, constant -1 on t <= -1, and on (-1,0) the
/// quintic Hermite interpolant matching (value, d, d2) = (-1,0,0) at -1 and
/// (0,1,0) at 0.  Monotone non-decreasing and <= 0 on t <= 0.
double beta_truncation(double t);
double beta_truncation_derivative(double t);

}  // namespace normcrit
