#pragma once

#include "rq/psa.hpp"

#include <vector>

namespace rq {

struct MetricsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// series coefficients v_{k,m} of E(N_k)(xi) = sum_m v_{k,m} xi^m
struct SeriesMetrics {
  int orbit = 1;  // 1 or 2
  std::vector<double> coeff;
  int order() const { return static_cast<int>(coeff.size()) - 1; }
};

struct TruncatedValue {
  double value = 0.0;
  double last_term = 0.0;  // |v_{k,M} xi^M|, truncation indicator
  bool trusted = true;     // false on negative mean or dominant last term
};

// rational [L/N] approximant with denominator normalized to w0 = 1
struct PadeApproximant {
  std::vector<double> num;  // v_0 .. v_L
  std::vector<double> den;  // w_0 .. w_N
  bool defective = false;   // denominator vanishes somewhere on [0, 1]

  double eval(double xi) const;
  int order_l() const { return static_cast<int>(num.size()) - 1; }
  int order_n() const { return static_cast<int>(den.size()) - 1; }
};

// d/dz_k of the stationary pgf's series coefficients at (1,1), by one-sided
// interior finite differences (the lead kernel vanishes at (1,1), so the
// stencil keeps every node strictly inside the disk) with one Richardson
// step.  Exponential-service variants differentiate the idle + busy pgf sum;
// embedded-chain variants differentiate the joint pgf.
SeriesMetrics mean_series(const CoefficientEvaluator& ev, int orbit, int M,
                          double h = 1e-4);

TruncatedValue truncated_mean(const SeriesMetrics& sm, double xi);

// Solves the NxN Toeplitz system for the denominator (w0 = 1), convolves for
// the numerator.  Requires L + N <= sm.order().  Throws SINGULAR_SYSTEM if
// the system is numerically rank-deficient.
PadeApproximant pade_from_series(const SeriesMetrics& sm, int L, int N);

// modulus of the nearest denominator root: the radius inside which the
// approximant has analytic headroom
double pole_clearance(const PadeApproximant& p);

// One-sided approximants stall near their own denominator roots, which sit
// at the series' finite convergence radius.  The reflected expansion (the
// class-swapped model around the opposite end of the fairness range) covers
// the rest of [0,1]: eval picks the branch with the larger margin between
// its pole radius and the evaluation argument.  `lo` expands E(N_k) in xi,
// `hi` expands E(N_{3-k}) of the swapped model in 1-xi.
struct TwoSidedPade {
  PadeApproximant lo, hi;
  double eval(double xi) const;
};

// |truncated pgf at (1,1) - 1|: idle + busy sum for exponential variants,
// joint embedded pgf otherwise.
double normalization_residual(const CoefficientEvaluator& ev, double xi, int M);

}  // namespace rq
