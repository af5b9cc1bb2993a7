#include "rq/metrics.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>

namespace rq {

namespace {

// series coefficient of the full stationary pgf: idle + busy parts for the
// exponential-service variants, the embedded-chain pgf otherwise
real pgf_coeff(const CoefficientEvaluator& ev, int m, cplx z1, cplx z2) {
  cplx v = ev.eval_v(m, z1, z2);
  if (is_exponential_service(ev.spec().variant)) v += ev.eval_v1(m, z1, z2);
  return v.real();
}

// one-sided interior stencil for f'(1): all nodes strictly inside the disk,
// exact for quadratics, error O(h^2)
real one_sided(const CoefficientEvaluator& ev, int m, int orbit, double h) {
  auto f = [&](real t) {
    const cplx z1 = orbit == 1 ? cplx(t) : cplx(1.0L);
    const cplx z2 = orbit == 2 ? cplx(t) : cplx(1.0L);
    return pgf_coeff(ev, m, z1, z2);
  };
  const real hh = h;
  return (5.0L * f(1.0L - hh) - 8.0L * f(1.0L - 2.0L * hh) +
          3.0L * f(1.0L - 3.0L * hh)) /
         (2.0L * hh);
}

// Richardson step on the O(h^2) stencil
double boundary_derivative(const CoefficientEvaluator& ev, int m, int orbit,
                           double h) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    const real d1 = one_sided(ev, m, orbit, h);
    const real d2 = one_sided(ev, m, orbit, h / 2.0);
    const real r = (4.0L * d2 - d1) / 3.0L;
    if (std::isfinite(static_cast<double>(r))) return static_cast<double>(r);
    h /= 2.0;  // retry once on a finer step
  }
  throw MetricsError("NAN_DERIVATIVE");
}

double horner(const std::vector<double>& c, double x) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

}  // namespace

SeriesMetrics mean_series(const CoefficientEvaluator& ev, int orbit, int M,
                          double h) {
  if (orbit != 1 && orbit != 2) throw MetricsError("orbit must be 1 or 2");
  if (M < 0) throw MetricsError("negative series order");
  SeriesMetrics sm;
  sm.orbit = orbit;
  sm.coeff.reserve(M + 1);
  for (int m = 0; m <= M; ++m)
    sm.coeff.push_back(boundary_derivative(ev, m, orbit, h));
  return sm;
}

TruncatedValue truncated_mean(const SeriesMetrics& sm, double xi) {
  if (xi < 0.0 || xi > 1.0) throw MetricsError("xi outside [0,1]");
  TruncatedValue tv;
  tv.value = horner(sm.coeff, xi);
  tv.last_term = std::abs(sm.coeff.back() * std::pow(xi, sm.order()));
  // negative mean or a last term that is not small against the value means
  // the truncation left the series' working range
  tv.trusted = tv.value >= 0.0 &&
               tv.last_term <= 0.1 * std::max(std::abs(tv.value), 1e-9);
  return tv;
}

PadeApproximant pade_from_series(const SeriesMetrics& sm, int L, int N) {
  if (L < 0 || N < 0 || L + N > sm.order())
    throw MetricsError("need L+N+1 series coefficients");
  const auto& c = sm.coeff;
  auto at = [&](int k) { return k >= 0 ? c[k] : 0.0; };

  PadeApproximant pa;
  pa.den.assign(N + 1, 0.0);
  pa.den[0] = 1.0;
  if (N > 0) {
    // Toeplitz system matching series orders L+1 .. L+N
    Eigen::MatrixXd A(N, N);
    Eigen::VectorXd b(N);
    for (int j = 0; j < N; ++j) {
      for (int n = 0; n < N; ++n) A(j, n) = at(L + 1 + j - (n + 1));
      b(j) = -at(L + 1 + j);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (!lu.isInvertible()) throw MetricsError("SINGULAR_SYSTEM");
    const Eigen::VectorXd w = lu.solve(b);
    for (int n = 0; n < N; ++n) pa.den[n + 1] = w(n);
  }
  pa.num.assign(L + 1, 0.0);
  for (int l = 0; l <= L; ++l)
    for (int n = 0; n <= std::min(l, N); ++n)
      pa.num[l] += pa.den[n] * at(l - n);

  // denominator zero on [0,1] makes the approximant unusable there
  double prev = horner(pa.den, 0.0);
  for (int i = 1; i <= 1024; ++i) {
    const double d = horner(pa.den, i / 1024.0);
    if (std::abs(d) < 1e-12 || d * prev < 0.0) {
      pa.defective = true;
      break;
    }
    prev = d;
  }
  return pa;
}

double PadeApproximant::eval(double xi) const {
  return horner(num, xi) / horner(den, xi);
}

double pole_clearance(const PadeApproximant& p) {
  const int n = static_cast<int>(p.den.size()) - 1;
  if (n <= 0) return std::numeric_limits<double>::infinity();
  if (n == 1) return std::abs(p.den[0] / p.den[1]);
  // companion-matrix eigenvalues of the reversed denominator
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) comp(i, n - 1) = -p.den[i] / p.den[n];
  const auto roots = comp.eigenvalues();
  double r = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) r = std::min(r, std::abs(roots[i]));
  return r;
}

double TwoSidedPade::eval(double xi) const {
  const double margin_lo = pole_clearance(lo) - xi;
  const double margin_hi = pole_clearance(hi) - (1.0 - xi);
  return margin_lo >= margin_hi ? lo.eval(xi) : hi.eval(1.0 - xi);
}

double normalization_residual(const CoefficientEvaluator& ev, double xi,
                              int M) {
  const cplx one(1.0L);
  if (is_exponential_service(ev.spec().variant)) {
    const cplx h0 = ev.eval_pgf(Component::Idle, xi, one, one, M).value;
    const cplx h1 = ev.eval_pgf(Component::Busy, xi, one, one, M).value;
    return static_cast<double>(std::abs(h0 + h1 - 1.0));
  }
  const cplx pi = ev.eval_pgf(Component::Joint, xi, one, one, M).value;
  return static_cast<double>(std::abs(pi - 1.0));
}

}  // namespace rq
