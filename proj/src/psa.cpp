#include "rq/psa.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace rq {

namespace {

std::uint64_t bits(double x) {
  if (x == 0.0) x = 0.0;  // collapse -0.0
  return std::bit_cast<std::uint64_t>(x);
}

}  // namespace

std::size_t CoefficientEvaluator::KeyHash::operator()(const Key& k) const {
  std::uint64_t h = 0x9e3779b97f4a7c15ull ^ static_cast<std::uint64_t>(k.m);
  for (std::uint64_t v : {k.a, k.b, k.c, k.d}) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

CoefficientEvaluator::CoefficientEvaluator(ModelSpec model, PsaConfig cfg)
    : bundle_(std::move(model)), cfg_(cfg) {
  const ModelSpec& m = spec();
  double target = 1.0;  // embedded-chain pgf normalization Pi(1,1) = 1
  if (is_exponential_service(m.variant)) {
    target = busy_idle_probs(m).second;  // V_0^(0)(1,1) = p_idle
  } else {
    if (!stability(m).stable) throw PsaError("unstable model");
  }
  {
    // Y0 maps the axis disk |z1| <= axis_radius onto a region bounded by the
    // images of the contour nodes.  Axis queries with z2 in (or near) that
    // region would place the in-disk singular point of w -> V_m(w,z2) on or
    // near the contour itself; such queries are rerouted through an outer z2
    // circle clearing the region entirely.  Light-load batch models make the
    // region tiny (Y0 nearly flat), which is exactly when neighbouring node
    // images crowd below the curve-guard scale.
    const int K = cfg_.axis_points;
    std::vector<cplx> img(K);
    cplx center = 0.0;
    for (int j = 0; j < K; ++j) {
      const cplx w = std::polar(
          static_cast<real>(cfg_.axis_radius),
          real(2.0L * std::numbers::pi_v<real> * j / K));
      img[j] = y0(w);
      center += img[j];
    }
    center /= static_cast<double>(K);
    real rb = 0.0;
    for (const cplx& v : img) rb = std::max(rb, static_cast<real>(std::abs(v - center)));
    band_center_ = center;
    band_trigger_ = rb + 2 * static_cast<real>(cfg_.curve_radius);
    band_big_radius_ = 2 * band_trigger_ + 2 * static_cast<real>(cfg_.curve_radius);
  }
  v00_ = 1.0;
  const cplx unit = v_guarded(0, 1.0, 1.0);
  if (!std::isfinite(unit.real()) || std::abs(unit) < 1e-14)
    throw PsaError("degenerate normalization anchor");
  v00_ = target / unit.real();
  {
    std::lock_guard<std::mutex> lock(mu_);
    vcache_.clear();  // drop values computed with the provisional constant
  }
}

cplx CoefficientEvaluator::y0(cplx z1) const {
  const Key key{0, bits(z1.real()), bits(z1.imag()), 0, 0};
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = ycache_.find(key);
    if (it != ycache_.end()) return it->second;
  }
  const cplx root = solve_y0(bundle_, z1, cfg_.root);
  std::lock_guard<std::mutex> lock(mu_);
  ycache_.emplace(key, root);
  return root;
}

cplx CoefficientEvaluator::eval_v(int m, cplx z1, cplx z2) const {
  if (m < 0) return 0.0;
  if (m > cfg_.max_order) throw PsaError("DEPTH_EXCEEDED");
  return v_guarded(m, z1, z2);
}

// weighted Cauchy average over the fixed contour |w| = axis_radius; for the
// interior target z1 (normally exactly 0) the discretized integral is
// (1/K) sum f(w_j) * w_j / (w_j - z1).  Using one fixed contour keeps the
// sample points shared across all axis queries, so the recursion touches a
// closed, order-independent point set.
cplx CoefficientEvaluator::axis_contour(int m, cplx z1, cplx z2) const {
  const int K = cfg_.axis_points;
  const real r = cfg_.axis_radius;
  cplx acc = 0.0;
  for (int j = 0; j < K; ++j) {
    const cplx w =
        std::polar(r, real(2.0L * std::numbers::pi_v<real> * j / K));
    acc += v_guarded(m, w, z2) * w / (w - z1);
  }
  return acc / static_cast<double>(K);
}

// mean over a z2 circle around the query point, for axis queries whose z2
// lies inside the Y0-image region of the axis disk.  The radius is fixed so
// every circle point clears the image region by more than the trigger
// distance: each member is then an ordinary axis query whose z1 contour
// stays uniformly away from the root curve.  V_m(0,.) is analytic far
// beyond the unit circle (the root-curve 0/0 is removable and the next
// kernel zero sits well outside the disk), so the plain mean is exact.
cplx CoefficientEvaluator::band_contour(int m, cplx z1, cplx z2) const {
  const int K = cfg_.axis_points;
  cplx acc = 0.0;
  for (int j = 0; j < K; ++j) {
    const cplx w = z2 + std::polar(band_big_radius_,
                                   real(2.0L * std::numbers::pi_v<real> *
                                        (j + 0.5L) / K));
    acc += v_guarded(m, z1, w);
  }
  return acc / static_cast<double>(K);
}

// mean over a small circle centered at the query point itself: by the mean
// value property this is exactly the analytic value there, and the circle
// points sit a fixed distance from the z1 ~ 1 degeneracy of side(z1,Y0(z1)).
// The radius shrinks near the unit circle so the sample points stay within
// the (slightly larger) analyticity bidisk of the coefficient functions,
// but is floored well above the trigger tolerances so contour points never
// re-trigger a contour around a shifted center.
cplx CoefficientEvaluator::local_contour_z1(int m, cplx z1, cplx z2) const {
  const int K = cfg_.local_points;
  const real rho = std::clamp(0.3L * (1.05L - std::abs(z1)),
                              static_cast<real>(0.012L),
                              static_cast<real>(cfg_.local_radius));
  cplx acc = 0.0;
  for (int j = 0; j < K; ++j) {
    const cplx w = z1 + std::polar(rho, real(2.0L * std::numbers::pi_v<real> *
                                             j / K));
    acc += v_guarded(m, w, z2);
  }
  return acc / static_cast<double>(K);
}

// same device in the z2 plane for points on or near the root curve
// z2 = Y0(z1), where the pinned formula degenerates to 0/0.
cplx CoefficientEvaluator::local_contour_z2(int m, cplx z1, cplx z2) const {
  const int K = cfg_.local_points;
  // Fixed radius, chosen below half the spacing of adjacent Y0 images of the
  // axis-contour nodes, so circle points around one curve point never come
  // close to a neighbouring curve point (which would amplify noise by
  // |side/lead| there).  Must stay well above curve_tol so circle points are
  // never themselves re-guarded.
  const real rho = static_cast<real>(cfg_.curve_radius);
  cplx acc = 0.0;
  for (int j = 0; j < K; ++j) {
    const cplx w = z2 + std::polar(rho, real(2.0L * std::numbers::pi_v<real> *
                                             j / K));
    acc += v_guarded(m, z1, w);
  }
  return acc / static_cast<double>(K);
}

cplx CoefficientEvaluator::v_guarded(int m, cplx z1, cplx z2) const {
  const Key key{m, bits(z1.real()), bits(z1.imag()), bits(z2.real()),
                bits(z2.imag())};
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = vcache_.find(key);
    if (it != vcache_.end()) return it->second;
  }
  cplx value;
  if (std::abs(z1) < cfg_.axis_tol) {
    value = std::abs(z2 - band_center_) < band_trigger_
                ? band_contour(m, z1, z2)
                : axis_contour(m, z1, z2);
  } else if (std::abs(z1 - 1.0) < cfg_.one_tol) {
    value = local_contour_z1(m, z1, z2);
  } else if (std::abs(z2 - y0(z1)) < cfg_.curve_tol) {
    value = local_contour_z2(m, z1, z2);
  } else {
    value = v_raw(m, z1, z2);
  }
  std::lock_guard<std::mutex> lock(mu_);
  vcache_.emplace(key, value);
  return value;
}

cplx CoefficientEvaluator::v_raw(int m, cplx z1, cplx z2) const {
  const KernelBundle& k = bundle_;
  const cplx y = y0(z1);
  const cplx lead = k.lead(z1, z2);
  const cplx s = k.side(z1, z2) / k.side(z1, y);
  if (m == 0)
    return v00_ * (k.base_reg(z1, z2) - s * k.base_reg(z1, y)) / lead;
  const cplx v_zz = v_guarded(m - 1, z1, z2);
  const cplx v_zy = v_guarded(m - 1, z1, y);
  const cplx v_0z = v_guarded(m - 1, cplx(0.0), z2);
  const cplx v_0y = v_guarded(m - 1, cplx(0.0), y);
  cplx num = k.side_ratio() * k.side(z1, z2) * (v_zz - v_zy - v_0z + v_0y);
  if (!is_exponential_service(spec().variant)) {
    num += k.mix_reg(z1, z2) * v_zz - s * k.mix_reg(z1, y) * v_zy;
    if (m == 1)
      num += v00_ * (k.shift_reg(z1, z2) - s * k.shift_reg(z1, y));
  }
  return num / lead;
}

cplx CoefficientEvaluator::eval_v1(int m, cplx z1, cplx z2) const {
  const ModelSpec& md = spec();
  if (!is_exponential_service(md.variant))
    throw PsaError("V^(1) is defined for exponential-service variants only");
  if (m < 0) return 0.0;
  if (m > cfg_.max_order) throw PsaError("DEPTH_EXCEEDED");
  const double mu = md.service_rate();
  const double m1 = md.mu1_star, m2 = md.mu2_star, l = md.lambda;
  const cplx v_m = eval_v(m, z1, z2);
  const cplx vm_00 = (m == 0) ? cplx(v00_) : cplx(0.0);
  cplx prev = 0.0;  // the m-1 block of the idle-balance identity
  if (m >= 1) {
    const cplx vp_00 = (m - 1 == 0) ? cplx(v00_) : cplx(0.0);
    prev = eval_v(m - 1, z1, z2) - eval_v(m - 1, z1, 0.0) -
           eval_v(m - 1, cplx(0.0), z2) + vp_00;
  }
  return ((l + m2) * v_m - (m2 - m1) * (prev + eval_v(m, z1, 0.0)) -
          m1 * vm_00) /
         mu;
}

CoefficientEvaluator::PgfValue CoefficientEvaluator::eval_pgf(
    Component c, double xi, cplx z1, cplx z2, int M) const {
  const bool expsvc = is_exponential_service(spec().variant);
  if ((c == Component::Joint) == expsvc)
    throw PsaError("component not defined for this variant");
  PgfValue out{0.0, 0.0};
  double p = 1.0;
  for (int m = 0; m <= M; ++m) {
    const cplx term =
        (c == Component::Busy) ? eval_v1(m, z1, z2) : eval_v(m, z1, z2);
    out.value += term * p;
    if (m == M) out.last_term = std::abs(term) * p;
    p *= xi;
  }
  return out;
}

}  // namespace rq
