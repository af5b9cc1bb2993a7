#pragma once

#include "rq/kernel.hpp"

#include <cstdint>
#include <mutex>
#include <unordered_map>

namespace rq {

struct PsaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PsaConfig {
  int max_order = 1024;      // DEPTH_EXCEEDED beyond this
  double axis_tol = 1e-7;    // |z1| below which the axis contour takes over
  double one_tol = 5e-3;     // |z1 - 1| trigger for a z1 contour
  double curve_tol = 1e-3;   // |z2 - Y0(z1)| trigger for a z2 contour
  double axis_radius = 0.45;  // |z1| contour used for z1 = 0 boundary values
  int axis_points = 24;
  double local_radius = 0.05;   // radius of the z1 contour near z1 = 1
  double curve_radius = 8e-3;   // radius of z2 contours on the root curve
  int local_points = 32;
  RootSolverConfig root;
};

// pgf selected by eval_pgf: Joint = embedded-chain pgf (general service),
// Idle / Busy = the idle- and busy-server pgfs (exponential service).
enum class Component { Joint, Idle, Busy };

// Memoized recursive evaluator of the series coefficients V_m (general
// service) or V_m^(0), V_m^(1) (exponential service) at complex points.
//
// One recursion row (see KernelBundle) pinned at the in-disk lead-kernel
// root y = Y0(z1) eliminates the z2 = 0 boundary unknown.  With
// s(z2) := side(z1,z2)/side(z1,y) and the pole-free kernel remainders
// mix_reg / base_reg / shift_reg (the 1/z1 parts of mix, base, shift are
// exact multiples of side's, so s*side(z1,y) == side(z1,z2) cancels them):
//   m = 0:   V0  = v00 * (base_reg(z1,z2) - s(z2) base_reg(z1,y)) / lead
//   m >= 1:  V_m = [ r side(z1,z2) (V_{m-1}(z1,z2) - V_{m-1}(z1,y)
//                                   - V_{m-1}(0,z2) + V_{m-1}(0,y))
//                    + mix_reg(z1,z2) V_{m-1}(z1,z2)
//                    - s(z2) mix_reg(z1,y) V_{m-1}(z1,y)
//                    + V_{m-1}(0,0) (shift_reg(z1,z2) - s(z2) shift_reg(z1,y)) ]
//                  / lead(z1,z2)
// with V_m(0,0) = 0 for m >= 1.  The constant v00 = V_0(0,0) is anchored
// numerically so that the known normalization at (1,1) holds exactly.
//
// The formula has removable 0/0 points (z1 = 0; z2 on the root curve
// z2 = Y0(z1), notably (1,1)), but each V_m is analytic on the bidisk, so
// such points are recovered by Cauchy sampling: the value is the average of
// well-conditioned evaluations on a small circle around the point (or a
// weighted average over the |z1| = axis_radius contour for z1 near 0).
// Averages do not amplify roundoff, so the error stays at roundoff level
// uniformly in the recursion depth, unlike offset-extrapolation ladders
// whose error grows geometrically with the order.
class CoefficientEvaluator {
 public:
  explicit CoefficientEvaluator(ModelSpec model, PsaConfig cfg = {});

  const KernelBundle& bundle() const { return bundle_; }
  const ModelSpec& spec() const { return bundle_.spec(); }
  const PsaConfig& config() const { return cfg_; }
  double v00() const { return v00_; }

  // V_m (general-service variants) or V_m^(0) (exponential variants)
  cplx eval_v(int m, cplx z1, cplx z2) const;
  // V_m^(1); exponential-service variants only
  cplx eval_v1(int m, cplx z1, cplx z2) const;

  struct PgfValue {
    cplx value;
    double last_term;  // |V_M xi^M|, truncation indicator
  };
  PgfValue eval_pgf(Component c, double xi, cplx z1, cplx z2, int M) const;

  cplx y0(cplx z1) const;  // cached lead-kernel root

 private:
  cplx v_guarded(int m, cplx z1, cplx z2) const;
  cplx v_raw(int m, cplx z1, cplx z2) const;
  cplx axis_contour(int m, cplx z1, cplx z2) const;
  cplx band_contour(int m, cplx z1, cplx z2) const;
  cplx local_contour_z1(int m, cplx z1, cplx z2) const;
  cplx local_contour_z2(int m, cplx z1, cplx z2) const;

  struct Key {
    int m;
    std::uint64_t a, b, c, d;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const;
  };

  KernelBundle bundle_;
  PsaConfig cfg_;
  double v00_ = 1.0;
  // image of the axis contour under Y0; axis queries with z2 inside the
  // trigger disk are rerouted through an outer z2 circle that clears the
  // whole image region at once (see band_contour)
  cplx band_center_ = 0.0;
  real band_trigger_ = 0.0;
  real band_big_radius_ = 0.0;
  mutable std::mutex mu_;
  mutable std::unordered_map<Key, cplx, KeyHash> vcache_;
  mutable std::unordered_map<Key, cplx, KeyHash> ycache_;
};

}  // namespace rq
