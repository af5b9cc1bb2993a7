#pragma once

#include "rq/model.hpp"

namespace rq {

struct KernelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RootSolverConfig {
  double newton_tol = 1e-12;
  int max_iter = 200;
  bool fixed_point_fallback = true;
  double eps0 = 1e-7;  // z1 offset for limit evaluation near 0
};

// Five functions of (z1,z2) drive one recursion row per series order m:
//
//   lead*V_m = side*V_m(z1,0) + base*V_m(0,0) + P_{m-1},
//   P_m = mix*V_m - side*V_m(z1,0) - r*side*V_m(0,z2) + shift*V_m(0,0),
//
// with r = side_ratio().  Exponential-service variants have mix = shift =
// side and r = 1; general-service variants have r = (l+mu1*)/(l+mu2*).
//
// The functions are not transcribed from their rearranged displays.  The
// parent functional equation reads lead_p*F = side_p*F(z1,0) +
// cross_p*F(0,z2) + base_p*F(0,0) with every kernel affine in xi and
// cross_p = -xi/(1-xi) * r * side_p.  Evaluating the parents at xi = 0 and
// xi = 1 and dividing by z1 yields the bundle exactly:
//   lead  = lead_p(0)/z1          mix  = (lead_p(0)-lead_p(1))/z1
//   side  = side_p(0)/z1          base = base_p(0)/z1
//   shift = (base_p(1)-base_p(0))/z1
// The structural identities side_p(0) = lead_p(0)-lead_p(1) (exponential
// variants) and base_p(1)-base_p(0) = side_p(0) (exponential variants) hold
// and are asserted in tests.
class KernelBundle {
 public:
  explicit KernelBundle(ModelSpec model);

  const ModelSpec& spec() const { return model_; }

  cplx lead(cplx z1, cplx z2) const;
  cplx side(cplx z1, cplx z2) const;
  cplx base(cplx z1, cplx z2) const;
  cplx mix(cplx z1, cplx z2) const;
  cplx shift(cplx z1, cplx z2) const;
  double side_ratio() const;

  // pole-free remainders: every kernel's 1/z1 part is a multiple of side's
  // (mix ~ r*side, base ~ -side, shift ~ side near z1 = 0), so these
  // combinations are regular at z1 = 0 and vanish identically for the
  // exponential-service variants:
  //   mix_reg = mix - r*side,  base_reg = base + side,  shift_reg = shift - side
  cplx mix_reg(cplx z1, cplx z2) const;
  cplx base_reg(cplx z1, cplx z2) const;
  cplx shift_reg(cplx z1, cplx z2) const;

  // batch-admission function L(z1,z2)
  cplx coupling(cplx z1, cplx z2) const;

  // parent-equation kernels, affine in xi; row asserts
  //   lead_parent*F = side_parent(0)*(1-xi)*F(z1,0)
  //                 - xi*r*side_parent(0)*F(0,z2) + base_parent*F(0,0)
  cplx lead_parent(cplx z1, cplx z2, double xi) const;
  cplx base_parent(cplx z1, cplx z2, double xi) const;
  cplx side_parent0(cplx z1, cplx z2) const;  // side_parent/(1-xi), xi-free

  // displayed-name access: "U","S","G0","T0","T1","L" (general variants),
  // "U1","U0","F0","L" (batch exponential), "G","G10","G00" (single
  // exponential); near z1 = 0 returns a small-offset limit with one
  // Richardson step.
  cplx eval_kernel(const std::string& name, cplx z1, cplx z2,
                   const RootSolverConfig& cfg = {}) const;
  std::vector<std::string> kernel_names() const;

 private:
  ModelSpec model_;
};

// Unique root z2 = Y0(z1) of lead(z1, .) inside the closed unit disk,
// by damped Newton seeded at 0 with a frozen-slope fixed-point fallback.
// Throws KernelError "NO_CONVERGENCE" / "ROOT_OUTSIDE_DISK".
cplx solve_y0(const KernelBundle& k, cplx z1, const RootSolverConfig& cfg = {});

struct Y0Derivative {
  double value = 0.0;
  bool closed_form = false;  // false: central-difference fallback
};

// dY0/dz1 at z1 = 1.
Y0Derivative y0_derivative_at_one(const KernelBundle& k,
                                  const RootSolverConfig& cfg = {});

}  // namespace rq
