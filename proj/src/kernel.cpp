#include "rq/kernel.hpp"

#include <algorithm>
#include <cmath>

namespace rq {

namespace {

bool general_service(const ModelSpec& m) {
  return !is_exponential_service(m.variant);
}

}  // namespace

KernelBundle::KernelBundle(ModelSpec model) : model_(std::move(model)) {
  model_.finalize();
}

cplx KernelBundle::coupling(cplx z1, cplx z2) const {
  const double p1 = model_.p1, p2 = 1.0 - model_.p1;
  const double l = model_.lambda;
  return l * ((p1 * z2 + p2 * z1) * model_.batch_pgf(z1, z2) +
              (z2 - z1) * (p2 * model_.batch_pgf(z1, 0.0) -
                           p1 * model_.batch_pgf(0.0, z2)));
}

cplx KernelBundle::lead_parent(cplx z1, cplx z2, double xi) const {
  const double l = model_.lambda;
  const double m1 = model_.mu1_star, m2 = model_.mu2_star;
  const cplx G = model_.batch_pgf(z1, z2);
  if (general_service(model_)) {
    const cplx beta = model_.arrivals_lst(z1, z2);
    return z1 * z2 * (l + m2 - xi * (m2 - m1)) -
           (xi * m1 * z2 + (1.0 - xi) * m2 * z1 + coupling(z1, z2)) * beta;
  }
  const double mu = model_.service_rate();
  const double alpha = l + xi * m1 + (1.0 - xi) * m2;
  if (model_.variant == Variant::BatchExp) {
    return mu * (coupling(z1, z2) - l * z1 * z2 + xi * m1 * z2 * (1.0 - z1) +
                 (1.0 - xi) * m2 * z1 * (1.0 - z2)) -
           z1 * z2 * l * alpha * (1.0 - G);
  }
  // single arrivals, exponential service
  const double l1 = model_.lambda1, l2 = model_.lambda2;
  return (1.0 - z1) * z2 * (l1 * alpha * z1 - mu * xi * m1) +
         (1.0 - z2) * z1 * (l2 * alpha * z2 - mu * (1.0 - xi) * m2);
}

cplx KernelBundle::side_parent0(cplx z1, cplx z2) const {
  const double l = model_.lambda;
  const double m1 = model_.mu1_star, m2 = model_.mu2_star;
  if (general_service(model_)) {
    const cplx beta = model_.arrivals_lst(z1, z2);
    return beta / (l + m1) *
           ((m2 - m1) * coupling(z1, z2) + l * (m1 * z2 - m2 * z1) +
            m1 * m2 * (z2 - z1));
  }
  const double mu = model_.service_rate();
  if (model_.variant == Variant::BatchExp) {
    const cplx G = model_.batch_pgf(z1, z2);
    return mu * (m2 * z1 * (1.0 - z2) - m1 * z2 * (1.0 - z1)) -
           l * z1 * z2 * (1.0 - G) * (m2 - m1);
  }
  const double l1 = model_.lambda1, l2 = model_.lambda2;
  return (1.0 - z1) * z2 * (l1 * (m2 - m1) * z1 + mu * m1) +
         (1.0 - z2) * z1 * (l2 * (m2 - m1) * z2 - mu * m2);
}

cplx KernelBundle::base_parent(cplx z1, cplx z2, double xi) const {
  const double l = model_.lambda;
  const double m1 = model_.mu1_star, m2 = model_.mu2_star;
  if (general_service(model_)) {
    const cplx beta = model_.arrivals_lst(z1, z2);
    const double c = l + m2 - xi * (m2 - m1);
    return beta *
           (coupling(z1, z2) *
                (1.0 + c * (1.0 / l - 1.0 / (l + m1) - 1.0 / (l + m2))) +
            m2 * z1 - xi * (m2 * z1 - m1 * z2) -
            c * (m1 * z2 / (l + m1) + m2 * z1 / (l + m2)));
  }
  const double mu = model_.service_rate();
  if (model_.variant == Variant::BatchExp) {
    const cplx G = model_.batch_pgf(z1, z2);
    return mu * ((1.0 - xi) * m1 * z2 * (1.0 - z1) +
                 xi * m2 * z1 * (1.0 - z2)) -
           l * z1 * z2 * (1.0 - G) * ((1.0 - xi) * m1 + xi * m2);
  }
  const double l1 = model_.lambda1, l2 = model_.lambda2;
  const double w = (1.0 - xi) * m1 + xi * m2;
  return (1.0 - z1) * z2 * (l1 * w * z1 - (1.0 - xi) * mu * m1) +
         (1.0 - z2) * z1 * (l2 * w * z2 - xi * mu * m2);
}

cplx KernelBundle::lead(cplx z1, cplx z2) const {
  return lead_parent(z1, z2, 0.0) / z1;
}

cplx KernelBundle::side(cplx z1, cplx z2) const {
  return side_parent0(z1, z2) / z1;
}

cplx KernelBundle::base(cplx z1, cplx z2) const {
  return base_parent(z1, z2, 0.0) / z1;
}

cplx KernelBundle::mix(cplx z1, cplx z2) const {
  return (lead_parent(z1, z2, 0.0) - lead_parent(z1, z2, 1.0)) / z1;
}

cplx KernelBundle::shift(cplx z1, cplx z2) const {
  if (general_service(model_))
    return (base_parent(z1, z2, 1.0) - base_parent(z1, z2, 0.0)) / z1;
  return side(z1, z2);
}

cplx KernelBundle::mix_reg(cplx z1, cplx z2) const {
  if (!general_service(model_)) return 0.0;
  return (lead_parent(z1, z2, 0.0) - lead_parent(z1, z2, 1.0) -
          side_ratio() * side_parent0(z1, z2)) /
         z1;
}

cplx KernelBundle::base_reg(cplx z1, cplx z2) const {
  return (base_parent(z1, z2, 0.0) + side_parent0(z1, z2)) / z1;
}

cplx KernelBundle::shift_reg(cplx z1, cplx z2) const {
  if (!general_service(model_)) return 0.0;
  return (base_parent(z1, z2, 1.0) - base_parent(z1, z2, 0.0) -
          side_parent0(z1, z2)) /
         z1;
}

double KernelBundle::side_ratio() const {
  if (general_service(model_))
    return (model_.lambda + model_.mu1_star) / (model_.lambda + model_.mu2_star);
  return 1.0;
}

std::vector<std::string> KernelBundle::kernel_names() const {
  if (general_service(model_)) return {"U", "S", "G0", "T0", "T1", "L"};
  if (model_.variant == Variant::BatchExp) return {"U1", "U0", "F0", "L"};
  return {"G", "G10", "G00"};
}

cplx KernelBundle::eval_kernel(const std::string& name, cplx z1, cplx z2,
                               const RootSolverConfig& cfg) const {
  const auto names = kernel_names();
  if (std::find(names.begin(), names.end(), name) == names.end())
    throw KernelError("kernel '" + name + "' undefined for variant " +
                      variant_name(model_.variant));
  auto raw = [&](cplx a) -> cplx {
    if (name == "L") return coupling(a, z2);
    if (name == "U" || name == "U1" || name == "G") return lead(a, z2);
    if (name == "S" || name == "U0" || name == "G10") return side(a, z2);
    if (name == "T0" || name == "F0" || name == "G00") return base(a, z2);
    if (name == "G0") return mix(a, z2);
    return shift(a, z2);  // "T1"
  };
  if (std::abs(z1) >= cfg.eps0) return raw(z1);
  // small-offset limit with one Richardson step
  const cplx f1 = raw(cplx(cfg.eps0)), f2 = raw(cplx(2.0 * cfg.eps0));
  return 2.0 * f1 - f2;
}

cplx solve_y0(const KernelBundle& k, cplx z1, const RootSolverConfig& cfg) {
  auto f = [&](cplx z2) { return k.lead_parent(z1, z2, 0.0); };
  const double h = 1e-7;
  // scale from the linear z2 coefficient near 0, used for convergence checks
  const double scale = std::max(
      1.0, static_cast<double>(std::abs(f(cplx(0.5)) - f(cplx(0.0)))) * 2.0);

  auto newton = [&](cplx z) -> std::pair<cplx, bool> {
    cplx fz = f(z);
    for (int it = 0; it < cfg.max_iter; ++it) {
      const cplx df = (f(z + h) - f(z - h)) / (2.0 * h);
      if (std::abs(df) == 0.0) return {z, false};
      cplx step = fz / df;
      cplx zn = z - step;
      cplx fn = f(zn);
      int damp = 0;
      while (std::abs(fn) > std::abs(fz) && damp < 30) {
        step *= 0.5;
        zn = z - step;
        fn = f(zn);
        ++damp;
      }
      z = zn;
      fz = fn;
      if (std::abs(step) < cfg.newton_tol && std::abs(fz) < cfg.newton_tol * scale)
        return {z, true};
    }
    return {z, std::abs(fz) < cfg.newton_tol * scale};
  };

  auto [root, ok] = newton(cplx(0.0));
  if (!ok && cfg.fixed_point_fallback) {
    // frozen-slope iteration z <- z - f(z)/f'(0); the Rouche dominance of the
    // linear term makes this a contraction on the disk
    const cplx slope = (f(cplx(h)) - f(cplx(-h))) / (2.0 * h);
    cplx z = 0.0;
    for (int it = 0; it < cfg.max_iter; ++it) {
      const cplx zn = z - f(z) / slope;
      if (std::abs(zn - z) < cfg.newton_tol) {
        z = zn;
        ok = std::abs(f(z)) < 1e-9 * scale;
        break;
      }
      z = zn;
    }
    if (ok) {
      auto polished = newton(z);
      if (polished.second) root = polished.first;
      else root = z;
    }
  }
  if (!ok) throw KernelError("NO_CONVERGENCE: Y0 root search at z1=(" +
                             std::to_string(z1.real()) + "," +
                             std::to_string(z1.imag()) + ")");
  // for |z1| <= 1 the root is guaranteed inside the closed disk; for the
  // slight |z1| > 1 excursions used by contour sampling the analytic
  // continuation may leave it, so only bound it loosely there
  const double bound = std::abs(z1) <= 1.0 + 1e-9 ? 1.0 + 1e-8 : 1.25;
  if (std::abs(root) > bound)
    throw KernelError("ROOT_OUTSIDE_DISK: |Y0|=" + std::to_string(std::abs(root)));
  return root;
}

Y0Derivative y0_derivative_at_one(const KernelBundle& k,
                                  const RootSolverConfig& cfg) {
  const ModelSpec& m = k.spec();
  Y0Derivative d;
  if (m.variant == Variant::BatchGeneral || m.variant == Variant::SingleExp) {
    const double l = m.lambda, b = m.service.mean();
    const double m2 = m.mu2_star;
    const double p1 = m.p1, p2 = 1.0 - m.p1;
    const double num = l * (m.gbar1 - 1.0 + m.gbar1 * (l + m2) * b +
                            p2 * (1.0 - m.g10) + p1 * m.g01);
    const double den = m2 - l * (m.gbar2 - 1.0 + m.gbar2 * (l + m2) * b +
                                 p1 * (1.0 - m.g01) + p2 * m.g10);
    d.value = num / den;
    d.closed_form = true;
    return d;
  }
  // one-sided difference staying inside the disk, with Y0(1) = 1
  const double h = 1e-5;
  const cplx y1 = solve_y0(k, cplx(1.0 - h), cfg);
  const cplx y2 = solve_y0(k, cplx(1.0 - 2.0 * h), cfg);
  d.value = ((3.0 - 4.0 * y1 + y2) / (2.0 * h)).real();
  d.closed_form = false;
  return d;
}

}  // namespace rq
