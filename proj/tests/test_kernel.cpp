#include <doctest.h>

#include "rq/kernel.hpp"

#include <cmath>
#include <random>

using namespace rq;

namespace {

ModelSpec single_exp() {
  return ModelSpec::single_model(Variant::SingleExp, 1.0, 2.2,
                                 ServiceLaw::exponential(5.0), 8.0, 10.0, 0.1);
}

std::vector<ModelSpec> all_variants() {
  return {
      single_exp(),
      ModelSpec::single_model(Variant::SingleGeneral, 1.0, 2.2,
                              ServiceLaw::erlang(2, 10.0), 8.0, 10.0, 0.1),
      ModelSpec::batch_model(Variant::BatchExp, 0.15,
                             BatchLaw::geometric_binomial(0.6),
                             ServiceLaw::exponential(5.0), 8.0, 10.0, 0.1,
                             0.6),
      ModelSpec::batch_model(Variant::BatchGeneral, 0.12,
                             BatchLaw::geometric_binomial(0.6),
                             ServiceLaw::hyperexp({0.4, 0.6}, {3.0, 9.0}), 8.0,
                             10.0, 0.1, 0.6),
  };
}

}  // namespace

TEST_CASE("regular remainders vanish for exponential service") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  for (const ModelSpec& m : all_variants()) {
    KernelBundle k(m);
    const bool expo = is_exponential_service(m.variant);
    for (int i = 0; i < 20; ++i) {
      const cplx z1(u(rng), u(rng)), z2(u(rng), u(rng));
      if (expo) {
        CHECK(std::abs(k.mix_reg(z1, z2)) < 1e-12);
        CHECK(std::abs(k.shift_reg(z1, z2)) < 1e-12);
        CHECK(k.side_ratio() == doctest::Approx(1.0));
      }
      // base + side is regular at z1 = 0 for every variant: the limit along
      // z1 -> 0 must be finite and match a nearby evaluation
      const cplx near0 = k.base_reg(cplx(1e-6L, 0.0L), z2);
      const cplx at = k.base_reg(cplx(2e-6L, 0.0L), z2);
      CHECK(std::abs(near0 - at) < 1e-3 * (1.0 + std::abs(near0)));
    }
  }
}

TEST_CASE("parent row reproduces the regrouped kernels") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.05, 0.9);
  for (const ModelSpec& m : all_variants()) {
    KernelBundle k(m);
    const double r = k.side_ratio();
    for (int i = 0; i < 10; ++i) {
      const cplx z1(u(rng), 0.1 * u(rng)), z2(u(rng), -0.1 * u(rng));
      CHECK(std::abs(k.lead(z1, z2) - k.lead_parent(z1, z2, 0.0) / z1) <
            1e-10);
      CHECK(std::abs(k.side(z1, z2) - k.side_parent0(z1, z2) / z1) < 1e-10);
      CHECK(std::abs(k.base(z1, z2) - k.base_parent(z1, z2, 0.0) / z1) <
            1e-10);
      CHECK(std::abs(k.mix(z1, z2) -
                     (k.lead_parent(z1, z2, 0.0) -
                      k.lead_parent(z1, z2, 1.0)) /
                         z1) < 1e-10);
      CHECK(std::abs(k.shift(z1, z2) -
                     (k.base_parent(z1, z2, 1.0) -
                      k.base_parent(z1, z2, 0.0)) /
                         z1) < 1e-10);
      (void)r;
    }
  }
}

TEST_CASE("lead-kernel root stays in the disk on the unit circle") {
  for (const ModelSpec& m : all_variants()) {
    KernelBundle k(m);
    for (int j = 0; j < 16; ++j) {
      const double th = 2.0 * M_PI * j / 16;
      const cplx z1(std::cos(th), std::sin(th));
      const cplx y = solve_y0(k, z1);
      CHECK(std::abs(y) <= 1.0 + 1e-8);
      CHECK(std::abs(k.lead(z1, y)) < 1e-9);
    }
    // fixed point at z1 = 1: the root is z2 = 1
    CHECK(std::abs(solve_y0(k, cplx(1.0L)) - cplx(1.0L)) < 1e-9);
  }
}

TEST_CASE("root-curve slope at one: closed form equals finite difference") {
  for (const ModelSpec& m : all_variants()) {
    KernelBundle k(m);
    const Y0Derivative d = y0_derivative_at_one(k);
    const double h = 1e-5;
    const double fd = static_cast<double>(
        ((solve_y0(k, cplx(1.0L + h)) - solve_y0(k, cplx(1.0L - h))) /
         (2.0 * h))
            .real());
    CHECK(d.value == doctest::Approx(fd).epsilon(1e-5));
  }
  // pinned value for the reference single-class-rates scenario
  const Y0Derivative d = y0_derivative_at_one(KernelBundle(single_exp()));
  CHECK(d.closed_form);
  CHECK(d.value == doctest::Approx(0.629771).epsilon(1e-5));
}

TEST_CASE("displayed kernel names are evaluable") {
  for (const ModelSpec& m : all_variants()) {
    KernelBundle k(m);
    for (const std::string& name : k.kernel_names()) {
      const cplx v = k.eval_kernel(name, cplx(0.4L, 0.1L), cplx(0.3L, -0.2L));
      CHECK(std::isfinite(static_cast<double>(v.real())));
      CHECK(std::isfinite(static_cast<double>(v.imag())));
    }
    CHECK_THROWS_AS(k.eval_kernel("NOPE", cplx(0.5L), cplx(0.5L)),
                    KernelError);
  }
}
