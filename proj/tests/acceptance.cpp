// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure.  Criteria exercise the full pipeline (stability, root curve,
// series coefficients, truncation and rational summation, simulation,
// truncated-chain oracle) against each other on pinned scenarios.
#include "rq/json_io.hpp"
#include "rq/metrics.hpp"
#include "rq/oracle.hpp"
#include "rq/psa.hpp"
#include "rq/sim.hpp"

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

using namespace rq;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("criterion %d: %s  [%s]\n", criterion, pass ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

ModelSpec ref_single() {
  return ModelSpec::single_model(Variant::SingleExp, 1.0, 2.2,
                                 ServiceLaw::exponential(5.0), 8.0, 10.0, 0.1);
}

ModelSpec ref_batch(double lambda) {
  return ModelSpec::batch_model(Variant::BatchExp, lambda,
                                BatchLaw::geometric_binomial(0.6),
                                ServiceLaw::exponential(5.0), 8.0, 10.0, 0.1,
                                0.6);
}

std::vector<ModelSpec> all_variants() {
  return {
      ref_single(),
      ModelSpec::single_model(Variant::SingleGeneral, 1.0, 2.2,
                              ServiceLaw::erlang(2, 10.0), 8.0, 10.0, 0.1),
      ref_batch(0.15),
      ModelSpec::batch_model(Variant::BatchGeneral, 0.12,
                             BatchLaw::geometric_binomial(0.6),
                             ServiceLaw::hyperexp({0.4, 0.6}, {3.0, 9.0}),
                             8.0, 10.0, 0.1, 0.6),
  };
}

CtmcSolution solve_trusted(const ModelSpec& m, int cap1, int cap2) {
  CtmcSolution s = solve_ctmc(m, cap1, cap2);
  if (!s.trusted) s = solve_ctmc(m, cap1 * 3 / 2, cap2 * 3 / 2);
  return s;
}

double wall_ms(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

// ---- criterion 1: stability classification, closed form, fast ------------

void criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const StabilityReport st = stability(ref_single());
  const double ms = wall_ms(t0);
  const bool pass = st.stable && std::abs(st.rho - 0.8608) < 1e-4 && ms < 1.0;
  report(1, pass, fmt("rho=%.6f (want 0.8608+-1e-4), %.3f ms", st.rho, ms));
}

// ---- criterion 2: busy probability, three independent routes -------------

struct SharedRuns {
  CtmcSolution single300;
  SimResult single_sim;
};

void criterion2(SharedRuns& shared) {
  const ModelSpec m = ref_single();
  CoefficientEvaluator ev(m);
  const double psa_busy = static_cast<double>(
      ev.eval_pgf(Component::Busy, m.xi, cplx(1.0L), cplx(1.0L), 8)
          .value.real());

  shared.single300 = solve_ctmc(m, 300, 300);

  SimConfig sc;
  sc.seed = 20260826;
  sc.warmup_events = 250000;
  sc.measured_events = 1250000;
  sc.replications = 8;
  shared.single_sim = simulate(m, sc);

  const double want = 3.2 / 5.0;
  const bool psa_ok = std::abs(psa_busy - want) < 1e-6;
  const bool ctmc_ok = std::abs(shared.single300.p_busy - want) < 1e-6;
  const bool sim_ok =
      std::abs(shared.single_sim.p_busy - want) <= shared.single_sim.ci_busy;
  report(2, psa_ok && ctmc_ok && sim_ok,
         fmt("p_busy want %.6f: series %.8f, chain %.8f, sim %.5f+-%.5f",
             want, psa_busy, shared.single300.p_busy,
             shared.single_sim.p_busy, shared.single_sim.ci_busy));
}

// ---- criterion 3: lead-kernel root curve on the unit circle ---------------

void criterion3() {
  bool pass = true;
  double worst_lead = 0.0, worst_mod = 0.0;
  for (const ModelSpec& m : all_variants()) {
    KernelBundle k(m);
    for (int j = 0; j < 64; ++j) {
      const double th = 2.0 * M_PI * j / 64;
      const cplx z1(std::cos(th), std::sin(th));
      const cplx y = solve_y0(k, z1);
      worst_lead = std::max(worst_lead,
                            static_cast<double>(std::abs(k.lead(z1, y))));
      worst_mod = std::max(worst_mod, static_cast<double>(std::abs(y)));
    }
  }
  if (worst_lead >= 1e-9 || worst_mod > 1.0 + 1e-8) pass = false;

  const KernelBundle k(ref_single());
  const Y0Derivative d = y0_derivative_at_one(k);
  const double h = 1e-5;
  const double fd = static_cast<double>(
      ((solve_y0(k, cplx(1.0L + h)) - solve_y0(k, cplx(1.0L - h))) /
       (2.0 * h))
          .real());
  if (!d.closed_form || std::abs(d.value - 0.629771) > 1e-5 ||
      std::abs(d.value - fd) > 1e-6)
    pass = false;
  report(3, pass,
         fmt("max|lead|=%.2e, max|Y0|=%.10f, slope %.6f (fd %.6f)",
             worst_lead, worst_mod, d.value, fd));
}

// ---- criterion 4: truncated means against the chain over the xi grid -----

void criterion4() {
  const auto t0 = std::chrono::steady_clock::now();
  const ModelSpec m = ref_single();
  CoefficientEvaluator ev(m);
  const SeriesMetrics s2 = mean_series(ev, 2, 8);

  bool within = true;
  std::string note;
  double oracle_005 = 0.0;
  for (double xi : {0.02, 0.05, 0.1}) {
    const CtmcSolution sol = solve_trusted(m.with_xi(xi), 200, 200);
    if (xi == 0.05) oracle_005 = sol.en2;
    const double v = truncated_mean(s2, xi).value;
    const double rel = std::abs(v - sol.en2) / sol.en2;
    note += fmt("xi=%.2f rel=%.4f ", xi, rel);
    if (rel > 0.02) within = false;
  }

  SeriesMetrics s2m = s2;
  auto err_at = [&](int M) {
    s2m.coeff.assign(s2.coeff.begin(), s2.coeff.begin() + M + 1);
    return std::abs(truncated_mean(s2m, 0.05).value - oracle_005);
  };
  const double e2 = err_at(2), e4 = err_at(4), e8 = err_at(8);
  const bool monotone = e2 > e4 && e4 > e8;
  const double ms = wall_ms(t0);
  report(4, within && monotone && ms < 120000.0,
         note + fmt("| err M=2/4/8: %.2e/%.2e/%.2e, %.1f s", e2, e4, e8,
                    ms / 1000.0));
}

// ---- criterion 5: rational resummation extends the radius ----------------

void criterion5() {
  // the one-sided series has a finite convergence radius (~0.47 here: a
  // complex singularity pair, confirmed by an exact-coefficient check), so
  // the (7,2) table is paired with its reflection through the class-swapped
  // model; eval picks the branch with more analytic headroom
  const ModelSpec m = ref_single();
  CoefficientEvaluator ev(m);
  CoefficientEvaluator evs(m.swapped());
  const SeriesMetrics s2 = mean_series(ev, 2, 9);
  const SeriesMetrics s2r = mean_series(evs, 1, 9);
  TwoSidedPade p{pade_from_series(s2, 7, 2), pade_from_series(s2r, 7, 2)};

  SeriesMetrics s4 = s2;
  s4.coeff.resize(5);

  bool pade_ok = !p.lo.defective && !p.hi.defective;
  bool trunc_breaks = false;
  double worst_pade = 0.0, worst_trunc = 0.0;
  for (int i = 1; i <= 9; ++i) {
    const double xi = 0.1 * i;
    const CtmcSolution sol = solve_trusted(m.with_xi(xi), 200, 200);
    const double rp = std::abs(p.eval(xi) - sol.en2) / sol.en2;
    const double rt = std::abs(truncated_mean(s4, xi).value - sol.en2) /
                      sol.en2;
    worst_pade = std::max(worst_pade, rp);
    worst_trunc = std::max(worst_trunc, rt);
    if (rp > 0.05) pade_ok = false;
    if (rt > 0.05) trunc_breaks = true;
  }
  report(5, pade_ok && trunc_breaks,
         fmt("rational worst rel=%.4f (<=0.05), truncated worst rel=%.4f "
             "(must exceed 0.05)",
             worst_pade, worst_trunc));
}

// ---- criterion 6: batch scenario against simulation and the chain --------

void criterion6(SimResult& batch_sim_015, CtmcSolution& batch_oracle_015) {
  bool pass = true;
  std::string note;
  for (double lambda : {0.05, 0.1, 0.15, 0.2}) {
    const ModelSpec m = ref_batch(lambda);
    const StabilityReport st = stability(m);
    if (!st.stable || st.rho >= 0.9) continue;

    CoefficientEvaluator ev(m);
    const SeriesMetrics s2 = mean_series(ev, 2, 8);
    const double psa_en2 = truncated_mean(s2, m.xi).value;
    const double psa_busy = static_cast<double>(
        ev.eval_pgf(Component::Busy, m.xi, cplx(1.0L), cplx(1.0L), 8)
            .value.real());

    SimConfig sc;
    sc.seed = 7 + static_cast<std::uint64_t>(lambda * 1000);
    sc.warmup_events = 100000;
    sc.measured_events = 500000;
    sc.replications = 8;
    const SimResult sr = simulate(m, sc);

    const CtmcSolution sol = solve_trusted(m, 80, 80);
    if (lambda == 0.15) {
      batch_sim_015 = sr;
      batch_oracle_015 = sol;
    }

    const bool en2_in_ci = std::abs(psa_en2 - sr.en2) <= sr.ci2;
    const bool busy_oracle = std::abs(psa_busy - sol.p_busy) < 1e-6;
    const bool busy_ci = std::abs(psa_busy - sr.p_busy) <= sr.ci_busy;
    note += fmt("l=%.2f%s%s%s ", lambda, en2_in_ci ? "" : " EN2!",
                busy_oracle ? "" : " BUSY-ORACLE!", busy_ci ? "" : " BUSY-CI!");
    if (!(en2_in_ci && busy_oracle && busy_ci)) pass = false;
  }
  report(6, pass, "lambda grid: " + note);
}

// ---- criterion 7: structural identities of the coefficient family --------

void criterion7() {
  const ModelSpec sym = ModelSpec::single_model(
      Variant::SingleExp, 1.0, 2.2, ServiceLaw::exponential(5.0), 8.0, 8.0,
      0.5);
  CoefficientEvaluator evs(sym);
  double worst_sym = 0.0;
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  std::vector<double> diag;
  for (int i = 0; i < 16; ++i) diag.push_back(u(rng));
  for (int m = 1; m <= 3; ++m)
    for (double z : diag)
      worst_sym = std::max(
          worst_sym,
          static_cast<double>(std::abs(evs.eval_v(m, cplx(z), cplx(z)))));

  // at xi = 0 the zeroth coefficient is the full pgf of the strict-split
  // system; rebuild it from the kernel bundle alone (root pinning by hand)
  const ModelSpec m0 = ref_single();
  CoefficientEvaluator ev(m0);
  const KernelBundle& k = ev.bundle();
  const double v00 = ev.v00();
  double worst_direct = 0.0;
  for (int i = 0; i < 16; ++i) {
    const cplx z1(u(rng), 0.0L), z2(u(rng), 0.0L);
    const cplx y = ev.y0(z1);
    const cplx direct =
        v00 *
        (k.base(z1, z2) * k.side(z1, y) - k.side(z1, z2) * k.base(z1, y)) /
        (k.lead(z1, z2) * k.side(z1, y));
    worst_direct = std::max(
        worst_direct,
        static_cast<double>(std::abs(ev.eval_v(0, z1, z2) - direct)));
  }
  report(7, worst_sym < 1e-10 && worst_direct < 1e-9,
         fmt("diagonal max=%.2e (<1e-10), strict-split max=%.2e (<1e-9)",
             worst_sym, worst_direct));
}

// ---- criterion 8: functional-equation residual of the truncated pgf ------

double residual(const CoefficientEvaluator& ev, double xi, int M, cplx z1,
                cplx z2) {
  const KernelBundle& k = ev.bundle();
  const Component c = is_exponential_service(ev.spec().variant)
                          ? Component::Idle
                          : Component::Joint;
  const cplx f = ev.eval_pgf(c, xi, z1, z2, M).value;
  const cplx f10 = ev.eval_pgf(c, xi, z1, cplx(0.0L), M).value;
  const cplx f01 = ev.eval_pgf(c, xi, cplx(0.0L), z2, M).value;
  const cplx f00 = ev.eval_pgf(c, xi, cplx(0.0L), cplx(0.0L), M).value;
  const cplx r = k.lead_parent(z1, z2, xi) * f -
                 (1.0 - xi) * k.side_parent0(z1, z2) * f10 +
                 xi * k.side_ratio() * k.side_parent0(z1, z2) * f01 -
                 k.base_parent(z1, z2, xi) * f00;
  return static_cast<double>(std::abs(r));
}

void criterion8() {
  bool pass = true;
  std::string note;
  for (const ModelSpec& m : all_variants()) {
    CoefficientEvaluator ev(m);
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(0.1, 0.85);
    double r6 = 0.0, r8 = 0.0;
    for (int i = 0; i < 32; ++i) {
      const cplx z1(u(rng), 0.2 * u(rng)), z2(u(rng), -0.2 * u(rng));
      r6 = std::max(r6, residual(ev, 0.05, 6, z1, z2));
      r8 = std::max(r8, residual(ev, 0.05, 8, z1, z2));
    }
    const bool ok = r6 < 1e-6 && r8 * 10.0 <= r6;
    note += fmt("%s r6=%.1e r8=%.1e%s ", variant_name(m.variant).c_str(), r6,
                r8, ok ? "" : " !");
    if (!ok) pass = false;
  }
  report(8, pass, note);
}

// ---- criterion 9: truncation robustness of the chain, cross-check sim ----

void criterion9(const SharedRuns& shared, const SimResult& batch_sim,
                const CtmcSolution& batch_oracle) {
  const ModelSpec m = ref_single();
  const CtmcSolution half = solve_ctmc(m, 150, 150);
  const CtmcSolution& full = shared.single300;
  const double d1 = std::abs(half.en1 - full.en1) / full.en1;
  const double d2 = std::abs(half.en2 - full.en2) / full.en2;

  const ModelSpec mb = ref_batch(0.15);
  const CtmcSolution bfull = solve_ctmc(mb, 120, 120);
  const double b1 = std::abs(batch_oracle.en1 - bfull.en1) / bfull.en1;
  const double b2 = std::abs(batch_oracle.en2 - bfull.en2) / bfull.en2;

  const bool caps_ok = d1 < 1e-3 && d2 < 1e-3 && b1 < 1e-3 && b2 < 1e-3;
  const bool sim_ok =
      std::abs(full.en1 - shared.single_sim.en1) <= shared.single_sim.ci1 &&
      std::abs(full.en2 - shared.single_sim.en2) <= shared.single_sim.ci2 &&
      std::abs(bfull.en1 - batch_sim.en1) <= batch_sim.ci1 &&
      std::abs(bfull.en2 - batch_sim.en2) <= batch_sim.ci2;
  report(9, caps_ok && sim_ok,
         fmt("cap doubling rel: %.2e %.2e %.2e %.2e; sim CIs %s", d1, d2, b1,
             b2, sim_ok ? "contain chain means" : "EXCLUDE chain means"));
}

}  // namespace

int main() {
  criterion1();
  SharedRuns shared;
  criterion2(shared);
  criterion3();
  criterion4();
  criterion5();
  SimResult batch_sim;
  CtmcSolution batch_oracle;
  criterion6(batch_sim, batch_oracle);
  criterion7();
  criterion8();
  criterion9(shared, batch_sim, batch_oracle);
  std::printf("%d/9 criteria passed\n", 9 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
