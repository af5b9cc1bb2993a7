#include "rq/model.hpp"

#include <cmath>
#include <numeric>

namespace rq {

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::BatchExp: return "BATCH_EXP";
    case Variant::BatchGeneral: return "BATCH_GENERAL";
    case Variant::SingleExp: return "SINGLE_EXP";
    case Variant::SingleGeneral: return "SINGLE_GENERAL";
  }
  throw ModelError("bad variant");
}

Variant variant_from_name(const std::string& s) {
  if (s == "BATCH_EXP") return Variant::BatchExp;
  if (s == "BATCH_GENERAL") return Variant::BatchGeneral;
  if (s == "SINGLE_EXP") return Variant::SingleExp;
  if (s == "SINGLE_GENERAL") return Variant::SingleGeneral;
  throw ModelError("unknown variant: " + s);
}

// ---------------------------------------------------------------- BatchLaw

BatchLaw BatchLaw::explicit_pmf(std::map<std::pair<int, int>, double> pmf) {
  BatchLaw law;
  law.kind = Kind::ExplicitPmf;
  law.pmf = std::move(pmf);
  law.validate();
  return law;
}

BatchLaw BatchLaw::geometric_binomial(double u1) {
  BatchLaw law;
  law.kind = Kind::GeometricBinomial;
  law.u1 = u1;
  law.validate();
  return law;
}

BatchLaw BatchLaw::single_arrival(double lambda1, double lambda2) {
  const double lambda = lambda1 + lambda2;
  if (lambda <= 0) throw ModelError("single_arrival: lambda1 + lambda2 must be > 0");
  return explicit_pmf({{{1, 0}, lambda1 / lambda}, {{0, 1}, lambda2 / lambda}});
}

void BatchLaw::validate() const {
  if (kind == Kind::GeometricBinomial) {
    if (u1 < 0.0 || u1 > 1.0) throw ModelError("batch: u1 must be in [0,1]");
    return;
  }
  double total = 0.0;
  for (const auto& [mm, g] : pmf) {
    if (mm.first < 0 || mm.second < 0) throw ModelError("batch: negative index");
    if (g < 0.0) throw ModelError("batch: negative probability");
    if (mm.first == 0 && mm.second == 0 && g != 0.0)
      throw ModelError("batch: g_{0,0} must be 0");
    total += g;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw ModelError("batch: pmf sums to " + std::to_string(total) + ", not 1");
}

cplx BatchLaw::pgf(cplx z1, cplx z2) const {
  if (kind == Kind::GeometricBinomial) {
    const cplx w = u1 * z1 + (1.0 - u1) * z2;
    return w / (2.0 - w);
  }
  cplx acc = 0.0;
  for (const auto& [mm, g] : pmf)
    acc += g * std::pow(z1, mm.first) * std::pow(z2, mm.second);
  return acc;
}

double BatchLaw::mean1() const {
  if (kind == Kind::GeometricBinomial) return 2.0 * u1;
  double acc = 0.0;
  for (const auto& [mm, g] : pmf) acc += g * mm.first;
  return acc;
}

double BatchLaw::mean2() const {
  if (kind == Kind::GeometricBinomial) return 2.0 * (1.0 - u1);
  double acc = 0.0;
  for (const auto& [mm, g] : pmf) acc += g * mm.second;
  return acc;
}

// -------------------------------------------------------------- ServiceLaw

ServiceLaw ServiceLaw::exponential(double mu) {
  ServiceLaw s;
  s.kind = Kind::Exponential;
  s.mu = mu;
  s.validate();
  return s;
}

ServiceLaw ServiceLaw::deterministic(double b) {
  ServiceLaw s;
  s.kind = Kind::Deterministic;
  s.b = b;
  s.validate();
  return s;
}

ServiceLaw ServiceLaw::erlang(int k, double rate) {
  ServiceLaw s;
  s.kind = Kind::Erlang;
  s.erlang_k = k;
  s.erlang_rate = rate;
  s.validate();
  return s;
}

ServiceLaw ServiceLaw::hyperexp(std::vector<double> probs, std::vector<double> rates) {
  ServiceLaw s;
  s.kind = Kind::HyperExp;
  s.hyper_probs = std::move(probs);
  s.hyper_rates = std::move(rates);
  s.validate();
  return s;
}

void ServiceLaw::validate() const {
  switch (kind) {
    case Kind::Exponential:
      if (mu <= 0) throw ModelError("service: mu must be > 0");
      break;
    case Kind::Deterministic:
      if (b <= 0) throw ModelError("service: b must be > 0");
      break;
    case Kind::Erlang:
      if (erlang_k < 1 || erlang_rate <= 0) throw ModelError("service: bad Erlang");
      break;
    case Kind::HyperExp: {
      if (hyper_probs.empty() || hyper_probs.size() != hyper_rates.size())
        throw ModelError("service: hyperexp probs/rates mismatch");
      double tot = 0.0;
      for (double q : hyper_probs) {
        if (q < 0) throw ModelError("service: hyperexp negative prob");
        tot += q;
      }
      if (std::abs(tot - 1.0) > 1e-12) throw ModelError("service: hyperexp probs != 1");
      for (double r : hyper_rates)
        if (r <= 0) throw ModelError("service: hyperexp rate must be > 0");
      break;
    }
  }
}

cplx ServiceLaw::lst(cplx s) const {
  switch (kind) {
    case Kind::Exponential: return mu / (mu + s);
    case Kind::Deterministic: return std::exp(-s * b);
    case Kind::Erlang: return std::pow(erlang_rate / (erlang_rate + s), erlang_k);
    case Kind::HyperExp: {
      cplx acc = 0.0;
      for (size_t i = 0; i < hyper_probs.size(); ++i)
        acc += hyper_probs[i] * hyper_rates[i] / (hyper_rates[i] + s);
      return acc;
    }
  }
  throw ModelError("bad service kind");
}

double ServiceLaw::mean() const {
  switch (kind) {
    case Kind::Exponential: return 1.0 / mu;
    case Kind::Deterministic: return b;
    case Kind::Erlang: return erlang_k / erlang_rate;
    case Kind::HyperExp: {
      double acc = 0.0;
      for (size_t i = 0; i < hyper_probs.size(); ++i)
        acc += hyper_probs[i] / hyper_rates[i];
      return acc;
    }
  }
  throw ModelError("bad service kind");
}

// --------------------------------------------------------------- ModelSpec

ModelSpec ModelSpec::batch_model(Variant v, double lambda, BatchLaw batch,
                                 ServiceLaw service, double mu1s, double mu2s,
                                 double xi, double p1) {
  if (!is_batch(v)) throw ModelError("batch_model: variant is single-arrival");
  ModelSpec m;
  m.variant = v;
  m.lambda = lambda;
  m.batch = std::move(batch);
  m.service = std::move(service);
  m.mu1_star = mu1s;
  m.mu2_star = mu2s;
  m.xi = xi;
  m.p1 = p1;
  m.finalize();
  return m;
}

ModelSpec ModelSpec::single_model(Variant v, double lambda1, double lambda2,
                                  ServiceLaw service, double mu1s, double mu2s,
                                  double xi) {
  if (is_batch(v)) throw ModelError("single_model: variant is batch");
  ModelSpec m;
  m.variant = v;
  m.lambda1 = lambda1;
  m.lambda2 = lambda2;
  m.lambda = lambda1 + lambda2;
  m.batch = BatchLaw::single_arrival(lambda1, lambda2);
  m.service = std::move(service);
  m.mu1_star = mu1s;
  m.mu2_star = mu2s;
  m.xi = xi;
  m.p1 = 0.5;  // mixed batches cannot occur with single arrivals
  m.finalize();
  return m;
}

ModelSpec ModelSpec::with_xi(double new_xi) const {
  ModelSpec m = *this;
  m.xi = new_xi;
  m.finalize();
  return m;
}

ModelSpec ModelSpec::swapped() const {
  ModelSpec m = *this;
  std::swap(m.lambda1, m.lambda2);
  std::swap(m.mu1_star, m.mu2_star);
  m.xi = 1.0 - xi;
  m.p1 = 1.0 - p1;
  if (batch.kind == BatchLaw::Kind::GeometricBinomial) {
    m.batch.u1 = 1.0 - batch.u1;
  } else {
    std::map<std::pair<int, int>, double> pmf;
    for (const auto& [mm, g] : batch.pmf) pmf[{mm.second, mm.first}] = g;
    m.batch.pmf = std::move(pmf);
  }
  m.finalize();
  return m;
}

void ModelSpec::finalize() {
  if (lambda <= 0) throw ModelError("lambda must be > 0");
  if (!is_batch(variant)) {
    if (lambda1 <= 0 || lambda2 <= 0)
      throw ModelError("single-arrival variants need lambda1, lambda2 > 0");
    if (std::abs(lambda - (lambda1 + lambda2)) > 1e-12)
      throw ModelError("lambda must equal lambda1 + lambda2");
  }
  if (mu1_star <= 0 || mu2_star <= 0) throw ModelError("retrial rates must be > 0");
  if (xi < 0.0 || xi > 1.0) throw ModelError("xi must be in [0,1]");
  if (p1 < 0.0 || p1 > 1.0) throw ModelError("p1 must be in [0,1]");
  batch.validate();
  service.validate();
  if (is_exponential_service(variant) && service.kind != ServiceLaw::Kind::Exponential)
    throw ModelError("exponential-service variant needs an exponential ServiceLaw");

  gbar1 = batch.mean1();
  gbar2 = batch.mean2();
  if (!std::isfinite(gbar1) || !std::isfinite(gbar2))
    throw ModelError("batch means must be finite");
  g10 = batch.pgf(1.0, 0.0).real();
  g01 = batch.pgf(0.0, 1.0).real();
}

double ModelSpec::service_rate() const {
  if (service.kind != ServiceLaw::Kind::Exponential)
    throw ModelError("service_rate: service is not exponential");
  return service.mu;
}

cplx ModelSpec::batch_pgf(cplx z1, cplx z2) const { return batch.pgf(z1, z2); }

cplx ModelSpec::arrivals_lst(cplx z1, cplx z2) const {
  return service.lst(lambda - lambda * batch.pgf(z1, z2));
}

cplx batch_pgf(const BatchLaw& batch, cplx z1, cplx z2) { return batch.pgf(z1, z2); }
cplx service_lst(const ServiceLaw& service, cplx s) { return service.lst(s); }

// --------------------------------------------------------------- stability

namespace {

// Mean drift rates of the orbit random walk in the interior (k = 0), on the
// horizontal boundary (k = 1) and vertical boundary (k = 2).  tau0/nu0 carry
// the xi dependence; the boundary terms do not.
struct DriftTerms {
  double tau0, nu0, tau1, nu1, tau2, nu2;
};

DriftTerms batch_drift(const ModelSpec& m) {
  const double l = m.lambda, b = m.service.mean();
  const double m1 = m.mu1_star, m2 = m.mu2_star;
  const double g1 = m.gbar1, g2 = m.gbar2;
  const double p1 = m.p1, p2 = 1.0 - m.p1;
  const double e1 = p2 * (1.0 - m.g10) + p1 * m.g01;
  const double e2 = p1 * (1.0 - m.g01) + p2 * m.g10;
  const double den0 = l + m2 - m.xi * (m2 - m1);
  DriftTerms d;
  d.tau0 = (l * (g1 * b * (l + m2) + g1 + e1) + m2 -
            m.xi * (m2 + l * g1 * b * (m2 - m1))) / den0;
  d.nu0 = (l * (g2 * b * (l + m2) + g2 + e2) +
           m.xi * (m1 + l * g2 * b * (m1 - m2))) / den0;
  d.tau1 = l * (g1 * b * (l + m1) + g1 + e1) / (l + m1);
  d.nu1 = l * (g2 * b * (l + m1) + g1 - 1.0 + e2) / (l + m1);
  d.tau2 = l * (g1 * b * (l + m2) + g1 - 1.0 + e1) / (l + m2);
  d.nu2 = l * (g2 * b * (l + m2) + g1 + e2) / (l + m2);
  return d;
}

double batch_rho(const ModelSpec& m) {
  const double l = m.lambda, b = m.service.mean();
  const double m1 = m.mu1_star, m2 = m.mu2_star;
  const double g1 = m.gbar1, g2 = m.gbar2;
  const double p1 = m.p1, p2 = 1.0 - m.p1;
  return (l / m1) * (g1 * b * (l + m1) +
                     (g1 - 1.0 + p2 * (1.0 - m.g10) + p1 * m.g01) *
                         (1.0 + l * g2 * b * (m1 - m2) / m2)) +
         (l / m2) * (g2 * b * (l + m2) +
                     (g2 - 1.0 + p1 * (1.0 - m.g01) + p2 * m.g10) *
                         (1.0 + l * g1 * b * (m2 - m1) / m1));
}

}  // namespace

StabilityReport stability(const ModelSpec& model) {
  StabilityReport r;
  const double b = model.service.mean();
  switch (model.variant) {
    case Variant::SingleExp: {
      const double mu = model.service_rate();
      r.variant_formula = StabilityFormula::SingleExpClosed;
      r.rho = model.lambda1 * (model.lambda + model.mu1_star) / (mu * model.mu1_star) +
              model.lambda2 * (model.lambda + model.mu2_star) / (mu * model.mu2_star);
      break;
    }
    case Variant::SingleGeneral:
      r.variant_formula = StabilityFormula::SingleGeneralClosed;
      r.rho = b * (model.lambda1 * (model.lambda + model.mu1_star) / model.mu1_star +
                   model.lambda2 * (model.lambda + model.mu2_star) / model.mu2_star);
      break;
    case Variant::BatchExp:
    case Variant::BatchGeneral: {
      r.variant_formula = StabilityFormula::BatchDrift;
      const DriftTerms d = batch_drift(model);
      r.tau0 = d.tau0;
      if (d.tau0 >= 1.0)
        throw ModelError("TAU0_VIOLATION: drift analysis requires tau0 < 1, got " +
                         std::to_string(d.tau0));
      r.rho = batch_rho(model);
      const double ratio = (1.0 - d.tau1) / (1.0 - d.nu1);
      r.drift_lhs = d.tau1 - 1.0 - d.nu1 * ratio;
      r.drift_rhs = d.tau2 - 1.0 - d.nu2 * ratio;
      const bool drift_stable = *r.drift_lhs < 0.0 && *r.drift_rhs < 0.0;
      r.drift_agrees = drift_stable == (r.rho < 1.0);
      break;
    }
  }
  r.stable = r.rho < 1.0;
  return r;
}

std::pair<double, double> busy_idle_probs(const ModelSpec& model) {
  if (!is_exponential_service(model.variant))
    throw ModelError("busy_idle_probs: defined for exponential-service variants only");
  const StabilityReport r = stability(model);
  if (!r.stable) throw ModelError("busy_idle_probs: model is unstable");
  // work conservation: every arriving job is served exactly once, so the
  // completion rate mu*p_busy equals the job arrival rate lambda*E(B)
  const double mu = model.service_rate(), l = model.lambda;
  const double busy = l * (model.gbar1 + model.gbar2) / mu;
  return {busy, 1.0 - busy};
}

}  // namespace rq
