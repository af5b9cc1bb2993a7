#pragma once

#include <complex>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rq {

// extended precision throughout the transform pipeline: the coefficient
// recursion multiplies rounding noise by the side/lead kernel ratio at each
// order, and the extra mantissa bits keep deep orders at usable accuracy
using real = long double;
using cplx = std::complex<real>;

// std::complex only mixes with its own value type; let double scalars and
// literals combine with the extended-precision complex type transparently
inline cplx operator+(const cplx& a, double b) { return a + real(b); }
inline cplx operator+(double a, const cplx& b) { return real(a) + b; }
inline cplx operator-(const cplx& a, double b) { return a - real(b); }
inline cplx operator-(double a, const cplx& b) { return real(a) - b; }
inline cplx operator*(const cplx& a, double b) { return a * real(b); }
inline cplx operator*(double a, const cplx& b) { return real(a) * b; }
inline cplx operator/(const cplx& a, double b) { return a / real(b); }
inline cplx operator/(double a, const cplx& b) { return real(a) / b; }

enum class Variant { BatchExp, BatchGeneral, SingleExp, SingleGeneral };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& s);

inline bool is_batch(Variant v) {
  return v == Variant::BatchExp || v == Variant::BatchGeneral;
}
inline bool is_exponential_service(Variant v) {
  return v == Variant::BatchExp || v == Variant::SingleExp;
}

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Joint pmf of the per-batch job vector (M1, M2).  Either an explicit finite
// pmf or a geometric(1/2) batch size with a Bernoulli type split per job,
// whose pgf has the closed form (u1 z1 + u2 z2) / (2 - u1 z1 - u2 z2).
struct BatchLaw {
  enum class Kind { ExplicitPmf, GeometricBinomial };

  Kind kind = Kind::ExplicitPmf;
  std::map<std::pair<int, int>, double> pmf;  // (m1,m2) -> g_{m1,m2}
  double u1 = 0.5;                            // GeometricBinomial split

  static BatchLaw explicit_pmf(std::map<std::pair<int, int>, double> pmf);
  static BatchLaw geometric_binomial(double u1);
  // degenerate law for the single-arrival variants: g_{1,0}, g_{0,1}
  static BatchLaw single_arrival(double lambda1, double lambda2);

  cplx pgf(cplx z1, cplx z2) const;
  double mean1() const;  // \bar g_1
  double mean2() const;  // \bar g_2

  void validate() const;
};

struct ServiceLaw {
  enum class Kind { Exponential, Deterministic, Erlang, HyperExp };

  Kind kind = Kind::Exponential;
  double mu = 1.0;                  // Exponential
  double b = 1.0;                   // Deterministic
  int erlang_k = 1;                 // Erlang
  double erlang_rate = 1.0;         // Erlang
  std::vector<double> hyper_probs;  // HyperExp
  std::vector<double> hyper_rates;  // HyperExp

  static ServiceLaw exponential(double mu);
  static ServiceLaw deterministic(double b);
  static ServiceLaw erlang(int k, double rate);
  static ServiceLaw hyperexp(std::vector<double> probs, std::vector<double> rates);

  // Laplace-Stieltjes transform beta*(s), Re(s) >= 0.
  cplx lst(cplx s) const;
  double mean() const;  // \bar b

  void validate() const;
};

enum class StabilityFormula { BatchDrift, SingleExpClosed, SingleGeneralClosed };

struct StabilityReport {
  double rho = 0.0;
  bool stable = false;
  StabilityFormula variant_formula = StabilityFormula::SingleExpClosed;
  // Batch variants: random-walk drift quantities.  The rho < 1 test and the
  // raw drift inequality are both evaluated; drift_agrees flags whether they
  // reach the same verdict.
  double tau0 = 0.0;
  std::optional<double> drift_lhs;
  std::optional<double> drift_rhs;
  std::optional<bool> drift_agrees;
};

struct ModelSpec {
  Variant variant = Variant::SingleExp;

  double lambda = 0.0;   // batch arrival rate (batch variants); =l1+l2 otherwise
  double lambda1 = 0.0;  // single-arrival class rates
  double lambda2 = 0.0;
  double mu1_star = 1.0;  // solo retrial rates
  double mu2_star = 1.0;
  double xi = 0.0;  // fairness weight, phi1 = xi, phi2 = 1 - xi
  double p1 = 0.5;  // priority split for mixed batches at an idle server

  BatchLaw batch;  // batch variants; single variants get the degenerate law
  ServiceLaw service;

  // caches filled by finalize()
  double gbar1 = 0.0, gbar2 = 0.0;
  double g10 = 0.0, g01 = 0.0;  // G(1,0), G(0,1)

  static ModelSpec batch_model(Variant v, double lambda, BatchLaw batch,
                               ServiceLaw service, double mu1s, double mu2s,
                               double xi, double p1);
  static ModelSpec single_model(Variant v, double lambda1, double lambda2,
                                ServiceLaw service, double mu1s, double mu2s,
                                double xi);

  ModelSpec with_xi(double new_xi) const;

  // class labels exchanged and the fairness weight reflected: orbit k of the
  // swapped model at weight 1-xi is orbit 3-k of this model at weight xi
  ModelSpec swapped() const;

  double service_rate() const;  // mu for exponential-service variants
  cplx batch_pgf(cplx z1, cplx z2) const;
  // beta*(lambda - lambda G(z1,z2)), the arrivals-during-service transform
  cplx arrivals_lst(cplx z1, cplx z2) const;

  void finalize();  // validates and fills caches
};

cplx batch_pgf(const BatchLaw& batch, cplx z1, cplx z2);
cplx service_lst(const ServiceLaw& service, cplx s);

StabilityReport stability(const ModelSpec& model);

// (p_busy, p_idle) for exponential-service variants, from the level-crossing
// balance between idle and busy server states.
std::pair<double, double> busy_idle_probs(const ModelSpec& model);

}  // namespace rq
