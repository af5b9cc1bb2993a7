#include "rq/sim.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <thread>

namespace rq {

namespace {

// splitmix64: counter-based, trivially seedable per stream (documented in
// the README for reproducibility of pinned test seeds)
struct SplitMix64 {
  std::uint64_t s;
  explicit SplitMix64(std::uint64_t seed) : s(seed) {}
  std::uint64_t next() {
    s += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform() {  // [0, 1)
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }
};

struct BatchSampler {
  const ModelSpec& model;
  // explicit pmf flattened into a cdf
  std::vector<double> cdf;
  std::vector<std::pair<int, int>> atoms;

  explicit BatchSampler(const ModelSpec& m) : model(m) {
    if (is_batch(m.variant) && m.batch.kind == BatchLaw::Kind::ExplicitPmf) {
      double acc = 0.0;
      for (const auto& [mm, p] : m.batch.pmf) {
        acc += p;
        atoms.push_back(mm);
        cdf.push_back(acc);
      }
    }
  }

  std::pair<int, int> operator()(SplitMix64& rng) const {
    if (!is_batch(model.variant)) {
      const bool one = rng.uniform() * model.lambda < model.lambda1;
      return one ? std::pair{1, 0} : std::pair{0, 1};
    }
    if (model.batch.kind == BatchLaw::Kind::ExplicitPmf) {
      const double u = rng.uniform() * cdf.back();
      const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
      return atoms[static_cast<std::size_t>(it - cdf.begin())];
    }
    // geometric(1/2) batch size, iid type split
    int s = 1;
    while (rng.uniform() < 0.5) ++s;
    int m1 = 0;
    for (int i = 0; i < s; ++i)
      if (rng.uniform() < model.batch.u1) ++m1;
    return {m1, s - m1};
  }
};

double sample_service(const ServiceLaw& law, SplitMix64& rng) {
  switch (law.kind) {
    case ServiceLaw::Kind::Exponential:
      return rng.exponential(law.mu);
    case ServiceLaw::Kind::Deterministic:
      return law.b;
    case ServiceLaw::Kind::Erlang: {
      double t = 0.0;
      for (int i = 0; i < law.erlang_k; ++i) t += rng.exponential(law.erlang_rate);
      return t;
    }
    case ServiceLaw::Kind::HyperExp: {
      double u = rng.uniform();
      for (std::size_t i = 0; i < law.hyper_probs.size(); ++i) {
        if (u < law.hyper_probs[i]) return rng.exponential(law.hyper_rates[i]);
        u -= law.hyper_probs[i];
      }
      return rng.exponential(law.hyper_rates.back());
    }
  }
  return 0.0;
}

struct RepStats {
  double en1 = 0.0, en2 = 0.0, p_busy = 0.0;
  double den1 = 0.0, den2 = 0.0;
  long events = 0;
  bool tripped = false;
};

RepStats run_replication(const ModelSpec& model, const SimConfig& cfg,
                         std::uint64_t stream_seed) {
  SplitMix64 rng(stream_seed);
  const BatchSampler sample_batch(model);
  constexpr double inf = std::numeric_limits<double>::infinity();

  long n1 = 0, n2 = 0;
  bool busy = false;
  double t = 0.0;
  double t_arrival = rng.exponential(model.lambda);
  double t_service = inf;

  // conservation ledger: arrivals = served + in orbit + in service
  long arrived = 0, served = 0;

  double a1 = 0.0, a2 = 0.0, ab = 0.0, t0 = 0.0;  // measured areas
  double dep1 = 0.0, dep2 = 0.0;
  long departures = 0;
  bool measuring = cfg.warmup_events == 0;

  RepStats st;
  const long total = cfg.warmup_events + cfg.measured_events;
  for (long ev = 0; ev < total; ++ev) {
    // retrial race; only an idle server reacts to retrials, and the
    // exponential clocks may be redrawn after every event
    double r1 = 0.0, r2 = 0.0;
    if (!busy) {
      if (n1 > 0) r1 = n2 > 0 ? model.xi * model.mu1_star : model.mu1_star;
      if (n2 > 0) r2 = n1 > 0 ? (1.0 - model.xi) * model.mu2_star : model.mu2_star;
    }
    const double rr = r1 + r2;
    const double t_retrial = rr > 0.0 ? t + rng.exponential(rr) : inf;

    const double tn = std::min({t_arrival, t_service, t_retrial});
    if (measuring) {
      const double dt = tn - t;
      a1 += static_cast<double>(n1) * dt;
      a2 += static_cast<double>(n2) * dt;
      if (busy) ab += dt;
    }
    t = tn;

    if (t == t_arrival) {
      const auto [m1, m2] = sample_batch(rng);
      arrived += m1 + m2;
      if (busy) {
        n1 += m1;
        n2 += m2;
      } else {
        // one job of the winning class enters service, the rest join orbits
        const int win = (m1 > 0 && m2 > 0) ? (rng.uniform() < model.p1 ? 1 : 2)
                                           : (m1 > 0 ? 1 : 2);
        n1 += m1 - (win == 1);
        n2 += m2 - (win == 2);
        busy = true;
        t_service = t + sample_service(model.service, rng);
      }
      t_arrival = t + rng.exponential(model.lambda);
    } else if (t == t_service) {
      busy = false;
      t_service = inf;
      ++served;
      if (measuring) {
        dep1 += static_cast<double>(n1);
        dep2 += static_cast<double>(n2);
        ++departures;
      }
    } else {
      // successful retrial
      assert(!busy && rr > 0.0);
      if (rng.uniform() * rr < r1)
        --n1;
      else
        --n2;
      busy = true;
      t_service = t + sample_service(model.service, rng);
    }

    assert(arrived == served + n1 + n2 + (busy ? 1 : 0));
    if (!measuring && ev + 1 >= cfg.warmup_events) {
      measuring = true;
      t0 = t;
    }
    if (n1 > cfg.watchdog_orbit || n2 > cfg.watchdog_orbit) {
      st.tripped = true;
      break;
    }
    ++st.events;
  }

  const double span = t - t0;
  if (span > 0.0) {
    st.en1 = a1 / span;
    st.en2 = a2 / span;
    st.p_busy = ab / span;
  }
  if (departures > 0) {
    st.den1 = dep1 / static_cast<double>(departures);
    st.den2 = dep2 / static_cast<double>(departures);
  }
  return st;
}

// two-sided 97.5% Student-t quantiles for small replication counts
double t975(int df) {
  static const double table[] = {12.706, 4.303, 3.182, 2.776, 2.571,
                                 2.447,  2.365, 2.306, 2.262, 2.228,
                                 2.201,  2.179, 2.160, 2.145, 2.131};
  if (df <= 0) return 0.0;
  if (df <= 15) return table[df - 1];
  if (df <= 30) return 2.06;
  return 1.96;
}

// 95% half-width across replications
double half_width(const std::vector<double>& xs) {
  const int n = static_cast<int>(xs.size());
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= (n - 1);
  return t975(n - 1) * std::sqrt(var / n);
}

double mean_of(const std::vector<double>& xs) {
  double m = 0.0;
  for (double x : xs) m += x;
  return m / static_cast<double>(xs.size());
}

}  // namespace

SimResult simulate(const ModelSpec& model, const SimConfig& cfg) {
  const int R = std::max(1, cfg.replications);
  std::vector<RepStats> reps(R);
  std::vector<std::thread> pool;
  pool.reserve(R);
  for (int r = 0; r < R; ++r)
    pool.emplace_back([&, r] {
      // distinct, widely separated streams per replication
      SplitMix64 mix(cfg.seed);
      std::uint64_t stream = mix.next() + 0x632be59bd9b4e019ULL * (r + 1);
      reps[r] = run_replication(model, cfg, stream);
    });
  for (auto& th : pool) th.join();

  std::vector<double> e1, e2, pb, d1, d2;
  SimResult out;
  for (const auto& st : reps) {
    e1.push_back(st.en1);
    e2.push_back(st.en2);
    pb.push_back(st.p_busy);
    d1.push_back(st.den1);
    d2.push_back(st.den2);
    out.events += st.events;
    out.watchdog_tripped |= st.tripped;
  }
  out.en1 = mean_of(e1);
  out.en2 = mean_of(e2);
  out.p_busy = mean_of(pb);
  out.den1 = mean_of(d1);
  out.den2 = mean_of(d2);
  out.ci1 = half_width(e1);
  out.ci2 = half_width(e2);
  out.ci_busy = half_width(pb);
  out.dci1 = half_width(d1);
  out.dci2 = half_width(d2);
  return out;
}

std::vector<SweepRow> sweep_simulate(const std::vector<ModelSpec>& models,
                                     const SimConfig& cfg) {
  std::vector<SweepRow> rows;
  rows.reserve(models.size());
  for (std::size_t i = 0; i < models.size(); ++i) {
    SweepRow row;
    try {
      SimConfig c = cfg;
      c.seed = cfg.seed + i;
      row.result = simulate(models[i], c);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace rq
