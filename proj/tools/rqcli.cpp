#include "rq/json_io.hpp"
#include "rq/metrics.hpp"
#include "rq/oracle.hpp"
#include "rq/psa.hpp"
#include "rq/sim.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

using nlohmann::json;

constexpr int kExitRejected = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitAcceptance = 4;

struct Options {
  std::string model_path;
  std::string out_path;
  int order = 8;
  int pade_l = 7, pade_n = 2;
  std::string xi_grid = "0:0.3:0.02";
  std::string engines = "psa,pade";
  std::uint64_t seed = 1;
  int cap1 = 200, cap2 = 200;
  std::string sweep_param = "lambda2";
  std::string sweep_grid;
  long sim_events = 1000000;
  int sim_reps = 8;
};

std::vector<double> parse_grid(const std::string& s) {
  // "a:b:step" inclusive, or comma-separated values
  std::vector<double> g;
  if (s.empty()) return g;
  if (s.find(':') != std::string::npos) {
    double a, b, st;
    char c1, c2;
    std::istringstream is(s);
    if (!(is >> a >> c1 >> b >> c2 >> st) || c1 != ':' || c2 != ':' ||
        st <= 0.0)
      throw std::runtime_error("bad grid spec: " + s);
    for (double x = a; x <= b + 1e-12; x += st) g.push_back(x);
    return g;
  }
  std::istringstream is(s);
  std::string tok;
  while (std::getline(is, tok, ',')) g.push_back(std::stod(tok));
  return g;
}

bool has_engine(const std::string& engines, const std::string& name) {
  std::istringstream is(engines);
  std::string tok;
  while (std::getline(is, tok, ','))
    if (tok == name) return true;
  return false;
}

// manifest echo: inputs + content hash, written next to the output
void write_manifest(const Options& opt, const std::string& command) {
  if (opt.out_path.empty()) return;
  json m;
  m["command"] = command;
  m["model"] = opt.model_path;
  m["model_hash"] = rq::content_hash(opt.model_path);
  m["out"] = opt.out_path;
  m["order"] = opt.order;
  m["pade"] = {opt.pade_l, opt.pade_n};
  m["xi_grid"] = opt.xi_grid;
  m["seed"] = opt.seed;
  m["caps"] = {opt.cap1, opt.cap2};
  std::ofstream out(opt.out_path + ".manifest.json");
  out << m.dump(2) << "\n";
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

void emit(const Table& t, const std::string& out_path) {
  std::ostringstream os;
  const bool as_json =
      out_path.size() > 5 && out_path.ends_with(".json");
  if (as_json) {
    json arr = json::array();
    for (const auto& r : t.rows) {
      json row;
      for (std::size_t i = 0; i < t.header.size(); ++i) row[t.header[i]] = r[i];
      arr.push_back(row);
    }
    os << arr.dump(2) << "\n";
  } else {
    for (std::size_t i = 0; i < t.header.size(); ++i)
      os << (i ? "," : "") << t.header[i];
    os << "\n";
    for (const auto& r : t.rows) {
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
      os << "\n";
    }
  }
  if (out_path.empty()) {
    std::cout << os.str();
  } else {
    std::ofstream f(out_path);
    f << os.str();
  }
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

rq::ModelSpec load_or_exit(const Options& opt) {
  try {
    return rq::load_model(opt.model_path);
  } catch (const std::exception& e) {
    std::cerr << "model rejected: " << e.what() << "\n";
    std::exit(kExitRejected);
  }
}

int cmd_analyze(const Options& opt) {
  const rq::ModelSpec model = load_or_exit(opt);
  const rq::StabilityReport st = rq::stability(model);
  std::cerr << "rho = " << st.rho << (st.stable ? " (stable)" : " (UNSTABLE)")
            << ", tau0 = " << st.tau0 << "\n";
  if (!st.stable) {
    std::cerr << "analysis refused: unstable model\n";
    return kExitRejected;
  }
  if (rq::is_exponential_service(model.variant)) {
    const auto [pb, pi] = rq::busy_idle_probs(model);
    std::cerr << "p_busy = " << pb << ", p_idle = " << pi << "\n";
  }

  rq::CoefficientEvaluator ev(model);
  const auto s1 = rq::mean_series(ev, 1, opt.order);
  const auto s2 = rq::mean_series(ev, 2, opt.order);
  std::cerr << "series coefficients (orbit1, orbit2):\n";
  for (int m = 0; m <= opt.order; ++m)
    std::cerr << "  m=" << m << "  " << s1.coeff[m] << "  " << s2.coeff[m]
              << "\n";

  std::optional<rq::PadeApproximant> p1, p2;
  if (opt.pade_l + opt.pade_n <= opt.order) {
    p1 = rq::pade_from_series(s1, opt.pade_l, opt.pade_n);
    p2 = rq::pade_from_series(s2, opt.pade_l, opt.pade_n);
  }

  Table t;
  t.header = {"xi",      "en1_trunc", "en2_trunc", "en1_pade",
              "en2_pade", "last_term1", "last_term2"};
  for (double xi : parse_grid(opt.xi_grid)) {
    const auto v1 = rq::truncated_mean(s1, xi);
    const auto v2 = rq::truncated_mean(s2, xi);
    t.rows.push_back({fmt(xi), fmt(v1.value), fmt(v2.value),
                      p1 ? fmt(p1->eval(xi)) : "",
                      p2 ? fmt(p2->eval(xi)) : "", fmt(v1.last_term),
                      fmt(v2.last_term)});
  }
  emit(t, opt.out_path);
  write_manifest(opt, "analyze");
  return 0;
}

int cmd_validate(const Options& opt) {
  const rq::ModelSpec model = load_or_exit(opt);
  const rq::StabilityReport st = rq::stability(model);
  if (!st.stable) {
    std::cerr << "validation refused: unstable model (rho = " << st.rho
              << ")\n";
    return kExitRejected;
  }
  const bool use_oracle = rq::is_exponential_service(model.variant) &&
                          has_engine(opt.engines, "oracle");
  const bool use_sim = has_engine(opt.engines, "sim");

  Table t;
  t.header = {"xi",      "en2_psa", "en2_oracle", "rel_err_oracle",
              "en2_sim", "ci_sim",  "busy_psa",   "status"};
  bool failed = false;
  for (double xi : parse_grid(opt.xi_grid)) {
    const rq::ModelSpec mx = model.with_xi(xi);
    rq::CoefficientEvaluator ev(mx);
    const auto s2 = rq::mean_series(ev, 2, opt.order);
    const double psa = rq::truncated_mean(s2, xi).value;
    const double busy =
        rq::is_exponential_service(mx.variant)
            ? 1.0 - static_cast<double>(
                        ev.eval_pgf(rq::Component::Idle, xi, rq::cplx(1.0L),
                                    rq::cplx(1.0L), opt.order)
                            .value.real())
            : NAN;

    std::string status = "ok";
    double oracle_val = NAN, rel = NAN, sim_val = NAN, ci = NAN;
    if (use_oracle) {
      const auto sol = rq::solve_ctmc(mx, opt.cap1, opt.cap2);
      oracle_val = sol.en2;
      rel = std::abs(psa - sol.en2) / std::max(sol.en2, 1e-12);
      if (rel > 0.02) status = "FAIL_ORACLE";
    }
    if (use_sim) {
      rq::SimConfig sc;
      sc.seed = opt.seed;
      sc.measured_events = opt.sim_events;
      sc.replications = opt.sim_reps;
      const auto sr = rq::simulate(mx, sc);
      sim_val = rq::is_exponential_service(mx.variant) ? sr.en2 : sr.den2;
      ci = rq::is_exponential_service(mx.variant) ? sr.ci2 : sr.dci2;
      if (std::abs(psa - sim_val) > ci && status == "ok") status = "FAIL_SIM";
    }
    if (status != "ok") failed = true;
    t.rows.push_back({fmt(xi), fmt(psa), fmt(oracle_val), fmt(rel),
                      fmt(sim_val), fmt(ci), fmt(busy), status});
  }
  emit(t, opt.out_path);
  write_manifest(opt, "validate");
  return failed ? kExitAcceptance : 0;
}

int cmd_sweep(const Options& opt) {
  const rq::ModelSpec base = load_or_exit(opt);
  const auto grid = parse_grid(opt.sweep_grid);
  Table t;
  t.header = {"value",   "en1_psa", "en2_psa", "en1_sim", "en2_sim",
              "ci1_sim", "ci2_sim", "p_busy_sim", "error"};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = grid[i];
    std::vector<std::string> row(t.header.size(), "");
    row[0] = fmt(v);
    try {
      rq::ModelSpec m = base;
      if (opt.sweep_param == "xi") {
        m = base.with_xi(v);
      } else if (opt.sweep_param == "lambda" && rq::is_batch(base.variant)) {
        m = rq::ModelSpec::batch_model(base.variant, v, base.batch,
                                       base.service, base.mu1_star,
                                       base.mu2_star, base.xi, base.p1);
      } else if (opt.sweep_param == "lambda2" && !rq::is_batch(base.variant)) {
        m = rq::ModelSpec::single_model(base.variant, base.lambda1, v,
                                        base.service, base.mu1_star,
                                        base.mu2_star, base.xi);
      } else {
        throw std::runtime_error("unsupported sweep parameter '" +
                                 opt.sweep_param + "' for this variant");
      }
      if (!rq::stability(m).stable) throw std::runtime_error("unstable");
      if (has_engine(opt.engines, "psa")) {
        rq::CoefficientEvaluator ev(m);
        row[1] = fmt(rq::truncated_mean(rq::mean_series(ev, 1, opt.order),
                                        m.xi)
                         .value);
        row[2] = fmt(rq::truncated_mean(rq::mean_series(ev, 2, opt.order),
                                        m.xi)
                         .value);
      }
      if (has_engine(opt.engines, "sim")) {
        rq::SimConfig sc;
        sc.seed = opt.seed + i;
        sc.measured_events = opt.sim_events;
        sc.replications = opt.sim_reps;
        const auto sr = rq::simulate(m, sc);
        row[3] = fmt(sr.en1);
        row[4] = fmt(sr.en2);
        row[5] = fmt(sr.ci1);
        row[6] = fmt(sr.ci2);
        row[7] = fmt(sr.p_busy);
      }
    } catch (const std::exception& e) {
      row[8] = e.what();
    }
    t.rows.push_back(std::move(row));
  }
  emit(t, opt.out_path);
  write_manifest(opt, "sweep");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-class retrial queue analyzer"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--model", opt.model_path, "model JSON file")->required();
    sub->add_option("--out", opt.out_path, "output file (.csv or .json)");
    sub->add_option("--order", opt.order, "series truncation order M");
    sub->add_option("--pade", [&](const std::vector<std::string>& v) {
      return std::sscanf(v[0].c_str(), "%d,%d", &opt.pade_l, &opt.pade_n) == 2;
    }, "Pade orders L,N");
    sub->add_option("--xi-grid", opt.xi_grid, "xi grid a:b:step or list");
    sub->add_option("--engines", opt.engines, "psa,pade,sim,oracle");
    sub->add_option("--seed", opt.seed, "simulation seed");
    sub->add_option("--caps", [&](const std::vector<std::string>& v) {
      return std::sscanf(v[0].c_str(), "%d,%d", &opt.cap1, &opt.cap2) == 2;
    }, "oracle orbit caps K1,K2");
    sub->add_option("--sim-events", opt.sim_events, "measured events per rep");
    sub->add_option("--sim-reps", opt.sim_reps, "simulation replications");
  };

  auto* analyze = app.add_subcommand("analyze", "stability + PSA metrics");
  add_common(analyze);
  auto* validate =
      app.add_subcommand("validate", "PSA vs oracle/simulation table");
  add_common(validate);
  auto* sweep = app.add_subcommand("sweep", "metrics over a parameter grid");
  add_common(sweep);
  sweep->add_option("--param", opt.sweep_param, "lambda | lambda2 | xi");
  sweep->add_option("--grid", opt.sweep_grid, "grid a:b:step or list")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(analyze)) return cmd_analyze(opt);
    if (app.got_subcommand(validate)) return cmd_validate(opt);
    return cmd_sweep(opt);
  } catch (const rq::ModelError& e) {
    std::cerr << "model rejected: " << e.what() << "\n";
    return kExitRejected;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  }
}
