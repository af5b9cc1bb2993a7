#include "rq/oracle.hpp"

#include <Eigen/SparseLU>

#include <cmath>

namespace rq {

namespace {

struct BatchAtom {
  int m1, m2;
  double p;
};

std::vector<BatchAtom> batch_atoms(const ModelSpec& model, double tail_tol) {
  std::vector<BatchAtom> atoms;
  if (!is_batch(model.variant)) {
    atoms.push_back({1, 0, model.lambda1 / model.lambda});
    atoms.push_back({0, 1, model.lambda2 / model.lambda});
    return atoms;
  }
  if (model.batch.kind == BatchLaw::Kind::ExplicitPmf) {
    for (const auto& [mm, p] : model.batch.pmf)
      atoms.push_back({mm.first, mm.second, p});
    return atoms;
  }
  // geometric(1/2) total size, iid type split; stop where the remaining
  // tail mass 2^-S drops below tail_tol
  const double u1 = model.batch.u1;
  for (int s = 1; std::ldexp(1.0, -s + 1) > tail_tol; ++s) {
    const double ps = std::ldexp(1.0, -s);
    if (u1 <= 0.0 || u1 >= 1.0) {
      atoms.push_back({u1 >= 1.0 ? s : 0, u1 >= 1.0 ? 0 : s, ps});
      continue;
    }
    double binom = std::pow(1.0 - u1, s);  // P(m1 = 0)
    for (int m1 = 0; m1 <= s; ++m1) {
      if (ps * binom > 0.0) atoms.push_back({m1, s - m1, ps * binom});
      binom *= u1 / (1.0 - u1) * static_cast<double>(s - m1) /
               static_cast<double>(m1 + 1);
    }
  }
  return atoms;
}

}  // namespace

Eigen::SparseMatrix<double> build_generator(const ModelSpec& model, int cap1,
                                            int cap2, double tail_tol) {
  if (!is_exponential_service(model.variant))
    throw OracleError("CTMC oracle requires an exponential-service variant");
  if (cap1 < 1 || cap2 < 1) throw OracleError("caps must be positive");

  const auto atoms = batch_atoms(model, tail_tol);
  const int n = (cap1 + 1) * (cap2 + 1) * 2;
  const double mu = model.service_rate();
  auto idx = [&](int i, int j, int c) { return (i * (cap2 + 1) + j) * 2 + c; };
  auto clip1 = [&](int i) { return std::min(i, cap1); };
  auto clip2 = [&](int j) { return std::min(j, cap2); };

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(n) * (atoms.size() + 4));
  std::vector<double> outrate(n, 0.0);
  auto add = [&](int from, int to, double rate) {
    if (rate <= 0.0) return;
    trips.emplace_back(from, to, rate);
    outrate[from] += rate;
  };

  for (int i = 0; i <= cap1; ++i) {
    for (int j = 0; j <= cap2; ++j) {
      const int idle = idx(i, j, 0), bs = idx(i, j, 1);
      for (const auto& a : atoms) {
        const double rate = model.lambda * a.p;
        // busy server: the whole batch joins the orbits
        add(bs, idx(clip1(i + a.m1), clip2(j + a.m2), 1), rate);
        // idle server: one job of the winning class starts service
        if (a.m1 > 0 && a.m2 > 0) {
          add(idle, idx(clip1(i + a.m1 - 1), clip2(j + a.m2), 1),
              rate * model.p1);
          add(idle, idx(clip1(i + a.m1), clip2(j + a.m2 - 1), 1),
              rate * (1.0 - model.p1));
        } else if (a.m1 > 0) {
          add(idle, idx(clip1(i + a.m1 - 1), j, 1), rate);
        } else {
          add(idle, idx(i, clip2(j + a.m2 - 1), 1), rate);
        }
      }
      // retrials: weighted rates only when both orbits compete
      if (i > 0)
        add(idle, idx(i - 1, j, 1),
            j > 0 ? model.xi * model.mu1_star : model.mu1_star);
      if (j > 0)
        add(idle, idx(i, j - 1, 1),
            i > 0 ? (1.0 - model.xi) * model.mu2_star : model.mu2_star);
      // service completion
      add(bs, idle, mu);
    }
  }
  for (int s = 0; s < n; ++s) trips.emplace_back(s, s, -outrate[s]);

  Eigen::SparseMatrix<double> q(n, n);
  q.setFromTriplets(trips.begin(), trips.end());

  // conservation check: row sums must vanish exactly up to roundoff
  const Eigen::VectorXd rs = q * Eigen::VectorXd::Ones(n);
  if (rs.lpNorm<Eigen::Infinity>() > 1e-9)
    throw OracleError("generator rows do not sum to zero");
  return q;
}

CtmcSolution solve_stationary(const ModelSpec& model,
                              const Eigen::SparseMatrix<double>& gen,
                              int cap1, int cap2) {
  const int n = static_cast<int>(gen.rows());
  // pi Q = 0 with the first balance equation replaced by normalization
  Eigen::SparseMatrix<double> a(n, n);
  {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(gen.nonZeros()) + n);
    for (int k = 0; k < gen.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(gen, k); it; ++it)
        if (it.col() != 0) trips.emplace_back(static_cast<int>(it.col()),
                                              static_cast<int>(it.row()),
                                              it.value());
    for (int jcol = 0; jcol < n; ++jcol) trips.emplace_back(0, jcol, 1.0);
    a.setFromTriplets(trips.begin(), trips.end());
  }
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(0) = 1.0;

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw OracleError("SINGULAR");
  Eigen::VectorXd pi = lu.solve(b);
  if (lu.info() != Eigen::Success) throw OracleError("NO_CONVERGENCE");
  pi /= pi.sum();

  CtmcSolution sol;
  sol.cap1 = cap1;
  sol.cap2 = cap2;
  sol.residual = (Eigen::RowVectorXd(pi.transpose()) * gen)
                     .lpNorm<Eigen::Infinity>();
  if (sol.residual > 1e-10) throw OracleError("NO_CONVERGENCE");

  auto idx = [&](int i, int j, int c) { return (i * (cap2 + 1) + j) * 2 + c; };
  for (int i = 0; i <= cap1; ++i)
    for (int j = 0; j <= cap2; ++j)
      for (int c = 0; c < 2; ++c) {
        const double p = pi(idx(i, j, c));
        sol.en1 += i * p;
        sol.en2 += j * p;
        if (c == 1) sol.p_busy += p;
        if (i == cap1 || j == cap2) sol.boundary_mass += p;
      }
  sol.trusted = sol.boundary_mass <= 1e-8;
  sol.pi.assign(pi.data(), pi.data() + n);
  return sol;
}

CtmcSolution solve_ctmc(const ModelSpec& model, int cap1, int cap2,
                        double tail_tol) {
  return solve_stationary(model, build_generator(model, cap1, cap2, tail_tol),
                          cap1, cap2);
}

}  // namespace rq
