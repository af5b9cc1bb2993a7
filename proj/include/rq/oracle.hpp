#pragma once

#include "rq/model.hpp"

#include <Eigen/SparseCore>

#include <vector>

namespace rq {

struct OracleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CtmcSolution {
  int cap1 = 0, cap2 = 0;
  double en1 = 0.0, en2 = 0.0;
  double p_busy = 0.0;
  double boundary_mass = 0.0;  // probability at capped orbit states
  double residual = 0.0;       // ||pi Q||_inf
  bool trusted = true;         // boundary mass below 1e-8
  std::vector<double> pi;      // row-major over (n1, n2, busy)
};

// conservative truncated generator over {0..K1} x {0..K2} x {idle,busy};
// arrivals that would exceed a cap are clipped to the capped state so rows
// still sum to zero; batch laws with unbounded support are truncated where
// the remaining tail mass drops below tail_tol.  Exponential-service
// variants only.
Eigen::SparseMatrix<double> build_generator(const ModelSpec& model, int cap1,
                                            int cap2,
                                            double tail_tol = 1e-12);

// stationary solve of pi Q = 0, sum(pi) = 1 by sparse LU on the augmented
// system; throws NO_CONVERGENCE if the residual exceeds 1e-10
CtmcSolution solve_stationary(const ModelSpec& model,
                              const Eigen::SparseMatrix<double>& gen,
                              int cap1, int cap2);

CtmcSolution solve_ctmc(const ModelSpec& model, int cap1, int cap2,
                        double tail_tol = 1e-12);

}  // namespace rq
