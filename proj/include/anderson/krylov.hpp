#pragma once

#include <functional>
#include <string>
#include <vector>

#include "anderson/spectral.hpp"

namespace anderson {

using LinearOp = std::function<Field(const Field&)>;

struct CGResult {
  Field x;
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
  std::vector<double> history;  // relative residual per iteration
};

// preconditioned conjugate gradient for a Hermitian positive definite operator;
// precond may be empty (identity)
CGResult conjugate_gradient(const LinearOp& A, const Field& b, double tol, int max_iter,
                            const LinearOp& precond = {}, const Field* x0 = nullptr);

// thrown when an iteration cap is hit; carries the residual history
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), history_(std::move(history)) {}
  const std::vector<double>& history() const { return history_; }

 private:
  std::vector<double> history_;
};

struct LanczosOptions {
  double tol = 1e-12;   // relative change of the approximation between checks
  int max_steps = 2000;
  int check_every = 5;
};

struct LanczosResult {
  Field value;
  int steps = 0;
  bool converged = false;
  bool breakdown = false;  // invariant subspace found (the result is then exact)
};

// fn(A) f for Hermitian A through the Lanczos process with full reorthogonalization
LanczosResult lanczos_apply(const LinearOp& A, const Field& f, const std::function<double(double)>& fn,
                            const LanczosOptions& opt = {});

struct SpectrumBounds {
  double lo = 0.0, hi = 0.0;  // extreme Ritz values
  double hi_bound = 0.0;      // Ritz value plus its residual norm
  int steps = 0;
};

SpectrumBounds lanczos_extremes(const LinearOp& A, const Field& start, int steps);

}  // namespace anderson
