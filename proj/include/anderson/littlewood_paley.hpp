#pragma once

#include <vector>

#include "anderson/spectral.hpp"

namespace anderson {

// smooth step: 0 for s <= 0, 1 for s >= 1, built from exp(-1/s)
double smooth_step(double s);
// radial profiles: chi = 1 on [0, 3/4], 0 beyond 4/3; rho(r) = chi(r/2) - chi(r)
// is supported in the annulus [3/4, 8/3]
double chi_profile(double r);
double rho_profile(double r);

enum class CutMode { gt, ge, le, lt };

class DyadicPartition {
 public:
  explicit DyadicPartition(const GridSpec& g);

  const GridSpec& grid() const { return grid_; }
  // blocks run over j = -1 .. top(); the top block absorbs the lattice tail
  int top() const { return J_; }
  int count() const { return J_ + 2; }

  double symbol(int j, double k) const;
  const std::vector<double>& block_symbol(int j) const;
  std::vector<double> cutoff_symbol(CutMode mode, int N) const;

  // space-side localizers w_1 = chi(|x|), w_n = rho_{n-2}(|x|); the last absorbs the tail
  int weight_count() const { return static_cast<int>(weights_.size()); }
  double weight_value(int n, double r) const;
  const Field& weight(int n) const;

 private:
  GridSpec grid_;
  int J_ = 0;
  std::vector<std::vector<double>> blocks_;
  std::vector<Field> weights_;
};

Field block(const Field& f, int j, const DyadicPartition& part);
Field cutoff(const Field& f, CutMode mode, int N, const DyadicPartition& part);

// (sum_j (2^{j alpha} ||<x>^delta Delta_j f||_{L^p(W)})^q)^{1/q}, W = {|x| <= window}
double besov_norm(const Field& f, double alpha, double p, double q, double delta,
                  const DyadicPartition& part, double window = kInf);

// per-block L^p(W) norms of <x>^delta Delta_j f, indexed by j + 1
std::vector<double> block_norms(const Field& f, double p, double delta,
                                const DyadicPartition& part, double window = kInf);

struct BernsteinReport {
  int j = 0;
  bool annulus = false;
  double lambda = 0.0;          // 2^j
  double grad_constant = 0.0;   // ||grad u||_2 / (lambda ||u||_2)
  double grad_bound = 0.0;      // exact bound from the declared support radius
  double sup_constant = 0.0;    // ||u||_inf / (lambda ||u||_2)   (d(1/2 - 0) = 1)
  double sup_bound = 0.0;
  double reverse_constant = 0.0;  // lambda ||u||_2 / ||grad u||_2 (annulus only)
  double reverse_bound = 0.0;
  bool holds = true;
};

// f must be band-limited to the ball |k| <= (4/3) 2^j, or to the annulus
// (3/4) 2^j <= |k| <= (8/3) 2^j when annulus is set
BernsteinReport bernstein_check(const Field& f, int j, bool annulus);

}  // namespace anderson
