#include "anderson/littlewood_paley.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace anderson {

namespace {

double psi(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }

constexpr double kInner = 0.75;
constexpr double kOuter = 4.0 / 3.0;

}  // namespace

double smooth_step(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  double a = psi(s), b = psi(1.0 - s);
  return a / (a + b);
}

double chi_profile(double r) {
  return 1.0 - smooth_step((r - kInner) / (kOuter - kInner));
}

double rho_profile(double r) { return chi_profile(0.5 * r) - chi_profile(r); }

DyadicPartition::DyadicPartition(const GridSpec& g) : grid_(g) {
  const double kmax = g.kmax();
  int J = 0;
  while (kInner * std::ldexp(1.0, J + 1) < kmax) ++J;
  if (J < 1) throw std::invalid_argument("build_partition: grid too small to host two annular scales");
  J_ = J;
  for (int j = -1; j <= J_; ++j)
    blocks_.push_back(radial_symbol(g, [this, j](double k) { return symbol(j, k); }));

  const double rbox = 0.5 * g.L * std::sqrt(2.0);
  int nw = 2;
  while (kInner * std::ldexp(1.0, nw - 1) < rbox) ++nw;
  weights_.resize(nw);
  for (int n = 1; n <= nw; ++n) {
    weights_[n - 1] = Field::from_function(g, [this, n, nw](double x, double y) {
      double r = std::sqrt(x * x + y * y);
      if (n == 1) return cplx(chi_profile(r), 0.0);
      if (n == nw) return cplx(1.0 - chi_profile(std::ldexp(r, -(n - 2))), 0.0);
      return cplx(chi_profile(std::ldexp(r, -(n - 1))) - chi_profile(std::ldexp(r, -(n - 2))), 0.0);
    });
  }
}

double DyadicPartition::symbol(int j, double k) const {
  if (j < -1 || j > J_) return 0.0;
  if (j == -1) return chi_profile(k);
  if (j == J_) return 1.0 - chi_profile(std::ldexp(k, -J_));
  return chi_profile(std::ldexp(k, -(j + 1))) - chi_profile(std::ldexp(k, -j));
}

const std::vector<double>& DyadicPartition::block_symbol(int j) const {
  if (j < -1 || j > J_)
    throw std::out_of_range("block: index " + std::to_string(j) + " beyond lattice Nyquist scale " +
                            std::to_string(J_));
  return blocks_[j + 1];
}

std::vector<double> DyadicPartition::cutoff_symbol(CutMode mode, int N) const {
  // normalize to a "<= n" or "> n" cut
  int n = N;
  bool low = false;
  switch (mode) {
    case CutMode::le: low = true; break;
    case CutMode::lt: low = true; n = N - 1; break;
    case CutMode::gt: low = false; break;
    case CutMode::ge: low = false; n = N - 1; break;
  }
  std::vector<double> s(grid_.size(), 0.0);
  for (int j = -1; j <= J_; ++j) {
    bool take = low ? (j <= n) : (j > n);
    if (!take) continue;
    const auto& b = blocks_[j + 1];
    for (std::size_t i = 0; i < s.size(); ++i) s[i] += b[i];
  }
  return s;
}

double DyadicPartition::weight_value(int n, double r) const {
  const int nw = weight_count();
  if (n < 1 || n > nw) return 0.0;
  if (n == 1) return chi_profile(r);
  if (n == nw) return 1.0 - chi_profile(std::ldexp(r, -(n - 2)));
  return chi_profile(std::ldexp(r, -(n - 1))) - chi_profile(std::ldexp(r, -(n - 2)));
}

const Field& DyadicPartition::weight(int n) const {
  if (n < 1 || n > weight_count()) throw std::out_of_range("weight index out of range");
  return weights_[n - 1];
}

Field block(const Field& f, int j, const DyadicPartition& part) {
  if (f.grid() != part.grid()) throw std::invalid_argument("block: grid mismatch");
  return apply_symbol(f, part.block_symbol(j));
}

Field cutoff(const Field& f, CutMode mode, int N, const DyadicPartition& part) {
  if (f.grid() != part.grid()) throw std::invalid_argument("cutoff: grid mismatch");
  return apply_symbol(f, part.cutoff_symbol(mode, N));
}

std::vector<double> block_norms(const Field& f, double p, double delta, const DyadicPartition& part,
                                double window) {
  const auto& g = f.grid();
  Field F = to_frequency(f);
  auto mask = window_mask(g, std::isinf(window) ? 10.0 * g.L : window);
  Field wt = japanese_bracket(g, delta);
  const double h2 = g.h() * g.h();
  std::vector<double> out;
  for (int j = -1; j <= part.top(); ++j) {
    Field b = inverse_transform(apply_symbol(F, part.block_symbol(j)));
    double acc = 0.0;
    for (std::size_t n = 0; n < b.size(); ++n) {
      if (!mask[n]) continue;
      double v = std::abs(b[n]) * (delta == 0.0 ? 1.0 : wt[n].real());
      if (std::isinf(p))
        acc = std::max(acc, v);
      else
        acc += std::pow(v, p) * h2;
    }
    out.push_back(std::isinf(p) ? acc : std::pow(acc, 1.0 / p));
  }
  return out;
}

double besov_norm(const Field& f, double alpha, double p, double q, double delta,
                  const DyadicPartition& part, double window) {
  if (!(p >= 1.0) || !(q >= 1.0)) throw std::invalid_argument("besov_norm: p, q must lie in [1, inf]");
  auto bn = block_norms(f, p, delta, part, window);
  double acc = 0.0;
  for (int j = -1; j <= part.top(); ++j) {
    double term = std::pow(2.0, j * alpha) * bn[j + 1];
    if (std::isinf(q))
      acc = std::max(acc, term);
    else
      acc += std::pow(term, q);
  }
  return std::isinf(q) ? acc : std::pow(acc, 1.0 / q);
}

BernsteinReport bernstein_check(const Field& f, int j, bool annulus) {
  const auto& g = f.grid();
  Field F = to_frequency(f);
  const double lambda = std::ldexp(1.0, j);
  const double rin = annulus ? 0.75 * lambda : 0.0;
  const double rout = (annulus ? 8.0 / 3.0 : 4.0 / 3.0) * lambda;
  const double total = norm_l2(F);
  double outside = 0.0;
  int modes = 0;
  for (int a = 0; a < g.M; ++a)
    for (int b = 0; b < g.M; ++b) {
      double kx = g.dk() * g.wavenumber(a), ky = g.dk() * g.wavenumber(b);
      double k = std::sqrt(kx * kx + ky * ky);
      if (k < rin - 1e-12 || k > rout + 1e-12)
        outside += std::norm(F.at(a, b));
      else
        ++modes;
    }
  if (std::sqrt(outside) > 1e-12 * total)
    throw std::invalid_argument("bernstein_check: field is not band-limited to the declared support");

  BernsteinReport r;
  r.j = j;
  r.annulus = annulus;
  r.lambda = lambda;
  auto grad = gradient(F);
  double gn = std::sqrt(std::pow(norm_l2(grad[0]), 2) + std::pow(norm_l2(grad[1]), 2));
  r.grad_constant = gn / (lambda * total);
  r.grad_bound = rout / lambda;
  r.sup_constant = norm_sup(F) / (lambda * total);
  r.sup_bound = std::sqrt(static_cast<double>(modes)) / (g.L * lambda);
  const double tol = 1e-12;
  r.holds = r.grad_constant <= r.grad_bound * (1 + tol) && r.sup_constant <= r.sup_bound * (1 + tol);
  if (annulus) {
    r.reverse_constant = lambda * total / gn;
    r.reverse_bound = lambda / rin;
    r.holds = r.holds && r.reverse_constant <= r.reverse_bound * (1 + tol);
  }
  return r;
}

}  // namespace anderson
