#include "anderson/noise.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace anderson {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

SplitMix64::result_type SplitMix64::operator()() {
  state_ += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t mode_key(std::uint64_t seed, std::uint64_t stream, int wa, int wb) {
  std::uint64_t k = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(wa)) << 32) |
                    static_cast<std::uint32_t>(wb);
  return mix64(mix64(mix64(seed) ^ stream) ^ k);
}

double sigma_profile(double t) {
  t = std::abs(t);
  if (t <= 0.5) return 1.0;
  if (t >= 1.0) return 0.0;
  return 1.0 - smooth_step(2.0 * t - 1.0);
}

DecompositionParams::DecompositionParams(double e) : eps2(e) {
  if (!(e > 0.0)) throw std::invalid_argument("DecompositionParams: eps2 must be positive");
}

int DecompositionParams::cut(int n) const { return static_cast<int>(std::ceil(eps2 * n - 1e-12)); }

namespace {

// Hermitian-symmetric coefficients; canonical half keyed by wavenumber
Field hermitian_sample(const GridSpec& g, std::uint64_t seed, std::uint64_t stream,
                       const std::function<double(double)>& amp) {
  Field F(g, Rep::frequency);
  const double dk = g.dk();
  const double r2 = 1.0 / std::sqrt(2.0);
  for (int a = 0; a < g.M; ++a)
    for (int b = 0; b < g.M; ++b) {
      if (!g.in_band(a, b)) continue;
      int wa = g.wavenumber(a), wb = g.wavenumber(b);
      bool canonical = wa > 0 || (wa == 0 && wb >= 0);
      if (!canonical) continue;
      double k = dk * std::sqrt(double(wa) * wa + double(wb) * wb);
      double s = amp(k);
      if (s == 0.0) continue;
      SplitMix64 eng(mode_key(seed, stream, wa, wb));
      std::normal_distribution<double> nd(0.0, 1.0);
      double g1 = nd(eng), g2 = nd(eng);
      cplx z = (wa == 0 && wb == 0) ? cplx(g1, 0.0) : cplx(g1 * r2, g2 * r2);
      z *= s;
      F.at(a, b) = z;
      F.at((g.M - a) % g.M, (g.M - b) % g.M) = std::conj(z);
    }
  return F;
}

}  // namespace

NoiseRealization sample_white_noise(const GridSpec& g, std::uint64_t seed) {
  NoiseRealization r;
  r.grid = g;
  r.seed = seed;
  r.coeffs = hermitian_sample(g, seed, 0x57a1e0ULL, [](double) { return 1.0; });
  return r;
}

Field mollify(const Field& Y, double eps, const MollifierSigma& sigma) {
  if (eps < 0.0) throw std::invalid_argument("mollify: eps must be nonnegative");
  if (eps == 0.0) return to_frequency(Y);
  return apply_symbol(to_frequency(Y), radial_symbol(Y.grid(), [&](double k) { return sigma(eps * k); }));
}

Field mollify(const NoiseRealization& Y, double eps, const MollifierSigma& sigma) {
  return mollify(Y.coeffs, eps, sigma);
}

Field xi_map(const Field& Y_eps, const DecompositionParams& params, const DyadicPartition& part) {
  const auto& g = Y_eps.grid();
  Field Yf = to_frequency(Y_eps);
  Field acc(g, Rep::space);
  for (int n = 1; n <= part.weight_count(); ++n) {
    int Ln = params.cut(n);
    if (Ln > part.top()) continue;
    Field hi = inverse_transform(apply_symbol(Yf, part.cutoff_symbol(CutMode::ge, Ln)));
    const Field& w = part.weight(n);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w[i].real() * hi[i];
  }
  return project_band(acc);
}

Decomposition decompose(const Field& Y_eps, const DecompositionParams& params, const DyadicPartition& part) {
  if (Y_eps.grid() != part.grid()) throw std::invalid_argument("decompose: grid mismatch");
  Decomposition d;
  d.xi = xi_map(Y_eps, params, part);
  d.eta = to_frequency(Y_eps) - d.xi;
  return d;
}

Field truncate_eta(const Field& eta, double eps) {
  Field s = to_space(eta);
  if (eps <= 0.0) return s;
  const double cap = 1.0 / eps;
  for (auto& z : s.data())
    if (z.real() > cap) z = 0.0;
  return s;
}

RegularityEstimate regularity_diagnostic(const Field& f, const DyadicPartition& part, double delta,
                                         double window, int first) {
  auto bn = block_norms(f, kInf, delta, part, window);
  double mx = 0.0;
  for (double v : bn) mx = std::max(mx, v);
  std::vector<double> js, ls;
  for (int j = std::max(0, first); j < part.top(); ++j) {
    double v = bn[j + 1];
    if (v > 1e-12 * mx && v > 0.0) {
      js.push_back(j);
      ls.push_back(std::log2(v));
    }
  }
  RegularityEstimate r;
  r.scales = static_cast<int>(js.size());
  if (js.size() < 2) {
    r.one_scale = true;
    return r;
  }
  double n = js.size(), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < js.size(); ++i) {
    sx += js[i];
    sy += ls[i];
    sxx += js[i] * js[i];
    sxy += js[i] * ls[i];
  }
  r.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  r.exponent = -r.slope;
  return r;
}

int xi_first_active_block(const DecompositionParams& params) { return params.cut(1) + 1; }

Field gaussian_field(const GridSpec& g, std::uint64_t seed, double kc) {
  Field F = hermitian_sample(g, seed, 0x9b0beULL, [kc](double k) {
    return k > 4.0 * kc ? 0.0 : std::exp(-0.5 * k * k / (kc * kc));
  });
  double n = norm_l2(F);
  if (n > 0.0) F *= 1.0 / n;
  return F;
}

Field complex_gaussian_field(const GridSpec& g, std::uint64_t seed, double kc) {
  Field re = gaussian_field(g, seed, kc);
  Field im = gaussian_field(g, mix64(seed ^ 0x1abcdefULL), kc);
  Field F = re + cplx(0.0, 1.0) * im;
  F *= 1.0 / norm_l2(F);
  return F;
}

}  // namespace anderson
