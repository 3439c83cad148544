#pragma once

#include <cstdint>
#include <vector>

#include "anderson/littlewood_paley.hpp"
#include "anderson/spectral.hpp"

namespace anderson {

// counter-style engine so every lattice mode gets its own reproducible stream
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t s) : state_(s) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type(0); }
  result_type operator()();

 private:
  std::uint64_t state_;
};

std::uint64_t mix64(std::uint64_t z);
std::uint64_t mode_key(std::uint64_t seed, std::uint64_t stream, int wa, int wb);

// 1 on [0, 1/2], smooth decay to 0 at t = 1
double sigma_profile(double t);

struct MollifierSigma {
  double radius = 1.0;
  double operator()(double t) const { return sigma_profile(t / radius); }
};

struct DecompositionParams {
  double eps2 = 1.0;
  DecompositionParams() = default;
  explicit DecompositionParams(double e);
  int cut(int n) const;  // ceil(eps2 * n)
};

struct NoiseRealization {
  GridSpec grid;
  std::uint64_t seed = 0;
  Field coeffs;  // unitary Fourier coefficients of Y on the band, E|Y_k|^2 = 1
};

NoiseRealization sample_white_noise(const GridSpec& g, std::uint64_t seed);

// Y_eps: frequency-side multiplication by sigma(eps |k|); eps = 0 returns Y
Field mollify(const Field& Y, double eps, const MollifierSigma& sigma = {});
Field mollify(const NoiseRealization& Y, double eps, const MollifierSigma& sigma = {});

struct Decomposition {
  Field xi;   // band-limited, frequency representation
  Field eta;  // Y_eps - xi
};

// xi = sum_n w_n Delta_{>= L_n} Y_eps with pointwise w_n, projected to the band
Field xi_map(const Field& Y_eps, const DecompositionParams& params, const DyadicPartition& part);
Decomposition decompose(const Field& Y_eps, const DecompositionParams& params, const DyadicPartition& part);

// eta * 1{eta <= 1/eps}, pointwise (space); eps = 0 keeps eta
Field truncate_eta(const Field& eta, double eps);

struct RegularityEstimate {
  double exponent = 0.0;  // estimated Hoelder exponent (minus the fitted slope)
  double slope = 0.0;     // least-squares slope of log2 ||Delta_j f||_inf against j
  int scales = 0;
  bool one_scale = false;
};

// fit over blocks first .. top-1 (the top block is cut by the lattice corners)
RegularityEstimate regularity_diagnostic(const Field& f, const DyadicPartition& part, double delta = 0.0,
                                         double window = kInf, int first = 0);
// lowest block that xi carries in full everywhere: blocks below L_1 are removed near the origin
int xi_first_active_block(const DecompositionParams& params);

// real, band-limited Gaussian random field with spectral envelope exp(-|k|^2 / (2 kc^2)),
// unit L^2 norm, keyed by mode like the white noise
Field gaussian_field(const GridSpec& g, std::uint64_t seed, double kc);
// complex version (independent real and imaginary parts)
Field complex_gaussian_field(const GridSpec& g, std::uint64_t seed, double kc);

}  // namespace anderson
