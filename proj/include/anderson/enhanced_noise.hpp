#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "anderson/noise.hpp"
#include "anderson/paraproducts.hpp"

namespace anderson {

inline constexpr double kDefaultAlpha = -1.05;

struct RenormFunction {
  Field c;            // real values, band-limited, frequency representation
  Field stderr_c;     // pointwise standard error (space), empty grid for the exact path
  double eps = 0.0;
  std::string method;  // "exact", "mc" or "none"
  long samples = 0;

  double at_center() const;  // value at the lattice point x = 0
};

RenormFunction zero_renorm(const GridSpec& g, double eps);

// Deterministic Wick sum over the noise modes; quadratic cost, so M <= max_M.
// trivial_weights replaces xi by Y_eps (w_1 = 1, L_1 = 0).
RenormFunction renorm_exact(double eps, const ParaEngine& e, const DecompositionParams& params = {},
                            const MollifierSigma& sigma = {}, bool trivial_weights = false, int max_M = 64,
                            int threads = 1);

// The same Wick sum evaluated at the single lattice point (i, j), without the final band projection.
// Linear cost in the number of modes, so it serves grids beyond the full-field limit.
double renorm_exact_point(double eps, const ParaEngine& e, int i, int j, const DecompositionParams& params = {},
                          const MollifierSigma& sigma = {}, bool trivial_weights = false, int threads = 1);

// Sample mean of xi_eps o X_eps over `samples` realizations (seeds derived from seed0)
RenormFunction renorm_mc(double eps, const ParaEngine& e, long samples, std::uint64_t seed0,
                         const DecompositionParams& params = {}, const MollifierSigma& sigma = {},
                         bool trivial_weights = false, int threads = 1);

// seed of the i-th Monte-Carlo realization
std::uint64_t mc_seed(std::uint64_t seed0, long i);

struct EnhancedNoise {
  Field xi;   // Xi_1, frequency
  Field X;    // (1 - Delta)^{-1} xi, frequency
  Field Xi2;  // xi o X - c, frequency
  Field c;    // renormalization used, frequency
  Field eta;  // Y_eps - xi, frequency
  double alpha = kDefaultAlpha;
  double eps = 0.0;
  std::uint64_t seed = 0;
  std::string renorm = "none";

  double alpha2() const { return 2.0 * alpha + 2.0; }
};

EnhancedNoise build_enhanced(const NoiseRealization& noise, double eps, const RenormFunction& c,
                             const ParaEngine& e, const DecompositionParams& params = {},
                             const MollifierSigma& sigma = {});
// from a given xi (e.g. a smooth deterministic stand-in); eta set to zero
EnhancedNoise enhanced_from_xi(const Field& xi, const Field& c, const ParaEngine& e);

struct ConvergenceRow {
  double eps = 0.0, eps_next = 0.0;
  double xi_diff = 0.0, xi2_diff = 0.0;
  std::uint64_t seed = 0;
};

struct ConvergenceOptions {
  double alpha = kDefaultAlpha;
  double window = kInf;  // evaluation window radius
  DecompositionParams params{};
  MollifierSigma sigma{};
};

// renorms[i] is the renormalization for ladder[i]; pass zero_renorm for the unrenormalized control
std::vector<ConvergenceRow> convergence_study(std::uint64_t seed, const std::vector<double>& ladder,
                                              const std::vector<RenormFunction>& renorms, const ParaEngine& e,
                                              const ConvergenceOptions& opt = {});

// consecutive differences decrease by at least `factor` at every step
bool cauchy_decrease(const std::vector<ConvergenceRow>& rows, double factor = 1.3);

}  // namespace anderson
