#pragma once

#include <cmath>
#include <random>

#include "anderson/spectral.hpp"

namespace testutil {

using anderson::cplx;
using anderson::Field;
using anderson::GridSpec;
using anderson::Rep;

// complex random space field, optionally real, on the band |a|,|b| <= M/2-1
inline Field random_field(const GridSpec& g, unsigned seed, bool real = false, double kcut = 1e300) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Field F(g, Rep::frequency);
  for (int a = 0; a < g.M; ++a)
    for (int b = 0; b < g.M; ++b) {
      if (!g.in_band(a, b)) continue;
      double kx = g.dk() * g.wavenumber(a), ky = g.dk() * g.wavenumber(b);
      if (std::sqrt(kx * kx + ky * ky) > kcut) continue;
      F.at(a, b) = cplx(nd(rng), nd(rng));
    }
  Field s = anderson::inverse_transform(F);
  if (real) s = s.real_part();
  return s;
}

// e^{i k.x} with k = dk (a, b)
inline Field plane_wave(const GridSpec& g, int a, int b) {
  const double kx = g.dk() * a, ky = g.dk() * b;
  return Field::from_function(g, [=](double x, double y) { return std::exp(cplx(0.0, kx * x + ky * y)); });
}

inline double rel_diff(const Field& a, const Field& b) {
  return anderson::norm_l2(anderson::to_frequency(a) - anderson::to_frequency(b)) /
         std::max(1e-300, anderson::norm_l2(anderson::to_frequency(b)));
}

}  // namespace testutil
