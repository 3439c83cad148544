#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "anderson/noise.hpp"
#include "test_util.hpp"

using namespace anderson;

namespace {

struct Welford {
  long n = 0;
  double mean = 0.0, m2 = 0.0;
  void add(double x) {
    ++n;
    double d = x - mean;
    mean += d / n;
    m2 += d * (x - mean);
  }
  double se() const { return std::sqrt(m2 / (n - 1) / n); }
};

Field bump(const GridSpec& g, double x0, double y0, double s) {
  Field f = Field::from_function(g, [=](double x, double y) {
    return cplx(std::exp(-((x - x0) * (x - x0) + (y - y0) * (y - y0)) / (2 * s * s)), 0.0);
  });
  return project_band(transform(f));
}

}  // namespace

TEST_CASE("white-noise covariance by Monte Carlo") {
  GridSpec g(8.0, 32);
  Field p1 = bump(g, -2.0, 0.0, 0.4), p2 = bump(g, 2.0, 0.0, 0.4);
  p1 *= 1.0 / norm_l2(p1);
  p2 *= 1.0 / norm_l2(p2);
  const double want12 = inner(p1, p2).real();
  Welford c11, c12;
  for (std::uint64_t s = 0; s < 10000; ++s) {
    Field Y = sample_white_noise(g, s).coeffs;
    double y1 = inner(Y, p1).real(), y2 = inner(Y, p2).real();
    c11.add(y1 * y1);
    c12.add(y1 * y2);
  }
  MESSAGE("E[Y(p1)^2] = " << c11.mean << " +- " << c11.se() << ", E[Y(p1)Y(p2)] = " << c12.mean << " +- "
                          << c12.se());
  CHECK(std::abs(c11.mean - 1.0) <= 4 * c11.se());
  CHECK(std::abs(c12.mean - want12) <= 4 * c12.se());
}

TEST_CASE("sampling contract: seeds, realness, nesting") {
  GridSpec g(8.0, 64);
  auto a = sample_white_noise(g, 1), b = sample_white_noise(g, 2), a2 = sample_white_noise(g, 1);
  CHECK(norm_l2(a.coeffs - b.coeffs) > 1.0);
  CHECK(norm_l2(a.coeffs - a2.coeffs) == 0.0);
  for (std::uint64_t s = 0; s < 20; ++s) CHECK(to_space(sample_white_noise(g, s).coeffs).max_imag() <= 1e-12);
  // a coarser grid sees the same low modes
  GridSpec gc(8.0, 32);
  Field c = sample_white_noise(gc, 1).coeffs;
  for (int x = 0; x < gc.M; ++x)
    for (int y = 0; y < gc.M; ++y) {
      if (!gc.in_band(x, y)) continue;
      int ax = (gc.wavenumber(x) + g.M) % g.M, ay = (gc.wavenumber(y) + g.M) % g.M;
      CHECK(c.at(x, y) == a.coeffs.at(ax, ay));
    }
}

TEST_CASE("mollification limits") {
  GridSpec g(8.0, 64);
  Field Y = sample_white_noise(g, 5).coeffs;
  CHECK(norm_l2(mollify(Y, 0.0) - Y) == 0.0);
  // |k| <= kmax, so eps |k| <= 1/2 for small eps keeps every mode
  CHECK(norm_l2(mollify(Y, 0.5 / g.kmax()) - Y) == 0.0);
  // only the zero mode survives a huge eps
  Field far = mollify(Y, 100.0);
  CHECK(far[0] == Y[0]);
  far[0] = 0.0;
  CHECK(norm_l2(far) == 0.0);
  Field Ye = mollify(Y, 0.25);
  for (std::size_t n = 0; n < Ye.size(); ++n) {
    int a = static_cast<int>(n) / g.M, b = static_cast<int>(n) % g.M;
    double k = g.dk() * std::hypot(g.wavenumber(a), g.wavenumber(b));
    if (k >= 4.0) CHECK(Ye[n] == cplx(0.0));
  }
  CHECK_THROWS_AS(mollify(Y, -1.0), std::invalid_argument);
}

TEST_CASE("weighted Besov norm of Y_eps is stable along the ladder") {
  GridSpec g(16.0, 128);
  DyadicPartition p(g);
  std::vector<double> mean(6, 0.0);
  for (std::uint64_t s = 0; s < 10; ++s) {
    Field Y = sample_white_noise(g, 100 + s).coeffs;
    for (int i = 0; i < 6; ++i) mean[i] += besov_norm(mollify(Y, std::ldexp(1.0, -(i + 1))), -1.05, kInf, kInf, -0.5, p);
  }
  double lo = *std::min_element(mean.begin(), mean.end()), hi = *std::max_element(mean.begin(), mean.end());
  MESSAGE("ladder Besov means min " << lo / 10 << " max " << hi / 10);
  CHECK(std::isfinite(hi));
  CHECK(hi / lo <= 2.0);
}

TEST_CASE("decomposition is exact and degenerates correctly") {
  GridSpec g(8.0, 64);
  DyadicPartition p(g);
  DecompositionParams params;
  for (std::uint64_t s = 0; s < 100; ++s) {
    Field Y = mollify(sample_white_noise(g, s), s % 2 ? 0.0 : 0.125);
    auto d = decompose(Y, params, p);
    CHECK(norm_l2(d.xi + d.eta - Y) <= 1e-12 * norm_l2(Y));
  }
  Field Y = sample_white_noise(g, 3).coeffs;
  auto d = decompose(Y, DecompositionParams(1e-6), p);
  Field low = block(Y, -1, p) + block(Y, 0, p);
  CHECK(testutil::rel_diff(d.eta, low) < 1e-12);
  CHECK(to_space(d.xi).max_imag() < 1e-12);
  CHECK_THROWS_AS(DecompositionParams(0.0), std::invalid_argument);
}

TEST_CASE("growth of eta is quadratically bounded") {
  GridSpec g(16.0, 128);
  DyadicPartition p(g);
  Field r2 = radius_squared(g);
  std::vector<double> cp, half;
  for (std::uint64_t s = 0; s < 100; ++s) {
    Field eta = to_space(decompose(sample_white_noise(g, s).coeffs, {}, p).eta);
    double c1 = 0.0, c2 = 0.0;
    for (std::size_t i = 0; i < eta.size(); ++i) {
      double r = r2[i].real();
      c1 = std::max(c1, std::abs(eta[i].real()) / (1.0 + r));
      if (r <= std::pow(g.L / 4, 2)) c2 = std::max(c2, std::abs(eta[i].real()) / std::pow(1.0 + r, 0.25));
    }
    cp.push_back(c1);
    half.push_back(c2);
  }
  std::sort(cp.begin(), cp.end());
  std::sort(half.begin(), half.end());
  MESSAGE("c' median " << cp[50] << " max " << cp.back() << "; eta/<x>^0.5 max on window " << half.back());
  CHECK(std::isfinite(cp.back()));
  CHECK(std::isfinite(half.back()));
}

TEST_CASE("regularity diagnostic") {
  GridSpec g(16.0, 256);
  DyadicPartition p(g);
  // one mode per block, placed where that block's symbol is exactly 1
  const double s = 0.7;
  Field f(g, Rep::space);
  int placed = 0;
  for (int j = 0; j < p.top(); ++j) {
    bool found = false;
    for (int a = 0; a < g.M / 2 && !found; ++a)
      for (int b = 0; b <= a && !found; ++b) {
        double k = g.dk() * std::hypot(a, b);
        if (p.symbol(j, k) != 1.0) continue;
        const double kx = g.dk() * a, ky = g.dk() * b, amp = std::pow(2.0, -j * s);
        f += Field::from_function(g, [=](double x, double y) { return cplx(amp * std::cos(kx * x + ky * y)); });
        found = true;
        ++placed;
      }
  }
  REQUIRE(placed == p.top());
  auto r = regularity_diagnostic(f, p);
  CHECK(!r.one_scale);
  CHECK(std::abs(r.slope + s) <= 0.02);

  auto one = regularity_diagnostic(testutil::plane_wave(g, 28, 0), p);
  CHECK(one.one_scale);

  double ymean = 0.0, xmean = 0.0, xlo = 1e9, xhi = -1e9;
  GridSpec gw(16.0, 256);
  DyadicPartition pw(gw);
  for (std::uint64_t sd = 0; sd < 50; ++sd) {
    Field Y = sample_white_noise(gw, sd).coeffs;
    ymean += regularity_diagnostic(Y, pw, -0.5).exponent / 50;
    double ex = regularity_diagnostic(decompose(Y, {}, pw).xi, pw, -0.5, kInf, xi_first_active_block({})).exponent;
    xmean += ex / 50;
    xlo = std::min(xlo, ex);
    xhi = std::max(xhi, ex);
  }
  MESSAGE("white-noise exponent " << ymean << ", xi exponent mean " << xmean << " range [" << xlo << ", " << xhi
                                  << "]");
  CHECK(std::abs(ymean + 1.0) <= 0.3);
  CHECK(xmean >= -1.35);
  CHECK(xmean <= -0.85);
}
