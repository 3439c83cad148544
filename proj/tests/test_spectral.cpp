#include <doctest.h>

#include <cmath>

#include "anderson/spectral.hpp"
#include "test_util.hpp"

using namespace anderson;
using testutil::plane_wave;
using testutil::random_field;

TEST_CASE("transform of a constant has only the zero mode") {
  GridSpec g(8.0, 16);
  Field f = Field::from_function(g, [](double, double) { return cplx(2.5, 0.0); });
  Field F = transform(f);
  CHECK(std::abs(F.at(0, 0) - cplx(2.5 * g.L, 0.0)) < 1e-12);
  double rest = 0.0;
  for (std::size_t n = 1; n < F.size(); ++n) rest = std::max(rest, std::abs(F[n]));
  CHECK(rest < 1e-12);
}

TEST_CASE("plane wave maps to a single lattice delta") {
  GridSpec g(8.0, 16);
  Field F = transform(plane_wave(g, 3, -2));
  for (int a = 0; a < g.M; ++a)
    for (int b = 0; b < g.M; ++b) {
      cplx want = (g.wavenumber(a) == 3 && g.wavenumber(b) == -2) ? cplx(g.L, 0.0) : cplx(0.0);
      CHECK(std::abs(F.at(a, b) - want) < 1e-12);
    }
}

TEST_CASE("transform agrees with a direct DFT sum") {
  GridSpec g(5.0, 8);
  Field f = random_field(g, 11);
  Field F = transform(f);
  const double h = g.h();
  double err = 0.0;
  for (int a = 0; a < g.M; ++a)
    for (int b = 0; b < g.M; ++b) {
      double kx = g.dk() * g.wavenumber(a), ky = g.dk() * g.wavenumber(b);
      cplx s = 0.0;
      for (int i = 0; i < g.M; ++i)
        for (int j = 0; j < g.M; ++j) s += f.at(i, j) * std::exp(cplx(0.0, -(kx * g.x(i) + ky * g.x(j))));
      s *= h * h / g.L;
      err = std::max(err, std::abs(s - F.at(a, b)));
    }
  CHECK(err < 1e-12);
}

TEST_CASE("round trip and Parseval on seeded fields") {
  GridSpec g(16.0, 64);
  for (unsigned s = 1; s <= 5; ++s) {
    Field f = random_field(g, s);
    Field back = inverse_transform(transform(f));
    CHECK(testutil::rel_diff(back, f) < 1e-12);
    CHECK(std::abs(norm_l2(f) - norm_l2(transform(f))) < 1e-12 * norm_l2(f));
  }
}

TEST_CASE("representation errors are reported") {
  GridSpec g(8.0, 16);
  Field f(g, Rep::space);
  CHECK_THROWS_AS(inverse_transform(f), std::invalid_argument);
  CHECK_THROWS_AS(transform(transform(f)), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec(8.0, 15), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec(-1.0, 16), std::invalid_argument);
}

TEST_CASE("multipliers: identity, eigenfunctions, composition") {
  GridSpec g(8.0, 32);
  Field f = random_field(g, 3);
  Field id = apply_multiplier(f, [](double, double) { return cplx(1.0); });
  CHECK(id.rep() == Rep::space);
  CHECK(testutil::rel_diff(id, f) < 1e-14);

  Field e = plane_wave(g, 2, 1);
  double k2 = std::pow(g.dk(), 2) * 5.0;
  Field r = apply_multiplier(e, [](double kx, double ky) { return cplx(1.0 / (1.0 + kx * kx + ky * ky)); });
  CHECK(testutil::rel_diff(r, (1.0 / (1.0 + k2)) * e) < 1e-12);

  auto m1 = [](double kx, double ky) { return cplx(std::cos(kx), ky); };
  auto m2 = [](double kx, double ky) { return cplx(1.0 + kx * kx, -ky * kx); };
  Field a = apply_multiplier(apply_multiplier(transform(f), m2), m1);
  Field b = apply_multiplier(transform(f), [&](double kx, double ky) { return m1(kx, ky) * m2(kx, ky); });
  CHECK(norm_l2(a - b) <= 1e-15 * norm_l2(b));

  CHECK_THROWS_AS(apply_multiplier(f, [](double, double) { return cplx(kInf); }), std::domain_error);
}

TEST_CASE("fractional derivative scales each mode separately") {
  GridSpec g(8.0, 32);
  Field f = plane_wave(g, 3, 0) + cplx(0.5, 0.0) * plane_wave(g, 1, -4);
  const double al = 0.7;
  Field D = apply_multiplier(f, [al](double kx, double ky) { return cplx(std::pow(std::hypot(kx, ky), al)); });
  double k1 = 3 * g.dk(), k2 = std::sqrt(17.0) * g.dk();
  Field want = std::pow(k1, al) * plane_wave(g, 3, 0) + cplx(0.5 * std::pow(k2, al), 0.0) * plane_wave(g, 1, -4);
  CHECK(testutil::rel_diff(D, want) < 1e-12);
}

TEST_CASE("bessel inverse") {
  GridSpec g(8.0, 32);
  Field z(g, Rep::space);
  CHECK(norm_l2(bessel_inverse(z)) == 0.0);
  Field c = Field::from_function(g, [](double, double) { return cplx(3.0); });
  CHECK(testutil::rel_diff(bessel_inverse(c), c) < 1e-14);
  Field f = random_field(g, 7);
  Field u = bessel_inverse(f);
  CHECK(testutil::rel_diff(u - laplacian(u), f) < 1e-12);
}

TEST_CASE("weighted norms") {
  GridSpec g(8.0, 32);
  Field one = Field::from_function(g, [](double, double) { return cplx(1.0); });
  CHECK(std::abs(weighted_norm(one, 2, 0, 0) - g.L) < 1e-12);
  Field f = random_field(g, 5);
  CHECK(std::abs(weighted_norm(f, 2, 0, 0) - norm_l2(f)) < 1e-12 * norm_l2(f));
  Field e = plane_wave(g, 2, 3);
  double k2 = std::pow(g.dk(), 2) * 13.0;
  CHECK(std::abs(weighted_norm(e, 2, 1, 0) - std::sqrt(1 + k2) * norm_l2(e)) < 1e-10);
  // monotone in s and delta
  CHECK(weighted_norm(f, 2, 0.5, 0.5) <= weighted_norm(f, 2, 1.0, 0.5));
  CHECK(weighted_norm(f, 2, 0.5, 0.5) <= weighted_norm(f, 2, 0.5, 1.0));
  CHECK(weighted_norm(f, 4, 0, 0.5) <= weighted_norm(f, 4, 0, 1.0));
  CHECK_THROWS_AS(weighted_norm(f, 4, 1.0, 0), std::invalid_argument);
}

TEST_CASE("weighted Young inequality on localized samples") {
  GridSpec g(16.0, 64);
  for (double kappa : {0.5, 1.0}) {
    for (unsigned s = 0; s < 10; ++s) {
      Field bump = Field::from_function(g, [](double x, double y) { return cplx(std::exp(-(x * x + y * y))); });
      Field f = pointwise_product(random_field(g, 100 + s, true, 3.0), bump);
      Field gg = pointwise_product(random_field(g, 200 + s, true, 3.0), bump);
      // periodic convolution: coefficient L fhat ghat
      Field F = transform(f), G = transform(gg), C(g, Rep::frequency);
      for (std::size_t n = 0; n < C.size(); ++n) C[n] = g.L * F[n] * G[n];
      double lhs = weighted_norm(C, 2, 0, kappa);
      double rhs = std::pow(2.0, kappa) * weighted_norm(f, 1, 0, kappa) * weighted_norm(gg, 2, 0, kappa);
      CHECK(lhs <= rhs);
    }
  }
}

TEST_CASE("dealiased product of band-limited fields is exact") {
  GridSpec g(8.0, 16);
  Field f = random_field(g, 1, false, 2.0 * g.dk() * 3);
  Field h = random_field(g, 2, false, 2.0 * g.dk() * 3);
  // spectra within |a|,|b| <= 3 (radius 6 dk covers more, so clip to a box)
  Field F = transform(f), H = transform(h);
  for (int a = 0; a < g.M; ++a)
    for (int b = 0; b < g.M; ++b)
      if (std::abs(g.wavenumber(a)) > 3 || std::abs(g.wavenumber(b)) > 3) F.at(a, b) = H.at(a, b) = 0.0;
  Field p = product(F, H);
  Field direct = transform(pointwise_product(inverse_transform(F), inverse_transform(H)));
  CHECK(norm_l2(p - direct) < 1e-12 * norm_l2(direct));
}
