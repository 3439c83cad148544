#include <doctest.h>

#include <cmath>

#include "anderson/paraproducts.hpp"
#include "test_util.hpp"

using namespace anderson;
using testutil::plane_wave;
using testutil::random_field;

TEST_CASE("Bony decomposition is exact") {
  GridSpec g(8.0, 64);
  ParaEngine e(g);
  for (unsigned s = 0; s < 10; ++s) {
    Field f = random_field(g, 10 + s), h = random_field(g, 40 + s);
    Field sum = para_lt(f, h, e) + resonant(f, h, e) + para_gt(f, h, e);
    Field fg = product(f, h);
    CHECK(norm_l2(sum - fg) <= 1e-12 * norm_l2(f) * norm_l2(h));
  }
}

TEST_CASE("constant paraproduct keeps blocks from 1 up") {
  GridSpec g(8.0, 64);
  ParaEngine e(g);
  const auto& p = e.partition();
  Field c = Field::from_function(g, [](double, double) { return cplx(1.5, -0.5); });
  Field h = random_field(g, 3);
  Field want = cplx(1.5, -0.5) * (to_frequency(h) - block(h, -1, p) - block(h, 0, p));
  CHECK(testutil::rel_diff(para_lt(c, h, e), want) < 1e-12);
  Field z(g, Rep::space);
  CHECK(norm_l2(para_lt(h, z, e)) == 0.0);
  CHECK(norm_l2(resonant(h, z, e)) == 0.0);
}

TEST_CASE("well separated modes only interact through the paraproduct") {
  GridSpec g(4.0, 256);
  ParaEngine e(g);
  REQUIRE(e.top() >= 8);
  Field f = plane_wave(g, 3, 2);    // |k| ~ 5.66, rho_2 == 1
  Field h = plane_wave(g, 110, 0);  // |k| ~ 172.8, rho_7 == 1
  REQUIRE(std::abs(e.partition().symbol(2, g.dk() * std::sqrt(13.0)) - 1.0) < 1e-15);
  REQUIRE(std::abs(e.partition().symbol(7, g.dk() * 110) - 1.0) < 1e-15);
  Field want = plane_wave(g, 113, 2);
  CHECK(testutil::rel_diff(para_lt(f, h, e), want) < 1e-12);
  CHECK(norm_l2(resonant(f, h, e)) < 1e-12);
  CHECK(norm_l2(para_gt(f, h, e)) < 1e-12);
}

TEST_CASE("resonant product symmetry and combination identities") {
  GridSpec g(8.0, 64);
  ParaEngine e(g);
  for (unsigned s = 0; s < 5; ++s) {
    Field f = random_field(g, 60 + s), h = random_field(g, 70 + s);
    CHECK(norm_l2(resonant(f, h, e) - resonant(h, f, e)) <= 1e-12 * norm_l2(f) * norm_l2(h));
    CHECK(testutil::rel_diff(para_leq(f, h, e), para_lt(f, h, e) + resonant(f, h, e)) < 1e-12);
    CHECK(testutil::rel_diff(para_geq(f, h, e), para_gt(f, h, e) + resonant(f, h, e)) < 1e-12);
    CHECK(testutil::rel_diff(para_leq(f, h, e) + para_gt(f, h, e), product(f, h)) < 1e-12);
  }
}

TEST_CASE("same-block modes: resonant term is the product minus paraproducts") {
  GridSpec g(8.0, 64);
  ParaEngine e(g);
  Field f = plane_wave(g, 9, 0), h = plane_wave(g, 0, -9);
  Field want = product(f, h) - para_lt(f, h, e) - para_gt(f, h, e);
  CHECK(testutil::rel_diff(resonant(f, h, e), want) < 1e-12);
  CHECK(norm_l2(resonant(f, h, e)) > 0.1 * norm_l2(product(f, h)));
}

TEST_CASE("bilinearity") {
  GridSpec g(8.0, 32);
  ParaEngine e(g);
  Field f1 = random_field(g, 1), f2 = random_field(g, 2), h = random_field(g, 3);
  cplx a(0.3, -1.2), b(2.0, 0.5);
  Field lin = a * f1 + b * f2;
  CHECK(testutil::rel_diff(para_lt(lin, h, e), a * para_lt(f1, h, e) + b * para_lt(f2, h, e)) < 1e-12);
  CHECK(testutil::rel_diff(para_lt(h, lin, e), a * para_lt(h, f1, e) + b * para_lt(h, f2, e)) < 1e-12);
  CHECK(testutil::rel_diff(resonant(lin, h, e), a * resonant(f1, h, e) + b * resonant(f2, h, e)) < 1e-12);
}

TEST_CASE("commutators C and C_N") {
  GridSpec g(8.0, 64);
  ParaEngine e(g);
  Field f = random_field(g, 1, true), gg = random_field(g, 2, true), h = random_field(g, 3, true);
  Field c = Field::from_function(g, [](double, double) { return cplx(0.75); });
  Field want = resonant(para_lt(c, gg, e), h, e) - 0.75 * resonant(gg, h, e);
  CHECK(testutil::rel_diff(commutator_C(c, gg, h, e), want) < 1e-12);
  Field z(g, Rep::space);
  CHECK(norm_l2(commutator_C(f, z, h, e)) == 0.0);
  CHECK(norm_l2(commutator_C(f, gg, z, e)) == 0.0);

  CHECK(testutil::rel_diff(commutator_CN(f, gg, h, -2, e), commutator_C(f, gg, h, e)) < 1e-14);
  CHECK(testutil::rel_diff(commutator_CN(f, gg, h, e.top(), e), -1.0 * product(f, resonant(gg, h, e))) < 1e-14);
  for (int N = -1; N < e.top(); ++N) {
    Field diff = commutator_C(f, gg, h, e) - commutator_CN(f, gg, h, N, e);
    Field direct = resonant(e.cut(para_lt(f, gg, e), CutMode::le, N), h, e);
    CHECK(norm_l2(diff - direct) <= 1e-12 * norm_l2(f) * norm_l2(gg) * norm_l2(h));
  }
}

namespace {

Field smooth_test_field(const GridSpec& g, double kx, double ky, double w) {
  return Field::from_function(g, [=](double x, double y) {
    return cplx(std::cos(kx * x + ky * y) * std::exp(-(x * x + y * y) / w), 0.0);
  });
}

}  // namespace

TEST_CASE("commutator gain constant is stable across resolutions") {
  const double al = 0.5, be = 0.5, ga = -0.6;
  std::vector<double> consts;
  for (int M : {64, 128, 256}) {
    GridSpec g(8.0, M);
    ParaEngine e(g);
    const auto& p = e.partition();
    Field f = smooth_test_field(g, 2.0, 1.0, 2.0);
    Field gg = smooth_test_field(g, 5.0, -3.0, 1.5);
    Field h = smooth_test_field(g, -7.0, 4.0, 1.0);
    Field C = commutator_C(f, gg, h, e);
    double lhs = besov_norm(C, al + be + ga, 2, 2, 0, p);
    double rhs = besov_norm(f, al, 2, 2, 0, p) * besov_norm(gg, be, kInf, kInf, 0, p) *
                 besov_norm(h, ga, kInf, kInf, 0, p);
    consts.push_back(lhs / rhs);
  }
  MESSAGE("commutator constants " << consts[0] << " " << consts[1] << " " << consts[2]);
  for (double c : consts) CHECK(std::abs(c / consts[0] - 1.0) <= 0.5);
}

TEST_CASE("paraproduct regularity constant is stable across resolutions") {
  std::vector<double> consts;
  for (int M : {64, 128, 256}) {
    GridSpec g(8.0, M);
    ParaEngine e(g);
    const auto& p = e.partition();
    Field f = smooth_test_field(g, 1.0, 0.5, 3.0);
    Field gg = smooth_test_field(g, 6.0, 6.0, 2.0);
    gg *= 1.0 / besov_norm(gg, 0.5, kInf, kInf, 0, p);
    consts.push_back(besov_norm(para_lt(f, gg, e), 0.4, 2, 2, 0, p) / norm_l2(f));
  }
  MESSAGE("paraproduct constants " << consts[0] << " " << consts[1] << " " << consts[2]);
  for (double c : consts) CHECK(std::abs(c / consts[0] - 1.0) <= 0.5);
}

TEST_CASE("bilinear D") {
  GridSpec g(8.0, 64);
  ParaEngine e(g);
  const auto& p = e.partition();
  Field z(g, Rep::space);
  Field f = random_field(g, 4, true), gg = random_field(g, 5, true), h = random_field(g, 6, true);
  CHECK(std::abs(bilinear_D(z, gg, h, e)) == 0.0);
  Field c = Field::from_function(g, [](double, double) { return cplx(2.0); });
  cplx want = inner(to_frequency(f), 2.0 * (block(h, -1, p) + block(h, 0, p)));
  CHECK(std::abs(bilinear_D(f, c, h, e) - want) < 1e-10 * std::abs(want));

  double mx = 0.0;
  for (unsigned s = 0; s < 20; ++s) {
    Field a = random_field(g, 1000 + s, true, 8.0), b = random_field(g, 2000 + s, true, 8.0);
    cplx d = bilinear_D(a, gg, b, e) + std::conj(bilinear_D(b, gg, a, e));
    CHECK(std::isfinite(std::abs(d)));
    mx = std::max(mx, std::abs(d) / (norm_l2(a) * norm_l2(b)));
  }
  MESSAGE("max |D(f,g,h) + conj D(h,g,f)| / (|f||h|) = " << mx);
}
