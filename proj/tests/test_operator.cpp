#include <doctest.h>

#include <cmath>
#include <map>

#include "anderson/operator.hpp"
#include "test_util.hpp"

using namespace anderson;

namespace {

std::shared_ptr<const ParaEngine> engine_for(const GridSpec& g) { return std::make_shared<const ParaEngine>(g); }

EnhancedNoise zero_noise(const GridSpec& g) {
  Field z(g, Rep::frequency);
  ParaEngine e(g);
  return enhanced_from_xi(z, z, e);
}

EnhancedNoise white_noise(const GridSpec& g, std::uint64_t seed, double eps, const ParaEngine& e) {
  return build_enhanced(sample_white_noise(g, seed), eps, renorm_exact(eps, e), e);
}

EnhancedNoise scaled(const EnhancedNoise& en, double s, const ParaEngine& e) {
  EnhancedNoise out = enhanced_from_xi(s * en.xi, (s * s) * en.c, e);
  out.eta = en.eta;
  out.eps = en.eps;
  return out;
}

// plane-wave sums keyed by integer wavenumbers: an FFT-free oracle for paraproducts
using PW = std::map<std::pair<int, int>, cplx>;

struct PWCalc {
  GridSpec g;
  DyadicPartition p;
  double k(std::pair<int, int> a) const { return g.dk() * std::hypot(a.first, a.second); }
  double low(double kk, int j) const {  // sum_{i <= j-2} rho_i
    double s = 0.0;
    for (int i = -1; i <= j - 2; ++i) s += p.symbol(i, kk);
    return s;
  }
  PW lt(const PW& f, const PW& h) const {
    PW out;
    for (auto& [a, fa] : f)
      for (auto& [b, hb] : h) {
        double s = 0.0;
        for (int j = 1; j <= p.top(); ++j) s += low(k(a), j) * p.symbol(j, k(b));
        out[{a.first + b.first, a.second + b.second}] += s * fa * hb;
      }
    return out;
  }
  PW res(const PW& f, const PW& h) const {
    PW out;
    for (auto& [a, fa] : f)
      for (auto& [b, hb] : h) {
        double s = 0.0;
        for (int i = -1; i <= p.top(); ++i)
          for (int j = std::max(-1, i - 1); j <= std::min(p.top(), i + 1); ++j)
            s += p.symbol(i, k(a)) * p.symbol(j, k(b));
        out[{a.first + b.first, a.second + b.second}] += s * fa * hb;
      }
    return out;
  }
  PW mult(const PW& f, const std::function<cplx(double, double)>& m) const {
    PW out;
    for (auto& [a, fa] : f) out[a] = m(g.dk() * a.first, g.dk() * a.second) * fa;
    return out;
  }
  Field field(const PW& f) const {
    Field out(g, Rep::space);
    for (auto& [a, fa] : f) out.axpy(fa, testutil::plane_wave(g, a.first, a.second));
    return out;
  }
};

PW add(PW a, const PW& b, cplx s = 1.0) {
  for (auto& [k, v] : b) a[k] += s * v;
  return a;
}

}  // namespace

TEST_CASE("zero noise: trivial operator") {
  GridSpec g(8.0, 32);
  auto ctx = make_context(zero_noise(g), engine_for(g));
  CHECK(ctx.cutoff() == -1);
  CHECK(ctx.shift() >= 1.0 - 1e-12);
  CHECK(ctx.shift() < 1.001);
  Field f = testutil::random_field(g, 1, true);
  CHECK(norm_l2(b_xi(f, ctx)) == 0.0);
  auto pf = gamma_map(f, ctx);
  CHECK(norm_l2(pf.u - to_frequency(f)) == 0.0);
  CHECK(testutil::rel_diff(apply_T(pf, ctx), laplacian(f)) < 1e-12);

  const double K = ctx.shift();
  Field e = testutil::plane_wave(g, 2, -1);
  double k2 = std::pow(g.dk(), 2) * 5;
  CHECK(testutil::rel_diff(resolvent_solve(e, ctx).u, (1.0 / (K + k2)) * e) < 1e-10);
  CHECK(testutil::rel_diff(sqrt_apply(e, ctx, 1), std::sqrt(K + k2) * e) < 1e-10);
  CHECK(testutil::rel_diff(sqrt_apply(e, ctx, -1), (1.0 / std::sqrt(K + k2)) * e) < 1e-9);

  // closed-form embedding ratios for one real mode
  Field cmode = Field::from_function(g, [&](double x, double) { return cplx(std::cos(3 * g.dk() * x)); });
  auto pc = gamma_map(cmode, ctx);
  Field Au = apply_T(pc, ctx) - K * pc.u;
  double kk = std::pow(3 * g.dk(), 2);
  CHECK(std::abs(norm_l2(Au) - (K + kk) * norm_l2(cmode)) < 1e-10 * norm_l2(Au));
  CHECK(std::abs(-inner(pc.u, Au).real() - (K + kk) * std::pow(norm_l2(cmode), 2)) < 1e-9);
}

TEST_CASE("B on plane waves matches block arithmetic") {
  GridSpec g(8.0, 64);
  auto e = engine_for(g);
  PWCalc pw{g, DyadicPartition(g)};
  PW xi{{{9, 4}, 0.5}, {{-9, -4}, 0.5}};
  PW f{{{1, -1}, cplx(0.3, 0.2)}};
  auto bess = [](double kx, double ky) { return cplx(1.0 / (1.0 + kx * kx + ky * ky)); };
  PW X = pw.mult(xi, bess);
  PW Xi2 = pw.res(X, xi);
  auto en = enhanced_from_xi(pw.field(xi), Field(g, Rep::frequency), *e);
  CHECK(testutil::rel_diff(en.Xi2, pw.field(Xi2)) < 1e-12);
  OperatorContext ctx(en, e);
  PW lap = pw.mult(f, [](double kx, double ky) { return cplx(-(kx * kx + ky * ky)); });
  PW inner_sum = pw.lt(lap, X);
  for (int d = 0; d < 2; ++d) {
    auto der = [d](double kx, double ky) { return cplx(0.0, d == 0 ? kx : ky); };
    inner_sum = add(inner_sum, pw.lt(pw.mult(f, der), pw.mult(X, der)), 2.0);
  }
  inner_sum = add(inner_sum, pw.lt(xi, f));
  inner_sum = add(inner_sum, pw.lt(f, Xi2));
  Field want = pw.field(pw.mult(inner_sum, bess));
  CHECK(testutil::rel_diff(b_xi(pw.field(f), ctx), want) < 1e-12);

  Field f1 = testutil::random_field(g, 3), f2 = testutil::random_field(g, 4);
  cplx a(0.5, 1.5), b(-2.0, 0.1);
  CHECK(testutil::rel_diff(b_xi(a * f1 + b * f2, ctx), a * b_xi(f1, ctx) + b * b_xi(f2, ctx)) < 1e-12);
  CHECK_THROWS_AS(b_xi(testutil::random_field(GridSpec(8.0, 32), 1), ctx), std::invalid_argument);
}

TEST_CASE("cutoff selection") {
  GridSpec g(8.0, 32);
  auto e = engine_for(g);
  auto en = white_noise(g, 7, 0.0, *e);
  OperatorContext ctx(en, e);
  auto sel = select_cutoff(ctx);
  CHECK(sel.factor < 0.5);
  CHECK(contraction_factor(ctx, sel.N) < 0.5);
  CHECK(contraction_factor(ctx, e->top()) == 0.0);
  int prev = -2;
  for (double s : {1.0, 2.0, 4.0, 8.0, 16.0, 32.0}) {
    OperatorContext c2(scaled(en, s, *e), e);
    int N = select_cutoff(c2).N;
    MESSAGE("scale " << s << " -> N = " << N);
    CHECK(N >= prev);
    prev = N;
  }
  CHECK(prev > -1);
}

TEST_CASE("Gamma map") {
  GridSpec g(8.0, 32);
  auto e = engine_for(g);
  auto ctx = make_context(white_noise(g, 11, 0.0, *e), e);
  const double factor = contraction_factor(ctx, ctx.cutoff());
  Field us = weighted_probe(g, 1, 3.0);
  auto pf = gamma_map(us, ctx);
  CHECK(pf.residuals.back() <= 1e-10);
  CHECK(ansatz_residual(pf, ctx) <= 1e-8 * sobolev_norm(us, 2.0));
  double worst_ratio = 0.0;
  for (std::size_t i = 1; i < pf.residuals.size(); ++i)
    worst_ratio = std::max(worst_ratio, pf.residuals[i] / pf.residuals[i - 1]);
  MESSAGE("measured factor " << factor << ", worst increment ratio " << worst_ratio);
  CHECK(worst_ratio < 0.5);

  double C = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    Field fs = weighted_probe(g, 100 + s, 3.0);
    Field u = gamma_map(fs, ctx).u;
    C = std::max(C, weighted_norm(u, 2, 1, 1) / weighted_norm(fs, 2, 1, 1));
    C = std::max(C, norm_sup(u) / norm_sup(fs));
  }
  MESSAGE("Gamma bound constant " << C);
  CHECK(std::isfinite(C));

  // a strongly scaled noise at cutoff -1 does not contract
  OperatorContext big(scaled(white_noise(g, 11, 0.0, *e), 200.0, *e), e);
  big.set_cutoff(-1);
  big.set_shift(1.0);
  CHECK_THROWS_AS(gamma_map(us, big), std::runtime_error);
}

TEST_CASE("paracontrolled formula equals the direct one; symmetry and positivity") {
  GridSpec g(8.0, 32);
  auto e = engine_for(g);
  for (double eps : {0.25, 0.0}) {
    auto ctx = make_context(white_noise(g, 5, eps, *e), e);
    for (std::uint64_t s = 0; s < 5; ++s) {
      auto pf = gamma_map(weighted_probe(g, 40 + s, 3.0), ctx);
      CHECK(testutil::rel_diff(apply_T(pf, ctx), apply_T_direct(pf.u, ctx)) <= 1e-6);
    }
    for (std::uint64_t s = 0; s < 5; ++s) {
      auto u = gamma_map(weighted_probe(g, 60 + s, 3.0), ctx), v = gamma_map(weighted_probe(g, 80 + s, 3.0), ctx);
      Field Tu = apply_T(u, ctx), Tv = apply_T(v, ctx);
      CHECK(std::abs(inner(Tu, v.u) - inner(u.u, Tv)) <= 1e-6 * norm_l2(Tu) * norm_l2(Tv));
      CHECK(-inner(u.u, Tu - ctx.shift() * u.u).real() > 0.0);
    }
  }
  auto ctx = make_context(white_noise(g, 5, 0.0, *e), e);
  auto pf = gamma_map(weighted_probe(g, 1, 3.0), ctx);
  ParacontrolledFunction stale = pf;
  stale.u_sharp = 2.0 * stale.u_sharp;
  CHECK_THROWS_AS(apply_T(stale, ctx), std::logic_error);
}

TEST_CASE("shift calibration grows with an unrenormalized smooth potential") {
  GridSpec g(8.0, 32);
  auto e = engine_for(g);
  // a renormalized scaling moves c by s^2 and can lower the spectrum, so the probe uses c = 0
  auto en = build_enhanced(sample_white_noise(g, 9), 0.25, zero_renorm(g, 0.25), *e);
  double prev = 0.0;
  for (double s : {1.0, 2.0, 4.0}) {
    auto ctx = make_context(scaled(en, s, *e), e);
    MESSAGE("scale " << s << " -> K = " << ctx.shift());
    CHECK(ctx.shift() >= prev);
    prev = ctx.shift();
    for (std::uint64_t p = 0; p < 10; ++p) {
      auto pf = gamma_map(weighted_probe(g, 500 + p, 4.0), ctx);
      Field Au = apply_T(pf, ctx) - ctx.shift() * pf.u;
      CHECK(-inner(pf.u, Au).real() > 0.0);
    }
  }
}

TEST_CASE("resolvent and square root") {
  GridSpec g(8.0, 32);
  auto e = engine_for(g);
  auto ctx = make_context(white_noise(g, 3, 0.0, *e), e);
  const double K = ctx.shift();
  Field h = weighted_probe(g, 2, 4.0);
  for (std::uint64_t s = 0; s < 5; ++s) {
    Field gg = weighted_probe(g, 20 + s, 4.0);
    auto u = resolvent_solve(gg, ctx);
    CHECK(norm_l2(K * u.u - apply_T(u, ctx) - gg) <= 1e-8 * norm_l2(gg));
    CHECK(ansatz_residual(u, ctx) <= 1e-8 * sobolev_norm(u.u_sharp, 2.0));
    CHECK(std::abs(inner(u.u, h) - inner(gg, resolvent_solve(h, ctx).u)) <= 1e-8 * norm_l2(gg) * norm_l2(h));

    Field r = sqrt_apply(sqrt_apply(gg, ctx, 1), ctx, 1);
    Field mA = ctx.minus_A(gg);
    CHECK(norm_l2(r - mA) <= 1e-6 * norm_l2(mA));
    Field half = sqrt_apply(gg, ctx, 1);
    CHECK(std::abs(inner(half, half).real() - inner(gg, mA).real()) <= 1e-8 * inner(gg, mA).real());
  }
  OperatorOptions tight;
  tight.cg_max = 1;
  OperatorContext capped(white_noise(g, 3, 0.0, *e), e, tight);
  capped.set_cutoff(ctx.cutoff());
  capped.set_shift(K);
  CHECK_THROWS_AS(resolvent_solve(h, capped), SolverError);
}

TEST_CASE("functional inequalities on probes") {
  GridSpec g(8.0, 32);
  auto e = engine_for(g);
  auto ctx = make_context(white_noise(g, 13, 0.0, *e), e);
  auto r1 = embedding_checks(ctx, 10, 1);
  auto r100 = embedding_checks(ctx, 10, 1, 3.0, 100.0);
  CHECK(r1.probes == 10);
  for (double v : {r1.lp_ratio[0], r1.lp_ratio[2], r1.sup_ratio, r1.brezis_gallouet, r1.h2_over_Au, r1.Au_over_h2,
                   r1.h1_over_D, r1.D_over_h1})
    CHECK((std::isfinite(v) && v > 0.0));
  CHECK(r100.brezis_gallouet <= r1.brezis_gallouet * (1 + 1e-12));
}

TEST_CASE("localization formula") {
  GridSpec g(8.0, 32);
  auto e = engine_for(g);
  auto zero = make_context(zero_noise(g), e);
  auto u0 = gamma_map(weighted_probe(g, 1, 3.0), zero);
  auto r0 = localize_and_formula_check(u0, smooth_cutoff(g, 1.5), zero, 5, 2);
  CHECK(r0.max_ratio <= 1e-10);

  auto ctx = make_context(white_noise(g, 17, 0.125, *e), e);
  auto u = gamma_map(weighted_probe(g, 3, 3.0), ctx);
  Field one = Field::from_function(g, [](double, double) { return cplx(1.0); });
  auto r1 = localize_and_formula_check(u, one, ctx, 5, 4);
  CHECK(r1.max_ratio <= 1e-10);
  auto r = localize_and_formula_check(u, smooth_cutoff(g, 1.5), ctx, 10, 5);
  MESSAGE("localization ratio " << r.max_ratio);
  CHECK(r.max_ratio <= 1e-5);
}

TEST_CASE("Faris-Lavine commutator: Gaussian oracle and trivial cases") {
  GridSpec g(8.0, 64);
  auto e = engine_for(g);
  auto ctx = make_context(zero_noise(g), e);
  const double K = ctx.shift(), s = 0.6, c = 1.7;
  const double x0 = 0.4, y0 = -0.3;
  const int a = 3, b = 1;
  const double k0x = a * g.dk(), k0y = b * g.dk();
  Field f = project_band(Field::from_function(g, [&](double x, double y) {
    double r2 = (x - x0) * (x - x0) + (y - y0) * (y - y0);
    return std::exp(-r2 / (2 * s * s)) * std::exp(cplx(0.0, k0x * x + k0y * y));
  }));
  Field eta0(g, Rep::space);
  double q = faris_lavine_quotient(ctx, f, eta0, c);
  const double area = kPi * s * s;
  double num = 4 * c * (k0x * x0 + k0y * y0) * area;
  double den = area * (K + 1 / (s * s) + k0x * k0x + k0y * k0y + c * (x0 * x0 + y0 * y0 + s * s));
  MESSAGE("quotient " << q << " oracle " << num / den);
  CHECK(std::abs(q - num / den) <= 1e-6 * std::abs(num / den));
  CHECK(std::abs(faris_lavine_quotient(ctx, f, eta0, 0.0)) < 1e-12);

  auto wn = make_context(white_noise(g, 2, 0.125, *e), e);
  auto rep = faris_lavine_check(wn, 0.0, 10, 3);
  CHECK(rep.c == doctest::Approx(rep.c_prime + 2.0));
  CHECK(std::isfinite(rep.max_q));
  CHECK(rep.bound_holds);
}

TEST_CASE("norm resolvent study: argument checks and the no-gap case") {
  GridSpec g(8.0, 32);
  auto e = engine_for(g);
  auto en = white_noise(g, 4, 0.0, *e);
  auto lim = make_context(en, e);
  OperatorContext same(en, e);
  same.set_cutoff(lim.cutoff());
  same.set_shift(lim.shift());
  std::vector<Field> probes{weighted_probe(g, 1, 3.0), weighted_probe(g, 2, 3.0)};
  auto rows = norm_resolvent_study(probes, {&same}, lim);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(r.resolvent_diff == 0.0);
    CHECK(r.sqrt_diff == 0.0);
  }
  same.set_shift(lim.shift() + 1.0);
  CHECK_THROWS_AS(norm_resolvent_study(probes, {&same}, lim), std::invalid_argument);
}
