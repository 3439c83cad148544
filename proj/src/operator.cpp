#include "anderson/operator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace anderson {

namespace {

Field freq(const Field& f) { return to_frequency(f); }

double rdot(const Field& a, const Field& b) { return inner(a, b).real(); }

}  // namespace

OperatorContext::OperatorContext(const EnhancedNoise& en, std::shared_ptr<const ParaEngine> engine,
                                 OperatorOptions opt)
    : engine_(std::move(engine)), opt_(opt) {
  if (!engine_) throw std::invalid_argument("OperatorContext: missing engine");
  const auto& g = engine_->grid();
  if (en.xi.grid() != g || en.Xi2.grid() != g) throw std::invalid_argument("OperatorContext: grid mismatch");
  xi_ = freq(en.xi);
  X_ = freq(en.X);
  Xi2_ = freq(en.Xi2);
  c_ = freq(en.c);
  eta_ = freq(en.eta);
  eps_ = en.eps;
  XoXi_ = Xi2_ + c_;
  xi_minus_c_ = xi_ - c_;
  sxi_ = engine_->stack(xi_);
  sX_ = engine_->stack(X_);
  auto dX = gradient(X_);
  sdX_[0] = engine_->stack(dX[0]);
  sdX_[1] = engine_->stack(dX[1]);
  sXi2_ = engine_->stack(Xi2_);
  N_ = -1;
}

void OperatorContext::set_cutoff(int N) {
  if (N < -1 || N > engine_->top()) throw std::out_of_range("set_cutoff: cutoff outside the block range");
  N_ = N;
}

void OperatorContext::set_shift(double K) {
  if (!(K > 0.0) || !std::isfinite(K)) throw std::invalid_argument("set_shift: shift must be positive");
  K_ = K;
  precond_ = radial_symbol(grid(), [K](double k) { return 1.0 / (K + k * k); });
}

Field OperatorContext::B_from(const Field& u, const BlockStack& su) const {
  const auto& e = *engine_;
  auto du = gradient(u);
  CVec acc = e.zeros();
  e.add_lt(e.stack(laplacian(u)), sX_, acc);
  e.add_lt(e.stack(du[0]), sdX_[0], acc, 2.0);
  e.add_lt(e.stack(du[1]), sdX_[1], acc, 2.0);
  e.add_lt(sxi_, su, acc);
  e.add_lt(su, sXi2_, acc);
  return bessel_inverse(e.finish(std::move(acc)));
}

Field OperatorContext::B(const Field& u) const {
  Field uf = freq(u);
  return B_from(uf, engine_->stack(uf));
}

OperatorContext::QParts OperatorContext::Q_parts(const Field& u, const BlockStack& su) const {
  QParts q;
  CVec acc = engine_->zeros();
  engine_->add_lt(su, sX_, acc);
  q.lt_uX = engine_->finish(std::move(acc));
  q.Bu = B_from(u, su);
  q.Q = engine_->cut(q.lt_uX + q.Bu, CutMode::gt, N_);
  return q;
}

Field OperatorContext::Q_at(const Field& u, int N) const {
  Field uf = freq(u);
  BlockStack su = engine_->stack(uf);
  CVec acc = engine_->zeros();
  engine_->add_lt(su, sX_, acc);
  Field s = engine_->finish(std::move(acc)) + B_from(uf, su);
  return engine_->cut(s, CutMode::gt, N);
}

Field OperatorContext::Q(const Field& u) const { return Q_at(u, N_); }

Field OperatorContext::T_direct(const Field& u) const {
  Field uf = freq(u);
  return laplacian(uf) + product(xi_minus_c_, uf);
}

Field OperatorContext::minus_A(const Field& u) const {
  if (!calibrated()) throw std::logic_error("operator context is not calibrated");
  Field uf = freq(u);
  Field r = K_ * uf;
  r -= T_direct(uf);
  return r;
}

Field OperatorContext::precondition(const Field& r) const {
  if (!calibrated()) throw std::logic_error("operator context is not calibrated");
  return apply_symbol(freq(r), precond_);
}

Field b_xi(const Field& f, const OperatorContext& ctx) {
  if (f.grid() != ctx.grid()) throw std::invalid_argument("b_xi: grid mismatch");
  return ctx.B(f);
}

Field weighted_probe(const GridSpec& g, std::uint64_t seed, double kc, bool complex_valued) {
  Field f = complex_valued ? complex_gaussian_field(g, seed, kc) : gaussian_field(g, seed, kc);
  Field w = pointwise_product(to_space(f), japanese_bracket(g, -2.0));
  Field p = project_band(w);
  p *= 1.0 / norm_l2(p);
  return p;
}

double contraction_factor(const OperatorContext& ctx, int N) {
  const auto& g = ctx.grid();
  const double s = ctx.gamma() / 2;
  const auto& opt = ctx.options();
  double worst = 0.0;
  for (int r = 0; r < opt.cutoff_probes; ++r) {
    Field f = gaussian_field(g, mix64(opt.probe_seed + 17 * r), g.kmax() / 2);
    for (int it = 0; it <= opt.cutoff_power_steps; ++it) {
      double nf = sobolev_norm(f, s);
      if (nf == 0.0) break;
      Field q = ctx.Q_at(f, N);
      double nq = sobolev_norm(q, s);
      worst = std::max(worst, nq / nf);
      if (nq == 0.0) break;
      f = q;
      f *= 1.0 / nq;
    }
  }
  return worst;
}

CutoffSelection select_cutoff(const OperatorContext& ctx) {
  CutoffSelection sel;
  const double target = ctx.options().contraction_target;
  for (int N = -1; N <= ctx.engine().top(); ++N) {
    double f = contraction_factor(ctx, N);
    sel.factors.push_back(f);
    if (f < target) {
      sel.N = N;
      sel.factor = f;
      return sel;
    }
  }
  throw std::runtime_error("select_cutoff: no cutoff reaches the contraction target");
}

ParacontrolledFunction gamma_map(const Field& f_sharp, const OperatorContext& ctx) {
  if (f_sharp.grid() != ctx.grid()) throw std::invalid_argument("gamma_map: grid mismatch");
  const auto& opt = ctx.options();
  const double s = ctx.gamma() / 2;
  ParacontrolledFunction pf;
  pf.u_sharp = freq(f_sharp);
  pf.u = pf.u_sharp;
  const double base = sobolev_norm(pf.u_sharp, s);
  if (base == 0.0) return pf;
  int growing = 0;
  for (int it = 0; it < opt.picard_max; ++it) {
    Field next = ctx.Q(pf.u) + pf.u_sharp;
    double inc = sobolev_norm(next - pf.u, s) / base;
    pf.residuals.push_back(inc);
    pf.u = std::move(next);
    if (inc <= opt.picard_tol) return pf;
    if (pf.residuals.size() > 1 && inc >= pf.residuals[pf.residuals.size() - 2])
      ++growing;
    else
      growing = 0;
    if (growing >= 5 || !std::isfinite(inc)) break;
  }
  std::ostringstream os;
  os << "gamma_map: Picard iteration does not contract at cutoff N = " << ctx.cutoff() << " (increments";
  const auto& r = pf.residuals;
  for (std::size_t i = r.size() > 5 ? r.size() - 5 : 0; i < r.size(); ++i) os << ' ' << r[i];
  os << ")";
  throw std::runtime_error(os.str());
}

double ansatz_residual(const ParacontrolledFunction& pf, const OperatorContext& ctx) {
  return sobolev_norm(pf.u - ctx.Q(pf.u) - pf.u_sharp, ctx.gamma());
}

Field apply_T(const ParacontrolledFunction& pf, const OperatorContext& ctx) {
  const auto& e = ctx.engine();
  const int N = ctx.cutoff();
  Field u = freq(pf.u), us = freq(pf.u_sharp);
  if (u.grid() != ctx.grid()) throw std::invalid_argument("apply_T: grid mismatch");
  BlockStack su = e.stack(u);
  auto qp = ctx.Q_parts(u, su);
  double stale = sobolev_norm(u - qp.Q - us, ctx.gamma());
  if (stale > 1e-8 * sobolev_norm(us, 2.0) + 1e-300)
    throw std::logic_error("apply_T: stale ansatz, u is not Gamma(u_sharp) for this context");

  // Delta_{<=N}(u < xi + xi < u + u < Xi2)
  CVec low = e.zeros();
  e.add_lt(su, ctx.xi_stack(), low);
  e.add_lt(ctx.xi_stack(), su, low);
  e.add_lt(su, ctx.Xi2_stack(), low);
  Field low_f = e.cut(e.finish(std::move(low)), CutMode::le, N);

  // u >= Xi2 and u_sharp o xi, plus C_N(u, X, xi) + (Delta_{>N} B(u)) o xi = Q(u) o xi - u (X o xi)
  CVec hi = e.zeros();
  e.add_lt(ctx.Xi2_stack(), su, hi);
  e.add_res(su, ctx.Xi2_stack(), hi);
  e.add_res(e.stack(us), ctx.xi_stack(), hi);
  e.add_res(e.stack(qp.Q), ctx.xi_stack(), hi);
  Field hi_f = e.finish(std::move(hi));

  Field Tu = laplacian(us);
  Tu += low_f;
  Tu += qp.Q;
  Tu += hi_f;
  Tu -= product(u, ctx.X_res_xi());
  return Tu;
}

Field apply_T_direct(const Field& u, const OperatorContext& ctx) { return ctx.T_direct(u); }

ShiftCalibration calibrate_shift(const OperatorContext& ctx) {
  const auto& opt = ctx.options();
  const auto& g = ctx.grid();
  ShiftCalibration cal;
  cal.probe_bound = -kInf;
  for (int i = 0; i < opt.calibration_probes; ++i) {
    Field us = weighted_probe(g, mix64(opt.probe_seed ^ (0xca1ULL + i)), 3.0);
    auto pf = gamma_map(us, ctx);
    Field Tu = apply_T(pf, ctx);
    auto du = gradient(pf.u_sharp);
    double grad2 = rdot(du[0], du[0]) + rdot(du[1], du[1]);
    double q = (rdot(pf.u, Tu) + 0.5 * grad2) / rdot(pf.u, pf.u);
    cal.probe_bound = std::max(cal.probe_bound, q);
  }
  Field start = gaussian_field(g, mix64(opt.probe_seed ^ 0x5bec7ULL), 3.0);
  auto sb = lanczos_extremes([&](const Field& f) { return ctx.T_direct(f); }, start, opt.spectrum_steps);
  cal.lambda_max = sb.hi_bound;
  cal.K = std::max(2.0 * cal.probe_bound + 1.0, cal.lambda_max + 1.0);
  return cal;
}

OperatorContext make_context(const EnhancedNoise& en, std::shared_ptr<const ParaEngine> engine,
                             OperatorOptions opt) {
  OperatorContext ctx(en, std::move(engine), opt);
  ctx.set_cutoff(select_cutoff(ctx).N);
  ctx.set_shift(calibrate_shift(ctx).K);
  return ctx;
}

ParacontrolledFunction resolvent_solve(const Field& g, const OperatorContext& ctx, CGResult* info) {
  if (g.grid() != ctx.grid()) throw std::invalid_argument("resolvent_solve: grid mismatch");
  const auto& opt = ctx.options();
  auto res = conjugate_gradient([&](const Field& f) { return ctx.minus_A(f); }, freq(g), opt.cg_tol, opt.cg_max,
                                [&](const Field& r) { return ctx.precondition(r); });
  if (info) *info = res;
  if (!res.converged) {
    std::ostringstream os;
    os << "resolvent_solve: no convergence in " << res.iterations << " iterations, relative residual "
       << res.rel_residual;
    throw SolverError(os.str(), res.history);
  }
  ParacontrolledFunction pf;
  pf.u = res.x;
  pf.u_sharp = pf.u - ctx.Q(pf.u);
  return pf;
}

Field sqrt_apply(const Field& f, const OperatorContext& ctx, int sign, LanczosResult* info) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("sqrt_apply: sign must be +1 or -1");
  Field h = sign > 0 ? freq(f) : resolvent_solve(f, ctx).u;
  LanczosOptions lo;
  auto res = lanczos_apply([&](const Field& v) { return ctx.minus_A(v); }, h,
                           [](double l) { return std::sqrt(std::max(l, 0.0)); }, lo);
  if (info) *info = res;
  if (!res.converged) throw std::runtime_error("sqrt_apply: Krylov iteration did not converge");
  return res.value;
}

EmbeddingReport embedding_checks(const OperatorContext& ctx, int probes, std::uint64_t seed, double kc,
                                 double amplitude) {
  EmbeddingReport rep;
  rep.lp_ratio.assign(3, 0.0);
  const double K = ctx.shift();
  for (int i = 0; i < probes; ++i) {
    Field us = amplitude * weighted_probe(ctx.grid(), mix64(seed + i), kc);
    auto pf = gamma_map(us, ctx);
    Field Au = apply_T(pf, ctx);
    Au -= K * pf.u;
    double nAu = norm_l2(Au);
    double D = std::sqrt(std::max(0.0, -rdot(pf.u, Au)));
    const double ps[3] = {4, 6, 8};
    for (int k = 0; k < 3; ++k) rep.lp_ratio[k] = std::max(rep.lp_ratio[k], norm_lp(pf.u, ps[k]) / D);
    double sup = norm_sup(pf.u);
    rep.sup_ratio = std::max(rep.sup_ratio, sup / nAu);
    rep.brezis_gallouet = std::max(rep.brezis_gallouet, sup / (D * std::sqrt(1.0 + std::log(1.0 + nAu))));
    double h2 = sobolev_norm(pf.u_sharp, 2.0), h1 = sobolev_norm(pf.u_sharp, 1.0);
    rep.h2_over_Au = std::max(rep.h2_over_Au, h2 / nAu);
    rep.Au_over_h2 = std::max(rep.Au_over_h2, nAu / h2);
    rep.h1_over_D = std::max(rep.h1_over_D, h1 / D);
    rep.D_over_h1 = std::max(rep.D_over_h1, D / h1);
    ++rep.probes;
  }
  return rep;
}

double w2inf_norm(const Field& phi) {
  Field f = freq(phi);
  double m = norm_sup(f);
  auto d = gradient(f);
  m = std::max({m, norm_sup(d[0]), norm_sup(d[1])});
  m = std::max(m, norm_sup(apply_multiplier(f, [](double kx, double) { return cplx(-kx * kx); })));
  m = std::max(m, norm_sup(apply_multiplier(f, [](double kx, double ky) { return cplx(-kx * ky); })));
  m = std::max(m, norm_sup(apply_multiplier(f, [](double, double ky) { return cplx(-ky * ky); })));
  return m;
}

Field smooth_cutoff(const GridSpec& g, double r) {
  return project_band(Field::from_function(g, [r](double x, double y) {
    return cplx(chi_profile(0.75 * std::hypot(x, y) / r), 0.0);
  }));
}

LocalizationReport localize_and_formula_check(const ParacontrolledFunction& u, const Field& phi,
                                              const OperatorContext& ctx, int probes, std::uint64_t seed) {
  LocalizationReport rep;
  const double K = ctx.shift();
  Field ph = freq(phi);
  rep.phi_w2inf = w2inf_norm(ph);
  Field Au = apply_T(u, ctx);
  Au -= K * u.u;
  const double nAu = norm_l2(Au);
  Field phi_u = product(ph, u.u);
  auto dphi = gradient(ph);
  auto du = gradient(u.u);
  Field rhs = product(ph, Au);
  rhs += 2.0 * (product(dphi[0], du[0]) + product(dphi[1], du[1]));
  rhs += product(u.u, laplacian(ph));
  for (int i = 0; i < probes; ++i) {
    auto psi = gamma_map(weighted_probe(ctx.grid(), mix64(seed + 31 * i), 3.0), ctx);
    Field Apsi = apply_T(psi, ctx);
    Apsi -= K * psi.u;
    cplx r = inner(phi_u, Apsi) - inner(rhs, psi.u);
    double half = std::sqrt(std::max(0.0, -rdot(psi.u, Apsi)));
    rep.max_residual = std::max(rep.max_residual, std::abs(r));
    double scale = nAu * half * rep.phi_w2inf;
    rep.max_ratio = std::max(rep.max_ratio, scale > 0 ? std::abs(r) / scale : 0.0);
    ++rep.probes;
  }
  return rep;
}

Field faris_lavine_potential(const OperatorContext& ctx) { return truncate_eta(ctx.eta(), ctx.eps()); }

double growth_constant(const Field& eta_t) {
  Field s = to_space(eta_t);
  Field r2 = radius_squared(s.grid());
  double c = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) c = std::max(c, s[i].real() / (r2[i].real() + 1.0));
  return c;
}

namespace {

struct FLFields {
  Field f, Hf, Nf, x2f;
};

FLFields fl_fields(const OperatorContext& ctx, const Field& f, const Field& eta_t, double c) {
  FLFields r;
  r.f = freq(f);
  Field eta_f = project_band(pointwise_product(to_space(r.f), to_space(eta_t)));
  r.x2f = project_band(pointwise_product(to_space(r.f), radius_squared(ctx.grid())));
  r.Hf = ctx.minus_A(r.f) - eta_f;
  r.Nf = r.Hf + c * r.x2f;
  return r;
}

}  // namespace

double faris_lavine_quotient(const OperatorContext& ctx, const Field& f, const Field& eta_t, double c) {
  auto v = fl_fields(ctx, f, eta_t, c);
  cplx num = cplx(0.0, 1.0) * (inner(v.Nf, v.Hf) - inner(v.Hf, v.Nf));
  return num.real() / inner(v.Nf, v.f).real();
}

FarisLavineReport faris_lavine_check(const OperatorContext& ctx, double c, int probes, std::uint64_t seed,
                                     double kc) {
  FarisLavineReport rep;
  Field eta_t = faris_lavine_potential(ctx);
  rep.c_prime = growth_constant(eta_t);
  rep.c = c > 0.0 ? c : rep.c_prime + 2.0;
  rep.a = rep.c * rep.c - 2.0 * rep.c;
  rep.b = 4.0 * rep.c;
  rep.worst_bound_gap = -kInf;
  for (int i = 0; i < probes; ++i) {
    Field fs = weighted_probe(ctx.grid(), mix64(seed + 7 * i), kc, true);
    // C_2 condition: <x>^2 f_sharp in L^2
    double w = norm_l2(pointwise_product(to_space(fs), japanese_bracket(ctx.grid(), 2.0)));
    if (!std::isfinite(w)) throw std::invalid_argument("faris_lavine_check: probe violates the weight condition");
    Field f = gamma_map(fs, ctx).u;
    auto v = fl_fields(ctx, f, eta_t, rep.c);
    cplx num = cplx(0.0, 1.0) * (inner(v.Nf, v.Hf) - inner(v.Hf, v.Nf));
    double q = num.real() / inner(v.Nf, v.f).real();
    rep.q.push_back(q);
    rep.max_q = std::max(rep.max_q, std::abs(q));
    double nH = rdot(v.Hf, v.Hf), nx = rdot(v.x2f, v.x2f), nN = rdot(v.Nf, v.Nf), nf = rdot(v.f, v.f);
    double lhs = nH + rep.a * nx, rhs = nN + rep.b * nf;
    rep.worst_bound_gap = std::max(rep.worst_bound_gap, (lhs - rhs) / rhs);
    if (lhs > rhs) rep.bound_holds = false;
    ++rep.probes;
  }
  return rep;
}

std::vector<NormResolventRow> norm_resolvent_study(const std::vector<Field>& probes,
                                                   const std::vector<const OperatorContext*>& ladder,
                                                   const OperatorContext& limit) {
  for (const auto* c : ladder)
    if (std::abs(c->shift() - limit.shift()) > 1e-12 * limit.shift())
      throw std::invalid_argument("norm_resolvent_study: contexts must share the shift");
  std::vector<NormResolventRow> rows;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    Field R = resolvent_solve(probes[p], limit).u;
    Field S = sqrt_apply(probes[p], limit, -1);
    for (const auto* c : ladder) {
      NormResolventRow row;
      row.eps = c->eps();
      row.probe = static_cast<int>(p);
      row.resolvent_diff = sobolev_norm(resolvent_solve(probes[p], *c).u - R, limit.gamma());
      row.sqrt_diff = norm_l2(sqrt_apply(probes[p], *c, -1) - S);
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace anderson
