#include "anderson/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "anderson/littlewood_paley.hpp"

namespace anderson {

namespace {

double cell(const GridSpec& g) { return g.h() * g.h(); }

std::vector<double> real_space(const Field& f) {
  Field s = to_space(f);
  std::vector<double> r(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) r[i] = s[i].real();
  return r;
}

std::vector<double> all_mode_k2(const GridSpec& g) {
  std::vector<double> k2(g.size());
  const double dk = g.dk();
  for (int a = 0; a < g.M; ++a)
    for (int b = 0; b < g.M; ++b) {
      double kx = dk * g.wavenumber(a), ky = dk * g.wavenumber(b);
      k2[static_cast<std::size_t>(a) * g.M + b] = kx * kx + ky * ky;
    }
  return k2;
}

// FFT of space data with the unitary scaling folded into the caller
CVec forward(const Field& u) {
  CVec w = to_space(u).data();
  fft2_inplace(w.data(), u.grid().M, -1);
  return w;
}

// int |grad u|^2 over the full grid
double gradient_energy(const Dynamics& d, const Field& u) {
  CVec w = forward(u);
  const double M = d.grid.M;
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += d.k2[i] * std::norm(w[i]);
  return s * d.grid.L * d.grid.L / (M * M * M * M);
}

Field laplacian_all(const Dynamics& d, const Field& u) {
  CVec w = forward(u);
  const double inv = 1.0 / (double(d.grid.M) * d.grid.M);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] *= -d.k2[i] * inv;
  fft2_inplace(w.data(), d.grid.M, 1);
  return Field(d.grid, Rep::space, std::move(w));
}

double potential_integral(const Dynamics& d, const Field& u, bool with_eta) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double w = d.V[i] + (with_eta ? d.eta[i] : 0.0);
    s += w * std::norm(u[i]);
  }
  return s * cell(d.grid);
}

double power_integral(const Field& u, int power) {
  double s = 0.0;
  for (const auto& z : u.data()) s += std::pow(std::abs(z), power + 2);
  return s * cell(u.grid());
}

bool all_finite(const Field& u) {
  for (const auto& z : u.data())
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

int step_count(const SolverConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("solver: dt must be positive");
  if (!(cfg.T >= 0.0)) throw std::invalid_argument("solver: T must be nonnegative");
  if (cfg.power < 2 || cfg.power % 2 != 0) throw std::invalid_argument("solver: power must be even and >= 2");
  if (cfg.output_every < 1) throw std::invalid_argument("solver: output cadence must be positive");
  return static_cast<int>(std::ceil(cfg.T / cfg.dt - 1e-9));
}

double weighted_mass(const Field& u) {
  const auto& g = u.grid();
  double s = 0.0;
  for (int i = 0; i < g.M; ++i)
    for (int j = 0; j < g.M; ++j) {
      double x = g.x(i), y = g.x(j);
      s += std::sqrt(1.0 + x * x + y * y) * std::norm(u.at(i, j));
    }
  return s * cell(g);
}

double distance(const Field& a, const Field& b, double delta) {
  Field d = a - b;
  return delta == 0.0 ? norm_l2(d) : norm_l2(pointwise_product(d, japanese_bracket(d.grid(), delta)));
}

void require_shared_shift(const std::vector<const OperatorContext*>& ladder) {
  if (ladder.size() < 2) throw std::invalid_argument("eps study: need at least two ladder entries");
  for (const auto* c : ladder)
    if (std::abs(c->shift() - ladder.front()->shift()) > 1e-12 * ladder.front()->shift())
      throw std::invalid_argument("eps study: contexts must share the shift K");
}

}  // namespace

Dynamics dynamics_from(const OperatorContext& ctx, bool with_eta) {
  if (!ctx.calibrated()) throw std::invalid_argument("dynamics_from: context has no shift");
  Dynamics d;
  d.grid = ctx.grid();
  d.K = ctx.shift();
  d.eps = ctx.eps();
  auto xi = real_space(ctx.xi());
  auto c = real_space(ctx.c());
  d.V.resize(xi.size());
  for (std::size_t i = 0; i < xi.size(); ++i) d.V[i] = xi[i] - c[i] - d.K;
  d.eta = with_eta ? real_space(faris_lavine_potential(ctx)) : std::vector<double>(xi.size(), 0.0);
  d.k2 = all_mode_k2(d.grid);
  return d;
}

Dynamics free_dynamics(const GridSpec& g, double K) {
  Dynamics d;
  d.grid = g;
  d.K = K;
  d.V.assign(g.size(), -K);
  d.eta.assign(g.size(), 0.0);
  d.k2 = all_mode_k2(g);
  return d;
}

std::string format_ledger(const std::vector<LedgerRow>& rows) {
  std::ostringstream os;
  os.precision(10);
  os << "t,mass,energy,weighted,extra\n";
  for (const auto& r : rows) os << r.t << ',' << r.mass << ',' << r.energy << ',' << r.weighted << ',' << r.extra << '\n';
  return os.str();
}

double grid_mass(const Field& u) {
  Field s = to_space(u);
  double m = 0.0;
  for (const auto& z : s.data()) m += std::norm(z);
  return m * cell(s.grid());
}

Field apply_A_pointwise(const Dynamics& d, const Field& u, bool with_eta) {
  Field s = to_space(u);
  Field r = laplacian_all(d, s);
  for (std::size_t i = 0; i < s.size(); ++i) r[i] += (d.V[i] + (with_eta ? d.eta[i] : 0.0)) * s[i];
  return r;
}

double spectral_radius(const Dynamics& d) {
  double k = *std::max_element(d.k2.begin(), d.k2.end());
  double v = 0.0;
  for (std::size_t i = 0; i < d.V.size(); ++i) v = std::max(v, std::abs(d.V[i] + d.eta[i]));
  return k + v;
}

// ---- NLS ----

Field nls_initial(const Field& u_sharp, const OperatorContext& ctx) { return to_space(gamma_map(u_sharp, ctx).u); }

double nls_energy(const Dynamics& d, const Field& u, int power, bool nonlinear) {
  Field s = to_space(u);
  double e = 0.5 * gradient_energy(d, s) - 0.5 * potential_integral(d, s, true);
  if (nonlinear) e += power_integral(s, power) / (power + 2);
  return e;
}

namespace {

LedgerRow nls_row(const Dynamics& d, const Field& u, double t, const SolverConfig& cfg) {
  LedgerRow r;
  r.t = t;
  r.mass = grid_mass(u);
  r.energy = nls_energy(d, u, cfg.power, cfg.nonlinear);
  r.weighted = weighted_mass(u);
  r.extra = norm_l2(apply_A_pointwise(d, u, false));
  return r;
}

}  // namespace

NLSState nls_integrate(NLSState s, const Dynamics& d, const SolverConfig& cfg) {
  const int steps = step_count(cfg);
  const double dt = steps > 0 ? cfg.T / steps : 0.0;
  s.u = to_space(s.u);
  if (s.u.grid() != d.grid) throw std::invalid_argument("nls_integrate: grid mismatch");
  const int M = d.grid.M;
  const double inv = 1.0 / (double(M) * M);
  std::vector<cplx> free_phase(d.k2.size());
  for (std::size_t i = 0; i < d.k2.size(); ++i) free_phase[i] = std::polar(inv, d.k2[i] * dt);

  // the trailing half phase of one step and the leading half phase of the next commute
  // (|u| is invariant under the phase), so they are fused between outputs
  auto potential = [&](Field& u, double tau) {
    for (std::size_t i = 0; i < u.size(); ++i) {
      double W = d.V[i] + d.eta[i];
      if (cfg.nonlinear) {
        double a = std::norm(u[i]), m = a;
        for (int k = 2; k < cfg.power; k += 2) m *= a;
        W -= m;
      }
      u[i] *= std::polar(1.0, -tau * W);
    }
  };
  auto record = [&] {
    s.ledger.push_back(nls_row(d, s.u, s.t, cfg));
    if (cfg.keep_snapshots) s.snapshots.push_back(s.u);
  };
  if (s.ledger.empty()) record();
  const double t0 = s.t;
  bool fused = false;
  for (int n = 1; n <= steps; ++n) {
    if (!fused) potential(s.u, 0.5 * dt);
    fft2_inplace(s.u.data().data(), M, -1);
    for (std::size_t i = 0; i < s.u.size(); ++i) s.u[i] *= free_phase[i];
    fft2_inplace(s.u.data().data(), M, 1);
    s.t = t0 + n * dt;
    bool out = n % cfg.output_every == 0 || n == steps;
    fused = !out;
    potential(s.u, out ? 0.5 * dt : dt);
    if (out) {
      if (!all_finite(s.u)) throw NumericalAbort("nls_integrate: non-finite state at t = " + std::to_string(s.t), s.ledger);
      record();
    }
  }
  return s;
}

NLSReport nls_checks(const NLSState& traj, const Dynamics& d) {
  if (traj.ledger.empty()) throw std::invalid_argument("nls_checks: empty ledger");
  NLSReport r;
  const auto& l0 = traj.ledger.front();
  const auto& g = d.grid;
  for (int i = 0; i < g.M; ++i)
    for (int j = 0; j < g.M; ++j) {
      double x = g.x(i), y = g.x(j);
      r.eta_weighted_sup = std::max(r.eta_weighted_sup,
                                    std::abs(d.eta[static_cast<std::size_t>(i) * g.M + j]) / std::sqrt(1 + x * x + y * y));
    }
  r.envelope_slack = kInf;
  for (const auto& row : traj.ledger) {
    r.finite = r.finite && std::isfinite(row.mass) && std::isfinite(row.energy) && std::isfinite(row.extra);
    if (l0.mass > 0.0) r.mass_drift = std::max(r.mass_drift, std::abs(row.mass - l0.mass) / l0.mass);
    if (row.t > l0.t && l0.energy != 0.0)
      r.energy_drift_rate = std::max(r.energy_drift_rate, std::abs(row.energy - l0.energy) / std::abs(l0.energy) / (row.t - l0.t));
    const double t = row.t - l0.t;
    double env = (1 + t) * ((r.eta_weighted_sup + 1) * l0.weighted + l0.energy) * std::exp(t * r.eta_weighted_sup);
    if (row.weighted > env * (1 + 1e-12) && row.weighted > 0.0) r.envelope_holds = false;
    if (env > 0.0 && t > 0.0) r.envelope_slack = std::min(r.envelope_slack, (env - row.weighted) / env);
    r.sup_Au = std::max(r.sup_Au, row.extra);
  }
  if (!std::isfinite(r.envelope_slack)) r.envelope_slack = 0.0;
  return r;
}

NLSStudy nls_eps_study(const Field& u_sharp, const std::vector<const OperatorContext*>& ladder,
                       const SolverConfig& cfg, double delta) {
  require_shared_shift(ladder);
  SolverConfig c = cfg;
  c.keep_snapshots = true;
  std::vector<NLSState> runs;
  NLSStudy st;
  for (const auto* ctx : ladder) {
    Dynamics d = dynamics_from(*ctx);
    NLSState s;
    s.u = nls_initial(u_sharp, *ctx);
    s = nls_integrate(std::move(s), d, c);
    const auto& a = s.ledger.front();
    const auto& b = s.ledger.back();
    st.energy_drift.push_back(a.energy != 0.0 ? std::abs(b.energy - a.energy) / std::abs(a.energy) : 0.0);
    st.mass_drift.push_back(a.mass > 0.0 ? std::abs(b.mass - a.mass) / a.mass : 0.0);
    st.reports.push_back(nls_checks(s, d));
    s.ledger.clear();
    runs.push_back(std::move(s));
  }
  for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
    LadderDistance row;
    row.eps = ladder[i]->eps();
    row.eps_next = ladder[i + 1]->eps();
    for (std::size_t k = 0; k < runs[i].snapshots.size(); ++k) {
      row.dist = std::max(row.dist, distance(runs[i].snapshots[k], runs[i + 1].snapshots[k], 0.0));
      row.dist_weighted = std::max(row.dist_weighted, distance(runs[i].snapshots[k], runs[i + 1].snapshots[k], delta));
    }
    st.rows.push_back(row);
  }
  return st;
}

// ---- NLW ----

double nlw_energy(const Dynamics& d, const Field& u, const Field& v, int power, bool nonlinear) {
  Field s = to_space(u);
  double e = 0.5 * grid_mass(v) + 0.5 * gradient_energy(d, s) - 0.5 * potential_integral(d, s, true);
  if (nonlinear) e += power_integral(s, power) / (power + 2);
  return e;
}

double support_radius(const Field& u, double threshold) {
  Field s = to_space(u);
  const auto& g = s.grid();
  double mx = norm_sup(s);
  if (mx == 0.0) return 0.0;
  double r = 0.0;
  for (int i = 0; i < g.M; ++i)
    for (int j = 0; j < g.M; ++j)
      if (std::abs(s.at(i, j)) > threshold * mx) r = std::max(r, std::hypot(g.x(i), g.x(j)));
  return r;
}

double nlw_max_dt(const Dynamics& d, const Field& u0, const SolverConfig& cfg) {
  double rho = spectral_radius(d);
  if (cfg.nonlinear) rho += (cfg.power + 1) * std::pow(norm_sup(u0), cfg.power);
  return 0.5 / std::sqrt(rho);
}

namespace {

Field wave_force(const Dynamics& d, const Field& u, const SolverConfig& cfg) {
  Field f = apply_A_pointwise(d, u, true);
  if (cfg.nonlinear)
    for (std::size_t i = 0; i < u.size(); ++i) f[i] -= std::pow(std::abs(u[i]), cfg.power) * u[i];
  return f;
}

LedgerRow nlw_row(const Dynamics& d, const Field& u, const Field& v, double t, const SolverConfig& cfg) {
  LedgerRow r;
  r.t = t;
  r.mass = grid_mass(u);
  r.energy = nlw_energy(d, u, v, cfg.power, cfg.nonlinear);
  // ||v||^2 + <-A u, u> + 2/(p+2) int |u|^{p+2}
  r.weighted = grid_mass(v) + gradient_energy(d, u) - potential_integral(d, u, false);
  if (cfg.nonlinear) r.weighted += 2.0 * power_integral(u, cfg.power) / (cfg.power + 2);
  r.extra = support_radius(u);
  return r;
}

}  // namespace

NLWState nlw_integrate(NLWState s, const Dynamics& d, const SolverConfig& cfg) {
  const int steps = step_count(cfg);
  const double dt = steps > 0 ? cfg.T / steps : 0.0;
  s.u = to_space(s.u);
  s.v = s.v.empty() ? Field(d.grid, Rep::space) : to_space(s.v);
  if (s.u.grid() != d.grid || s.v.grid() != d.grid) throw std::invalid_argument("nlw_integrate: grid mismatch");
  if (dt > nlw_max_dt(d, s.u, cfg) * (1 + 1e-12))
    throw std::invalid_argument("nlw_integrate: dt exceeds the stability limit 0.5/sqrt(rho) = " +
                                std::to_string(nlw_max_dt(d, s.u, cfg)));
  auto record = [&] {
    s.ledger.push_back(nlw_row(d, s.u, s.v, s.t, cfg));
    if (cfg.keep_snapshots) s.snapshots.push_back(s.u);
  };
  if (s.ledger.empty()) record();
  const double t0 = s.t;
  Field F = wave_force(d, s.u, cfg);
  for (int n = 1; n <= steps; ++n) {
    s.v.axpy(0.5 * dt, F);
    s.u.axpy(dt, s.v);
    F = wave_force(d, s.u, cfg);
    s.v.axpy(0.5 * dt, F);
    s.t = t0 + n * dt;
    if (n % cfg.output_every == 0 || n == steps) {
      if (!all_finite(s.u) || !all_finite(s.v))
        throw NumericalAbort("nlw_integrate: non-finite state at t = " + std::to_string(s.t), s.ledger);
      record();
    }
  }
  return s;
}

Field nlw_duhamel_linear(const Dynamics& d, const Field& u0, const Field& u1, double t) {
  LinearOp L = [&](const Field& f) { return -apply_A_pointwise(d, f, true); };
  LanczosOptions lo;
  lo.tol = 1e-13;
  auto cos_part = [t](double l) { return l >= 0 ? std::cos(t * std::sqrt(l)) : std::cosh(t * std::sqrt(-l)); };
  auto sin_part = [t](double l) {
    if (std::abs(l) * t * t < 1e-12) return t;
    return l > 0 ? std::sin(t * std::sqrt(l)) / std::sqrt(l) : std::sinh(t * std::sqrt(-l)) / std::sqrt(-l);
  };
  Field r(d.grid, Rep::space);
  for (int part = 0; part < 2; ++part) {
    Field f = to_space(part == 0 ? u0 : u1);
    if (norm_l2(f) == 0.0) continue;
    auto res = part == 0 ? lanczos_apply(L, f, cos_part, lo) : lanczos_apply(L, f, sin_part, lo);
    if (!res.converged) throw std::runtime_error("nlw_duhamel_linear: Krylov iteration did not converge");
    r += res.value;
  }
  return r;
}

Field compact_localizer(const GridSpec& g, double R) {
  if (!(R > 0.0)) throw std::invalid_argument("compact_localizer: radius must be positive");
  return Field::from_function(g, [R](double x, double y) { return cplx(chi_profile(4.0 * std::hypot(x, y) / (3.0 * R)), 0.0); });
}

namespace {

Field localize(const Field& phi, const Field& f) { return pointwise_product(phi, f).real_part(); }

}  // namespace

WaveData nlw_initial_prepared(const Field& minus_A_u0, const Field& sqrt_u1, const Field& phi,
                              const OperatorContext& ctx) {
  WaveData w;
  w.u0 = localize(phi, resolvent_solve(minus_A_u0, ctx).u);
  w.u1 = sqrt_u1.empty() ? Field(ctx.grid(), Rep::space) : localize(phi, sqrt_apply(sqrt_u1, ctx, -1));
  return w;
}

namespace {

struct LimitInputs {
  Field minus_A_u0, sqrt_u1;
};

LimitInputs limit_inputs(const Field& u0_sharp, const Field& u1_sharp, const OperatorContext& limit) {
  LimitInputs in;
  auto pf = gamma_map(u0_sharp, limit);
  in.minus_A_u0 = limit.shift() * pf.u - apply_T(pf, limit);
  if (!u1_sharp.empty()) in.sqrt_u1 = sqrt_apply(gamma_map(u1_sharp, limit).u, limit, 1);
  return in;
}

void require_same_shift(const OperatorContext& a, const OperatorContext& b) {
  if (std::abs(a.shift() - b.shift()) > 1e-12 * b.shift())
    throw std::invalid_argument("nlw_initial: contexts must share the shift K");
}

}  // namespace

namespace {

double form_energy(const WaveData& w, const Field& half_u0, const OperatorContext& ctx, int power) {
  Field s = to_space(w.u0);
  Field eta = to_space(faris_lavine_potential(ctx));
  double pot = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) pot += eta[i].real() * std::norm(s[i]);
  pot *= cell(s.grid());
  double D = norm_l2(half_u0);
  return 0.5 * grid_mass(w.u1) + 0.5 * D * D - 0.5 * pot + power_integral(s, power) / (power + 2);
}

}  // namespace

WaveData nlw_initial(const Field& u0_sharp, const Field& u1_sharp, const Field& phi, const OperatorContext& ctx,
                     const OperatorContext& limit) {
  require_same_shift(ctx, limit);
  auto in = limit_inputs(u0_sharp, u1_sharp, limit);
  return nlw_initial_prepared(in.minus_A_u0, in.sqrt_u1, phi, ctx);
}

WaveData nlw_limit_data(const Field& u0_sharp, const Field& u1_sharp, const Field& phi, const OperatorContext& limit) {
  WaveData w;
  w.u0 = localize(phi, gamma_map(u0_sharp, limit).u);
  w.u1 = u1_sharp.empty() ? Field(limit.grid(), Rep::space) : localize(phi, gamma_map(u1_sharp, limit).u);
  return w;
}

double wave_form_energy(const WaveData& w, const OperatorContext& ctx, int power) {
  return form_energy(w, sqrt_apply(project_band(w.u0), ctx, 1), ctx, power);
}

NLWReport nlw_checks(const NLWState& traj, const Dynamics& d, double R, const SolverConfig& cfg) {
  if (traj.ledger.empty()) throw std::invalid_argument("nlw_checks: empty ledger");
  NLWReport r;
  const auto& g = d.grid;
  const auto& l0 = traj.ledger.front();
  const double T = traj.ledger.back().t - l0.t;
  for (int i = 0; i < g.M; ++i)
    for (int j = 0; j < g.M; ++j)
      if (std::hypot(g.x(i), g.x(j)) <= R + T)
        r.C_R = std::max(r.C_R, std::abs(d.eta[static_cast<std::size_t>(i) * g.M + j]));
  r.max_radius_excess = -kInf;
  r.envelope_slack = kInf;
  (void)cfg;
  for (const auto& row : traj.ledger) {
    double t = row.t - l0.t;
    r.finite = r.finite && std::isfinite(row.energy) && std::isfinite(row.weighted);
    r.max_radius_excess = std::max(r.max_radius_excess, row.extra - (R + t + 3 * g.h()));
    if (t > 0 && l0.energy != 0.0)
      r.energy_drift_rate = std::max(r.energy_drift_rate, std::abs(row.energy - l0.energy) / std::abs(l0.energy) / t);
    double env = l0.weighted * std::exp(r.C_R * t);
    if (row.weighted > env * (1 + 1e-12) && row.weighted > 0.0) r.envelope_holds = false;
    if (env > 0.0 && t > 0.0) r.envelope_slack = std::min(r.envelope_slack, (env - row.weighted) / env);
  }
  r.finite_speed = r.max_radius_excess <= 0.0;
  if (!std::isfinite(r.envelope_slack)) r.envelope_slack = 0.0;
  return r;
}

NLWStudy nlw_eps_study(const Field& u0_sharp, const Field& u1_sharp, double R,
                       const std::vector<const OperatorContext*>& ladder, const OperatorContext& limit,
                       const SolverConfig& cfg, double delta) {
  require_shared_shift(ladder);
  for (const auto* ctx : ladder) require_same_shift(*ctx, limit);
  SolverConfig c = cfg;
  c.keep_snapshots = true;
  NLWStudy st;
  Field phi = compact_localizer(limit.grid(), R);
  WaveData lim = nlw_limit_data(u0_sharp, u1_sharp, phi, limit);
  Field lim_half = sqrt_apply(project_band(lim.u0), limit, 1);
  double lim_energy = form_energy(lim, lim_half, limit, cfg.power);
  auto in = limit_inputs(u0_sharp, u1_sharp, limit);
  std::vector<NLWState> runs;
  for (const auto* ctx : ladder) {
    WaveData w = nlw_initial_prepared(in.minus_A_u0, in.sqrt_u1, phi, *ctx);
    Field half = sqrt_apply(project_band(w.u0), *ctx, 1);
    st.sqrt_dist.push_back(norm_l2(half - lim_half));
    st.energy_gap.push_back(std::abs(form_energy(w, half, *ctx, cfg.power) - lim_energy));
    Dynamics d = dynamics_from(*ctx);
    NLWState s;
    s.u = w.u0;
    s.v = w.u1;
    s = nlw_integrate(std::move(s), d, c);
    const auto& a = s.ledger.front();
    const auto& b = s.ledger.back();
    st.energy_drift.push_back(a.energy != 0.0 ? std::abs(b.energy - a.energy) / std::abs(a.energy) : 0.0);
    st.reports.push_back(nlw_checks(s, d, R, c));
    s.ledger.clear();
    runs.push_back(std::move(s));
  }
  for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
    LadderDistance row;
    row.eps = ladder[i]->eps();
    row.eps_next = ladder[i + 1]->eps();
    for (std::size_t k = 0; k < runs[i].snapshots.size(); ++k) {
      row.dist = std::max(row.dist, distance(runs[i].snapshots[k], runs[i + 1].snapshots[k], 0.0));
      row.dist_weighted = std::max(row.dist_weighted, distance(runs[i].snapshots[k], runs[i + 1].snapshots[k], delta));
    }
    st.rows.push_back(row);
  }
  return st;
}

namespace {

Field run_wave(const Dynamics& d, const WaveData& w, SolverConfig cfg) {
  cfg.keep_snapshots = false;
  cfg.output_every = std::max(1, static_cast<int>(std::ceil(cfg.T / cfg.dt)));
  NLWState s;
  s.u = w.u0;
  s.v = w.u1;
  return nlw_integrate(std::move(s), d, cfg).u;
}

}  // namespace

double nlw_richardson_ratio(const Dynamics& d, const WaveData& w, const SolverConfig& cfg) {
  SolverConfig c = cfg;
  Field a = run_wave(d, w, c);
  c.dt = 0.5 * cfg.dt;
  Field b = run_wave(d, w, c);
  c.dt = 0.25 * cfg.dt;
  Field e = run_wave(d, w, c);
  return norm_l2(a - b) / norm_l2(b - e);
}

double nlw_time_reversal(const Dynamics& d, const WaveData& w, const SolverConfig& cfg) {
  SolverConfig c = cfg;
  c.keep_snapshots = false;
  c.output_every = std::max(1, static_cast<int>(std::ceil(cfg.T / cfg.dt)));
  NLWState s;
  s.u = w.u0;
  s.v = w.u1;
  s = nlw_integrate(std::move(s), d, c);
  s.v *= -1.0;
  s.ledger.clear();
  s = nlw_integrate(std::move(s), d, c);
  s.v *= -1.0;
  double scale = std::sqrt(grid_mass(w.u0) + grid_mass(w.u1));
  if (scale == 0.0) return std::sqrt(grid_mass(s.u) + grid_mass(s.v));
  return std::sqrt(grid_mass(s.u - to_space(w.u0)) + grid_mass(s.v - to_space(w.u1))) / scale;
}

// ---- snapshots ----

void write_snapshot(const std::string& base, const Field& u, const SnapshotMeta& meta) {
  Field s = to_space(u);
  std::ofstream bin(base + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("write_snapshot: cannot open " + base + ".bin");
  bin.write(reinterpret_cast<const char*>(s.data().data()), static_cast<std::streamsize>(s.size() * sizeof(cplx)));
  nlohmann::json j;
  j["L"] = s.grid().L;
  j["M"] = s.grid().M;
  j["t"] = meta.t;
  j["eps"] = meta.eps;
  j["seed"] = meta.seed;
  j["name"] = meta.name;
  j["layout"] = "row-major complex128, x index major, space values";
  std::ofstream js(base + ".json");
  js << j.dump(2) << '\n';
}

Field read_snapshot(const std::string& base) {
  std::ifstream js(base + ".json");
  if (!js) throw std::runtime_error("read_snapshot: cannot open " + base + ".json");
  nlohmann::json j = nlohmann::json::parse(js);
  GridSpec g(j.at("L").get<double>(), j.at("M").get<int>());
  Field s(g, Rep::space);
  std::ifstream bin(base + ".bin", std::ios::binary);
  bin.read(reinterpret_cast<char*>(s.data().data()), static_cast<std::streamsize>(s.size() * sizeof(cplx)));
  if (!bin) throw std::runtime_error("read_snapshot: short binary file " + base + ".bin");
  return s;
}

}  // namespace anderson
