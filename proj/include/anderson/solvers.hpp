#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "anderson/operator.hpp"

namespace anderson {

// Regularized dynamics act on plain grid fields with pointwise multiplication:
//   NLS  i u_t  = Delta u + (V + eta) u - |u|^p u
//   NLW  u_tt   = Delta u + (V + eta) u - |u|^p u
// with V = xi_eps - c_eps - K and eta the truncated growing part.
struct Dynamics {
  GridSpec grid;
  std::vector<double> V;    // xi - c - K, space
  std::vector<double> eta;  // space
  std::vector<double> k2;   // |k|^2 in FFT order, all modes
  double K = 0.0;
  double eps = 0.0;
};

Dynamics dynamics_from(const OperatorContext& ctx, bool with_eta = true);
// xi = eta = 0, V = -K
Dynamics free_dynamics(const GridSpec& g, double K);

struct SolverConfig {
  double dt = 1e-4;
  double T = 1.0;
  int power = 2;           // even p: nonlinearity |u|^p u
  bool nonlinear = true;
  int output_every = 50;   // ledger cadence in steps
  bool keep_snapshots = false;
};

struct LedgerRow {
  double t = 0.0;
  double mass = 0.0;      // ||u||^2
  double energy = 0.0;
  double weighted = 0.0;  // NLS: int <x> |u|^2; NLW: ||v||^2 + <-A u, u>
  double extra = 0.0;     // NLS: ||A u||; NLW: support radius
};

// raised on NaN/inf; carries the ledger up to the failure
class NumericalAbort : public std::runtime_error {
 public:
  NumericalAbort(const std::string& what, std::vector<LedgerRow> ledger)
      : std::runtime_error(what), ledger_(std::move(ledger)) {}
  const std::vector<LedgerRow>& ledger() const { return ledger_; }

 private:
  std::vector<LedgerRow> ledger_;
};

std::string format_ledger(const std::vector<LedgerRow>& rows);

// space-side helpers on the full grid
double grid_mass(const Field& u);
Field apply_A_pointwise(const Dynamics& d, const Field& u, bool with_eta);  // Delta u + (V [+ eta]) u
// largest |k|^2 + |V + eta|, used for the stability limit
double spectral_radius(const Dynamics& d);

// ---- NLS ----

struct NLSState {
  double t = 0.0;
  Field u;  // space
  std::vector<LedgerRow> ledger;
  std::vector<Field> snapshots;  // one per ledger row when requested
};

Field nls_initial(const Field& u_sharp, const OperatorContext& ctx);
double nls_energy(const Dynamics& d, const Field& u, int power, bool nonlinear = true);
// Strang splitting: half potential phase, exact free flow, half potential phase
NLSState nls_integrate(NLSState s, const Dynamics& d, const SolverConfig& cfg);

struct NLSReport {
  double mass_drift = 0.0;         // max |N(t) - N(0)| / N(0)
  double energy_drift_rate = 0.0;  // max |E(t) - E(0)| / |E(0)| / t
  double envelope_slack = 0.0;     // min over t of (E0'(t) - weighted(t)) / E0'(t)
  bool envelope_holds = true;
  double eta_weighted_sup = 0.0;   // ||<x>^{-1} eta||_inf
  double sup_Au = 0.0;
  bool finite = true;
};
// weighted estimate with l = 1:
//   int <x>|u(t)|^2 <= (1+t)[(||<x>^{-1}eta||_inf + 1) int <x>|u0|^2 + E(u0)] e^{t ||<x>^{-1}eta||_inf}
NLSReport nls_checks(const NLSState& traj, const Dynamics& d);

struct LadderDistance {
  double eps = 0.0, eps_next = 0.0;
  double dist = 0.0;           // sup_t ||u_eps - u_eps'||
  double dist_weighted = 0.0;  // sup_t ||<x>^delta (u_eps - u_eps')||
};

struct NLSStudy {
  std::vector<LadderDistance> rows;
  std::vector<double> energy_drift;  // |E(T) - E(0)| / |E(0)| per ladder entry
  std::vector<double> mass_drift;
  std::vector<NLSReport> reports;    // nls_checks per ladder entry
};
// one trajectory per context from Gamma_eps(u_sharp); contexts must share K
NLSStudy nls_eps_study(const Field& u_sharp, const std::vector<const OperatorContext*>& ladder,
                       const SolverConfig& cfg, double delta);

// ---- NLW ----

struct NLWState {
  double t = 0.0;
  Field u, v;  // space, real valued
  std::vector<LedgerRow> ledger;
  std::vector<Field> snapshots;
};

double nlw_energy(const Dynamics& d, const Field& u, const Field& v, int power, bool nonlinear = true);
// max |x| with |u(x)| > threshold * max |u|; 0 for the zero field
double support_radius(const Field& u, double threshold = 1e-10);
// dt <= 0.5 / sqrt(rho) with rho including the linearized nonlinearity
double nlw_max_dt(const Dynamics& d, const Field& u0, const SolverConfig& cfg);
// leapfrog kick-drift-kick
NLWState nlw_integrate(NLWState s, const Dynamics& d, const SolverConfig& cfg);

// linear flow cos(t sqrt(L)) u0 + sin(t sqrt(L))/sqrt(L) u1 with L = -(Delta + V + eta), by Lanczos
Field nlw_duhamel_linear(const Dynamics& d, const Field& u0, const Field& u1, double t);

// smooth cutoff on the grid, 1 on |x| <= 9R/16 and exactly 0 for |x| >= R
Field compact_localizer(const GridSpec& g, double R);

struct WaveData {
  Field u0, u1;  // space
};
// u0_eps = phi (-A_eps)^{-1} (-A) u0 and u1_eps = phi (-A_eps)^{-1/2} (-A)^{1/2} u1 with
// u0 = Gamma(u0_sharp), u1 = Gamma(u1_sharp) in the limit context; empty u1_sharp means u1 = 0
WaveData nlw_initial(const Field& u0_sharp, const Field& u1_sharp, const Field& phi, const OperatorContext& ctx,
                     const OperatorContext& limit);
// same from the limit-side inputs (-A) u0 and (-A)^{1/2} u1 (empty for u1 = 0)
WaveData nlw_initial_prepared(const Field& minus_A_u0, const Field& sqrt_u1, const Field& phi,
                              const OperatorContext& ctx);
// phi Gamma(u_sharp) in the limit context, the localized limit data
WaveData nlw_limit_data(const Field& u0_sharp, const Field& u1_sharp, const Field& phi, const OperatorContext& limit);
// 1/2 ||u1||^2 + 1/2 ||(-A)^{1/2} u0||^2 - 1/2 int eta_t u0^2 + int u0^{p+2}/(p+2) in the operator form
double wave_form_energy(const WaveData& w, const OperatorContext& ctx, int power);

struct NLWReport {
  double max_radius_excess = 0.0;  // max over t of radius(t) - (R + t + 3h)
  bool finite_speed = true;
  double energy_drift_rate = 0.0;
  double envelope_slack = 0.0;  // min (envelope - (||v||^2 + <-Au,u>)) / envelope
  bool envelope_holds = true;
  double C_R = 0.0;  // sup of |eta| on B_{R+T}
  bool finite = true;
};
// envelope: ||v||^2 + <-A u,u> + 2/(p+2) int u^{p+2} <= (its value at 0) e^{C_R t}
NLWReport nlw_checks(const NLWState& traj, const Dynamics& d, double R, const SolverConfig& cfg);

struct NLWStudy {
  std::vector<LadderDistance> rows;
  std::vector<double> sqrt_dist;    // ||(-A_eps)^{1/2} u0_eps - (-A)^{1/2} phi u0||
  std::vector<double> energy_gap;   // |E_eps(data_eps) - E(limit data)|
  std::vector<double> energy_drift;
  std::vector<NLWReport> reports;   // nlw_checks per ladder entry with localization radius R
};
NLWStudy nlw_eps_study(const Field& u0_sharp, const Field& u1_sharp, double R,
                       const std::vector<const OperatorContext*>& ladder, const OperatorContext& limit,
                       const SolverConfig& cfg, double delta);

// ||u_dt - u_{dt/2}|| / ||u_{dt/2} - u_{dt/4}|| at time T
double nlw_richardson_ratio(const Dynamics& d, const WaveData& w, const SolverConfig& cfg);
// run forward T, reverse velocity, run T again; relative L^2 distance to the start
double nlw_time_reversal(const Dynamics& d, const WaveData& w, const SolverConfig& cfg);

// ---- snapshots ----

struct SnapshotMeta {
  double t = 0.0, eps = 0.0;
  std::uint64_t seed = 0;
  std::string name;
};
// writes <base>.bin (M*M complex doubles, row-major, space) and <base>.json
void write_snapshot(const std::string& base, const Field& u, const SnapshotMeta& meta);
Field read_snapshot(const std::string& base);

}  // namespace anderson
