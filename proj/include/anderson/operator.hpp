#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "anderson/enhanced_noise.hpp"
#include "anderson/krylov.hpp"
#include "anderson/paraproducts.hpp"

namespace anderson {

struct OperatorOptions {
  double alpha = kDefaultAlpha;
  // cutoff selection: random starts and power steps per start
  int cutoff_probes = 10;
  int cutoff_power_steps = 3;
  double contraction_target = 0.5;
  // Picard iteration for the Gamma map
  double picard_tol = 1e-10;
  int picard_max = 300;
  // shift calibration
  int calibration_probes = 20;
  int spectrum_steps = 120;
  // resolvent
  double cg_tol = 1e-11;
  int cg_max = 10000;
  std::uint64_t probe_seed = 0x51ec7ULL;
};

// u = Q(u) + u_sharp with Q(u) = Delta_{>N}(u < X + B(u))
struct ParacontrolledFunction {
  Field u;        // frequency
  Field u_sharp;  // frequency
  std::vector<double> residuals;  // Picard increments, relative
};

class OperatorContext {
 public:
  OperatorContext(const EnhancedNoise& en, std::shared_ptr<const ParaEngine> engine, OperatorOptions opt = {});

  const GridSpec& grid() const { return engine_->grid(); }
  const ParaEngine& engine() const { return *engine_; }
  std::shared_ptr<const ParaEngine> engine_ptr() const { return engine_; }
  const OperatorOptions& options() const { return opt_; }

  const Field& xi() const { return xi_; }
  const Field& X() const { return X_; }
  const Field& Xi2() const { return Xi2_; }
  const Field& c() const { return c_; }
  const Field& X_res_xi() const { return XoXi_; }  // X o xi = Xi2 + c
  const Field& eta() const { return eta_; }
  double eps() const { return eps_; }
  double alpha() const { return opt_.alpha; }
  double gamma() const { return opt_.alpha + 2.0; }

  int cutoff() const { return N_; }
  void set_cutoff(int N);
  double shift() const { return K_; }
  void set_shift(double K);
  bool calibrated() const { return K_ > 0.0; }

  // building blocks, all returning frequency fields
  Field B(const Field& u) const;
  Field Q(const Field& u) const;
  Field Q_at(const Field& u, int N) const;
  Field T_direct(const Field& u) const;  // Delta u + (xi - c) u
  Field minus_A(const Field& u) const;  // K u - T u
  Field precondition(const Field& r) const;  // (K + |k|^2)^{-1} r

  // used by apply_T: Q(u) and its two constituents before the cutoff
  struct QParts {
    Field lt_uX, Bu, Q;
  };
  QParts Q_parts(const Field& u, const BlockStack& su) const;

  const BlockStack& xi_stack() const { return sxi_; }
  const BlockStack& Xi2_stack() const { return sXi2_; }

 private:
  Field B_from(const Field& u, const BlockStack& su) const;

  std::shared_ptr<const ParaEngine> engine_;
  OperatorOptions opt_;
  Field xi_, X_, Xi2_, c_, XoXi_, eta_, xi_minus_c_;
  double eps_ = 0.0;
  BlockStack sxi_, sX_, sdX_[2], sXi2_;
  int N_ = -1;
  double K_ = 0.0;
  std::vector<double> precond_;
};

// (1 - Delta)^{-1}(Delta f < X + 2 grad f < grad X + xi < f + f < Xi2)
Field b_xi(const Field& f, const OperatorContext& ctx);

struct CutoffSelection {
  int N = -1;
  double factor = 0.0;
  std::vector<double> factors;  // measured factor for N = -1, 0, ... up to the selection
};

// measured operator norm of f -> Delta_{>N}(f < X + B(f)) on H^{gamma/2}
double contraction_factor(const OperatorContext& ctx, int N);
CutoffSelection select_cutoff(const OperatorContext& ctx);

// fixed point of f -> Q(f) + f_sharp; throws if the iteration does not contract
ParacontrolledFunction gamma_map(const Field& f_sharp, const OperatorContext& ctx);
// ||u - Q(u) - u_sharp||_{H^gamma}
double ansatz_residual(const ParacontrolledFunction& pf, const OperatorContext& ctx);

// Tu = Delta u_sharp + u_sharp o xi + G(u)
Field apply_T(const ParacontrolledFunction& pf, const OperatorContext& ctx);
Field apply_T_direct(const Field& u, const OperatorContext& ctx);

struct ShiftCalibration {
  double K = 0.0;
  double probe_bound = 0.0;  // max (<u,Tu> + |grad u_sharp|^2 / 2) / |u|^2 over probes
  double lambda_max = 0.0;   // upper bound on the top of the spectrum of T
};
ShiftCalibration calibrate_shift(const OperatorContext& ctx);

// N and K chosen and stored
OperatorContext make_context(const EnhancedNoise& en, std::shared_ptr<const ParaEngine> engine,
                             OperatorOptions opt = {});

// (K - T)^{-1} g
ParacontrolledFunction resolvent_solve(const Field& g, const OperatorContext& ctx, CGResult* info = nullptr);
// (-A)^{sign/2} f for sign = +1 or -1
Field sqrt_apply(const Field& f, const OperatorContext& ctx, int sign, LanczosResult* info = nullptr);

// u_sharp probes: band-limited Gaussian field times <x>^{-2}
Field weighted_probe(const GridSpec& g, std::uint64_t seed, double kc, bool complex_valued = false);

struct EmbeddingReport {
  std::vector<double> lp_ratio;  // p = 4, 6, 8: ||u||_p / ||u||_D
  double sup_ratio = 0.0;        // ||u||_inf / ||Au||
  double brezis_gallouet = 0.0;  // ||u||_inf / (||u||_D sqrt(1 + log(1 + ||Au||)))
  double h2_over_Au = 0.0, Au_over_h2 = 0.0;
  double h1_over_D = 0.0, D_over_h1 = 0.0;
  int probes = 0;
};
// maxima over probes u = Gamma(u_sharp); scale multiplies the probe frequency cutoff
EmbeddingReport embedding_checks(const OperatorContext& ctx, int probes, std::uint64_t seed, double kc = 3.0,
                                 double amplitude = 1.0);

struct LocalizationReport {
  double max_residual = 0.0;  // |r(Psi)|
  double max_ratio = 0.0;     // |r| / (||Au|| ||(-A)^{1/2} Psi|| ||phi||_{W^{2,inf}})
  double phi_w2inf = 0.0;
  int probes = 0;
};
// r(Psi) = <phi u, A Psi> - <phi Au + 2 grad phi . grad u + u Delta phi, Psi>
LocalizationReport localize_and_formula_check(const ParacontrolledFunction& u, const Field& phi,
                                              const OperatorContext& ctx, int probes, std::uint64_t seed);
// ||phi||_{W^{2,inf}} = max of sup norms of phi and its first and second derivatives
double w2inf_norm(const Field& phi);
// band-limited smooth bump 1 on |x| <= r, 0 beyond 2r
Field smooth_cutoff(const GridSpec& g, double r);

struct FarisLavineReport {
  double c = 0.0, c_prime = 0.0;
  double max_q = 0.0;
  double a = 0.0, b = 0.0;       // constants of the norm bound
  double worst_bound_gap = 0.0;  // max of (lhs - rhs) / rhs, <= 0 when the bound holds
  bool bound_holds = true;
  std::vector<double> q;
  int probes = 0;
};
// H = -A - eta_t and N = H + c |x|^2 with eta_t = eta 1{eta <= 1/eps}; c <= 0 means c' + 2
FarisLavineReport faris_lavine_check(const OperatorContext& ctx, double c, int probes, std::uint64_t seed,
                                     double kc = 2.0);
// truncated potential eta 1{eta <= 1/eps} (space) and c' = max eta_t / (|x|^2 + 1)
Field faris_lavine_potential(const OperatorContext& ctx);
double growth_constant(const Field& eta_t);
// i(<Nf,Hf> - <Hf,Nf>) / <Nf,f> for one field f in the domain
double faris_lavine_quotient(const OperatorContext& ctx, const Field& f, const Field& eta_t, double c);

struct NormResolventRow {
  double eps = 0.0;
  int probe = 0;
  double resolvent_diff = 0.0;  // ||A_eps^{-1} g - A^{-1} g||_{H^gamma}
  double sqrt_diff = 0.0;       // ||(-A_eps)^{-1/2} g - (-A)^{-1/2} g||_{L^2}
};
// contexts must share the shift; rows ordered by probe then ladder position
std::vector<NormResolventRow> norm_resolvent_study(const std::vector<Field>& probes,
                                                   const std::vector<const OperatorContext*>& ladder,
                                                   const OperatorContext& limit);

}  // namespace anderson
