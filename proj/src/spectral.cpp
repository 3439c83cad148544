#include "anderson/spectral.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <utility>

namespace anderson {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// FFTW plans are made once per (size, direction) and thread; only the
// planner itself needs the lock.
struct PlanCache {
  std::map<std::pair<int, int>, fftw_plan> plans;

  ~PlanCache() {
    std::lock_guard<std::mutex> lk(planner_mutex());
    for (auto& kv : plans) fftw_destroy_plan(kv.second);
  }

  fftw_plan get(int M, int sign) {
    auto key = std::make_pair(M, sign);
    auto it = plans.find(key);
    if (it != plans.end()) return it->second;
    std::lock_guard<std::mutex> lk(planner_mutex());
    CVec scratch(static_cast<std::size_t>(M) * M);
    auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft_2d(M, M, p, p, sign, FFTW_ESTIMATE);
    if (!plan) throw std::runtime_error("fftw planning failed for M=" + std::to_string(M));
    plans.emplace(key, plan);
    return plan;
  }
};

thread_local PlanCache plan_cache;

inline double parity(int w) { return (w & 1) ? -1.0 : 1.0; }

void check_rep(const Field& f, Rep r, const char* what) {
  if (f.rep() != r) {
    throw std::invalid_argument(std::string(what) + ": field is in " +
                                (f.rep() == Rep::space ? "space" : "frequency") +
                                " representation");
  }
}

}  // namespace

GridSpec::GridSpec(double box_length, int points) : L(box_length), M(points) {
  if (!(L > 0.0) || !std::isfinite(L)) throw std::invalid_argument("GridSpec: box length must be positive");
  if (M <= 0 || M % 2 != 0) throw std::invalid_argument("GridSpec: points per axis must be a positive even integer");
}

bool GridSpec::in_band(int a, int b) const {
  int wa = wavenumber(a), wb = wavenumber(b);
  return std::abs(wa) <= M / 2 - 1 && std::abs(wb) <= M / 2 - 1;
}

int GridSpec::padded() const {
  int P = 3 * M / 2;
  return P % 2 == 0 ? P : P + 1;
}

Field::Field(const GridSpec& g, Rep r) : grid_(g), rep_(r), v_(g.size(), cplx(0.0, 0.0)) {}

Field::Field(const GridSpec& g, Rep r, CVec values) : grid_(g), rep_(r), v_(std::move(values)) {
  if (v_.size() != g.size()) throw std::invalid_argument("Field: value count must equal M^2");
}

Field Field::from_function(const GridSpec& g, const std::function<cplx(double, double)>& fn) {
  Field f(g, Rep::space);
  for (int i = 0; i < g.M; ++i)
    for (int j = 0; j < g.M; ++j) f.at(i, j) = fn(g.x(i), g.x(j));
  return f;
}

void require_same_grid(const Field& a, const Field& b, const char* what) {
  if (a.grid() != b.grid()) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

Field& Field::operator+=(const Field& o) {
  require_same_grid(*this, o, "operator+=");
  if (o.rep_ != rep_) return *this += (rep_ == Rep::space ? inverse_transform(o) : transform(o));
  for (std::size_t n = 0; n < v_.size(); ++n) v_[n] += o.v_[n];
  return *this;
}

Field& Field::operator-=(const Field& o) {
  require_same_grid(*this, o, "operator-=");
  if (o.rep_ != rep_) return *this -= (rep_ == Rep::space ? inverse_transform(o) : transform(o));
  for (std::size_t n = 0; n < v_.size(); ++n) v_[n] -= o.v_[n];
  return *this;
}

Field& Field::operator*=(cplx s) {
  for (auto& z : v_) z *= s;
  return *this;
}

Field& Field::axpy(cplx a, const Field& x) {
  require_same_grid(*this, x, "axpy");
  if (x.rep_ != rep_) return axpy(a, rep_ == Rep::space ? inverse_transform(x) : transform(x));
  for (std::size_t n = 0; n < v_.size(); ++n) v_[n] += a * x.v_[n];
  return *this;
}

Field Field::real_part() const {
  Field r = *this;
  for (auto& z : r.v_) z = cplx(z.real(), 0.0);
  return r;
}

double Field::max_imag() const {
  Field s = rep_ == Rep::space ? *this : inverse_transform(*this);
  double m = 0.0;
  for (const auto& z : s.v_) m = std::max(m, std::abs(z.imag()));
  return m;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(cplx s, Field a) { return a *= s; }
Field operator-(Field a) { return a *= -1.0; }

void fft2_inplace(cplx* data, int M, int sign) {
  fftw_plan plan = plan_cache.get(M, sign);
  auto* p = reinterpret_cast<fftw_complex*>(data);
  if (fftw_alignment_of(reinterpret_cast<double*>(data)) == 0) {
    fftw_execute_dft(plan, p, p);
    return;
  }
  CVec tmp(data, data + static_cast<std::size_t>(M) * M);
  auto* q = reinterpret_cast<fftw_complex*>(tmp.data());
  fftw_execute_dft(plan, q, q);
  std::copy(tmp.begin(), tmp.end(), data);
}

Field transform(const Field& f) {
  check_rep(f, Rep::space, "transform");
  const auto& g = f.grid();
  CVec v = f.data();
  fft2_inplace(v.data(), g.M, FFTW_FORWARD);
  const double scale = g.L / (static_cast<double>(g.M) * g.M);
  for (int a = 0; a < g.M; ++a)
    for (int b = 0; b < g.M; ++b)
      v[static_cast<std::size_t>(a) * g.M + b] *= scale * parity(a + b);
  return Field(g, Rep::frequency, std::move(v));
}

Field inverse_transform(const Field& f) {
  check_rep(f, Rep::frequency, "inverse_transform");
  const auto& g = f.grid();
  CVec v = f.data();
  const double scale = 1.0 / g.L;
  for (int a = 0; a < g.M; ++a)
    for (int b = 0; b < g.M; ++b)
      v[static_cast<std::size_t>(a) * g.M + b] *= scale * parity(a + b);
  fft2_inplace(v.data(), g.M, FFTW_BACKWARD);
  return Field(g, Rep::space, std::move(v));
}

Field to_space(const Field& f) { return f.rep() == Rep::space ? f : inverse_transform(f); }
Field to_frequency(const Field& f) { return f.rep() == Rep::frequency ? f : transform(f); }

Field apply_multiplier(const Field& f, const Multiplier& m) {
  Field F = to_frequency(f);
  const auto& g = F.grid();
  const double dk = g.dk();
  for (int a = 0; a < g.M; ++a) {
    for (int b = 0; b < g.M; ++b) {
      cplx s = m(dk * g.wavenumber(a), dk * g.wavenumber(b));
      if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
        throw std::domain_error("apply_multiplier: non-finite multiplier value");
      F.at(a, b) *= s;
    }
  }
  return f.rep() == Rep::space ? inverse_transform(F) : F;
}

Field apply_symbol(const Field& f, const std::vector<double>& sym) {
  if (sym.size() != f.size()) throw std::invalid_argument("apply_symbol: symbol size mismatch");
  Field F = to_frequency(f);
  for (std::size_t n = 0; n < sym.size(); ++n) F[n] *= sym[n];
  return f.rep() == Rep::space ? inverse_transform(F) : F;
}

std::vector<double> radial_symbol(const GridSpec& g, const std::function<double(double)>& m) {
  std::vector<double> s(g.size());
  const double dk = g.dk();
  for (int a = 0; a < g.M; ++a)
    for (int b = 0; b < g.M; ++b) {
      double kx = dk * g.wavenumber(a), ky = dk * g.wavenumber(b);
      s[static_cast<std::size_t>(a) * g.M + b] = m(std::sqrt(kx * kx + ky * ky));
    }
  return s;
}

Field laplacian(const Field& f) {
  return apply_symbol(f, radial_symbol(f.grid(), [](double k) { return -k * k; }));
}

std::array<Field, 2> gradient(const Field& f) {
  Field F = to_frequency(f);
  const auto& g = F.grid();
  Field dx = F, dy = F;
  const double dk = g.dk();
  for (int a = 0; a < g.M; ++a)
    for (int b = 0; b < g.M; ++b) {
      int wa = g.wavenumber(a), wb = g.wavenumber(b);
      // odd symbol: drop the unpaired Nyquist lines
      bool nyq = (wa == -g.M / 2) || (wb == -g.M / 2);
      dx.at(a, b) *= nyq ? cplx(0.0) : cplx(0.0, dk * wa);
      dy.at(a, b) *= nyq ? cplx(0.0) : cplx(0.0, dk * wb);
    }
  if (f.rep() == Rep::space) return {inverse_transform(dx), inverse_transform(dy)};
  return {dx, dy};
}

Field bessel_inverse(const Field& f) {
  return apply_symbol(f, radial_symbol(f.grid(), [](double k) { return 1.0 / (1.0 + k * k); }));
}

Field bessel_potential(const Field& f, double s) {
  return apply_symbol(f, radial_symbol(f.grid(), [s](double k) { return std::pow(1.0 + k * k, 0.5 * s); }));
}

Field project_band(const Field& f) {
  Field F = to_frequency(f);
  const auto& g = F.grid();
  for (int a = 0; a < g.M; ++a)
    for (int b = 0; b < g.M; ++b)
      if (!g.in_band(a, b)) F.at(a, b) = 0.0;
  return F;
}

Field pad(const Field& f, int P) {
  Field F = to_frequency(f);
  const auto& g = F.grid();
  if (P < g.M || P % 2 != 0) throw std::invalid_argument("pad: target size must be even and not smaller");
  GridSpec gp(g.L, P);
  Field out(gp, Rep::frequency);
  for (int a = 0; a < g.M; ++a)
    for (int b = 0; b < g.M; ++b) {
      if (!g.in_band(a, b)) continue;
      int wa = g.wavenumber(a), wb = g.wavenumber(b);
      out.at((wa + P) % P, (wb + P) % P) = F.at(a, b);
    }
  return out;
}

Field truncate(const Field& F, const GridSpec& g) {
  Field Fr = to_frequency(F);
  const int P = Fr.grid().M;
  if (Fr.grid().L != g.L || P < g.M) throw std::invalid_argument("truncate: incompatible grids");
  Field out(g, Rep::frequency);
  for (int a = 0; a < g.M; ++a)
    for (int b = 0; b < g.M; ++b) {
      if (!g.in_band(a, b)) continue;
      int wa = g.wavenumber(a), wb = g.wavenumber(b);
      out.at(a, b) = Fr.at((wa + P) % P, (wb + P) % P);
    }
  return out;
}

Field product(const Field& f, const Field& g) {
  require_same_grid(f, g, "product");
  const int P = f.grid().padded();
  Field fs = inverse_transform(pad(f, P));
  Field gs = inverse_transform(pad(g, P));
  for (std::size_t n = 0; n < fs.size(); ++n) fs[n] *= gs[n];
  return truncate(transform(fs), f.grid());
}

Field pointwise_product(const Field& f, const Field& g) {
  require_same_grid(f, g, "pointwise_product");
  Field a = to_space(f);
  Field b = to_space(g);
  for (std::size_t n = 0; n < a.size(); ++n) a[n] *= b[n];
  return a;
}

cplx inner(const Field& f, const Field& g) {
  require_same_grid(f, g, "inner");
  if (f.rep() == Rep::frequency && g.rep() == Rep::frequency) {
    cplx s = 0.0;
    for (std::size_t n = 0; n < f.size(); ++n) s += f[n] * std::conj(g[n]);
    return s;
  }
  Field a = to_space(f), b = to_space(g);
  cplx s = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) s += a[n] * std::conj(b[n]);
  const double h = f.grid().h();
  return s * (h * h);
}

double norm_l2(const Field& f) {
  double s = 0.0;
  for (const auto& z : f.data()) s += std::norm(z);
  if (f.rep() == Rep::space) s *= f.grid().h() * f.grid().h();
  return std::sqrt(s);
}

double norm_lp(const Field& f, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("norm_lp: p must be in [1, inf]");
  Field s = to_space(f);
  if (std::isinf(p)) return norm_sup(s);
  double acc = 0.0;
  for (const auto& z : s.data()) acc += std::pow(std::abs(z), p);
  const double h = f.grid().h();
  return std::pow(acc * h * h, 1.0 / p);
}

double norm_sup(const Field& f) {
  Field s = to_space(f);
  double m = 0.0;
  for (const auto& z : s.data()) m = std::max(m, std::abs(z));
  return m;
}

double sobolev_norm(const Field& f, double s) {
  Field F = to_frequency(f);
  const auto& g = F.grid();
  const double dk = g.dk();
  double acc = 0.0;
  for (int a = 0; a < g.M; ++a)
    for (int b = 0; b < g.M; ++b) {
      double kx = dk * g.wavenumber(a), ky = dk * g.wavenumber(b);
      acc += std::pow(1.0 + kx * kx + ky * ky, s) * std::norm(F.at(a, b));
    }
  return std::sqrt(acc);
}

Field japanese_bracket(const GridSpec& g, double delta) {
  return Field::from_function(g, [delta](double x, double y) {
    return cplx(std::pow(1.0 + x * x + y * y, 0.5 * delta), 0.0);
  });
}

Field radius_squared(const GridSpec& g) {
  return Field::from_function(g, [](double x, double y) { return cplx(x * x + y * y, 0.0); });
}

WeightProfile::WeightProfile(const GridSpec& g, double d) : delta(d), values(japanese_bracket(g, d)) {}

double weighted_norm(const Field& f, double p, double s, double delta) {
  if (!(p >= 1.0)) throw std::invalid_argument("weighted_norm: p must lie in [1, inf]");
  if (s < 0.0) throw std::invalid_argument("weighted_norm: smoothness must be nonnegative");
  if (p != 2.0 && s != 0.0) throw std::invalid_argument("weighted_norm: smoothness s > 0 requires p = 2");
  Field w = delta == 0.0 ? to_space(f) : pointwise_product(f, japanese_bracket(f.grid(), delta));
  if (p == 2.0) return s == 0.0 ? norm_l2(w) : sobolev_norm(w, s);
  return norm_lp(w, p);
}

std::vector<char> window_mask(const GridSpec& g, double radius) {
  std::vector<char> m(g.size(), 0);
  for (int i = 0; i < g.M; ++i)
    for (int j = 0; j < g.M; ++j) {
      double x = g.x(i), y = g.x(j);
      m[static_cast<std::size_t>(i) * g.M + j] = (x * x + y * y <= radius * radius) ? 1 : 0;
    }
  return m;
}

}  // namespace anderson
