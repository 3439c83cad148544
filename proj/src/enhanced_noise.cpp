#include "anderson/enhanced_noise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "anderson/parallel.hpp"

namespace anderson {

double RenormFunction::at_center() const {
  Field s = to_space(c);
  const int m = c.grid().M / 2;  // x(M/2) = 0
  return s.at(m, m).real();
}

RenormFunction zero_renorm(const GridSpec& g, double eps) {
  RenormFunction r;
  r.c = Field(g, Rep::frequency);
  r.eps = eps;
  r.method = "none";
  return r;
}

std::uint64_t mc_seed(std::uint64_t seed0, long i) {
  return mix64(seed0 * 0x100000001b3ULL + static_cast<std::uint64_t>(i));
}

namespace {

struct Mode {
  int a, b;
  double weight;  // 2 for a Hermitian pair, 1 for the zero mode
};

// real part of sum_{|i-j|<=1} Delta_i a conj(Delta_j b) on the padded grid
void add_resonant_real(const BlockStack& A, const BlockStack& B, std::vector<double>& acc, double w) {
  const int nb = static_cast<int>(A.blocks.size());
  const std::size_t n = acc.size();
  CVec s(n);
  for (int i = 0; i < nb; ++i) {
    std::fill(s.begin(), s.end(), cplx(0.0));
    for (int j = std::max(0, i - 1); j <= std::min(nb - 1, i + 1); ++j)
      for (std::size_t x = 0; x < n; ++x) s[x] += B.blocks[j][x];
    const auto& ai = A.blocks[i];
    for (std::size_t x = 0; x < n; ++x) acc[x] += w * (ai[x].real() * s[x].real() + ai[x].imag() * s[x].imag());
  }
}

Field xi_of(const Field& Y_eps, const DecompositionParams& params, const DyadicPartition& part, bool trivial) {
  return trivial ? to_frequency(Y_eps) : xi_map(Y_eps, params, part);
}


std::vector<Mode> active_modes(const GridSpec& g, double eps, const MollifierSigma& sigma) {
  std::vector<Mode> modes;
  for (int a = 0; a < g.M; ++a)
    for (int b = 0; b < g.M; ++b) {
      if (!g.in_band(a, b)) continue;
      int wa = g.wavenumber(a), wb = g.wavenumber(b);
      if (!(wa > 0 || (wa == 0 && wb >= 0))) continue;
      double k = g.dk() * std::hypot(wa, wb);
      if (eps > 0.0 && sigma(eps * k) == 0.0) continue;
      modes.push_back({a, b, (wa == 0 && wb == 0) ? 1.0 : 2.0});
    }
  return modes;
}

// the xi map applied to one mollified noise mode: sum_n theta_n(k) w_n e_k, projected to the band
class ModeImage {
 public:
  ModeImage(const DyadicPartition& part, const DecompositionParams& params, double eps, const MollifierSigma& sigma,
            bool trivial)
      : g_(part.grid()), eps_(eps), sigma_(sigma), trivial_(trivial) {
    if (!trivial)
      for (int n = 1; n <= part.weight_count(); ++n) {
        int Ln = params.cut(n);
        if (Ln > part.top()) continue;
        theta_.push_back(part.cutoff_symbol(CutMode::ge, Ln));
        weights_.push_back(&part.weight(n));
      }
  }

  Field operator()(const Mode& md) const {
    const std::size_t idx = static_cast<std::size_t>(md.a) * g_.M + md.b;
    double k = g_.dk() * std::hypot(g_.wavenumber(md.a), g_.wavenumber(md.b));
    Field ek(g_, Rep::frequency);
    ek[idx] = eps_ > 0.0 ? sigma_(eps_ * k) : 1.0;
    if (trivial_) return ek;
    Field e_space = inverse_transform(ek);
    Field acc(g_, Rep::space);
    for (std::size_t n = 0; n < theta_.size(); ++n) {
      const double th = theta_[n][idx];
      if (th == 0.0) continue;
      const Field& w = *weights_[n];
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += th * w[i].real() * e_space[i];
    }
    return project_band(acc);
  }

 private:
  GridSpec g_;
  double eps_;
  MollifierSigma sigma_;
  bool trivial_;
  std::vector<std::vector<double>> theta_;
  std::vector<const Field*> weights_;
};

}  // namespace

RenormFunction renorm_exact(double eps, const ParaEngine& e, const DecompositionParams& params,
                            const MollifierSigma& sigma, bool trivial_weights, int max_M, int threads) {
  const GridSpec& g = e.grid();
  if (g.M > max_M)
    throw std::invalid_argument("renorm_exact: grid M = " + std::to_string(g.M) + " exceeds the exact-sum limit " +
                                std::to_string(max_M) + "; use renorm_mc");
  if (eps < 0.0) throw std::invalid_argument("renorm_exact: eps must be nonnegative");
  const auto modes = active_modes(g, eps, sigma);
  const ModeImage image(e.partition(), params, eps, sigma, trivial_weights);

  const int P = e.stack(Field(g, Rep::frequency)).P;
  const std::size_t chunks = std::min<std::size_t>(modes.size(), 64);
  std::vector<std::vector<double>> partial(chunks);
  parallel_for(chunks, threads, [&](std::size_t c) {
    std::vector<double> acc(static_cast<std::size_t>(P) * P, 0.0);
    for (std::size_t m = c; m < modes.size(); m += chunks) {
      Field a = image(modes[m]);
      Field b = bessel_inverse(a);
      add_resonant_real(e.stack(a), e.stack(b), acc, modes[m].weight);
    }
    partial[c] = std::move(acc);
  });

  CVec total = e.zeros();
  for (std::size_t x = 0; x < total.size(); ++x) {
    CompensatedSum s;
    for (const auto& p : partial) s.add(p[x]);
    total[x] = s.value();
  }
  RenormFunction r;
  r.c = e.finish(std::move(total));
  r.eps = eps;
  r.method = "exact";
  return r;
}

double renorm_exact_point(double eps, const ParaEngine& e, int i, int j, const DecompositionParams& params,
                          const MollifierSigma& sigma, bool trivial_weights, int threads) {
  const GridSpec& g = e.grid();
  const auto& part = e.partition();
  if (i < 0 || j < 0 || i >= g.M || j >= g.M) throw std::out_of_range("renorm_exact_point: lattice index");
  if (eps < 0.0) throw std::invalid_argument("renorm_exact_point: eps must be nonnegative");
  const auto modes = active_modes(g, eps, sigma);
  const ModeImage image(part, params, eps, sigma, trivial_weights);

  // nonzero block symbols per frequency index, and the evaluation phase e^{i q.x}/L
  struct Entry {
    std::size_t q;
    int block;
    double rho;
  };
  std::vector<Entry> entries;
  std::vector<cplx> phase(g.size());
  std::vector<double> bessel(g.size());
  const double x = g.x(i), y = g.x(j);
  for (int a = 0; a < g.M; ++a)
    for (int b = 0; b < g.M; ++b) {
      const std::size_t q = static_cast<std::size_t>(a) * g.M + b;
      const double kx = g.dk() * g.wavenumber(a), ky = g.dk() * g.wavenumber(b);
      phase[q] = std::exp(cplx(0.0, kx * x + ky * y)) / g.L;
      bessel[q] = 1.0 / (1.0 + kx * kx + ky * ky);
      if (!g.in_band(a, b)) continue;
      for (int bl = -1; bl <= part.top(); ++bl) {
        double r = part.block_symbol(bl)[q];
        if (r != 0.0) entries.push_back({q, bl + 1, r});
      }
    }

  const int nb = part.count();
  const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(modes.size(), 64));
  std::vector<CompensatedSum> partial(chunks);
  parallel_for(chunks, threads, [&](std::size_t c) {
    std::vector<cplx> A(nb), B(nb);
    for (std::size_t m = c; m < modes.size(); m += chunks) {
      Field a = image(modes[m]);
      std::fill(A.begin(), A.end(), cplx(0.0));
      std::fill(B.begin(), B.end(), cplx(0.0));
      for (const auto& en : entries) {
        cplx v = en.rho * a[en.q] * phase[en.q];
        A[en.block] += v;
        B[en.block] += bessel[en.q] * v;
      }
      double s = 0.0;
      for (int u = 0; u < nb; ++u)
        for (int v = std::max(0, u - 1); v <= std::min(nb - 1, u + 1); ++v) s += (A[u] * std::conj(B[v])).real();
      partial[c].add(modes[m].weight * s);
    }
  });
  CompensatedSum tot;
  for (const auto& p : partial) tot.add(p.value());
  return tot.value();
}

RenormFunction renorm_mc(double eps, const ParaEngine& e, long samples, std::uint64_t seed0,
                         const DecompositionParams& params, const MollifierSigma& sigma, bool trivial_weights,
                         int threads) {
  if (samples < 1) throw std::invalid_argument("renorm_mc: need at least one sample");
  const GridSpec& g = e.grid();
  const std::size_t n = g.size();
  const long chunk = 16;
  const std::size_t nchunks = static_cast<std::size_t>((samples + chunk - 1) / chunk);

  struct Stats {
    double count = 0;
    std::vector<double> mean, m2;
  };
  std::vector<Stats> st(nchunks);
  parallel_for(nchunks, threads, [&](std::size_t c) {
    Stats s;
    s.mean.assign(n, 0.0);
    s.m2.assign(n, 0.0);
    for (long i = static_cast<long>(c) * chunk; i < std::min<long>(samples, (c + 1) * chunk); ++i) {
      Field Y = mollify(sample_white_noise(g, mc_seed(seed0, i)), eps, sigma);
      Field xi = xi_of(Y, params, e.partition(), trivial_weights);
      Field r = to_space(resonant(xi, bessel_inverse(xi), e));
      s.count += 1;
      for (std::size_t x = 0; x < n; ++x) {
        double v = r[x].real(), d = v - s.mean[x];
        s.mean[x] += d / s.count;
        s.m2[x] += d * (v - s.mean[x]);
      }
    }
    st[c] = std::move(s);
  });

  // pairwise merge in chunk order
  Stats tot = std::move(st[0]);
  for (std::size_t c = 1; c < nchunks; ++c) {
    const Stats& b = st[c];
    double na = tot.count, nb = b.count, nn = na + nb;
    for (std::size_t x = 0; x < n; ++x) {
      double d = b.mean[x] - tot.mean[x];
      tot.mean[x] += d * nb / nn;
      tot.m2[x] += b.m2[x] + d * d * na * nb / nn;
    }
    tot.count = nn;
  }

  RenormFunction r;
  Field mean(g, Rep::space), se(g, Rep::space);
  for (std::size_t x = 0; x < n; ++x) {
    mean[x] = tot.mean[x];
    se[x] = samples > 1 ? std::sqrt(tot.m2[x] / (samples - 1) / samples) : kInf;
  }
  r.c = project_band(mean);
  r.stderr_c = se;
  r.eps = eps;
  r.method = "mc";
  r.samples = samples;
  return r;
}

EnhancedNoise enhanced_from_xi(const Field& xi, const Field& c, const ParaEngine& e) {
  EnhancedNoise en;
  en.xi = to_frequency(xi);
  en.X = bessel_inverse(en.xi);
  en.c = to_frequency(c);
  en.Xi2 = resonant(en.xi, en.X, e) - en.c;
  en.eta = Field(xi.grid(), Rep::frequency);
  return en;
}

EnhancedNoise build_enhanced(const NoiseRealization& noise, double eps, const RenormFunction& c,
                             const ParaEngine& e, const DecompositionParams& params, const MollifierSigma& sigma) {
  if (noise.grid != e.grid() || c.c.grid() != e.grid()) throw std::invalid_argument("build_enhanced: grid mismatch");
  Field Y = mollify(noise, eps, sigma);
  auto d = decompose(Y, params, e.partition());
  EnhancedNoise en = enhanced_from_xi(d.xi, c.c, e);
  en.eta = d.eta;
  en.eps = eps;
  en.seed = noise.seed;
  en.renorm = c.method;
  return en;
}

std::vector<ConvergenceRow> convergence_study(std::uint64_t seed, const std::vector<double>& ladder,
                                              const std::vector<RenormFunction>& renorms, const ParaEngine& e,
                                              const ConvergenceOptions& opt) {
  if (ladder.size() < 3) throw std::invalid_argument("convergence_study: ladder shorter than 3");
  if (renorms.size() != ladder.size())
    throw std::invalid_argument("convergence_study: one renormalization per ladder entry required");
  auto noise = sample_white_noise(e.grid(), seed);
  const auto& part = e.partition();
  std::vector<EnhancedNoise> en;
  for (std::size_t i = 0; i < ladder.size(); ++i)
    en.push_back(build_enhanced(noise, ladder[i], renorms[i], e, opt.params, opt.sigma));
  std::vector<ConvergenceRow> rows;
  for (std::size_t i = 0; i + 1 < ladder.size(); ++i) {
    ConvergenceRow r;
    r.eps = ladder[i];
    r.eps_next = ladder[i + 1];
    r.seed = seed;
    r.xi_diff = besov_norm(en[i].xi - en[i + 1].xi, opt.alpha, kInf, kInf, 0.0, part, opt.window);
    r.xi2_diff = besov_norm(en[i].Xi2 - en[i + 1].Xi2, 2 * opt.alpha + 2, kInf, kInf, 0.0, part, opt.window);
    rows.push_back(r);
  }
  return rows;
}

bool cauchy_decrease(const std::vector<ConvergenceRow>& rows, double factor) {
  for (std::size_t i = 0; i + 1 < rows.size(); ++i)
    if (!(rows[i].xi2_diff >= factor * rows[i + 1].xi2_diff)) return false;
  return true;
}

}  // namespace anderson
