#include "anderson/paraproducts.hpp"

#include <algorithm>
#include <stdexcept>

namespace anderson {

ParaEngine::ParaEngine(const GridSpec& g) : ParaEngine(std::make_shared<const DyadicPartition>(g)) {}

ParaEngine::ParaEngine(std::shared_ptr<const DyadicPartition> part) : part_(std::move(part)) {
  const auto& g = part_->grid();
  P_ = g.padded();
  for (int a = 0; a < g.M; ++a)
    for (int b = 0; b < g.M; ++b) {
      if (!g.in_band(a, b)) continue;
      int wa = g.wavenumber(a), wb = g.wavenumber(b);
      src_.push_back(static_cast<std::size_t>(a) * g.M + b);
      dst_.push_back(static_cast<std::size_t>((wa + P_) % P_) * P_ + (wb + P_) % P_);
      phase_.push_back(((wa + wb) & 1) ? -1.0 : 1.0);
    }
  for (int j = -1; j <= part_->top(); ++j) {
    const auto& full = part_->block_symbol(j);
    std::vector<double> s(src_.size());
    for (std::size_t n = 0; n < src_.size(); ++n) s[n] = full[src_[n]];
    sym_.push_back(std::move(s));
  }
}

CVec ParaEngine::zeros() const { return CVec(static_cast<std::size_t>(P_) * P_, cplx(0.0)); }

BlockStack ParaEngine::stack(const Field& f) const {
  if (f.grid() != grid()) throw std::invalid_argument("paraproduct: grid mismatch");
  Field F = to_frequency(f);
  const double invL = 1.0 / grid().L;
  BlockStack s;
  s.P = P_;
  s.blocks.reserve(sym_.size());
  for (const auto& sym : sym_) {
    CVec buf = zeros();
    for (std::size_t n = 0; n < src_.size(); ++n) buf[dst_[n]] = sym[n] * phase_[n] * invL * F[src_[n]];
    fft2_inplace(buf.data(), P_, FFTW_BACKWARD);
    s.blocks.push_back(std::move(buf));
  }
  return s;
}

void ParaEngine::add_lt(const BlockStack& f, const BlockStack& g, CVec& acc, cplx scale) const {
  const std::size_t n = acc.size();
  const int nb = static_cast<int>(sym_.size());
  CVec low(n, cplx(0.0));
  // block j (stored at j + 1) pairs with the sum of blocks i <= j - 2
  for (int jj = 2; jj < nb; ++jj) {
    const auto& fi = f.blocks[jj - 2];
    for (std::size_t k = 0; k < n; ++k) low[k] += fi[k];
    const auto& gj = g.blocks[jj];
    for (std::size_t k = 0; k < n; ++k) acc[k] += scale * low[k] * gj[k];
  }
}

void ParaEngine::add_res(const BlockStack& f, const BlockStack& g, CVec& acc, cplx scale) const {
  const std::size_t n = acc.size();
  const int nb = static_cast<int>(sym_.size());
  for (int jj = 0; jj < nb; ++jj) {
    const auto& gj = g.blocks[jj];
    for (int ii = std::max(0, jj - 1); ii <= std::min(nb - 1, jj + 1); ++ii) {
      const auto& fi = f.blocks[ii];
      for (std::size_t k = 0; k < n; ++k) acc[k] += scale * fi[k] * gj[k];
    }
  }
}

Field ParaEngine::finish(CVec acc) const {
  fft2_inplace(acc.data(), P_, FFTW_FORWARD);
  const auto& g = grid();
  const double scale = g.L / (static_cast<double>(P_) * P_);
  Field out(g, Rep::frequency);
  for (std::size_t n = 0; n < src_.size(); ++n) out[src_[n]] = acc[dst_[n]] * (scale * phase_[n]);
  return out;
}

Field ParaEngine::cut(const Field& f, CutMode mode, int N) const {
  return cutoff(f, mode, N, *part_);
}

Field para_lt(const Field& f, const Field& g, const ParaEngine& e) {
  require_same_grid(f, g, "para_lt");
  CVec acc = e.zeros();
  e.add_lt(e.stack(f), e.stack(g), acc);
  return e.finish(std::move(acc));
}

Field para_gt(const Field& f, const Field& g, const ParaEngine& e) { return para_lt(g, f, e); }

Field resonant(const Field& f, const Field& g, const ParaEngine& e) {
  require_same_grid(f, g, "resonant");
  CVec acc = e.zeros();
  e.add_res(e.stack(f), e.stack(g), acc);
  return e.finish(std::move(acc));
}

Field para_leq(const Field& f, const Field& g, const ParaEngine& e) {
  require_same_grid(f, g, "para_leq");
  auto sf = e.stack(f), sg = e.stack(g);
  CVec acc = e.zeros();
  e.add_lt(sf, sg, acc);
  e.add_res(sf, sg, acc);
  return e.finish(std::move(acc));
}

Field para_geq(const Field& f, const Field& g, const ParaEngine& e) {
  require_same_grid(f, g, "para_geq");
  auto sf = e.stack(f), sg = e.stack(g);
  CVec acc = e.zeros();
  e.add_lt(sg, sf, acc);
  e.add_res(sf, sg, acc);
  return e.finish(std::move(acc));
}

Field commutator_C(const Field& f, const Field& g, const Field& h, const ParaEngine& e) {
  require_same_grid(f, g, "commutator_C");
  require_same_grid(f, h, "commutator_C");
  return resonant(para_lt(f, g, e), h, e) - product(f, resonant(g, h, e));
}

Field commutator_CN(const Field& f, const Field& g, const Field& h, int N, const ParaEngine& e) {
  require_same_grid(f, g, "commutator_CN");
  require_same_grid(f, h, "commutator_CN");
  return resonant(e.cut(para_lt(f, g, e), CutMode::gt, N), h, e) - product(f, resonant(g, h, e));
}

cplx bilinear_D(const Field& f, const Field& g, const Field& h, const ParaEngine& e) {
  return inner(to_frequency(f), resonant(h, g, e)) - inner(para_lt(f, g, e), to_frequency(h));
}

}  // namespace anderson
