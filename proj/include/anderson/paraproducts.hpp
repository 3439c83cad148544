#pragma once

#include <memory>
#include <vector>

#include "anderson/littlewood_paley.hpp"
#include "anderson/spectral.hpp"

namespace anderson {

// Littlewood-Paley blocks of one field sampled on the padded grid
struct BlockStack {
  int P = 0;
  std::vector<CVec> blocks;  // index j + 1
};

// Bony products evaluated on the 3/2-padded grid and truncated to the band,
// so f<g + f o g + f>g equals the dealiased product exactly.
class ParaEngine {
 public:
  explicit ParaEngine(const GridSpec& g);
  explicit ParaEngine(std::shared_ptr<const DyadicPartition> part);

  const DyadicPartition& partition() const { return *part_; }
  const GridSpec& grid() const { return part_->grid(); }
  int top() const { return part_->top(); }

  BlockStack stack(const Field& f) const;
  CVec zeros() const;
  // acc += scale * (f < g), acc += scale * (f o g) on the padded grid
  void add_lt(const BlockStack& f, const BlockStack& g, CVec& acc, cplx scale = 1.0) const;
  void add_res(const BlockStack& f, const BlockStack& g, CVec& acc, cplx scale = 1.0) const;
  // padded accumulator -> band-limited frequency field
  Field finish(CVec acc) const;

  Field cut(const Field& f, CutMode mode, int N) const;

 private:
  std::shared_ptr<const DyadicPartition> part_;
  int P_ = 0;
  std::vector<std::size_t> src_, dst_;
  std::vector<double> phase_;
  std::vector<std::vector<double>> sym_;
};

Field para_lt(const Field& f, const Field& g, const ParaEngine& e);   // f < g
Field para_gt(const Field& f, const Field& g, const ParaEngine& e);   // f > g = g < f
Field resonant(const Field& f, const Field& g, const ParaEngine& e);  // f o g
Field para_leq(const Field& f, const Field& g, const ParaEngine& e);  // f < g + f o g
Field para_geq(const Field& f, const Field& g, const ParaEngine& e);  // f > g + f o g

// (f < g) o h - f (g o h)
Field commutator_C(const Field& f, const Field& g, const Field& h, const ParaEngine& e);
// (Delta_{>N}(f < g)) o h - f (g o h)
Field commutator_CN(const Field& f, const Field& g, const Field& h, int N, const ParaEngine& e);
// <f, h o g> - <f < g, h>
cplx bilinear_D(const Field& f, const Field& g, const Field& h, const ParaEngine& e);

}  // namespace anderson
