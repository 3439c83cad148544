#include "anderson/studies.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace anderson {

RenormFunction renorm_for(double eps, const ParaEngine& e, long mc_samples, std::uint64_t mc_seed0, int threads,
                          const DecompositionParams& params) {
  if (e.grid().M <= 64) return renorm_exact(eps, e, params, {}, false, 64, threads);
  return renorm_mc(eps, e, mc_samples, mc_seed0, params, {}, false, threads);
}

std::vector<const OperatorContext*> LadderContexts::pointers() const {
  std::vector<const OperatorContext*> p;
  for (const auto& c : ladder) p.push_back(&c);
  return p;
}

LadderContexts build_ladder(const NoiseRealization& Y, const std::vector<double>& ladder,
                            const std::vector<RenormFunction>& renorms, const RenormFunction* limit_renorm,
                            std::shared_ptr<const ParaEngine> e, const OperatorOptions& opt,
                            const DecompositionParams& params) {
  if (renorms.size() != ladder.size()) throw std::invalid_argument("build_ladder: one renormalization per ladder entry");
  LadderContexts lc;
  for (std::size_t i = 0; i < ladder.size(); ++i)
    lc.ladder.push_back(make_context(build_enhanced(Y, ladder[i], renorms[i], *e, params), e, opt));
  if (limit_renorm) lc.limit.push_back(make_context(build_enhanced(Y, 0.0, *limit_renorm, *e, params), e, opt));
  for (const auto& c : lc.ladder) lc.K = std::max(lc.K, c.shift());
  for (const auto& c : lc.limit) lc.K = std::max(lc.K, c.shift());
  for (auto& c : lc.ladder) c.set_shift(lc.K);
  for (auto& c : lc.limit) c.set_shift(lc.K);
  return lc;
}

std::vector<double> dyadic_ladder(int count, int first) {
  std::vector<double> l;
  for (int i = 0; i < count; ++i) l.push_back(std::ldexp(1.0, -(first + i)));
  return l;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

double linear_fit_r2(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3) throw std::invalid_argument("linear_fit_r2: need three or more points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (syy == 0.0) return 1.0;
  return sxy * sxy / (sxx * syy);
}

}  // namespace anderson
