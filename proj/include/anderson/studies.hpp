#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "anderson/solvers.hpp"

namespace anderson {

// exact Wick sum when the full field is affordable (M <= 64), Monte Carlo otherwise
RenormFunction renorm_for(double eps, const ParaEngine& e, long mc_samples, std::uint64_t mc_seed0, int threads = 1,
                          const DecompositionParams& params = {});

// contexts for one noise realization along a ladder plus the eps = 0 limit, all sharing
// the largest calibrated shift
struct LadderContexts {
  std::vector<OperatorContext> ladder;
  std::vector<OperatorContext> limit;  // zero or one entry
  double K = 0.0;
  std::vector<const OperatorContext*> pointers() const;
  const OperatorContext& limit_context() const { return limit.at(0); }
};
LadderContexts build_ladder(const NoiseRealization& Y, const std::vector<double>& ladder,
                            const std::vector<RenormFunction>& renorms, const RenormFunction* limit_renorm,
                            std::shared_ptr<const ParaEngine> e, const OperatorOptions& opt = {},
                            const DecompositionParams& params = {});

// ladder 2^{-first}, ..., 2^{-(first+count-1)}
std::vector<double> dyadic_ladder(int count, int first = 1);
bool strictly_decreasing(const std::vector<double>& v);
// coefficient of determination of the least-squares line through (x, y)
double linear_fit_r2(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace anderson
