#ifndef APL_KERNELS_HPP_
#define APL_KERNELS_HPP_

#include <vector>

#include "apl/estimator.hpp"
#include "apl/scene.hpp"

// Data-parallel inner loops. Each kernel has a serial reference used by the
// tests and the benchmark; the parallel variant must return identical results.
namespace apl::kernels {

std::vector<double> score_hypotheses_serial(const std::vector<Hypothesis> &hyps,
                                            const Rendering &rendering,
                                            const NeighborIndex &model_index,
                                            double epsilon);
std::vector<double> score_hypotheses_parallel(
    const std::vector<Hypothesis> &hyps, const Rendering &rendering,
    const NeighborIndex &model_index, double epsilon);

VisibilityProfile visibility_profile_serial(const Scene &scene,
                                            const ViewGrid &grid,
                                            const Intrinsics &intrinsics);
VisibilityProfile visibility_profile_parallel(const Scene &scene,
                                              const ViewGrid &grid,
                                              const Intrinsics &intrinsics);

// Per-view Shannon entropy of visible mask areas.
std::vector<double> view_entropy_serial(const Scene &scene, const ViewGrid &grid,
                                        const Intrinsics &intrinsics);
std::vector<double> view_entropy_parallel(const Scene &scene,
                                          const ViewGrid &grid,
                                          const Intrinsics &intrinsics);

double mask_entropy(const Rendering &rendering);

}  // namespace apl::kernels

#endif  // APL_KERNELS_HPP_
