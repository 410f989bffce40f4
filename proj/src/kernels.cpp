#include "apl/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "apl/fusion.hpp"

namespace apl {

namespace kernels {

std::vector<double> score_hypotheses_serial(const std::vector<Hypothesis> &hyps,
                                            const Rendering &rendering,
                                            const NeighborIndex &model_index,
                                            double epsilon) {
  std::vector<double> out(hyps.size());
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    out[i] = verification_score(hyps[i], rendering, model_index, epsilon);
  }
  return out;
}

std::vector<double> score_hypotheses_parallel(
    const std::vector<Hypothesis> &hyps, const Rendering &rendering,
    const NeighborIndex &model_index, double epsilon) {
  std::vector<double> out(hyps.size());
  const long n = static_cast<long>(hyps.size());
#pragma omp parallel for schedule(dynamic) num_threads(thread_count()) if (n > 4)
  for (long i = 0; i < n; ++i) {
    out[i] = verification_score(hyps[i], rendering, model_index, epsilon);
  }
  return out;
}

namespace {

VisibilityProfile finish_profile(std::vector<std::vector<double>> table,
                                 std::size_t n_obj) {
  VisibilityProfile profile;
  profile.table = std::move(table);
  for (std::size_t o = 0; o < n_obj; ++o) {
    double best = 0.0;
    for (const auto &row : profile.table) best = std::max(best, row[o]);
    if (best >= kDetectabilityThreshold) profile.detectable.push_back(o);
  }
  return profile;
}

}  // namespace

VisibilityProfile visibility_profile_serial(const Scene &scene,
                                            const ViewGrid &grid,
                                            const Intrinsics &intrinsics) {
  if (scene.size() == 0) return {};
  std::vector<std::vector<double>> table(grid.size());
  for (std::size_t v = 0; v < grid.size(); ++v) {
    table[v] = render(scene, grid, v, intrinsics).visibility;
  }
  return finish_profile(std::move(table), scene.size());
}

VisibilityProfile visibility_profile_parallel(const Scene &scene,
                                              const ViewGrid &grid,
                                              const Intrinsics &intrinsics) {
  if (scene.size() == 0) return {};
  std::vector<std::vector<double>> table(grid.size());
  const long n = static_cast<long>(grid.size());
#pragma omp parallel for schedule(dynamic) num_threads(thread_count())
  for (long v = 0; v < n; ++v) {
    table[v] = render(scene, grid, static_cast<std::size_t>(v), intrinsics).visibility;
  }
  return finish_profile(std::move(table), scene.size());
}

double mask_entropy(const Rendering &rendering) {
  double total = 0.0;
  for (const auto &m : rendering.masks) total += static_cast<double>(m.size());
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (const auto &m : rendering.masks) {
    if (m.empty()) continue;
    const double p = static_cast<double>(m.size()) / total;
    h -= p * std::log(p);
  }
  return h;
}

std::vector<double> view_entropy_serial(const Scene &scene, const ViewGrid &grid,
                                        const Intrinsics &intrinsics) {
  std::vector<double> out(grid.size());
  for (std::size_t v = 0; v < grid.size(); ++v) {
    out[v] = mask_entropy(render(scene, grid, v, intrinsics));
  }
  return out;
}

std::vector<double> view_entropy_parallel(const Scene &scene,
                                          const ViewGrid &grid,
                                          const Intrinsics &intrinsics) {
  std::vector<double> out(grid.size());
  const long n = static_cast<long>(grid.size());
#pragma omp parallel for schedule(dynamic) num_threads(thread_count())
  for (long v = 0; v < n; ++v) {
    out[v] = mask_entropy(render(scene, grid, static_cast<std::size_t>(v), intrinsics));
  }
  return out;
}

}  // namespace kernels
}  // namespace apl
