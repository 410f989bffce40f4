#ifndef APL_METRICS_HPP_
#define APL_METRICS_HPP_

#include <optional>
#include <vector>

#include "apl/fusion.hpp"

namespace apl {

inline constexpr int kSymmetrySteps = 72;           // 5 degree steps
inline constexpr double kUndetectedPenalty = 50.0;  // mm
inline constexpr double kCorrectFraction = 0.1;     // of the model diameter

// Average distance of model points. For models with a symmetry axis, the
// minimum over kSymmetrySteps rotations of `est` about that axis.
double e_add(const Pose6D &est, const Pose6D &gt, const ObjectModel &model);
double e_add_plain(const Pose6D &est, const Pose6D &gt, const ObjectModel &model);

struct MatchResult {
  // Parallel to the detectable list: matched selected index and its e_ADD.
  std::vector<std::optional<std::size_t>> match;
  std::vector<double> error;  // e_ADD, or the penalty when unmatched
};

// Greedy one-to-one assignment of selected hypotheses to detectable objects by
// ascending e_ADD. Only pairs with e_ADD below `penalty` are eligible.
MatchResult match_estimate(const SceneEstimate &estimate, const Scene &scene,
                           const std::vector<std::size_t> &detectable,
                           double penalty = kUndetectedPenalty);

// Matched objects with e_ADD < fraction * diameter over |detectable|.
double detection_rate(const MatchResult &match, const ObjectModel &model,
                      double fraction = kCorrectFraction);
double detection_rate(const SceneEstimate &estimate, const Scene &scene,
                      const std::vector<std::size_t> &detectable,
                      double fraction = kCorrectFraction);

// Best e_ADD among selected entries whose hidden ground-truth index is
// `object`, capped at `penalty`; the penalty when there is none.
double object_error(const SceneEstimate &estimate, const Scene &scene,
                    std::size_t object, double penalty = kUndetectedPenalty);

}  // namespace apl

#endif  // APL_METRICS_HPP_
