#pragma once

#include <Eigen/Sparse>
#include <vector>

#include "iclv/profiles.hpp"

namespace iclv {

enum class TieMetric { gower, spatial };

// Row-stochastic directed k-nearest-tie matrix.  Every row holds exactly k
// ties (fewer only when Q-1 < k), w_qq = 0, weights >= 0 and summing to 1.
struct WeightMatrix {
    int q = 0;
    int k = 0;
    // per row, (neighbor index, weight), sorted by neighbor index
    std::vector<std::vector<std::pair<int, double>>> ties;

    Eigen::SparseMatrix<double> sparse() const;  // q x q, row-major content
    double row_sum(int row) const;
};

// Select the k most similar (gower) or nearest (spatial) others per
// individual, weight them by (1 - gower) or 1/max(distance, 0.1 km), and
// row-normalize.  Distance ties at the k-th neighbor break by ascending
// individual position (input order), making builds deterministic.  Raw
// similarity weights are floored at 1e-12 so a selected tie never vanishes
// from the sparsity structure.  `contribution_weights` empty = equal.
WeightMatrix build_weight_matrix(const std::vector<IndividualProfile>& profiles,
                                 TieMetric metric, int k,
                                 const std::vector<double>& contribution_weights = {});

}  // namespace iclv
