#include "iclv/weight_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "iclv/errors.hpp"

namespace iclv {

Eigen::SparseMatrix<double> WeightMatrix::sparse() const {
    std::vector<Eigen::Triplet<double>> trip;
    for (int r = 0; r < q; ++r)
        for (const auto& [c, w] : ties[r]) trip.emplace_back(r, c, w);
    Eigen::SparseMatrix<double> m(q, q);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

double WeightMatrix::row_sum(int row) const {
    double s = 0.0;
    for (const auto& [c, w] : ties[row]) s += w;
    return s;
}

WeightMatrix build_weight_matrix(const std::vector<IndividualProfile>& profiles,
                                 TieMetric metric, int k,
                                 const std::vector<double>& contribution_weights) {
    const int q = static_cast<int>(profiles.size());
    if (q < 2) throw std::invalid_argument("need at least two individuals to form ties");
    if (k < 1) throw std::invalid_argument("tie count k must be positive");
    const int kk = std::min(k, q - 1);  // a row can hold at most Q-1 ties

    std::vector<double> ranges;
    if (metric == TieMetric::gower) {
        ranges = attribute_ranges(profiles);
    } else {
        for (const auto& p : profiles)
            if (!p.has_centroid)
                throw SchemaError("individual '" + p.id +
                                  "' lacks coordinates required by the spatial metric");
    }

    WeightMatrix out;
    out.q = q;
    out.k = k;
    out.ties.resize(q);

    // (dissimilarity, candidate index); partial sort keeps the kk smallest,
    // breaking distance ties by ascending individual id so builds are
    // deterministic regardless of input order
    std::vector<std::pair<double, int>> cand;
    cand.reserve(q - 1);
    auto closer = [&profiles](const std::pair<double, int>& a,
                              const std::pair<double, int>& b) {
        if (a.first != b.first) return a.first < b.first;
        if (profiles[a.second].id != profiles[b.second].id)
            return profiles[a.second].id < profiles[b.second].id;
        return a.second < b.second;
    };
    for (int i = 0; i < q; ++i) {
        cand.clear();
        for (int j = 0; j < q; ++j) {
            if (j == i) continue;
            double d = (metric == TieMetric::gower)
                           ? gower_dissimilarity(profiles[i], profiles[j],
                                                 contribution_weights, ranges)
                           : geodesic_distance(profiles[i].lat, profiles[i].lon,
                                               profiles[j].lat, profiles[j].lon);
            cand.emplace_back(d, j);
        }
        std::partial_sort(cand.begin(), cand.begin() + kk, cand.end(), closer);

        auto& row = out.ties[i];
        row.reserve(kk);
        double total = 0.0;
        for (int n = 0; n < kk; ++n) {
            const auto [d, j] = cand[n];
            double w;
            if (metric == TieMetric::gower) {
                // similarity weight; floor keeps a selected tie structurally
                // present even for a maximally dissimilar pair
                w = std::max(1.0 - d, 1e-12);
            } else {
                // inverse distance, capped below 0.1 km so co-located
                // individuals do not produce unbounded weights
                w = 1.0 / std::max(d, 0.1);
            }
            row.emplace_back(j, w);
            total += w;
        }
        for (auto& [j, w] : row) w /= total;
        std::sort(row.begin(), row.end());
    }
    return out;
}

}  // namespace iclv
