#include "iclv/pairs.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace iclv {

std::vector<std::pair<int, int>> enumerate_pairs(const WeightMatrix& w) {
    std::set<std::pair<int, int>> seen;
    for (int q = 0; q < w.q; ++q) {
        for (const auto& [nbr, wt] : w.ties[q]) {
            (void)wt;
            if (nbr == q) continue;
            seen.emplace(std::min(q, nbr), std::max(q, nbr));
        }
    }
    return {seen.begin(), seen.end()};
}

std::vector<int> pair_degrees(const std::vector<std::pair<int, int>>& pairs,
                              int n_individuals) {
    std::vector<int> deg(static_cast<size_t>(n_individuals), 0);
    for (const auto& [a, b] : pairs) {
        if (a < 0 || b < 0 || a >= n_individuals || b >= n_individuals)
            throw std::invalid_argument("pair index out of range");
        ++deg[static_cast<size_t>(a)];
        ++deg[static_cast<size_t>(b)];
    }
    return deg;
}

Eigen::MatrixXd selection_pair(int a, int b, int n_individuals, int block_dim) {
    if (a == b || a < 0 || b < 0 || a >= n_individuals || b >= n_individuals)
        throw std::invalid_argument("selection_pair: bad individual indices");
    Eigen::MatrixXd d =
        Eigen::MatrixXd::Zero(2 * block_dim, n_individuals * block_dim);
    d.block(0, a * block_dim, block_dim, block_dim).setIdentity();
    d.block(block_dim, b * block_dim, block_dim, block_dim).setIdentity();
    return d;
}

Eigen::MatrixXd selection_regroup(int n_indicators, int n_tasks,
                                  int n_alternatives) {
    const int h = n_indicators;
    const int tr = n_tasks * (n_alternatives - 1);
    const int db = h + tr;
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(2 * db, 2 * db);
    p.block(0, 0, h, h).setIdentity();            // ordinals of a
    p.block(h, db, h, h).setIdentity();           // ordinals of b
    p.block(2 * h, h, tr, tr).setIdentity();      // tasks of a
    p.block(2 * h + tr, db + h, tr, tr).setIdentity();  // tasks of b
    return p;
}

Eigen::MatrixXd selection_ordinals(int n_indicators, int n_tasks,
                                   int n_alternatives) {
    const int h = n_indicators;
    const int db = h + n_tasks * (n_alternatives - 1);
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(2 * h, 2 * db);
    v.block(0, 0, h, h).setIdentity();
    v.block(h, db, h, h).setIdentity();
    return v;
}

Eigen::MatrixXd selection_ordinal_task(int h, int t, int n_indicators,
                                       int n_tasks, int n_alternatives) {
    const int nh = n_indicators;
    const int ni = n_alternatives;
    const int db = nh + n_tasks * (ni - 1);
    if (h < 0 || h >= 2 * nh || t < 0 || t >= 2 * n_tasks)
        throw std::invalid_argument("selection_ordinal_task: index out of range");
    // Operates on the REGROUPED layout [ord_a, ord_b, task_a, task_b].
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(ni, 2 * db);
    m(0, h) = 1.0;
    m.block(1, 2 * nh + t * (ni - 1), ni - 1, ni - 1).setIdentity();
    return m;
}

Eigen::MatrixXd selection_task_pair(int t, int tp, int n_indicators,
                                    int n_tasks, int n_alternatives) {
    const int nh = n_indicators;
    const int ni = n_alternatives;
    const int db = nh + n_tasks * (ni - 1);
    if (t < 0 || tp < 0 || t >= 2 * n_tasks || tp >= 2 * n_tasks || t == tp)
        throw std::invalid_argument("selection_task_pair: bad task indices");
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(2 * (ni - 1), 2 * db);
    e.block(0, 2 * nh + t * (ni - 1), ni - 1, ni - 1).setIdentity();
    e.block(ni - 1, 2 * nh + tp * (ni - 1), ni - 1, ni - 1).setIdentity();
    return e;
}

}  // namespace iclv
