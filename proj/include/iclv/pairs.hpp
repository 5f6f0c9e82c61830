#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "iclv/weight_matrix.hpp"

namespace iclv {

// Undirected pair list over which the composite likelihood is summed: the
// union of every individual's tie list, deduplicated so a mutual tie (a ties
// b AND b ties a) contributes one pair. Pairs are stored (low, high) and
// sorted lexicographically, which fixes the accumulation order of the
// likelihood sum.
std::vector<std::pair<int, int>> enumerate_pairs(const WeightMatrix& w);

// Number of pairs each individual appears in. Used to weight score windows
// when assembling the variability matrix of the sandwich covariance.
std::vector<int> pair_degrees(const std::vector<std::pair<int, int>>& pairs,
                              int n_individuals);

// Dense selection matrices mirroring the blockwise pair-extraction algebra.
// Production code slices blocks directly; these exist so tests can run the
// literal matrix pipeline and diff it against the optimized path.
//
// Layout reminder: one individual's differenced block stacks H ordinal rows
// followed by T*(I-1) differenced task rows, db = H + T*(I-1) rows total.

// 2db x (n_individuals*db): picks the stacked blocks of individuals a and b
// out of the full differenced system.
Eigen::MatrixXd selection_pair(int a, int b, int n_individuals, int block_dim);

// 2db x 2db permutation that regroups a stacked pair [ord_a, task_a, ord_b,
// task_b] into [ord_a, ord_b, task_a, task_b]: all 2H ordinal rows first,
// then all 2T*(I-1) task rows.
Eigen::MatrixXd selection_regroup(int n_indicators, int n_tasks,
                                  int n_alternatives);

// 2H x 2db: ordinal rows only, in regrouped order (a's H rows then b's).
Eigen::MatrixXd selection_ordinals(int n_indicators, int n_tasks,
                                   int n_alternatives);

// I x 2db: pairs regrouped ordinal row h (0..2H-1) with regrouped task t
// (0..2T-1); row 0 selects the ordinal, rows 1..I-1 the task's differences.
Eigen::MatrixXd selection_ordinal_task(int h, int t, int n_indicators,
                                       int n_tasks, int n_alternatives);

// 2(I-1) x 2db: stacks regrouped tasks t and tp (both 0..2T-1, t != tp).
Eigen::MatrixXd selection_task_pair(int t, int tp, int n_indicators,
                                    int n_tasks, int n_alternatives);

}  // namespace iclv
