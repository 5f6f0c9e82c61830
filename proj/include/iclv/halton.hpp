#pragma once

#include <Eigen/Dense>

namespace iclv {

// Deterministic quasi-random point set.  values(r, j) is point r in dimension
// j; every entry lies strictly inside (0,1) and the whole set is a pure
// function of (dimension, count, skip).
struct HaltonDraws {
    int dimension = 0;
    int count = 0;
    int skip = 0;
    Eigen::MatrixXd values;  // count x dimension
};

// Plain (unscrambled) Halton sequence with successive prime bases
// 2, 3, 5, ... per dimension.  The first `skip` points of the sequence are
// discarded; the default skip of 100 drops the strongly correlated leading
// points.  Dimensions above 20 are refused (throws std::invalid_argument) --
// plain Halton degrades badly in high dimensions and nothing here needs them.
HaltonDraws halton_sequence(int dimension, int count, int skip = 100);

// Radical inverse of index n (n >= 1) in the given base; the Halton workhorse.
double radical_inverse(long long n, int base);

}  // namespace iclv
