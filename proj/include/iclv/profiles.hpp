#pragma once

#include <string>
#include <vector>

namespace iclv {

enum class AttrType { continuous, categorical };

// One individual's mixed-type attribute record plus optional home-location
// centroid.  All profiles in a sample must share the same attribute schema
// (names and types, in order).
struct IndividualProfile {
    std::string id;
    bool has_centroid = false;
    double lat = 0.0;  // degrees
    double lon = 0.0;  // degrees
    std::vector<std::string> names;
    std::vector<AttrType> types;
    std::vector<double> values;          // used where types[i] == continuous
    std::vector<std::string> labels;     // used where types[i] == categorical
};

// Per-attribute max-min over the sample (0 for categorical slots).  Gower
// continuous contributions are normalized by these ranges.
std::vector<double> attribute_ranges(const std::vector<IndividualProfile>& sample);

// Gower dissimilarity in [0,1]: weighted mean of per-attribute contributions,
// range-normalized absolute difference for continuous attributes and the Dice
// mismatch indicator (0 same / 1 different) for categorical ones.  A
// zero-range attribute contributes 0.  `contribution_weights` empty means
// equal weights; otherwise one non-negative weight per attribute with at
// least one positive.  Throws SchemaError on schema mismatch and
// std::invalid_argument on degenerate weights.
double gower_dissimilarity(const IndividualProfile& a, const IndividualProfile& b,
                           const std::vector<double>& contribution_weights,
                           const std::vector<double>& ranges);

// Great-circle (haversine) distance in kilometers on the mean-Earth sphere.
// Throws std::domain_error for coordinates outside |lat|<=90, |lon|<=180.
double geodesic_distance(double lat1, double lon1, double lat2, double lon2);

}  // namespace iclv
