#include "iclv/profiles.hpp"

#include <cmath>
#include <stdexcept>

#include "iclv/errors.hpp"

namespace iclv {

namespace {
constexpr double kEarthRadiusKm = 6371.0088;  // IUGG mean radius

void check_same_schema(const IndividualProfile& a, const IndividualProfile& b) {
    if (a.names.size() != b.names.size()) {
        throw SchemaError("gower: profiles have different attribute counts");
    }
    for (size_t i = 0; i < a.names.size(); ++i) {
        if (a.names[i] != b.names[i] || a.types[i] != b.types[i]) {
            throw SchemaError("gower: attribute schema mismatch at '" + a.names[i] + "'");
        }
    }
}
}  // namespace

std::vector<double> attribute_ranges(const std::vector<IndividualProfile>& sample) {
    if (sample.empty()) return {};
    const size_t n_attr = sample.front().names.size();
    std::vector<double> lo(n_attr, 0.0), hi(n_attr, 0.0), out(n_attr, 0.0);
    std::vector<bool> seen(n_attr, false);
    for (const auto& p : sample) {
        check_same_schema(sample.front(), p);
        for (size_t i = 0; i < n_attr; ++i) {
            if (p.types[i] != AttrType::continuous) continue;
            const double v = p.values[i];
            if (!std::isfinite(v)) {
                throw SchemaError("attribute_ranges: non-finite value for '" + p.names[i] +
                                  "' (id " + p.id + ")");
            }
            if (!seen[i] || v < lo[i]) lo[i] = seen[i] ? std::min(lo[i], v) : v;
            if (!seen[i] || v > hi[i]) hi[i] = seen[i] ? std::max(hi[i], v) : v;
            seen[i] = true;
        }
    }
    for (size_t i = 0; i < n_attr; ++i) out[i] = seen[i] ? hi[i] - lo[i] : 0.0;
    return out;
}

double gower_dissimilarity(const IndividualProfile& a, const IndividualProfile& b,
                           const std::vector<double>& contribution_weights,
                           const std::vector<double>& ranges) {
    check_same_schema(a, b);
    const size_t n_attr = a.names.size();
    if (n_attr == 0) throw SchemaError("gower: profiles carry no attributes");
    if (!contribution_weights.empty() && contribution_weights.size() != n_attr) {
        throw SchemaError("gower: contribution weight count != attribute count");
    }
    if (ranges.size() != n_attr) {
        throw SchemaError("gower: range vector size != attribute count");
    }

    double wsum = 0.0;
    double acc = 0.0;
    for (size_t i = 0; i < n_attr; ++i) {
        const double w = contribution_weights.empty() ? 1.0 : contribution_weights[i];
        if (w < 0.0) throw std::invalid_argument("gower: negative contribution weight");
        if (w == 0.0) continue;
        double contrib;
        if (a.types[i] == AttrType::continuous) {
            // range-normalized Manhattan contribution; degenerate range -> 0
            contrib = (ranges[i] > 0.0)
                          ? std::min(std::fabs(a.values[i] - b.values[i]) / ranges[i], 1.0)
                          : 0.0;
        } else {
            // Dice mismatch for a single categorical: 0 if same level, else 1
            contrib = (a.labels[i] == b.labels[i]) ? 0.0 : 1.0;
        }
        acc += w * contrib;
        wsum += w;
    }
    if (wsum <= 0.0) {
        throw std::invalid_argument("gower: all contribution weights are zero");
    }
    return acc / wsum;
}

double geodesic_distance(double lat1, double lon1, double lat2, double lon2) {
    for (double lat : {lat1, lat2}) {
        if (!(std::fabs(lat) <= 90.0)) {
            throw std::domain_error("geodesic_distance: latitude outside [-90, 90]");
        }
    }
    for (double lon : {lon1, lon2}) {
        if (!(std::fabs(lon) <= 180.0)) {
            throw std::domain_error("geodesic_distance: longitude outside [-180, 180]");
        }
    }
    const double deg = M_PI / 180.0;
    const double dphi = (lat2 - lat1) * deg;
    const double dlam = (lon2 - lon1) * deg;
    const double s1 = std::sin(0.5 * dphi);
    const double s2 = std::sin(0.5 * dlam);
    const double h = s1 * s1 + std::cos(lat1 * deg) * std::cos(lat2 * deg) * s2 * s2;
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

}  // namespace iclv
