#include "iclv/halton.hpp"

#include <array>
#include <stdexcept>

namespace iclv {

namespace {
constexpr std::array<int, 20> kPrimes = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                                         31, 37, 41, 43, 47, 53, 59, 61, 67, 71};
}

double radical_inverse(long long n, int base) {
    double inv_base = 1.0 / base;
    double scale = inv_base;
    double value = 0.0;
    while (n > 0) {
        value += static_cast<double>(n % base) * scale;
        n /= base;
        scale *= inv_base;
    }
    return value;
}

HaltonDraws halton_sequence(int dimension, int count, int skip) {
    if (dimension < 1 || dimension > static_cast<int>(kPrimes.size())) {
        throw std::invalid_argument("halton_sequence: unsupported dimension " +
                                    std::to_string(dimension) + " (supported: 1..20)");
    }
    if (count < 1) throw std::invalid_argument("halton_sequence: count must be >= 1");
    if (skip < 0) throw std::invalid_argument("halton_sequence: skip must be >= 0");

    HaltonDraws out;
    out.dimension = dimension;
    out.count = count;
    out.skip = skip;
    out.values.resize(count, dimension);
    for (int j = 0; j < dimension; ++j) {
        const int base = kPrimes[static_cast<size_t>(j)];
        for (int r = 0; r < count; ++r) {
            // Index starts at 1 so the value 0 never appears.
            out.values(r, j) = radical_inverse(static_cast<long long>(skip) + 1 + r, base);
        }
    }
    return out;
}

}  // namespace iclv
