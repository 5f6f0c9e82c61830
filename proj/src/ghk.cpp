#include "iclv/ghk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "iclv/errors.hpp"
#include "iclv/normal.hpp"

namespace iclv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_spec(const MvnSpec& spec, const Eigen::VectorXd& upper) {
    const auto d = spec.mean.size();
    if (spec.covariance.rows() != d || spec.covariance.cols() != d || upper.size() != d) {
        throw std::invalid_argument("mvn_cdf: mean/covariance/upper dimension mismatch");
    }
    const double scale = std::max(1.0, spec.covariance.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < d; ++i) {
        if (spec.covariance(i, i) < -1e-12 * scale) {
            throw std::invalid_argument("mvn_cdf: negative variance on the diagonal");
        }
        for (Eigen::Index j = i + 1; j < d; ++j) {
            if (std::fabs(spec.covariance(i, j) - spec.covariance(j, i)) > 1e-10 * scale) {
                throw std::invalid_argument("mvn_cdf: covariance not symmetric");
            }
        }
    }
}

}  // namespace

namespace detail {

double ghk_core(int d, const double* shifted_upper, const double* cov,
                const HaltonDraws& draws) {
    if (d == 0) return 1.0;

    // Order variables by decreasing truncation probability, i.e. the least
    // restrictive bound first (standard variance-reduction practice).  The
    // probability is monotone in b/sigma, so sort on that ratio directly.
    int order[32];
    std::vector<int> order_heap;
    int* ord = order;
    if (d > 32) {
        order_heap.resize(static_cast<size_t>(d));
        ord = order_heap.data();
    }
    std::iota(ord, ord + d, 0);
    std::stable_sort(ord, ord + d, [&](int a, int b) {
        const double sa = std::sqrt(std::max(cov[a * d + a], 0.0));
        const double sb = std::sqrt(std::max(cov[b * d + b], 0.0));
        const double za = (sa > 0.0) ? shifted_upper[a] / sa
                                     : (shifted_upper[a] >= 0.0 ? kInf : -kInf);
        const double zb = (sb > 0.0) ? shifted_upper[b] / sb
                                     : (shifted_upper[b] >= 0.0 ? kInf : -kInf);
        return za > zb;
    });

    // Permuted copies + Cholesky with a jitter ladder.  Everything lives on
    // the stack for the small dimensions the pair likelihood uses.
    double buf_v[32], buf_L[32 * 32];
    std::vector<double> heap_v, heap_L;
    double* v = buf_v;
    double* L = buf_L;
    if (d > 32) {
        heap_v.resize(static_cast<size_t>(d));
        heap_L.resize(static_cast<size_t>(d) * d);
        v = heap_v.data();
        L = heap_L.data();
    }
    double trace = 0.0;
    for (int i = 0; i < d; ++i) trace += cov[i * d + i];
    const double jitter_unit = std::max(trace / d, 1e-30);

    bool ok = false;
    for (double jf : {0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6}) {
        ok = true;
        for (int i = 0; i < d && ok; ++i) {
            for (int j = 0; j <= i; ++j) {
                double s = cov[ord[i] * d + ord[j]];
                if (i == j) s += jf * jitter_unit;
                for (int k = 0; k < j; ++k) s -= L[i * d + k] * L[j * d + k];
                if (i == j) {
                    if (s <= 0.0) {
                        ok = false;
                        break;
                    }
                    L[i * d + i] = std::sqrt(s);
                } else {
                    L[i * d + j] = s / L[j * d + j];
                }
            }
        }
        if (ok) break;
    }
    if (!ok) {
        throw ConditioningError("ghk: covariance not positive definite after max jitter");
    }
    for (int i = 0; i < d; ++i) v[i] = shifted_upper[ord[i]];

    const double e1 = std_normal_cdf(v[0] / L[0]);
    if (d == 1) return e1;  // closed form, no draws consumed
    if (e1 <= 0.0) return 0.0;

    if (draws.dimension < d - 1) {
        throw std::invalid_argument("ghk: draws.dimension must be >= d-1");
    }

    const int R = draws.count;
    double q[32];
    std::vector<double> heap_q;
    double* qq = q;
    if (d > 32) {
        heap_q.resize(static_cast<size_t>(d));
        qq = heap_q.data();
    }
    double acc = 0.0;
    for (int r = 0; r < R; ++r) {
        double prod = e1;
        double u = draws.values(r, 0) * e1;
        qq[0] = std_normal_quantile(std::clamp(u, 1e-300, 1.0 - 1e-16));
        for (int j = 1; j < d; ++j) {
            double s = 0.0;
            for (int k = 0; k < j; ++k) s += L[j * d + k] * qq[k];
            const double ej = std_normal_cdf((v[j] - s) / L[j * d + j]);
            prod *= ej;
            if (prod <= 0.0) {
                prod = 0.0;
                break;
            }
            if (j + 1 < d) {
                u = draws.values(r, j) * ej;
                qq[j] = std_normal_quantile(std::clamp(u, 1e-300, 1.0 - 1e-16));
            }
        }
        acc += prod;
    }
    return std::clamp(acc / R, 0.0, 1.0);
}

}  // namespace detail

double mvn_cdf_ghk(const MvnSpec& spec, const Eigen::VectorXd& upper,
                   const HaltonDraws& draws) {
    check_spec(spec, upper);
    const int d0 = static_cast<int>(spec.mean.size());

    // -inf bound: zero mass.  +inf bound: marginalise the coordinate exactly.
    int keep[64];
    std::vector<int> keep_heap;
    int* kp = keep;
    if (d0 > 64) {
        keep_heap.resize(static_cast<size_t>(d0));
        kp = keep_heap.data();
    }
    int d = 0;
    for (int i = 0; i < d0; ++i) {
        const double z = upper[i] - spec.mean[i];
        if (z == -kInf || std::isnan(z)) return 0.0;
        if (z == kInf) continue;
        kp[d++] = i;
    }
    if (d == 0) return 1.0;

    std::vector<double> v(static_cast<size_t>(d));
    std::vector<double> c(static_cast<size_t>(d) * d);
    for (int i = 0; i < d; ++i) {
        v[static_cast<size_t>(i)] = upper[kp[i]] - spec.mean[kp[i]];
        for (int j = 0; j < d; ++j) {
            c[static_cast<size_t>(i) * d + j] = spec.covariance(kp[i], kp[j]);
        }
    }
    return detail::ghk_core(d, v.data(), c.data(), draws);
}

double mvn_cdf_rect(const MvnSpec& spec, const Eigen::VectorXd& lower,
                    const Eigen::VectorXd& upper, const HaltonDraws& draws) {
    check_spec(spec, upper);
    const int d = static_cast<int>(spec.mean.size());
    if (lower.size() != d) {
        throw std::invalid_argument("mvn_cdf_rect: lower dimension mismatch");
    }
    for (int i = 0; i < d; ++i) {
        if (lower[i] > upper[i]) {
            throw std::domain_error("mvn_cdf_rect: lower > upper in coordinate " +
                                    std::to_string(i));
        }
        if (lower[i] == upper[i]) return 0.0;  // zero-measure slab
    }

    // Inclusion-exclusion over the 2^d corners; a corner containing a -inf
    // coordinate has zero CDF and is skipped outright.
    double total = 0.0;
    Eigen::VectorXd corner(d);
    for (unsigned mask = 0; mask < (1u << d); ++mask) {
        bool dead = false;
        int bits = 0;
        for (int i = 0; i < d; ++i) {
            if (mask & (1u << i)) {
                ++bits;
                if (lower[i] == -kInf) {
                    dead = true;
                    break;
                }
                corner[i] = lower[i];
            } else {
                corner[i] = upper[i];
            }
        }
        if (dead) continue;
        const double sign = (bits % 2 == 0) ? 1.0 : -1.0;
        total += sign * mvn_cdf_ghk(spec, corner, draws);
    }
    return std::clamp(total, 0.0, 1.0);
}

}  // namespace iclv
