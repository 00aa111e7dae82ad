#include "contextua/stats.hpp"

#include "contextua/error.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <numeric>

namespace contextua {

ChiSquareResult chi_square_test(const std::vector<std::size_t>& counts, const std::vector<double>& probs,
                                double min_expected) {
    require(counts.size() == probs.size(), ErrorCode::InvalidArgument, "counts and probabilities differ in length");
    const double n = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
    ChiSquareResult r;
    std::size_t cells = 0;
    double pooled_obs = 0, pooled_exp = 0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        double expected = probs[k] * n;
        if (probs[k] <= 1e-15) {
            r.impossible += counts[k];
            continue;
        }
        if (expected < min_expected) {
            pooled_obs += static_cast<double>(counts[k]);
            pooled_exp += expected;
            continue;
        }
        double diff = static_cast<double>(counts[k]) - expected;
        r.statistic += diff * diff / expected;
        ++cells;
    }
    if (pooled_exp > 0) {
        double diff = pooled_obs - pooled_exp;
        r.statistic += diff * diff / pooled_exp;
        ++cells;
    }
    if (cells < 2) {
        r.p_value = r.impossible ? 0.0 : 1.0;
        return r;
    }
    r.dof = cells - 1;
    boost::math::chi_squared dist(static_cast<double>(r.dof));
    r.p_value = r.impossible ? 0.0 : boost::math::cdf(boost::math::complement(dist, r.statistic));
    return r;
}

Interval wilson_interval(std::size_t k, std::size_t n, double z) {
    require(n > 0 && k <= n, ErrorCode::InvalidArgument, "wilson interval needs 0 <= k <= n, n > 0");
    const double nn = static_cast<double>(n), p = static_cast<double>(k) / nn, z2 = z * z;
    const double centre = (p + z2 / (2 * nn)) / (1 + z2 / nn);
    const double half = z / (1 + z2 / nn) * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn));
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace contextua
