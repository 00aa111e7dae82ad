#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace contextua {

struct ChiSquareResult {
    double statistic = 0;
    std::size_t dof = 0;
    double p_value = 1;
    // Observations in cells of probability zero; any such count fails the test.
    std::size_t impossible = 0;
};

// Goodness of fit of counts against probabilities. Cells whose expected count
// is below min_expected are pooled into one cell.
ChiSquareResult chi_square_test(const std::vector<std::size_t>& counts, const std::vector<double>& probs,
                                double min_expected = 5.0);

struct Interval {
    double low = 0, high = 1;
};

// Wilson score interval for k successes out of n, at normal quantile z.
Interval wilson_interval(std::size_t k, std::size_t n, double z = 3.0);

// Independent stream seed for task `index` under a master seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace contextua
