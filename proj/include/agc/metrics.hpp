// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

namespace agc {

/// First differences x[i+1] - x[i].
std::vector<double> differences(const std::vector<double>& series);

/// Fraction of positions where sign(x_i) == sign(y_i); zero matches only zero.
/// The inputs are used as given (difference them first for trend agreement).
double sign_agreement(const std::vector<double>& x, const std::vector<double>& y);

struct PearsonResult {
    double r = 0.0;
    double p_value = 1.0;  ///< two-sided, t-distribution with N-2 dof
    std::size_t n = 0;
};

PearsonResult pearson(const std::vector<double>& x, const std::vector<double>& y);

/// Centred moving average with circular padding. Even windows extend one
/// sample further into the past.
std::vector<double> moving_average(const std::vector<double>& series, std::size_t window);

}  // namespace agc
