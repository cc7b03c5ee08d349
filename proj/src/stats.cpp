// SPDX-License-Identifier: Apache-2.0
#include "agc/stats.hpp"

#include <algorithm>
#include <cmath>

#include "agc/error.hpp"

namespace agc {

double percentile(std::vector<double> values, double q) {
    if (values.empty()) fail(ErrorCode::InvalidArgument, "percentile of an empty set");
    if (!(q >= 0.0 && q <= 100.0)) fail(ErrorCode::InvalidArgument, "percentile must be in [0, 100]");
    std::sort(values.begin(), values.end());
    const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return percentile(std::move(values), 50.0); }

}  // namespace agc
