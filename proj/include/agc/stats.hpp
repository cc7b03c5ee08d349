// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

namespace agc {

/// Linear-interpolated percentile (q in [0, 100]) of the values; the input
/// is copied and sorted. Empty input is an argument error.
double percentile(std::vector<double> values, double q);
double median(std::vector<double> values);

}  // namespace agc
