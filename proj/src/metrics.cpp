// SPDX-License-Identifier: Apache-2.0
#include "agc/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/beta.hpp>

#include "agc/error.hpp"

namespace agc {

std::vector<double> differences(const std::vector<double>& series) {
    std::vector<double> out;
    if (series.size() < 2) return out;
    out.reserve(series.size() - 1);
    for (std::size_t i = 1; i < series.size(); ++i) out.push_back(series[i] - series[i - 1]);
    return out;
}

double sign_agreement(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) fail(ErrorCode::InvalidArgument, "sign agreement needs equal-length series");
    if (x.empty()) fail(ErrorCode::InvalidArgument, "sign agreement needs at least one value");
    auto sign = [](double v) { return (v > 0.0) - (v < 0.0); };
    std::size_t match = 0;
    for (std::size_t i = 0; i < x.size(); ++i) match += sign(x[i]) == sign(y[i]);
    return static_cast<double>(match) / static_cast<double>(x.size());
}

PearsonResult pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) fail(ErrorCode::InvalidArgument, "Pearson needs equal-length series");
    const std::size_t n = x.size();
    if (n < 3) fail(ErrorCode::InvalidArgument, "Pearson needs at least 3 pairs");
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) {
        fail(ErrorCode::UndefinedCorrelation, "correlation undefined: a series has zero variance");
    }
    PearsonResult res;
    res.n = n;
    res.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    const double dof = static_cast<double>(n - 2);
    const double r2 = res.r * res.r;
    if (r2 >= 1.0) {
        res.p_value = 0.0;
    } else {
        // P(|T| >= t) = I_{dof/(dof+t^2)}(dof/2, 1/2), with dof/(dof+t^2) = 1 - r^2.
        res.p_value = boost::math::ibeta(dof / 2.0, 0.5, 1.0 - r2);
    }
    return res;
}

std::vector<double> moving_average(const std::vector<double>& series, std::size_t window) {
    if (window == 0) fail(ErrorCode::InvalidArgument, "moving-average window must be positive");
    const std::size_t n = series.size();
    std::vector<double> out(n, 0.0);
    if (n == 0) return out;
    const long back = static_cast<long>(window / 2);
    const long sn = static_cast<long>(n);
    for (long i = 0; i < sn; ++i) {
        double s = 0.0;
        for (long k = 0; k < static_cast<long>(window); ++k) {
            const long j = ((i - back + k) % sn + sn) % sn;
            s += series[static_cast<std::size_t>(j)];
        }
        out[static_cast<std::size_t>(i)] = s / static_cast<double>(window);
    }
    return out;
}

}  // namespace agc
