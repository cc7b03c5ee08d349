// SPDX-License-Identifier: Apache-2.0
#include "agc/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "agc/error.hpp"
#include "agc/stats.hpp"

namespace agc {

namespace {

void require_same_size(const Field& a, const Field& b, const char* what) {
    if (a.size() != b.size()) {
        fail(ErrorCode::InvalidArgument, std::string("shape mismatch: ") + what + " (" + std::to_string(a.size()) +
                                             " vs " + std::to_string(b.size()) + ")");
    }
}

void require_step(const NoiseSchedule& s, int t, int lo) {
    if (t < lo || t > s.steps) {
        fail(ErrorCode::InvalidArgument,
             "diffusion step " + std::to_string(t) + " outside [" + std::to_string(lo) + ", " + std::to_string(s.steps) + "]");
    }
}

}  // namespace

NormalizerState fit_normalizer(const std::vector<double>& observations_db) {
    std::vector<double> lin;
    for (double m : observations_db) {
        if (std::isfinite(m)) lin.push_back(std::pow(10.0, m / 10.0));
    }
    if (lin.size() < 10) {
        fail(ErrorCode::Fit, "normalizer needs at least 10 finite observations, got " + std::to_string(lin.size()));
    }
    NormalizerState s;
    s.eta = percentile(lin, 80.0);
    if (!(s.eta > 0.0)) fail(ErrorCode::Fit, "normalizer scale is not positive");
    std::vector<double> n;
    n.reserve(lin.size());
    for (double v : lin) n.push_back(std::asinh(v / s.eta));
    s.mu = median(n);
    s.sigma = std::max((percentile(n, 75.0) - percentile(n, 25.0)) / 1.349, 1e-6);
    return s;
}

double normalize(const NormalizerState& s, double m_db) {
    if (!std::isfinite(m_db)) fail(ErrorCode::InvalidArgument, "cannot normalize a non-finite loss");
    return (std::asinh(std::pow(10.0, m_db / 10.0) / s.eta) - s.mu) / s.sigma;
}

double denormalize(const NormalizerState& s, double z) {
    if (!std::isfinite(z)) fail(ErrorCode::InvalidArgument, "cannot denormalize a non-finite value");
    const double lin = s.eta * std::sinh(z * s.sigma + s.mu);
    if (!(lin > 0.0)) fail(ErrorCode::OutOfDomain, "normalized value maps below zero linear power");
    return 10.0 * std::log10(lin);
}

NoiseSchedule NoiseSchedule::cosine(int steps, double offset) {
    if (steps < 1) fail(ErrorCode::InvalidArgument, "schedule needs at least one step");
    NoiseSchedule s;
    s.kind = ScheduleKind::Cosine;
    s.steps = steps;
    auto f = [&](int t) {
        const double c = std::cos((static_cast<double>(t) / steps + offset) / (1.0 + offset) * std::numbers::pi / 2.0);
        return c * c;
    };
    const double f0 = f(0);
    s.alpha_bar.resize(static_cast<std::size_t>(steps) + 1);
    for (int t = 0; t <= steps; ++t) s.alpha_bar[static_cast<std::size_t>(t)] = f(t) / f0;
    s.alpha_bar[0] = 1.0;
    return s;
}

NoiseSchedule NoiseSchedule::linear(int steps, double beta_start, double beta_end) {
    if (steps < 1) fail(ErrorCode::InvalidArgument, "schedule needs at least one step");
    if (!(beta_start > 0.0) || !(beta_end < 1.0) || beta_end < beta_start) {
        fail(ErrorCode::InvalidArgument, "linear schedule needs 0 < beta_start <= beta_end < 1");
    }
    NoiseSchedule s;
    s.kind = ScheduleKind::Linear;
    s.steps = steps;
    s.alpha_bar.resize(static_cast<std::size_t>(steps) + 1);
    s.alpha_bar[0] = 1.0;
    // The betas describe a 1000-step process; shorter runs take larger steps.
    const double scale = 1000.0 / steps;
    for (int t = 1; t <= steps; ++t) {
        const double frac = steps == 1 ? 0.0 : static_cast<double>(t - 1) / (steps - 1);
        const double beta = std::min(0.999, scale * (beta_start + frac * (beta_end - beta_start)));
        s.alpha_bar[static_cast<std::size_t>(t)] = s.alpha_bar[static_cast<std::size_t>(t - 1)] * (1.0 - beta);
    }
    return s;
}

double NoiseSchedule::alpha(int t) const {
    require_step(*this, t, 0);
    return std::sqrt(alpha_bar[static_cast<std::size_t>(t)]);
}

double NoiseSchedule::sigma(int t) const {
    require_step(*this, t, 0);
    return std::sqrt(std::max(0.0, 1.0 - alpha_bar[static_cast<std::size_t>(t)]));
}

ScheduleKind parse_schedule_kind(const std::string& name) {
    if (name == "cosine") return ScheduleKind::Cosine;
    if (name == "linear") return ScheduleKind::Linear;
    fail(ErrorCode::InvalidArgument, "unknown schedule '" + name + "' (cosine, linear)");
}

Field gaussian_noise(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto unit = [&rng] { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; };
    Field out(n);
    for (std::size_t i = 0; i < n; i += 2) {
        const double r = std::sqrt(-2.0 * std::log(unit()));
        const double th = 2.0 * std::numbers::pi * unit();
        out[i] = r * std::cos(th);
        if (i + 1 < n) out[i + 1] = r * std::sin(th);
    }
    return out;
}

Field forward_noise(const Field& x0, const Field& eps, int t, const NoiseSchedule& schedule) {
    require_step(schedule, t, 1);
    require_same_size(x0, eps, "x0 and noise");
    const double a = schedule.alpha(t);
    const double s = schedule.sigma(t);
    Field out(x0.size());
    for (std::size_t i = 0; i < x0.size(); ++i) out[i] = a * x0[i] + s * eps[i];
    return out;
}

Field forward_noise(const Field& x0, int t, const NoiseSchedule& schedule, std::uint64_t seed) {
    return forward_noise(x0, gaussian_noise(x0.size(), seed), t, schedule);
}

Field v_target(const Field& x0, const Field& eps, int t, const NoiseSchedule& schedule) {
    require_step(schedule, t, 0);
    require_same_size(x0, eps, "x0 and noise");
    const double a = schedule.alpha(t);
    const double s = schedule.sigma(t);
    Field out(x0.size());
    for (std::size_t i = 0; i < x0.size(); ++i) out[i] = a * eps[i] - s * x0[i];
    return out;
}

Field reconstruct_x0(const Field& x_t, const Field& v_pred, int t, const NoiseSchedule& schedule) {
    require_step(schedule, t, 0);
    require_same_size(x_t, v_pred, "x_t and v");
    const double a = schedule.alpha(t);
    const double s = schedule.sigma(t);
    Field out(x_t.size());
    for (std::size_t i = 0; i < x_t.size(); ++i) out[i] = a * x_t[i] - s * v_pred[i];
    return out;
}

Field soft_gate(const Field& x_raw, const Field& m_prob, double gamma) {
    require_same_size(x_raw, m_prob, "values and probabilities");
    if (!(gamma > 0.0)) fail(ErrorCode::InvalidArgument, "gating exponent must be positive");
    Field out(x_raw.size());
    for (std::size_t i = 0; i < x_raw.size(); ++i) {
        const double p = m_prob[i];
        if (!(p >= 0.0 && p <= 1.0)) fail(ErrorCode::InvalidArgument, "gating probability outside [0, 1]");
        out[i] = x_raw[i] * std::pow(p, gamma);
    }
    return out;
}

Field ddim_inpaint(const Denoiser& denoiser, const Field& x0_obs, const Field& mask, const Field& cond,
                   const NoiseSchedule& schedule, std::uint64_t seed) {
    require_same_size(x0_obs, mask, "observations and mask");
    for (double m : mask) {
        if (m != 0.0 && m != 1.0) fail(ErrorCode::InvalidArgument, "mask must be binary");
    }
    const std::size_t n = x0_obs.size();
    std::mt19937_64 seeds(seed);
    Field x = gaussian_noise(n, seeds());
    for (int t = schedule.steps; t >= 1; --t) {
        Field v;
        try {
            v = denoiser(x, t, cond);
        } catch (const std::exception& e) {
            fail(ErrorCode::Runtime, "denoiser failed at step " + std::to_string(t) + ": " + e.what());
        }
        require_same_size(x, v, "denoiser output");
        const double a = schedule.alpha(t);
        const double s = schedule.sigma(t);
        const double a_prev = schedule.alpha(t - 1);
        const double s_prev = schedule.sigma(t - 1);
        const Field eps = gaussian_noise(n, seeds());
        for (std::size_t i = 0; i < n; ++i) {
            const double x0_hat = a * x[i] - s * v[i];
            const double eps_hat = s * x[i] + a * v[i];
            const double pred = a_prev * x0_hat + s_prev * eps_hat;
            const double known = a_prev * x0_obs[i] + s_prev * eps[i];
            x[i] = pred * (1.0 - mask[i]) + known * mask[i];
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (mask[i] == 1.0) x[i] = x0_obs[i];
    }
    return x;
}

Denoiser oracle_denoiser(Field x0, const NoiseSchedule& schedule) {
    return [x0 = std::move(x0), schedule](const Field& x_t, int t, const Field&) {
        require_same_size(x_t, x0, "oracle field");
        const double a = schedule.alpha(t);
        const double s = schedule.sigma(t);
        Field v(x_t.size());
        for (std::size_t i = 0; i < x_t.size(); ++i) {
            const double eps = (x_t[i] - a * x0[i]) / s;
            v[i] = a * eps - s * x0[i];
        }
        return v;
    };
}

}  // namespace agc
