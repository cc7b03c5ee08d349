// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace agc {

using Field = std::vector<double>;

/// asinh/z-score normalization of excess loss in dB.
struct NormalizerState {
    double eta = 1.0;    ///< 80th percentile of linear power
    double mu = 0.0;     ///< median of asinh(m_lin / eta)
    double sigma = 1.0;  ///< IQR / 1.349, floored at 1e-6
};

NormalizerState fit_normalizer(const std::vector<double>& observations_db);
double normalize(const NormalizerState& s, double m_db);
double denormalize(const NormalizerState& s, double z);

enum class ScheduleKind { Cosine, Linear };

/// alpha_bar[t] for t = 0..T with alpha_bar[0] = 1.
struct NoiseSchedule {
    ScheduleKind kind = ScheduleKind::Cosine;
    int steps = 250;
    std::vector<double> alpha_bar;

    static NoiseSchedule cosine(int steps = 250, double offset = 0.008);
    /// Betas are quoted for 1000 steps and rescaled by 1000/steps.
    static NoiseSchedule linear(int steps = 250, double beta_start = 1e-4, double beta_end = 0.02);

    double alpha(int t) const;  ///< sqrt(alpha_bar)
    double sigma(int t) const;  ///< sqrt(1 - alpha_bar)
};

ScheduleKind parse_schedule_kind(const std::string& name);

/// Unit Gaussian draws (Box-Muller on mt19937_64), bit-stable across platforms.
Field gaussian_noise(std::size_t n, std::uint64_t seed);

Field forward_noise(const Field& x0, const Field& eps, int t, const NoiseSchedule& schedule);
Field forward_noise(const Field& x0, int t, const NoiseSchedule& schedule, std::uint64_t seed);
Field v_target(const Field& x0, const Field& eps, int t, const NoiseSchedule& schedule);
Field reconstruct_x0(const Field& x_t, const Field& v_pred, int t, const NoiseSchedule& schedule);
Field soft_gate(const Field& x_raw, const Field& m_prob, double gamma);

/// Predicts v from (x_t, t, conditioning).
using Denoiser = std::function<Field(const Field& x_t, int t, const Field& cond)>;

/// Deterministic DDIM (eta = 0) with re-noised observations masked in at
/// every step; observed pixels equal x0_obs exactly in the output.
Field ddim_inpaint(const Denoiser& denoiser, const Field& x0_obs, const Field& mask, const Field& cond,
                   const NoiseSchedule& schedule, std::uint64_t seed);

/// The exact v for a known clean field, usable as a denoiser.
Denoiser oracle_denoiser(Field x0, const NoiseSchedule& schedule);

}  // namespace agc
