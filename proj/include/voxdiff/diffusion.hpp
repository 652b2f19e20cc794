#pragma once

#include <array>

#include "voxdiff/denoiser.hpp"
#include "voxdiff/schedule.hpp"
#include "voxdiff/volume.hpp"

namespace voxdiff {

// Variance of the noise injected by a reverse step: the per-step beta
// (1 - alpha_t), or the exact posterior variance.
enum class SamplerVariance { beta, posterior };

// Coefficients of the reverse posterior q(y_{t-1} | y_t, y0):
// mean = y0_weight * y0 + yt_weight * y_t, variance = sigma2.
struct PosteriorCoeffs {
    double y0_weight;
    double yt_weight;
    double sigma2;
};

struct Posterior {
    Slice2D mu;
    double sigma2;
};

struct DiffusionProcess {
    NoiseSchedule schedule;
    int loss_exponent = 1;
    bool clip_y0 = true;
    std::array<double, 2> clip_range = {-1.0, 1.0};
    SamplerVariance variance = SamplerVariance::beta;

    explicit DiffusionProcess(NoiseSchedule sched);

    // y_t = sqrt(gamma) y0 + sqrt(1-gamma) eps.
    Slice2D forward_sample(const Slice2D& y0, double gamma, const Slice2D& eps) const;

    // Per-element mean of |f(x, y_t, gamma) - eps|^l with y_t formed as above.
    double training_residual(const DenoiserInterface& f, const Slice2D& x, const Slice2D& y0,
                             double gamma, const Slice2D& eps) const;

    // y0_hat = (y_t - sqrt(1-gamma) eps_hat) / sqrt(gamma), clipped when
    // configured.
    Slice2D estimate_y0(const Slice2D& y_t, const Slice2D& eps_hat, double gamma) const;

    PosteriorCoeffs posterior_coeffs(int t) const;
    Posterior posterior_params(const Slice2D& y0, const Slice2D& y_t, int t) const;

    // One reverse step: estimate y0 from the predicted noise, take the
    // posterior mean, and add scaled noise (none at t = 1). `noise` is a
    // standard-normal field matching y_t.
    Slice2D reverse_step_with_noise(const DenoiserInterface& f, const Slice2D& x,
                                    const Slice2D& y_t, int t, const Slice2D& noise) const;

    // Same step written in the direct single-formula form
    // (y_t - (1-alpha_t)/sqrt(1-gamma_t) eps_hat) / sqrt(alpha_t) + noise term.
    // No y0 clipping is possible on this route; with clipping disabled both
    // routes agree to floating-point accuracy.
    Slice2D reverse_step_direct(const DenoiserInterface& f, const Slice2D& x,
                                const Slice2D& y_t, int t, const Slice2D& noise) const;

    // Draws the step noise from rng.child(step).child(t), so repeated calls
    // with one root stream walk the chain deterministically.
    Slice2D reverse_step(const DenoiserInterface& f, const Slice2D& x, const Slice2D& y_t,
                         int t, const RngStream& rng) const;

    // Full chain: y_T ~ N(0, I) from rng.child(init), then reverse steps down
    // to y_0. Deterministic given the stream key.
    Slice2D sample_chain_2d(const DenoiserInterface& f, const Slice2D& x,
                            const RngStream& rng) const;

    double step_sigma(int t) const;
};

}  // namespace voxdiff
