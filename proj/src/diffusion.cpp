#include "voxdiff/diffusion.hpp"

#include <algorithm>
#include <cmath>

namespace voxdiff {

namespace {

void require_same_dims(const Slice2D& a, const Slice2D& b, const char* what) {
    require(a.w == b.w && a.h == b.h, ErrorCategory::shape_mismatch,
            std::string(what) + ": slice dims differ");
}

}  // namespace

DiffusionProcess::DiffusionProcess(NoiseSchedule sched) : schedule(std::move(sched)) {
    schedule.validate();
    require(clip_range[1] > clip_range[0], ErrorCategory::config, "bad clip range");
}

Slice2D DiffusionProcess::forward_sample(const Slice2D& y0, double gamma,
                                         const Slice2D& eps) const {
    require(gamma > 0.0 && gamma <= 1.0, ErrorCategory::invalid_argument,
            "forward_sample needs gamma in (0, 1]");
    require_same_dims(y0, eps, "forward_sample");
    const double a = std::sqrt(gamma);
    const double b = std::sqrt(1.0 - gamma);
    Slice2D out = y0;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = a * y0.data[i] + b * eps.data[i];
    return out;
}

double DiffusionProcess::training_residual(const DenoiserInterface& f, const Slice2D& x,
                                           const Slice2D& y0, double gamma,
                                           const Slice2D& eps) const {
    require(loss_exponent == 1 || loss_exponent == 2, ErrorCategory::config,
            "loss exponent must be 1 or 2");
    require_same_dims(x, y0, "training_residual");
    const Slice2D y_t = forward_sample(y0, gamma, eps);
    const Slice2D eps_hat = f.predict(x, y_t, gamma);
    require_same_dims(eps_hat, eps, "training_residual");
    double acc = 0.0;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        const double r = eps_hat.data[i] - eps.data[i];
        acc += loss_exponent == 1 ? std::abs(r) : r * r;
    }
    return acc / static_cast<double>(eps.size());
}

Slice2D DiffusionProcess::estimate_y0(const Slice2D& y_t, const Slice2D& eps_hat,
                                      double gamma) const {
    require(gamma > 0.0 && gamma <= 1.0, ErrorCategory::invalid_argument,
            "estimate_y0 needs gamma in (0, 1]");
    require_same_dims(y_t, eps_hat, "estimate_y0");
    const double inv_sqrt_g = 1.0 / std::sqrt(gamma);
    const double b = std::sqrt(1.0 - gamma);
    Slice2D out = y_t;
    for (std::size_t i = 0; i < out.size(); ++i) {
        double v = (y_t.data[i] - b * eps_hat.data[i]) * inv_sqrt_g;
        if (clip_y0) v = std::clamp(v, clip_range[0], clip_range[1]);
        out.data[i] = v;
    }
    return out;
}

PosteriorCoeffs DiffusionProcess::posterior_coeffs(int t) const {
    const double alpha = schedule.alpha_at(t);
    const double g_t = schedule.gamma(t);
    const double g_prev = schedule.gamma(t - 1);
    require(g_t < 1.0, ErrorCategory::invalid_argument,
            "posterior undefined at gamma = 1 (no noise accumulated)");
    const double denom = 1.0 - g_t;
    return {std::sqrt(g_prev) * (1.0 - alpha) / denom,
            std::sqrt(alpha) * (1.0 - g_prev) / denom,
            (1.0 - g_prev) * (1.0 - alpha) / denom};
}

Posterior DiffusionProcess::posterior_params(const Slice2D& y0, const Slice2D& y_t,
                                             int t) const {
    require_same_dims(y0, y_t, "posterior_params");
    const PosteriorCoeffs c = posterior_coeffs(t);
    Slice2D mu = y_t;
    for (std::size_t i = 0; i < mu.size(); ++i)
        mu.data[i] = c.y0_weight * y0.data[i] + c.yt_weight * y_t.data[i];
    return {std::move(mu), c.sigma2};
}

double DiffusionProcess::step_sigma(int t) const {
    if (t <= 1) return 0.0;
    if (variance == SamplerVariance::beta) return std::sqrt(1.0 - schedule.alpha_at(t));
    return std::sqrt(posterior_coeffs(t).sigma2);
}

Slice2D DiffusionProcess::reverse_step_with_noise(const DenoiserInterface& f, const Slice2D& x,
                                                  const Slice2D& y_t, int t,
                                                  const Slice2D& noise) const {
    require_same_dims(y_t, noise, "reverse_step");
    const double g_t = schedule.gamma(t);
    const Slice2D eps_hat = f.predict(x, y_t, g_t);
    const Slice2D y0_hat = estimate_y0(y_t, eps_hat, g_t);
    Posterior post = posterior_params(y0_hat, y_t, t);
    const double sigma = step_sigma(t);
    if (sigma > 0.0)
        for (std::size_t i = 0; i < post.mu.size(); ++i)
            post.mu.data[i] += sigma * noise.data[i];
    return std::move(post.mu);
}

Slice2D DiffusionProcess::reverse_step_direct(const DenoiserInterface& f, const Slice2D& x,
                                              const Slice2D& y_t, int t,
                                              const Slice2D& noise) const {
    require_same_dims(y_t, noise, "reverse_step");
    const double alpha = schedule.alpha_at(t);
    const double g_t = schedule.gamma(t);
    require(g_t < 1.0, ErrorCategory::invalid_argument,
            "reverse step undefined at gamma = 1");
    const Slice2D eps_hat = f.predict(x, y_t, g_t);
    const double inv_sqrt_a = 1.0 / std::sqrt(alpha);
    const double coeff = (1.0 - alpha) / std::sqrt(1.0 - g_t);
    const double sigma = step_sigma(t);
    Slice2D out = y_t;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.data[i] = inv_sqrt_a * (y_t.data[i] - coeff * eps_hat.data[i]);
        if (sigma > 0.0) out.data[i] += sigma * noise.data[i];
    }
    return out;
}

Slice2D DiffusionProcess::reverse_step(const DenoiserInterface& f, const Slice2D& x,
                                       const Slice2D& y_t, int t, const RngStream& rng) const {
    Slice2D noise(y_t.w, y_t.h, 0.0, y_t.axis, y_t.index);
    if (t > 1)
        noise = normal_slice(y_t.w, y_t.h,
                             rng.child(stream_tag::step).child(static_cast<std::uint64_t>(t)));
    noise.axis = y_t.axis;
    noise.index = y_t.index;
    return reverse_step_with_noise(f, x, y_t, t, noise);
}

Slice2D DiffusionProcess::sample_chain_2d(const DenoiserInterface& f, const Slice2D& x,
                                          const RngStream& rng) const {
    Slice2D y = normal_slice(x.w, x.h, rng.child(stream_tag::init));
    y.axis = x.axis;
    y.index = x.index;
    for (int t = schedule.T(); t >= 1; --t) y = reverse_step(f, x, y, t, rng);
    return y;
}

}  // namespace voxdiff
