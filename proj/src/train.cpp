#include "voxdiff/train.hpp"

#include <cmath>

namespace voxdiff {

namespace {

void crop(const Slice2D& src, int ox, int oy, int patch, Slice2D& dst) {
    for (int y = 0; y < patch; ++y) {
        const double* row = src.data.data() + static_cast<std::size_t>(oy + y) * src.w + ox;
        std::copy(row, row + patch, dst.data.begin() + static_cast<std::size_t>(y) * patch);
    }
}

}  // namespace

TrainResult train(ConvDenoiser& net, const std::vector<SlicePair>& dataset,
                  const NoiseSchedule& schedule, const TrainConfig& cfg) {
    require(!dataset.empty(), ErrorCategory::missing_input, "empty training dataset");
    require(cfg.batch_size >= 1 && cfg.patch >= 1 && cfg.iterations >= 1,
            ErrorCategory::config, "train config values must be positive");
    require(cfg.learning_rate >= 0.0, ErrorCategory::config, "negative learning rate");
    require(cfg.loss_exponent == 1 || cfg.loss_exponent == 2, ErrorCategory::config,
            "loss exponent must be 1 or 2");
    for (const SlicePair& p : dataset) {
        require(p.lr.w == p.hr.w && p.lr.h == p.hr.h, ErrorCategory::shape_mismatch,
                "LR/HR slice dims differ");
        require(p.hr.w >= cfg.patch && p.hr.h >= cfg.patch, ErrorCategory::config,
                "patch does not fit inside training slices");
    }

    RngStream rng(cfg.seed);
    const std::size_t np = net.param_count();
    std::vector<double> grad(np), m(np, 0.0), v(np, 0.0);
    const std::size_t n_px = static_cast<std::size_t>(cfg.patch) * cfg.patch;
    Slice2D hr_patch(cfg.patch, cfg.patch), lr_patch(cfg.patch, cfg.patch),
        yt_patch(cfg.patch, cfg.patch);
    std::vector<double> eps(n_px), grad_out(n_px);
    ConvTrace trace;
    TrainResult result;
    result.loss.reserve(static_cast<std::size_t>(cfg.iterations));

    for (int it = 1; it <= cfg.iterations; ++it) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double loss_acc = 0.0;
        for (int b = 0; b < cfg.batch_size; ++b) {
            const SlicePair& pair = dataset[static_cast<std::size_t>(
                rng.uniform_int(static_cast<int>(dataset.size())))];
            const int ox = rng.uniform_int(pair.hr.w - cfg.patch + 1);
            const int oy = rng.uniform_int(pair.hr.h - cfg.patch + 1);
            crop(pair.hr, ox, oy, cfg.patch, hr_patch);
            crop(pair.lr, ox, oy, cfg.patch, lr_patch);

            const GammaDraw draw = sample_gamma(schedule, rng);
            const double a = std::sqrt(draw.gamma);
            const double c = std::sqrt(1.0 - draw.gamma);
            for (std::size_t i = 0; i < n_px; ++i) {
                eps[i] = rng.normal();
                yt_patch.data[i] = a * hr_patch.data[i] + c * eps[i];
            }

            const std::vector<double>& out = net.forward(lr_patch, yt_patch, draw.gamma, trace);
            const double scale = 1.0 / (static_cast<double>(n_px) * cfg.batch_size);
            double loss = 0.0;
            for (std::size_t i = 0; i < n_px; ++i) {
                const double r = out[i] - eps[i];
                if (cfg.loss_exponent == 1) {
                    loss += std::abs(r);
                    grad_out[i] = r > 0.0 ? scale : (r < 0.0 ? -scale : 0.0);
                } else {
                    loss += r * r;
                    grad_out[i] = 2.0 * r * scale;
                }
            }
            loss_acc += loss / static_cast<double>(n_px);
            net.backward(trace, grad_out, grad);
        }
        const double loss_it = loss_acc / cfg.batch_size;
        require(std::isfinite(loss_it), ErrorCategory::numeric,
                "training diverged (non-finite loss)");
        result.loss.push_back(loss_it);

        const double bc1 = 1.0 - std::pow(cfg.adam_beta1, it);
        const double bc2 = 1.0 - std::pow(cfg.adam_beta2, it);
        std::vector<double>& params = net.params();
        for (std::size_t i = 0; i < np; ++i) {
            m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * grad[i];
            v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * grad[i] * grad[i];
            const double step =
                cfg.learning_rate * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg.adam_eps);
            params[i] -= step;
        }
    }
    return result;
}

}  // namespace voxdiff
