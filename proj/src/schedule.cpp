#include "voxdiff/schedule.hpp"

#include <cmath>

namespace voxdiff {

NoiseSchedule::NoiseSchedule(std::vector<double> alphas) : alpha(std::move(alphas)) {
    require(!alpha.empty(), ErrorCategory::config, "schedule needs at least one step");
    gamma_.resize(alpha.size() + 1);
    gamma_[0] = 1.0;
    for (std::size_t t = 0; t < alpha.size(); ++t) {
        require(alpha[t] > 0.0 && alpha[t] <= 1.0, ErrorCategory::config,
                "alpha must lie in (0, 1]");
        gamma_[t + 1] = gamma_[t] * alpha[t];
    }
    validate();
}

double NoiseSchedule::alpha_at(int t) const {
    require(t >= 1 && t <= T(), ErrorCategory::invalid_argument, "step index out of range");
    return alpha[static_cast<std::size_t>(t - 1)];
}

double NoiseSchedule::gamma(int t) const {
    require(t >= 0 && t <= T(), ErrorCategory::invalid_argument, "step index out of range");
    return gamma_[static_cast<std::size_t>(t)];
}

void NoiseSchedule::validate() const {
    require(!alpha.empty(), ErrorCategory::config, "empty schedule");
    require(gamma_.size() == alpha.size() + 1, ErrorCategory::config,
            "gamma table does not match step count");
    require(gamma_[0] == 1.0, ErrorCategory::config, "gamma(0) must be 1");
    for (int t = 1; t <= T(); ++t) {
        const double a = alpha[static_cast<std::size_t>(t - 1)];
        require(a > 0.0 && a <= 1.0, ErrorCategory::config, "alpha must lie in (0, 1]");
        const double g = gamma_[static_cast<std::size_t>(t)];
        const double prev = gamma_[static_cast<std::size_t>(t - 1)];
        require(g > 0.0 && g <= 1.0, ErrorCategory::config, "gamma must lie in (0, 1]");
        require(g <= prev, ErrorCategory::config, "gamma must be non-increasing");
        require(std::abs(g - prev * a) <= 1e-12 * prev, ErrorCategory::config,
                "gamma recurrence violated");
    }
}

NoiseSchedule build_schedule(const ScheduleSpec& spec) {
    require(spec.kind == "linear-beta", ErrorCategory::config,
            "unknown schedule kind: " + spec.kind);
    require(spec.T >= 1, ErrorCategory::config, "schedule length must be >= 1");
    require(spec.beta_start >= 0.0 && spec.beta_start < 1.0, ErrorCategory::config,
            "beta_start must lie in [0, 1)");
    require(spec.beta_end >= 0.0 && spec.beta_end < 1.0, ErrorCategory::config,
            "beta_end must lie in [0, 1)");
    std::vector<double> alphas(static_cast<std::size_t>(spec.T));
    for (int t = 0; t < spec.T; ++t) {
        const double frac = spec.T == 1 ? 0.0 : static_cast<double>(t) / (spec.T - 1);
        const double beta = spec.beta_start + (spec.beta_end - spec.beta_start) * frac;
        alphas[static_cast<std::size_t>(t)] = 1.0 - beta;
    }
    return NoiseSchedule(std::move(alphas));
}

NoiseSchedule build_schedule(const std::string& kind, int T, double beta_start,
                             double beta_end) {
    ScheduleSpec spec;
    spec.kind = kind;
    spec.T = T;
    spec.beta_start = beta_start;
    spec.beta_end = beta_end;
    return build_schedule(spec);
}

GammaDraw sample_gamma(const NoiseSchedule& schedule, RngStream& rng) {
    const int t = 1 + rng.uniform_int(schedule.T());
    const double hi = schedule.gamma(t - 1);
    const double lo = schedule.gamma(t);
    // uniform01 is strictly inside (0,1), so the draw stays inside (lo, hi).
    const double g = lo + (hi - lo) * rng.uniform01();
    return {g, t};
}

}  // namespace voxdiff
