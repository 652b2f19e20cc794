#pragma once

#include <string>
#include <vector>

#include "voxdiff/errors.hpp"
#include "voxdiff/rng.hpp"

namespace voxdiff {

// Variance schedule of the diffusion process. alpha[t-1] holds the per-step
// retention factor for step t in 1..T; gamma(t) is the running product with
// gamma(0) = 1 kept explicit so posterior formulas stay total at t = 1.
struct NoiseSchedule {
    std::vector<double> alpha;
    std::vector<double> gamma_;

    NoiseSchedule() = default;
    explicit NoiseSchedule(std::vector<double> alphas);

    int T() const noexcept { return static_cast<int>(alpha.size()); }
    double alpha_at(int t) const;
    double gamma(int t) const;

    void validate() const;
};

struct ScheduleSpec {
    std::string kind = "linear-beta";
    int T = 2000;
    double beta_start = 1e-6;
    double beta_end = 1e-2;
};

NoiseSchedule build_schedule(const ScheduleSpec& spec);
NoiseSchedule build_schedule(const std::string& kind, int T, double beta_start, double beta_end);

// One draw from the continuous noise-level prior: t uniform over {1..T},
// then gamma uniform on the open interval (gamma(t), gamma(t-1)).
struct GammaDraw {
    double gamma;
    int t;
};

GammaDraw sample_gamma(const NoiseSchedule& schedule, RngStream& rng);

}  // namespace voxdiff
