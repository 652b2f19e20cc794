#pragma once

#include <cstdint>
#include <vector>

#include "voxdiff/conv_denoiser.hpp"
#include "voxdiff/schedule.hpp"

namespace voxdiff {

struct SlicePair {
    Slice2D lr;
    Slice2D hr;
};

struct TrainConfig {
    double learning_rate = 1e-4;
    int batch_size = 4;
    int patch = 128;
    int iterations = 300000;
    int loss_exponent = 1;
    std::uint64_t seed = 0;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
};

// Per-iteration batch-mean loss.
struct TrainResult {
    std::vector<double> loss;
};

// Noise-prediction training: random pair, random patch, random noise level
// from the schedule prior, one Adam step per iteration. Deterministic for a
// fixed config seed.
TrainResult train(ConvDenoiser& net, const std::vector<SlicePair>& dataset,
                  const NoiseSchedule& schedule, const TrainConfig& cfg);

}  // namespace voxdiff
