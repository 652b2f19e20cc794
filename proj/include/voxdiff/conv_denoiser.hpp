#pragma once

#include <cstdint>
#include <vector>

#include "voxdiff/denoiser.hpp"

namespace voxdiff {

// Layer stack: depth conv layers with periodic padding, ReLU between them,
// linear output. Input is three channels: noisy slice, conditioning slice,
// and the noise level broadcast to a constant plane.
struct ConvSpec {
    int depth = 4;
    int hidden = 8;
    int kernel = 3;
};

// Per-call activation storage reused across training iterations. act[0] holds
// the input channels; act[l+1] the output of layer l (ReLU already applied on
// hidden layers), so act[depth] is the prediction.
struct ConvTrace {
    int w = 0;
    int h = 0;
    std::vector<std::vector<double>> act;
};

class ConvDenoiser : public DenoiserInterface {
public:
    static constexpr int kInputChannels = 3;

    ConvDenoiser(ConvSpec spec, PlaneKind plane);

    // He-uniform hidden layers, zero output layer so the untrained net
    // predicts zero noise.
    void init_weights(const RngStream& rng);

    const ConvSpec& spec() const noexcept { return spec_; }
    std::size_t param_count() const noexcept { return params_.size(); }
    std::vector<double>& params() noexcept { return params_; }
    const std::vector<double>& params() const noexcept { return params_; }

    Slice2D predict(const Slice2D& x_cond, const Slice2D& y_t, double gamma) const override;
    PlaneKind plane() const override { return plane_; }

    // Forward pass keeping every activation; returns the output plane held
    // inside the trace.
    const std::vector<double>& forward(const Slice2D& x_cond, const Slice2D& y_t, double gamma,
                                       ConvTrace& trace) const;

    // Accumulates dLoss/dparams into grad given dLoss/doutput; requires the
    // trace of the matching forward call.
    void backward(const ConvTrace& trace, const std::vector<double>& grad_out,
                  std::vector<double>& grad) const;

    int in_channels(int layer) const;
    int out_channels(int layer) const;
    // Offset of layer's weight block; biases follow the weights.
    std::size_t layer_offset(int layer) const;

private:
    ConvSpec spec_;
    PlaneKind plane_;
    std::vector<double> params_;
    std::vector<std::size_t> offsets_;
};

}  // namespace voxdiff
