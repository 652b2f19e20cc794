#include "voxdiff/conv_denoiser.hpp"

#include <algorithm>
#include <cmath>

namespace voxdiff {

namespace {

int wrap(int i, int n) { return i < 0 ? i + n : (i >= n ? i - n : i); }

// out[y][x] += c * in[(y+sy) mod h][(x+sx) mod w]. The x loop is split at the
// wrap point so the bulk runs over contiguous memory.
void add_shifted(double* out, const double* in, int w, int h, int sy, int sx, double c) {
    for (int y = 0; y < h; ++y) {
        const double* row = in + static_cast<std::size_t>(wrap(y + sy, h)) * w;
        double* orow = out + static_cast<std::size_t>(y) * w;
        if (sx >= 0) {
            for (int x = 0; x < w - sx; ++x) orow[x] += c * row[x + sx];
            for (int x = w - sx; x < w; ++x) orow[x] += c * row[x + sx - w];
        } else {
            for (int x = 0; x < -sx; ++x) orow[x] += c * row[x + sx + w];
            for (int x = -sx; x < w; ++x) orow[x] += c * row[x + sx];
        }
    }
}

// sum over y,x of a[y][x] * b[(y+sy) mod h][(x+sx) mod w].
double dot_shifted(const double* a, const double* b, int w, int h, int sy, int sx) {
    double acc = 0.0;
    for (int y = 0; y < h; ++y) {
        const double* arow = a + static_cast<std::size_t>(y) * w;
        const double* brow = b + static_cast<std::size_t>(wrap(y + sy, h)) * w;
        if (sx >= 0) {
            for (int x = 0; x < w - sx; ++x) acc += arow[x] * brow[x + sx];
            for (int x = w - sx; x < w; ++x) acc += arow[x] * brow[x + sx - w];
        } else {
            for (int x = 0; x < -sx; ++x) acc += arow[x] * brow[x + sx + w];
            for (int x = -sx; x < w; ++x) acc += arow[x] * brow[x + sx];
        }
    }
    return acc;
}

}  // namespace

ConvDenoiser::ConvDenoiser(ConvSpec spec, PlaneKind plane) : spec_(spec), plane_(plane) {
    require(spec_.depth >= 2, ErrorCategory::config, "conv net needs at least two layers");
    require(spec_.hidden >= 1, ErrorCategory::config, "hidden channel count must be positive");
    require(spec_.kernel >= 1 && spec_.kernel % 2 == 1, ErrorCategory::config,
            "kernel size must be odd");
    offsets_.resize(static_cast<std::size_t>(spec_.depth) + 1);
    std::size_t total = 0;
    for (int l = 0; l < spec_.depth; ++l) {
        offsets_[static_cast<std::size_t>(l)] = total;
        const std::size_t k2 = static_cast<std::size_t>(spec_.kernel) * spec_.kernel;
        total += static_cast<std::size_t>(out_channels(l)) * in_channels(l) * k2 +
                 static_cast<std::size_t>(out_channels(l));
    }
    offsets_[static_cast<std::size_t>(spec_.depth)] = total;
    params_.assign(total, 0.0);
}

int ConvDenoiser::in_channels(int layer) const {
    return layer == 0 ? kInputChannels : spec_.hidden;
}

int ConvDenoiser::out_channels(int layer) const {
    return layer == spec_.depth - 1 ? 1 : spec_.hidden;
}

std::size_t ConvDenoiser::layer_offset(int layer) const {
    return offsets_[static_cast<std::size_t>(layer)];
}

void ConvDenoiser::init_weights(const RngStream& rng) {
    RngStream stream = rng.child(stream_tag::weights);
    const std::size_t k2 = static_cast<std::size_t>(spec_.kernel) * spec_.kernel;
    for (int l = 0; l < spec_.depth; ++l) {
        const std::size_t nw = static_cast<std::size_t>(out_channels(l)) * in_channels(l) * k2;
        double* block = params_.data() + layer_offset(l);
        if (l == spec_.depth - 1) {
            std::fill(block, block + nw + static_cast<std::size_t>(out_channels(l)), 0.0);
        } else {
            const double limit = std::sqrt(6.0 / (in_channels(l) * static_cast<double>(k2)));
            for (std::size_t i = 0; i < nw; ++i)
                block[i] = limit * (2.0 * stream.uniform01() - 1.0);
            std::fill(block + nw, block + nw + static_cast<std::size_t>(out_channels(l)), 0.0);
        }
    }
}

const std::vector<double>& ConvDenoiser::forward(const Slice2D& x_cond, const Slice2D& y_t,
                                                 double gamma, ConvTrace& trace) const {
    require(x_cond.w == y_t.w && x_cond.h == y_t.h, ErrorCategory::shape_mismatch,
            "condition and noisy slice dims differ");
    const int w = y_t.w, h = y_t.h;
    const std::size_t plane = static_cast<std::size_t>(w) * h;
    trace.w = w;
    trace.h = h;
    trace.act.resize(static_cast<std::size_t>(spec_.depth) + 1);

    std::vector<double>& input = trace.act[0];
    input.resize(plane * kInputChannels);
    std::copy(y_t.data.begin(), y_t.data.end(), input.begin());
    std::copy(x_cond.data.begin(), x_cond.data.end(), input.begin() + plane);
    std::fill(input.begin() + 2 * plane, input.end(), gamma);

    const int k = spec_.kernel;
    const int r = k / 2;
    const std::size_t k2 = static_cast<std::size_t>(k) * k;
    for (int l = 0; l < spec_.depth; ++l) {
        const int cin = in_channels(l), cout = out_channels(l);
        const double* W = params_.data() + layer_offset(l);
        const double* b = W + static_cast<std::size_t>(cout) * cin * k2;
        const std::vector<double>& in = trace.act[static_cast<std::size_t>(l)];
        std::vector<double>& out = trace.act[static_cast<std::size_t>(l) + 1];
        out.resize(plane * static_cast<std::size_t>(cout));
        for (int co = 0; co < cout; ++co) {
            double* op = out.data() + static_cast<std::size_t>(co) * plane;
            std::fill(op, op + plane, b[co]);
            for (int ci = 0; ci < cin; ++ci) {
                const double* ip = in.data() + static_cast<std::size_t>(ci) * plane;
                const double* Wp = W + (static_cast<std::size_t>(co) * cin + ci) * k2;
                for (int ky = 0; ky < k; ++ky)
                    for (int kx = 0; kx < k; ++kx)
                        add_shifted(op, ip, w, h, ky - r, kx - r,
                                    Wp[static_cast<std::size_t>(ky) * k + kx]);
            }
        }
        if (l < spec_.depth - 1)
            for (double& v : out)
                if (v < 0.0) v = 0.0;
    }
    return trace.act[static_cast<std::size_t>(spec_.depth)];
}

void ConvDenoiser::backward(const ConvTrace& trace, const std::vector<double>& grad_out,
                            std::vector<double>& grad) const {
    const int w = trace.w, h = trace.h;
    const std::size_t plane = static_cast<std::size_t>(w) * h;
    require(grad_out.size() == plane, ErrorCategory::shape_mismatch,
            "output gradient does not match trace dims");
    require(grad.size() == params_.size(), ErrorCategory::shape_mismatch,
            "gradient buffer does not match parameter count");

    const int k = spec_.kernel;
    const int r = k / 2;
    const std::size_t k2 = static_cast<std::size_t>(k) * k;
    std::vector<double> d = grad_out;
    std::vector<double> dprev;
    for (int l = spec_.depth - 1; l >= 0; --l) {
        const int cin = in_channels(l), cout = out_channels(l);
        const std::vector<double>& in = trace.act[static_cast<std::size_t>(l)];
        // Hidden outputs passed through ReLU; kill gradient where the unit was
        // off (the stored activation is zero there).
        if (l < spec_.depth - 1) {
            const std::vector<double>& out = trace.act[static_cast<std::size_t>(l) + 1];
            for (std::size_t i = 0; i < d.size(); ++i)
                if (out[i] <= 0.0) d[i] = 0.0;
        }
        double* gW = grad.data() + layer_offset(l);
        double* gB = gW + static_cast<std::size_t>(cout) * cin * k2;
        const double* W = params_.data() + layer_offset(l);
        if (l > 0) dprev.assign(plane * static_cast<std::size_t>(cin), 0.0);
        for (int co = 0; co < cout; ++co) {
            const double* dp = d.data() + static_cast<std::size_t>(co) * plane;
            double bsum = 0.0;
            for (std::size_t i = 0; i < plane; ++i) bsum += dp[i];
            gB[co] += bsum;
            for (int ci = 0; ci < cin; ++ci) {
                const double* ip = in.data() + static_cast<std::size_t>(ci) * plane;
                const std::size_t widx = (static_cast<std::size_t>(co) * cin + ci) * k2;
                for (int ky = 0; ky < k; ++ky)
                    for (int kx = 0; kx < k; ++kx) {
                        gW[widx + static_cast<std::size_t>(ky) * k + kx] +=
                            dot_shifted(dp, ip, w, h, ky - r, kx - r);
                        if (l > 0)
                            add_shifted(dprev.data() + static_cast<std::size_t>(ci) * plane, dp,
                                        w, h, -(ky - r), -(kx - r),
                                        W[widx + static_cast<std::size_t>(ky) * k + kx]);
                    }
            }
        }
        if (l > 0) d.swap(dprev);
    }
}

Slice2D ConvDenoiser::predict(const Slice2D& x_cond, const Slice2D& y_t, double gamma) const {
    ConvTrace trace;
    const std::vector<double>& out = forward(x_cond, y_t, gamma, trace);
    Slice2D eps(y_t.w, y_t.h, 0.0, y_t.axis, y_t.index);
    std::copy(out.begin(), out.end(), eps.data.begin());
    return eps;
}

}  // namespace voxdiff
