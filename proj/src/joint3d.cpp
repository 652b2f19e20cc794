#include "voxdiff/joint3d.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace voxdiff {

namespace {

std::uint64_t axis_key(Axis axis) { return static_cast<std::uint64_t>(axis) + 1; }

// Every sampler variant draws its fields from streams keyed by the axis being
// swept: chain(root, axis) -> root.child(plane).child(axis_key). A single-axis
// XYZ-ALL run, a 2D-only run and the matching XYZ-LAST chain therefore see
// identical noise, which makes the degenerate-mode equalities bit-exact.
RngStream chain_stream(const RngStream& rng, Axis axis) {
    return rng.child(stream_tag::plane).child(axis_key(axis));
}

void require_same_dims(const Volume& a, const Volume& b, const char* what) {
    require(a.nx == b.nx && a.ny == b.ny && a.nz == b.nz, ErrorCategory::shape_mismatch,
            std::string(what) + ": volume dims differ");
}

void check_plane(const DenoiserInterface& denoiser, Axis axis) {
    const PlaneKind plane = denoiser.plane();
    if (plane == PlaneKind::any) return;
    const PlaneKind want =
        axis == Axis::axial ? PlaneKind::in_plane : PlaneKind::through_plane;
    require(plane == want, ErrorCategory::invalid_argument,
            std::string("denoiser trained for ") + to_string(plane) +
                " slices cannot process the " + to_string(axis) + " axis");
}

}  // namespace

void JointConfig::validate() const {
    require(!axis_order.empty(), ErrorCategory::config, "axis order must be non-empty");
    double sum = 0.0;
    for (double l : lambdas) {
        require(std::isfinite(l) && l >= 0.0, ErrorCategory::config,
                "merge weights must be finite and nonnegative");
        sum += l;
    }
    require(sum > 0.0, ErrorCategory::config, "merge weights must not all be zero");
}

ModeName parse_mode_name(std::string name) {
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (name.rfind("ddpm-", 0) == 0) name = name.substr(5);
    if (name == "xyz-all") return {SampleMode::xyz_all, Axis::axial, "xyz-all"};
    if (name == "xyz-last") return {SampleMode::xyz_last, Axis::axial, "xyz-last"};
    if (name == "2d-axial") return {SampleMode::two_d_only, Axis::axial, "2d-axial"};
    if (name == "2d-coronal") return {SampleMode::two_d_only, Axis::coronal, "2d-coronal"};
    if (name == "2d-sagittal") return {SampleMode::two_d_only, Axis::sagittal, "2d-sagittal"};
    raise(ErrorCategory::invalid_argument, "unknown inference mode '" + name + "'");
}

const DenoiserInterface& DenoiserSet::for_axis(Axis axis) const {
    const DenoiserInterface* d = axis == Axis::axial ? in_plane : through_plane;
    require(d != nullptr, ErrorCategory::config,
            std::string("no denoiser configured for the ") + to_string(axis) + " axis");
    return *d;
}

Volume merge_weighted(const Volume& v_axial, const Volume& v_coronal, const Volume& v_sagittal,
                      const std::array<double, 3>& lambdas) {
    require_same_dims(v_axial, v_coronal, "merge_weighted");
    require_same_dims(v_axial, v_sagittal, "merge_weighted");
    double sum = 0.0;
    for (double l : lambdas) {
        require(std::isfinite(l) && l >= 0.0, ErrorCategory::invalid_argument,
                "merge weights must be finite and nonnegative");
        sum += l;
    }
    require(sum > 0.0, ErrorCategory::invalid_argument, "merge weights must not all be zero");

    const Volume* vols[3] = {&v_axial, &v_coronal, &v_sagittal};
    int active[3];
    int n_active = 0;
    for (int i = 0; i < 3; ++i)
        if (lambdas[static_cast<std::size_t>(i)] > 0.0) active[n_active++] = i;
    if (n_active == 1) return *vols[active[0]];

    // Anchor the combination on the first active input so equal inputs and
    // one-hot weights come back verbatim; weights are normalized up front so
    // any exactly rescaled lambda vector reproduces identical arithmetic.
    const Volume& anchor = *vols[active[0]];
    Volume out = anchor;
    for (int k = 1; k < n_active; ++k) {
        const double w = lambdas[static_cast<std::size_t>(active[k])] / sum;
        const Volume& v = *vols[active[k]];
        for (std::size_t i = 0; i < out.size(); ++i)
            out.data[i] += w * (v.data[i] - anchor.data[i]);
    }
    return out;
}

Volume reverse_step_axis(const DiffusionProcess& process, const Volume& vol_t, Axis axis,
                         const DenoiserInterface& denoiser, const Volume& x_vol, int t,
                         const Volume& noise, SamplerStats* stats) {
    require_same_dims(vol_t, x_vol, "reverse_step_axis");
    require_same_dims(vol_t, noise, "reverse_step_axis");
    check_plane(denoiser, axis);

    const int depth = vol_t.dim(slicing_dim(axis));
    std::vector<Slice2D> out_slices;
    out_slices.reserve(static_cast<std::size_t>(depth));
    for (int k = 0; k < depth; ++k) {
        const Slice2D y_slice = extract_slice(vol_t, axis, k);
        const Slice2D x_slice = extract_slice(x_vol, axis, k);
        const Slice2D n_slice = extract_slice(noise, axis, k);
        out_slices.push_back(process.reverse_step_with_noise(denoiser, x_slice, y_slice, t,
                                                             n_slice));
    }
    if (stats) {
        stats->denoiser_calls += static_cast<std::uint64_t>(depth);
        stats->slice_sweeps += 1;
    }
    return assemble_slices(out_slices, axis, vol_t.spacing, vol_t.window);
}

Volume sample_xyz_all(const DiffusionProcess& process, const Volume& x_vol,
                      const DenoiserSet& denoisers, const RngStream& rng, const JointConfig& cfg,
                      SamplerStats* stats) {
    cfg.validate();
    require(cfg.mode == SampleMode::xyz_all, ErrorCategory::config,
            "sample_xyz_all called with a different mode configured");
    const int T = process.schedule.T();
    const std::size_t n_axes = cfg.axis_order.size();

    Volume y = normal_volume(x_vol.nx, x_vol.ny, x_vol.nz,
                             chain_stream(rng, cfg.axis_order[0]).child(stream_tag::init));
    y.spacing = x_vol.spacing;
    y.window = x_vol.window;
    Volume zero(x_vol.nx, x_vol.ny, x_vol.nz, 0.0);
    for (int t = T; t >= 1; --t) {
        const Axis axis = cfg.axis_order[static_cast<std::size_t>(T - t) % n_axes];
        if (stats) stats->axes.push_back(axis);
        const Volume noise =
            t > 1 ? normal_volume(x_vol.nx, x_vol.ny, x_vol.nz,
                                  chain_stream(rng, axis)
                                      .child(stream_tag::step)
                                      .child(static_cast<std::uint64_t>(t)))
                  : zero;
        y = reverse_step_axis(process, y, axis, denoisers.for_axis(axis), x_vol, t, noise,
                              stats);
    }
    return y;
}

Volume sample_2d_only(const DiffusionProcess& process, const Volume& x_vol, Axis axis,
                      const DenoiserInterface& denoiser, const RngStream& rng,
                      SamplerStats* stats) {
    JointConfig cfg;
    cfg.mode = SampleMode::xyz_all;
    cfg.axis_order = {axis};
    DenoiserSet set{&denoiser, &denoiser};
    return sample_xyz_all(process, x_vol, set, rng, cfg, stats);
}

Volume sample_xyz_last(const DiffusionProcess& process, const Volume& x_vol,
                       const DenoiserSet& denoisers, const RngStream& rng, const JointConfig& cfg,
                       SamplerStats* stats) {
    cfg.validate();
    require(cfg.mode == SampleMode::xyz_last, ErrorCategory::config,
            "sample_xyz_last called with a different mode configured");
    JointConfig chain_cfg;
    chain_cfg.mode = SampleMode::xyz_all;
    Volume chains[3] = {Volume(1, 1, 1), Volume(1, 1, 1), Volume(1, 1, 1)};
    for (Axis axis : {Axis::axial, Axis::coronal, Axis::sagittal}) {
        chain_cfg.axis_order = {axis};
        chains[static_cast<std::size_t>(axis)] =
            sample_xyz_all(process, x_vol, denoisers, rng, chain_cfg, stats);
    }
    return merge_weighted(chains[0], chains[1], chains[2], cfg.lambdas);
}

Volume sample_joint(const DiffusionProcess& process, const Volume& x_vol,
                    const DenoiserSet& denoisers, const RngStream& rng, const JointConfig& cfg,
                    SamplerStats* stats) {
    cfg.validate();
    switch (cfg.mode) {
        case SampleMode::xyz_all: return sample_xyz_all(process, x_vol, denoisers, rng, cfg, stats);
        case SampleMode::xyz_last:
            return sample_xyz_last(process, x_vol, denoisers, rng, cfg, stats);
        default:
            return sample_2d_only(process, x_vol, cfg.two_d_axis,
                                  denoisers.for_axis(cfg.two_d_axis), rng, stats);
    }
}

}  // namespace voxdiff
