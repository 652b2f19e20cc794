#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <array>
#include <cstring>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "voxdiff/checkpoint.hpp"
#include "voxdiff/eval.hpp"
#include "voxdiff/io.hpp"
#include "voxdiff/joint3d.hpp"
#include "voxdiff/simulate.hpp"
#include "voxdiff/train.hpp"

namespace py = pybind11;
using namespace voxdiff;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

// Volumes cross the boundary as (nz, ny, nx) arrays; C order then matches
// the x-fastest storage byte for byte.
Volume volume_from_array(const DoubleArray& arr,
                         std::array<double, 3> spacing = {1.0, 1.0, 1.0},
                         std::array<double, 2> window = {-1.0, 1.0}) {
    if (arr.ndim() != 3) throw py::value_error("expected a 3D array shaped (nz, ny, nx)");
    Volume v(static_cast<int>(arr.shape(2)), static_cast<int>(arr.shape(1)),
             static_cast<int>(arr.shape(0)));
    v.spacing = spacing;
    v.window = window;
    std::memcpy(v.data.data(), arr.data(), v.size() * sizeof(double));
    v.validate("array volume");
    return v;
}

py::array_t<double> array_from_volume(const Volume& v) {
    py::array_t<double> arr({v.nz, v.ny, v.nx});
    std::memcpy(arr.mutable_data(), v.data.data(), v.size() * sizeof(double));
    return arr;
}

Dim dim_from_name(const std::string& name) {
    if (name == "x") return Dim::x;
    if (name == "y") return Dim::y;
    if (name == "z") return Dim::z;
    raise(ErrorCategory::invalid_argument, "unknown dimension '" + name + "', expected x, y or z");
}

PlaneKind plane_from_name(const std::string& name) {
    if (name == "in-plane") return PlaneKind::in_plane;
    if (name == "through-plane") return PlaneKind::through_plane;
    raise(ErrorCategory::invalid_argument,
          "unknown plane '" + name + "', expected in-plane or through-plane");
}

py::dict schedule_dict(const ScheduleSpec& spec) {
    py::dict d;
    d["kind"] = spec.kind;
    d["T"] = spec.T;
    d["beta_start"] = spec.beta_start;
    d["beta_end"] = spec.beta_end;
    return d;
}

std::vector<SlicePair> training_slices(const std::vector<DoubleArray>& hr,
                                       const std::vector<DoubleArray>& lr, PlaneKind plane,
                                       std::array<double, 2> window) {
    require(hr.size() == lr.size() && !hr.empty(), ErrorCategory::invalid_argument,
            "need matching non-empty lists of high and low resolution volumes");
    const std::vector<Axis> axes = plane == PlaneKind::in_plane
                                       ? std::vector<Axis>{Axis::axial}
                                       : std::vector<Axis>{Axis::coronal, Axis::sagittal};
    std::vector<SlicePair> slices;
    for (std::size_t i = 0; i < hr.size(); ++i) {
        const Volume h = normalize(volume_from_array(hr[i]), window[0], window[1]);
        const Volume l = normalize(volume_from_array(lr[i]), window[0], window[1]);
        require(h.nx == l.nx && h.ny == l.ny && h.nz == l.nz, ErrorCategory::shape_mismatch,
                "volume pair " + std::to_string(i) + " has mismatched dims");
        for (Axis axis : axes)
            for (int k = 0; k < h.dim(slicing_dim(axis)); ++k)
                slices.push_back({extract_slice(l, axis, k), extract_slice(h, axis, k)});
    }
    return slices;
}

py::object train_denoiser(const std::vector<DoubleArray>& hr, const std::vector<DoubleArray>& lr,
                          const std::string& plane, const std::string& path, std::uint64_t seed,
                          std::array<double, 2> window, int iterations, double learning_rate,
                          int batch, int patch, const std::string& loss, int depth, int hidden,
                          int kernel, const std::string& schedule_kind, int T, double beta_start,
                          double beta_end) {
    const PlaneKind pk = plane_from_name(plane);
    std::vector<SlicePair> slices = training_slices(hr, lr, pk, window);
    if (patch == 0) {
        patch = std::numeric_limits<int>::max();
        for (const SlicePair& s : slices) patch = std::min({patch, s.hr.w, s.hr.h});
    }
    require(loss == "l1" || loss == "l2", ErrorCategory::invalid_argument,
            "loss must be l1 or l2");

    const ScheduleSpec spec{schedule_kind, T, beta_start, beta_end};
    ConvDenoiser net(ConvSpec{depth, hidden, kernel}, pk);
    net.init_weights(RngStream(seed).child(stream_tag::weights));

    TrainConfig cfg;
    cfg.learning_rate = learning_rate;
    cfg.batch_size = batch;
    cfg.patch = patch;
    cfg.iterations = iterations;
    cfg.loss_exponent = loss == "l1" ? 1 : 2;
    cfg.seed = seed;
    const TrainResult result = train(net, slices, build_schedule(spec), cfg);

    Provenance prov;
    prov.creator = "voxdiff-python";
    prov.has_seed = true;
    prov.seed = seed;
    write_checkpoint(net, spec, window, path, prov);
    return py::cast(result.loss);
}

py::object sample_volume(const DoubleArray& lr, const std::string& mode, std::uint64_t seed,
                         const std::optional<Checkpoint>& in_plane,
                         const std::optional<Checkpoint>& through_plane,
                         std::array<double, 3> lambdas,
                         const std::vector<std::string>& axis_order, bool clip,
                         const std::string& variance) {
    const ModeName ms = parse_mode_name(mode);
    JointConfig jc;
    jc.mode = ms.mode;
    jc.two_d_axis = ms.axis;
    jc.lambdas = lambdas;
    jc.axis_order.clear();
    for (const std::string& a : axis_order) jc.axis_order.push_back(axis_from_string(a));
    jc.validate();

    std::vector<Axis> used;
    switch (ms.mode) {
        case SampleMode::two_d_only: used = {ms.axis}; break;
        case SampleMode::xyz_all: used = jc.axis_order; break;
        case SampleMode::xyz_last: used = {Axis::axial, Axis::coronal, Axis::sagittal}; break;
    }
    bool need_in = false, need_th = false;
    for (Axis a : used) (a == Axis::axial ? need_in : need_th) = true;
    require(!need_in || in_plane.has_value(), ErrorCategory::invalid_argument,
            "mode " + ms.canonical + " needs an in-plane checkpoint");
    require(!need_th || through_plane.has_value(), ErrorCategory::invalid_argument,
            "mode " + ms.canonical + " needs a through-plane checkpoint");

    const Checkpoint& ref = in_plane ? *in_plane : *through_plane;
    if (in_plane && through_plane) {
        const ScheduleSpec &a = in_plane->schedule, &b = through_plane->schedule;
        require(a.kind == b.kind && a.T == b.T && a.beta_start == b.beta_start &&
                    a.beta_end == b.beta_end,
                ErrorCategory::config, "checkpoints were trained against different schedules");
        require(in_plane->window == through_plane->window, ErrorCategory::config,
                "checkpoints disagree on the normalization window");
    }

    const Volume x = normalize(volume_from_array(lr), ref.window[0], ref.window[1]);
    DiffusionProcess process(build_schedule(ref.schedule));
    process.clip_y0 = clip;
    if (variance == "beta")
        process.variance = SamplerVariance::beta;
    else if (variance == "posterior")
        process.variance = SamplerVariance::posterior;
    else
        raise(ErrorCategory::invalid_argument, "variance must be beta or posterior");

    DenoiserSet denoisers;
    if (in_plane) denoisers.in_plane = &in_plane->net;
    if (through_plane) denoisers.through_plane = &through_plane->net;

    SamplerStats stats;
    const Volume y = sample_joint(process, x, denoisers, RngStream(seed), jc, &stats);
    const Volume sr = denormalize(y, ref.window[0], ref.window[1]);

    py::dict info;
    info["denoiser_calls"] = stats.denoiser_calls;
    info["slice_sweeps"] = stats.slice_sweeps;
    return py::make_tuple(array_from_volume(sr), info);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "volumetric diffusion super-resolution core";
    m.attr("__version__") = "1.0.0";
    py::register_exception<Error>(m, "Error");

    py::class_<Checkpoint>(m, "Checkpoint")
        .def_static("load", [](const std::string& path) { return read_checkpoint(path); },
                    py::arg("path"))
        .def_property_readonly("plane",
                               [](const Checkpoint& c) { return to_string(c.net.plane()); })
        .def_property_readonly("schedule",
                               [](const Checkpoint& c) { return schedule_dict(c.schedule); })
        .def_property_readonly("window", [](const Checkpoint& c) { return c.window; });

    m.def(
        "schedule",
        [](const std::string& kind, int T, double beta_start, double beta_end) {
            const NoiseSchedule s = build_schedule(kind, T, beta_start, beta_end);
            py::dict d;
            d["alpha"] = py::cast(s.alpha);
            d["gamma"] = py::cast(
                std::vector<double>(s.gamma_.begin() + 1, s.gamma_.end()));
            return d;
        },
        py::arg("kind") = "linear-beta", py::arg("T") = 2000, py::arg("beta_start") = 1e-6,
        py::arg("beta_end") = 1e-2, "Per-step alpha and cumulative gamma arrays.");

    m.def(
        "bar_phantom",
        [](const std::vector<double>& frequencies, std::array<int, 3> dims,
           const std::string& orientation, double amplitude, double background) {
            BarPhantomSpec spec;
            spec.frequencies = frequencies;
            spec.orientation = dim_from_name(orientation);
            spec.amplitude = amplitude;
            spec.background = background;
            const BarPhantom p = gen_bar_phantom(spec, dims[0], dims[1], dims[2]);
            py::list rois;
            for (const BarRoi& r : p.rois) {
                py::dict d;
                d["frequency"] = r.frequency;
                d["lo"] = r.roi.lo;
                d["size"] = r.roi.size;
                rois.append(d);
            }
            return py::make_tuple(array_from_volume(p.volume), rois);
        },
        py::arg("frequencies"), py::arg("dims"), py::arg("orientation") = "x",
        py::arg("amplitude") = 1.0, py::arg("background") = -0.5,
        "Square-wave bar phantom and its measurement ROI layout; dims is (nx, ny, nz).");

    m.def(
        "anatomy",
        [](std::array<int, 3> dims, std::uint64_t seed, int blobs, int inserts) {
            AnatomyParams params;
            params.blobs = blobs;
            params.inserts = inserts;
            return array_from_volume(
                gen_anatomy_like(dims[0], dims[1], dims[2], RngStream(seed), params));
        },
        py::arg("dims"), py::arg("seed"), py::arg("blobs") = 12, py::arg("inserts") = 3,
        "Smooth random training volume with sharp inserts; dims is (nx, ny, nz).");

    m.def(
        "degrade",
        [](const DoubleArray& hr, std::uint64_t seed, std::array<double, 3> sigma,
           std::array<double, 9> crosstalk, double photons, double attenuation, bool noise) {
            DegradeConfig cfg;
            cfg.sigma = sigma;
            cfg.crosstalk = crosstalk;
            cfg.photons = photons;
            cfg.attenuation = attenuation;
            cfg.noise_enabled = noise;
            return array_from_volume(degrade(volume_from_array(hr), cfg, RngStream(seed)));
        },
        py::arg("hr"), py::arg("seed"), py::arg("sigma") = DegradeConfig{}.sigma,
        py::arg("crosstalk") = DegradeConfig{}.crosstalk, py::arg("photons") = 1e4,
        py::arg("attenuation") = 2.0, py::arg("noise") = true,
        "Blur, detector crosstalk and Poisson counting noise applied to a volume.");

    m.def(
        "merge",
        [](const DoubleArray& axial, const DoubleArray& coronal, const DoubleArray& sagittal,
           std::array<double, 3> lambdas) {
            return array_from_volume(merge_weighted(volume_from_array(axial),
                                                    volume_from_array(coronal),
                                                    volume_from_array(sagittal), lambdas));
        },
        py::arg("axial"), py::arg("coronal"), py::arg("sagittal"),
        py::arg("lambdas") = std::array<double, 3>{1.0, 1.0, 1.0},
        "Normalized weighted average of three per-axis results.");

    m.def("normalize",
          [](const DoubleArray& vol, double lo, double hi) {
              return array_from_volume(normalize(volume_from_array(vol), lo, hi));
          },
          py::arg("volume"), py::arg("lo"), py::arg("hi"),
          "Affine map of the window [lo, hi] onto [-1, 1].");

    m.def("denormalize",
          [](const DoubleArray& vol, double lo, double hi) {
              return array_from_volume(denormalize(volume_from_array(vol), lo, hi));
          },
          py::arg("volume"), py::arg("lo"), py::arg("hi"),
          "Inverse of normalize for the same window.");

    m.def(
        "read_volume",
        [](const std::string& path) {
            const Volume v = read_volume(path);
            py::dict meta;
            meta["spacing"] = v.spacing;
            meta["window"] = v.window;
            return py::make_tuple(array_from_volume(v), meta);
        },
        py::arg("path"), "Volume payload plus its sidecar spacing and window.");

    m.def(
        "write_volume",
        [](const std::string& path, const DoubleArray& vol, std::array<double, 3> spacing,
           std::array<double, 2> window, std::optional<std::uint64_t> seed) {
            Provenance prov;
            prov.creator = "voxdiff-python";
            if (seed) {
                prov.has_seed = true;
                prov.seed = *seed;
            }
            return write_volume(volume_from_array(vol, spacing, window), path, prov);
        },
        py::arg("path"), py::arg("volume"), py::arg("spacing") = std::array<double, 3>{1, 1, 1},
        py::arg("window") = std::array<double, 2>{-1, 1}, py::arg("seed") = std::nullopt,
        "Writes payload and sidecar atomically; returns the payload checksum.");

    m.def("train", &train_denoiser, py::arg("hr"), py::arg("lr"), py::arg("plane"),
          py::arg("path"), py::arg("seed"), py::arg("window") = std::array<double, 2>{-1, 1},
          py::arg("iterations") = 300000, py::arg("learning_rate") = 1e-4, py::arg("batch") = 4,
          py::arg("patch") = 0, py::arg("loss") = "l1", py::arg("depth") = 4,
          py::arg("hidden") = 8, py::arg("kernel") = 3,
          py::arg("schedule_kind") = "linear-beta", py::arg("T") = 2000,
          py::arg("beta_start") = 1e-6, py::arg("beta_end") = 1e-2,
          "Trains a slice denoiser on paired volumes and writes a checkpoint to path. "
          "plane selects axial (in-plane) or coronal plus sagittal (through-plane) slices; "
          "patch 0 means the largest square that fits every slice. Returns the loss trace.");

    m.def("sample", &sample_volume, py::arg("lr"), py::arg("mode"), py::arg("seed"),
          py::arg("in_plane") = std::nullopt, py::arg("through_plane") = std::nullopt,
          py::arg("lambdas") = std::array<double, 3>{1.0, 1.0, 1.0},
          py::arg("axis_order") = std::vector<std::string>{"axial", "coronal", "sagittal"},
          py::arg("clip") = true, py::arg("variance") = "beta",
          "Runs reverse diffusion on a low-resolution volume. Returns (volume, stats); "
          "deterministic for a fixed seed.");

    m.def(
        "mtf",
        [](const DoubleArray& vol, const DoubleArray& reference,
           const std::vector<double>& frequencies, const std::string& orientation,
           const std::string& plane) {
            const Volume ref = volume_from_array(reference);
            BarPhantomSpec spec;
            spec.frequencies = frequencies;
            spec.orientation = dim_from_name(orientation);
            const std::vector<BarRoi> rois =
                bar_phantom_layout(spec, ref.nx, ref.ny, ref.nz);
            const MtfCurve curve = mtf_curve(volume_from_array(vol), ref, rois, spec.orientation,
                                             "python", plane_from_name(plane));
            std::vector<std::pair<double, double>> points;
            for (const MtfPoint& p : curve.points) points.push_back({p.frequency, p.modulation});
            return points;
        },
        py::arg("volume"), py::arg("reference"), py::arg("frequencies"),
        py::arg("orientation") = "x", py::arg("plane") = "in-plane",
        "Modulation relative to the reference phantom at each bar frequency.");
}
