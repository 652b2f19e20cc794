#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "voxdiff/checkpoint.hpp"
#include "voxdiff/eval.hpp"
#include "voxdiff/io.hpp"
#include "voxdiff/joint3d.hpp"
#include "voxdiff/manifest.hpp"
#include "voxdiff/simulate.hpp"
#include "voxdiff/train.hpp"

namespace {

using namespace voxdiff;
using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kVersionString = "1.0.0";

// Error categories map onto sysexits-style codes so scripts can react to the
// failure class without parsing messages (see README).
int exit_code(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::invalid_argument: return 64;
        case ErrorCategory::shape_mismatch: return 65;
        case ErrorCategory::missing_input: return 66;
        case ErrorCategory::numeric: return 70;
        case ErrorCategory::io: return 74;
        case ErrorCategory::config: return 78;
    }
    return 70;
}

const char* category_name(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::invalid_argument: return "usage";
        case ErrorCategory::shape_mismatch: return "shape";
        case ErrorCategory::missing_input: return "missing-input";
        case ErrorCategory::numeric: return "numeric";
        case ErrorCategory::io: return "io";
        case ErrorCategory::config: return "config";
    }
    return "internal";
}

std::string default_out_dir() {
    const char* env = std::getenv("VOXDIFF_OUT_DIR");
    return env && *env ? env : ".";
}

void ensure_parent_dir(const std::string& path) {
    const fs::path parent = fs::path(path).parent_path();
    if (parent.empty()) return;
    std::error_code ec;
    fs::create_directories(parent, ec);
    if (ec)
        raise(ErrorCategory::io, "cannot create " + parent.string() + ": " + ec.message());
}

std::string parent_dir(const std::string& path) {
    const fs::path parent = fs::path(path).parent_path();
    return parent.empty() ? std::string(".") : parent.string();
}

std::uint32_t file_crc(const std::string& path) {
    const std::string content = read_file(path);
    return crc32(content.data(), content.size());
}

std::string format_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Dim dim_from_name(const std::string& name) {
    if (name == "x") return Dim::x;
    if (name == "y") return Dim::y;
    if (name == "z") return Dim::z;
    raise(ErrorCategory::invalid_argument, "unknown direction '" + name + "' (use x, y or z)");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Config files are a JSON object whose keys are the long option names of the
// subcommand (without the leading dashes). Values set here are overridden by
// anything given on the command line.
struct ConfigKeys {
    CLI::App* sub = nullptr;
    std::vector<std::pair<std::string, std::function<void(const json&)>>> bindings;

    template <typename T>
    void bind(const std::string& key, T& target) {
        bindings.emplace_back(key, [&target, key](const json& v) {
            try {
                target = v.get<T>();
            } catch (const json::exception&) {
                raise(ErrorCategory::config, "config key '" + key + "' has the wrong type");
            }
        });
    }
};

void apply_config(const ConfigKeys& keys, const std::string& path) {
    if (path.empty()) return;
    json cfg;
    try {
        cfg = json::parse(read_file(path));
    } catch (const json::exception& e) {
        raise(ErrorCategory::config, path + ": malformed config file: " + e.what());
    }
    require(cfg.is_object(), ErrorCategory::config, path + ": config must be a JSON object");
    for (const auto& [key, value] : cfg.items()) {
        const auto it = std::find_if(keys.bindings.begin(), keys.bindings.end(),
                                     [&](const auto& b) { return b.first == key; });
        require(it != keys.bindings.end(), ErrorCategory::config,
                path + ": unknown config key '" + key + "'");
        if (keys.sub->count("--" + key) > 0) continue;
        it->second(value);
    }
}

struct CommonOpts {
    int threads = 1;
    std::string config;
};

void add_common(CLI::App* sub, CommonOpts& o, ConfigKeys& keys) {
    sub->add_option("--threads", o.threads, "worker cap; outputs are identical for any value");
    sub->add_option("--config", o.config, "JSON config file; flags override its values");
    keys.sub = sub;
    keys.bind("threads", o.threads);
}

void check_common(const CommonOpts& o) {
    require(o.threads >= 1, ErrorCategory::invalid_argument, "--threads must be >= 1");
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOpts {
    CommonOpts common;
    std::uint64_t seed = 0;
    int n = 8;
    std::vector<int> dims{64, 64, 64};
    std::string out;
    std::vector<double> sigma;
    std::vector<double> crosstalk;
    double photons = 1e4;
    double attenuation = 2.0;
    bool no_noise = false;
    int blobs = 12;
    int inserts = 3;
    std::vector<double> phantom_freqs;
    std::string phantom_orientation = "x";
};

void add_simulate(CLI::App& app, SimulateOpts& o, ConfigKeys& keys) {
    CLI::App* sub = app.add_subcommand("simulate", "generate a paired HR/LR training dataset");
    sub->add_option("--seed", o.seed, "RNG seed; fixes every generated byte")->required();
    sub->add_option("--n", o.n, "number of volume pairs");
    sub->add_option("--dims", o.dims, "volume dims nx,ny,nz")->delimiter(',')->expected(3);
    sub->add_option("--out", o.out, "output directory (default: $VOXDIFF_OUT_DIR or .)");
    sub->add_option("--sigma", o.sigma, "blur sigmas sx,sy,sz in voxels")
        ->delimiter(',')
        ->expected(3);
    sub->add_option("--crosstalk", o.crosstalk, "3x3 crosstalk kernel, row-major, sums to 1")
        ->delimiter(',')
        ->expected(9);
    sub->add_option("--photons", o.photons, "mean photon count through empty space");
    sub->add_option("--attenuation", o.attenuation, "attenuation constant of the counts map");
    sub->add_flag("--no-noise", o.no_noise, "disable Poisson noise");
    sub->add_option("--blobs", o.blobs, "smooth structures per volume");
    sub->add_option("--inserts", o.inserts, "hard-edged structures per volume");
    sub->add_option("--phantom-freqs", o.phantom_freqs,
                    "also write a bar phantom (phantom_hr/phantom_lr) at these frequencies")
        ->delimiter(',');
    sub->add_option("--phantom-orientation", o.phantom_orientation, "bar direction: x, y or z");
    add_common(sub, o.common, keys);
    keys.bind("n", o.n);
    keys.bind("dims", o.dims);
    keys.bind("out", o.out);
    keys.bind("sigma", o.sigma);
    keys.bind("crosstalk", o.crosstalk);
    keys.bind("photons", o.photons);
    keys.bind("attenuation", o.attenuation);
    keys.bind("no-noise", o.no_noise);
    keys.bind("blobs", o.blobs);
    keys.bind("inserts", o.inserts);
    keys.bind("phantom-freqs", o.phantom_freqs);
    keys.bind("phantom-orientation", o.phantom_orientation);
}

int run_simulate(const SimulateOpts& o) {
    const auto t0 = std::chrono::steady_clock::now();
    check_common(o.common);
    require(o.dims.size() == 3, ErrorCategory::invalid_argument,
            "--dims needs exactly three values");

    DegradeConfig dc;
    if (!o.sigma.empty()) {
        require(o.sigma.size() == 3, ErrorCategory::invalid_argument,
                "--sigma needs exactly three values");
        std::copy(o.sigma.begin(), o.sigma.end(), dc.sigma.begin());
    }
    if (!o.crosstalk.empty()) {
        require(o.crosstalk.size() == 9, ErrorCategory::invalid_argument,
                "--crosstalk needs exactly nine values");
        std::copy(o.crosstalk.begin(), o.crosstalk.end(), dc.crosstalk.begin());
    }
    dc.photons = o.photons;
    dc.attenuation = o.attenuation;
    dc.noise_enabled = !o.no_noise;
    AnatomyParams ap;
    ap.blobs = o.blobs;
    ap.inserts = o.inserts;
    const std::string out_dir = o.out.empty() ? default_out_dir() : o.out;

    const std::vector<DatasetPair> pairs =
        make_dataset(o.n, o.dims[0], o.dims[1], o.dims[2], dc, o.seed, out_dir, ap);

    RunManifest m;
    m.command = "simulate";
    m.has_seed = true;
    m.seed = o.seed;
    m.threads = o.common.threads;
    m.parameters = {{"n", o.n},
                    {"dims", o.dims},
                    {"sigma", dc.sigma},
                    {"crosstalk", dc.crosstalk},
                    {"photons", dc.photons},
                    {"attenuation", dc.attenuation},
                    {"noise_enabled", dc.noise_enabled},
                    {"blobs", ap.blobs},
                    {"inserts", ap.inserts}};
    for (const DatasetPair& p : pairs) {
        m.outputs.push_back({p.hr_path, p.hr_crc32});
        m.outputs.push_back({p.lr_path, p.lr_crc32});
    }
    m.outputs.push_back({"manifest.json", file_crc(out_dir + "/manifest.json")});

    if (!o.phantom_freqs.empty()) {
        BarPhantomSpec ps;
        ps.frequencies = o.phantom_freqs;
        ps.orientation = dim_from_name(o.phantom_orientation);
        const BarPhantom phantom = gen_bar_phantom(ps, o.dims[0], o.dims[1], o.dims[2]);
        // The pair index one past the dataset keys the phantom's noise stream,
        // so it is independent of every training pair.
        const RngStream vol_rng =
            RngStream(o.seed).child(stream_tag::volume).child(static_cast<std::uint64_t>(o.n));
        const Volume phantom_lr = degrade(phantom.volume, dc, vol_rng);
        Provenance prov;
        prov.creator = "voxdiff simulate";
        prov.has_seed = true;
        prov.seed = o.seed;
        m.outputs.push_back(
            {"phantom_hr.f32", write_volume(phantom.volume, out_dir + "/phantom_hr.f32", prov)});
        m.outputs.push_back(
            {"phantom_lr.f32", write_volume(phantom_lr, out_dir + "/phantom_lr.f32", prov)});
        m.parameters["phantom_freqs"] = o.phantom_freqs;
        m.parameters["phantom_orientation"] = o.phantom_orientation;
    }

    m.elapsed_seconds = seconds_since(t0);
    write_run_manifest(m, out_dir + "/run_simulate.json");
    std::cout << "simulate: wrote " << pairs.size() << " pairs to " << out_dir << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainOpts {
    CommonOpts common;
    std::uint64_t seed = 0;
    std::string data;
    std::string plane;
    std::string out;
    int iterations = 300000;
    double learning_rate = 1e-4;
    int batch = 4;
    int patch = 0;
    std::string loss = "l1";
    int depth = 4;
    int hidden = 8;
    int kernel = 3;
    std::string schedule = "linear-beta";
    int T = 2000;
    double beta_start = 1e-6;
    double beta_end = 1e-2;
};

void add_train(CLI::App& app, TrainOpts& o, ConfigKeys& keys) {
    CLI::App* sub = app.add_subcommand("train", "train a slice denoiser on a dataset");
    sub->add_option("--seed", o.seed, "RNG seed for weights and batch sampling")->required();
    sub->add_option("--data", o.data, "dataset directory (from simulate)")->required();
    sub->add_option("--plane", o.plane, "in-plane or through-plane")->required();
    sub->add_option("--out", o.out, "checkpoint path (default: denoiser_<plane>.vdcp)");
    sub->add_option("--iterations", o.iterations, "Adam steps");
    sub->add_option("--learning-rate", o.learning_rate, "Adam learning rate");
    sub->add_option("--batch", o.batch, "patches per step");
    sub->add_option("--patch", o.patch, "square patch side; 0 fits the largest slice");
    sub->add_option("--loss", o.loss, "noise-prediction loss: l1 or l2");
    sub->add_option("--depth", o.depth, "conv layers");
    sub->add_option("--hidden", o.hidden, "hidden channels");
    sub->add_option("--kernel", o.kernel, "conv kernel size (odd)");
    sub->add_option("--schedule", o.schedule, "noise schedule kind");
    sub->add_option("--T", o.T, "diffusion steps");
    sub->add_option("--beta-start", o.beta_start, "schedule beta at t=1");
    sub->add_option("--beta-end", o.beta_end, "schedule beta at t=T");
    add_common(sub, o.common, keys);
    keys.bind("data", o.data);
    keys.bind("plane", o.plane);
    keys.bind("out", o.out);
    keys.bind("iterations", o.iterations);
    keys.bind("learning-rate", o.learning_rate);
    keys.bind("batch", o.batch);
    keys.bind("patch", o.patch);
    keys.bind("loss", o.loss);
    keys.bind("depth", o.depth);
    keys.bind("hidden", o.hidden);
    keys.bind("kernel", o.kernel);
    keys.bind("schedule", o.schedule);
    keys.bind("T", o.T);
    keys.bind("beta-start", o.beta_start);
    keys.bind("beta-end", o.beta_end);
}

PlaneKind plane_from_option(const std::string& name) {
    if (name == "in-plane") return PlaneKind::in_plane;
    if (name == "through-plane") return PlaneKind::through_plane;
    raise(ErrorCategory::invalid_argument,
          "--plane must be in-plane or through-plane, got '" + name + "'");
}

std::uint32_t params_crc(const ConvDenoiser& net) {
    return crc32(net.params().data(), net.params().size() * sizeof(double));
}

int run_train(const TrainOpts& o) {
    const auto t0 = std::chrono::steady_clock::now();
    check_common(o.common);
    const PlaneKind plane = plane_from_option(o.plane);

    const std::string manifest_path = o.data + "/manifest.json";
    json dataset;
    try {
        dataset = json::parse(read_file(manifest_path));
    } catch (const json::exception& e) {
        raise(ErrorCategory::io, manifest_path + ": malformed dataset manifest: " + e.what());
    }

    std::vector<SlicePair> slices;
    std::array<double, 2> window{-1.0, 1.0};
    bool have_window = false;
    std::vector<FileRef> inputs;
    try {
        require(dataset.at("format") == "voxdiff-dataset", ErrorCategory::io,
                manifest_path + ": not a dataset manifest");
        for (const json& p : dataset.at("pairs")) {
            const std::string hr_rel = p.at("hr").get<std::string>();
            const std::string lr_rel = p.at("lr").get<std::string>();
            const Volume hr = read_volume(o.data + "/" + hr_rel);
            const Volume lr = read_volume(o.data + "/" + lr_rel);
            require(hr.nx == lr.nx && hr.ny == lr.ny && hr.nz == lr.nz,
                    ErrorCategory::shape_mismatch, "HR/LR dims differ for pair " + hr_rel);
            if (!have_window) {
                window = hr.window;
                have_window = true;
            }
            require(hr.window == window && lr.window == window, ErrorCategory::io,
                    "training volumes disagree on the normalization window");
            inputs.push_back({o.data + "/" + hr_rel, p.at("hr_crc32").get<std::uint32_t>()});
            inputs.push_back({o.data + "/" + lr_rel, p.at("lr_crc32").get<std::uint32_t>()});

            const Volume hn = normalize(hr, window[0], window[1]);
            const Volume ln = normalize(lr, window[0], window[1]);
            const std::vector<Axis> axes = plane == PlaneKind::in_plane
                                               ? std::vector<Axis>{Axis::axial}
                                               : std::vector<Axis>{Axis::coronal, Axis::sagittal};
            for (Axis a : axes) {
                const int depth_count = hn.dim(slicing_dim(a));
                for (int k = 0; k < depth_count; ++k)
                    slices.push_back({extract_slice(ln, a, k), extract_slice(hn, a, k)});
            }
        }
    } catch (const json::exception& e) {
        raise(ErrorCategory::io, manifest_path + ": malformed dataset manifest: " + e.what());
    }
    require(!slices.empty(), ErrorCategory::missing_input,
            manifest_path + ": dataset holds no pairs");

    int patch = o.patch;
    if (patch == 0) {
        patch = std::numeric_limits<int>::max();
        for (const SlicePair& s : slices) patch = std::min({patch, s.hr.w, s.hr.h});
    }

    TrainConfig tc;
    tc.learning_rate = o.learning_rate;
    tc.batch_size = o.batch;
    tc.patch = patch;
    tc.iterations = o.iterations;
    if (o.loss == "l1")
        tc.loss_exponent = 1;
    else if (o.loss == "l2")
        tc.loss_exponent = 2;
    else
        raise(ErrorCategory::invalid_argument, "--loss must be l1 or l2, got '" + o.loss + "'");
    tc.seed = o.seed;

    const ScheduleSpec spec{o.schedule, o.T, o.beta_start, o.beta_end};
    const NoiseSchedule sched = build_schedule(spec);
    ConvDenoiser net({o.depth, o.hidden, o.kernel}, plane);
    net.init_weights(RngStream(o.seed).child(stream_tag::weights));
    const TrainResult result = train(net, slices, sched, tc);

    const std::string out_path =
        o.out.empty() ? default_out_dir() + "/denoiser_" + o.plane + ".vdcp" : o.out;
    ensure_parent_dir(out_path);
    Provenance prov;
    prov.creator = "voxdiff train";
    prov.has_seed = true;
    prov.seed = o.seed;
    const std::uint32_t weight_crc = write_checkpoint(net, spec, window, out_path, prov);

    std::string csv = "iteration,loss\n";
    for (std::size_t i = 0; i < result.loss.size(); ++i)
        csv += std::to_string(i + 1) + "," + format_g17(result.loss[i]) + "\n";
    const std::string csv_path = out_path + ".loss.csv";
    write_file_atomic(csv_path, csv);

    RunManifest m;
    m.command = "train";
    m.mode = o.plane;
    m.has_seed = true;
    m.seed = o.seed;
    m.threads = o.common.threads;
    m.parameters = {{"data", o.data},          {"plane", o.plane},
                    {"iterations", o.iterations}, {"learning_rate", o.learning_rate},
                    {"batch", o.batch},        {"patch", patch},
                    {"loss", o.loss},          {"depth", o.depth},
                    {"hidden", o.hidden},      {"kernel", o.kernel},
                    {"window", window},        {"slices", slices.size()}};
    m.has_schedule = true;
    m.schedule = spec;
    m.checkpoints.push_back({o.plane, out_path, weight_crc});
    m.inputs = inputs;
    m.outputs.push_back({out_path, file_crc(out_path)});
    m.outputs.push_back({csv_path, crc32(csv.data(), csv.size())});
    m.elapsed_seconds = seconds_since(t0);
    write_run_manifest(m, parent_dir(out_path) + "/run_train_" + o.plane + ".json");

    std::cout << "train: " << o.plane << " denoiser, " << slices.size() << " slices, final loss "
              << format_g17(result.loss.back()) << ", checkpoint " << out_path << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// infer

struct InferOpts {
    CommonOpts common;
    std::uint64_t seed = 0;
    std::string mode;
    std::string input;
    std::string in_plane;
    std::string through_plane;
    std::string out;
    std::vector<double> lambdas;
    std::vector<std::string> order;
    bool no_clip = false;
    std::string variance = "beta";
};

void add_infer(CLI::App& app, InferOpts& o, ConfigKeys& keys) {
    CLI::App* sub = app.add_subcommand("infer", "super-resolve a volume with trained denoisers");
    sub->add_option("--seed", o.seed, "RNG seed; fixes the whole reverse chain")->required();
    sub->add_option("--mode", o.mode,
                    "xyz-all, xyz-last, 2d-axial, 2d-coronal or 2d-sagittal (ddpm- prefix ok)")
        ->required();
    sub->add_option("--input", o.input, "LR volume to super-resolve")->required();
    sub->add_option("--in-plane", o.in_plane, "checkpoint for axial slices");
    sub->add_option("--through-plane", o.through_plane,
                    "checkpoint for coronal and sagittal slices");
    sub->add_option("--out", o.out, "output volume path (default: sr_<mode>.f32)");
    sub->add_option("--lambda", o.lambdas, "merge weights la,lc,ls for xyz-last")
        ->delimiter(',')
        ->expected(3);
    sub->add_option("--order", o.order, "axis rotation for xyz-all, e.g. axial,coronal,sagittal")
        ->delimiter(',');
    sub->add_flag("--no-clip", o.no_clip, "disable clipping of the y0 estimate");
    sub->add_option("--variance", o.variance, "reverse step noise: beta or posterior");
    add_common(sub, o.common, keys);
    keys.bind("mode", o.mode);
    keys.bind("input", o.input);
    keys.bind("in-plane", o.in_plane);
    keys.bind("through-plane", o.through_plane);
    keys.bind("out", o.out);
    keys.bind("lambda", o.lambdas);
    keys.bind("order", o.order);
    keys.bind("no-clip", o.no_clip);
    keys.bind("variance", o.variance);
}

int run_infer(const InferOpts& o) {
    const auto t0 = std::chrono::steady_clock::now();
    check_common(o.common);
    const ModeName ms = parse_mode_name(o.mode);

    JointConfig jc;
    jc.mode = ms.mode;
    jc.two_d_axis = ms.axis;
    if (!o.lambdas.empty()) {
        require(o.lambdas.size() == 3, ErrorCategory::invalid_argument,
                "--lambda needs exactly three values");
        std::copy(o.lambdas.begin(), o.lambdas.end(), jc.lambdas.begin());
    }
    if (!o.order.empty()) {
        jc.axis_order.clear();
        for (const std::string& name : o.order) jc.axis_order.push_back(axis_from_string(name));
    }
    jc.validate();

    // Which planes the run will touch decides which checkpoints are required.
    std::vector<Axis> used;
    switch (ms.mode) {
        case SampleMode::two_d_only: used = {ms.axis}; break;
        case SampleMode::xyz_all: used = jc.axis_order; break;
        case SampleMode::xyz_last: used = {Axis::axial, Axis::coronal, Axis::sagittal}; break;
    }
    const bool need_in = std::any_of(used.begin(), used.end(),
                                     [](Axis a) { return a == Axis::axial; });
    const bool need_th = std::any_of(used.begin(), used.end(),
                                     [](Axis a) { return a != Axis::axial; });
    require(!need_in || !o.in_plane.empty(), ErrorCategory::invalid_argument,
            "mode " + ms.canonical + " needs --in-plane");
    require(!need_th || !o.through_plane.empty(), ErrorCategory::invalid_argument,
            "mode " + ms.canonical + " needs --through-plane");

    std::optional<Checkpoint> in_ck, th_ck;
    if (!o.in_plane.empty()) {
        in_ck = read_checkpoint(o.in_plane);
        require(in_ck->net.plane() != PlaneKind::through_plane, ErrorCategory::config,
                o.in_plane + ": trained for through-plane slices, passed as --in-plane");
    }
    if (!o.through_plane.empty()) {
        th_ck = read_checkpoint(o.through_plane);
        require(th_ck->net.plane() != PlaneKind::in_plane, ErrorCategory::config,
                o.through_plane + ": trained for in-plane slices, passed as --through-plane");
    }
    const Checkpoint& ref_ck = in_ck ? *in_ck : *th_ck;
    if (in_ck && th_ck) {
        const ScheduleSpec &a = in_ck->schedule, &b = th_ck->schedule;
        require(a.kind == b.kind && a.T == b.T && a.beta_start == b.beta_start &&
                    a.beta_end == b.beta_end,
                ErrorCategory::config, "checkpoints were trained against different schedules");
        require(in_ck->window == th_ck->window, ErrorCategory::config,
                "checkpoints disagree on the normalization window");
    }

    const Volume lr = read_volume(o.input);
    require(lr.window == ref_ck.window, ErrorCategory::config,
            o.input + ": volume window differs from the checkpoint training window");
    const Volume x = normalize(lr, ref_ck.window[0], ref_ck.window[1]);

    DiffusionProcess process(build_schedule(ref_ck.schedule));
    process.clip_y0 = !o.no_clip;
    if (o.variance == "beta")
        process.variance = SamplerVariance::beta;
    else if (o.variance == "posterior")
        process.variance = SamplerVariance::posterior;
    else
        raise(ErrorCategory::invalid_argument,
              "--variance must be beta or posterior, got '" + o.variance + "'");

    DenoiserSet denoisers;
    if (in_ck) denoisers.in_plane = &in_ck->net;
    if (th_ck) denoisers.through_plane = &th_ck->net;
    SamplerStats stats;
    const Volume y = sample_joint(process, x, denoisers, RngStream(o.seed), jc, &stats);
    Volume sr = denormalize(y, ref_ck.window[0], ref_ck.window[1]);
    sr.spacing = lr.spacing;

    const std::string out_path =
        o.out.empty() ? default_out_dir() + "/sr_" + ms.canonical + ".f32" : o.out;
    ensure_parent_dir(out_path);
    Provenance prov;
    prov.creator = "voxdiff infer";
    prov.has_seed = true;
    prov.seed = o.seed;
    const std::uint32_t out_crc = write_volume(sr, out_path, prov);

    RunManifest m;
    m.command = "infer";
    m.mode = ms.canonical;
    m.has_seed = true;
    m.seed = o.seed;
    m.threads = o.common.threads;
    m.parameters = {{"input", o.input},
                    {"clip", !o.no_clip},
                    {"variance", o.variance},
                    {"axis", to_string(ms.axis)}};
    m.has_schedule = true;
    m.schedule = ref_ck.schedule;
    m.has_joint = ms.mode != SampleMode::two_d_only;
    m.lambdas = jc.lambdas;
    m.axis_order = jc.axis_order;
    if (in_ck) m.checkpoints.push_back({"in-plane", o.in_plane, params_crc(in_ck->net)});
    if (th_ck) m.checkpoints.push_back({"through-plane", o.through_plane, params_crc(th_ck->net)});
    m.inputs.push_back({o.input, file_crc(o.input)});
    m.outputs.push_back({out_path, out_crc});
    m.has_work = true;
    m.denoiser_calls = stats.denoiser_calls;
    m.slice_sweeps = stats.slice_sweeps;
    m.elapsed_seconds = seconds_since(t0);
    write_run_manifest(m, parent_dir(out_path) + "/run_infer_" + ms.canonical + ".json");

    std::cout << "infer: " << ms.canonical << " wrote " << out_path << " ("
              << stats.denoiser_calls << " denoiser calls)\n";
    return 0;
}

// ---------------------------------------------------------------------------
// eval-mtf

struct EvalOpts {
    CommonOpts common;
    std::string reference;
    std::vector<std::string> volumes;
    std::vector<std::string> names;
    std::vector<double> freqs;
    std::string orientation = "x";
    std::string plane = "in-plane";
    std::string out;
};

void add_eval(CLI::App& app, EvalOpts& o, ConfigKeys& keys) {
    CLI::App* sub =
        app.add_subcommand("eval-mtf", "measure bar-pattern modulation against a reference");
    sub->add_option("--reference", o.reference, "clean bar phantom volume")->required();
    sub->add_option("--volume", o.volumes, "volume(s) to measure")->required();
    sub->add_option("--names", o.names, "curve labels (default: file stems)")->delimiter(',');
    sub->add_option("--freqs", o.freqs, "bar frequencies matching the reference layout")
        ->delimiter(',')
        ->required();
    sub->add_option("--orientation", o.orientation, "bar direction: x, y or z");
    sub->add_option("--plane", o.plane, "label for the curves: in-plane or through-plane");
    sub->add_option("--out", o.out, "report directory (default: $VOXDIFF_OUT_DIR or .)");
    add_common(sub, o.common, keys);
    keys.bind("reference", o.reference);
    keys.bind("volume", o.volumes);
    keys.bind("names", o.names);
    keys.bind("freqs", o.freqs);
    keys.bind("orientation", o.orientation);
    keys.bind("plane", o.plane);
    keys.bind("out", o.out);
}

int run_eval(const EvalOpts& o) {
    const auto t0 = std::chrono::steady_clock::now();
    check_common(o.common);
    require(o.names.empty() || o.names.size() == o.volumes.size(),
            ErrorCategory::invalid_argument, "--names must match --volume count");
    const PlaneKind plane = plane_from_option(o.plane);

    const Volume reference = read_volume(o.reference);
    BarPhantomSpec spec;
    spec.frequencies = o.freqs;
    spec.orientation = dim_from_name(o.orientation);
    const std::vector<BarRoi> rois =
        bar_phantom_layout(spec, reference.nx, reference.ny, reference.nz);

    RunManifest m;
    m.command = "eval-mtf";
    m.threads = o.common.threads;
    m.inputs.push_back({o.reference, file_crc(o.reference)});
    std::vector<MtfCurve> curves;
    for (std::size_t i = 0; i < o.volumes.size(); ++i) {
        const std::string& path = o.volumes[i];
        const std::string name =
            i < o.names.size() ? o.names[i] : fs::path(path).stem().string();
        const Volume vol = read_volume(path);
        curves.push_back(mtf_curve(vol, reference, rois, spec.orientation, name, plane));
        m.inputs.push_back({path, file_crc(path)});
    }

    const std::string out_dir = o.out.empty() ? default_out_dir() : o.out;
    const std::vector<std::string> written = compare_report(curves, out_dir);
    for (const std::string& path : written) m.outputs.push_back({path, file_crc(path)});

    m.parameters = {{"reference", o.reference},
                    {"freqs", o.freqs},
                    {"orientation", o.orientation},
                    {"plane", o.plane}};
    m.elapsed_seconds = seconds_since(t0);
    write_run_manifest(m, out_dir + "/run_eval-mtf.json");

    std::cout << "eval-mtf: " << curves.size() << " curves over " << o.freqs.size()
              << " frequencies, report in " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"volumetric diffusion super-resolution pipeline"};
    app.require_subcommand(1);

    SimulateOpts sim_opts;
    TrainOpts train_opts;
    InferOpts infer_opts;
    EvalOpts eval_opts;
    ConfigKeys sim_keys, train_keys, infer_keys, eval_keys;
    add_simulate(app, sim_opts, sim_keys);
    add_train(app, train_opts, train_keys);
    add_infer(app, infer_opts, infer_keys);
    add_eval(app, eval_opts, eval_keys);
    CLI::App* version = app.add_subcommand("version", "print the version and exit");

    try {
        app.parse(argc, argv);
        if (version->parsed()) {
            std::cout << "voxdiff " << kVersionString << "\n";
            return 0;
        }
        if (sim_keys.sub->parsed()) {
            apply_config(sim_keys, sim_opts.common.config);
            return run_simulate(sim_opts);
        }
        if (train_keys.sub->parsed()) {
            apply_config(train_keys, train_opts.common.config);
            return run_train(train_opts);
        }
        if (infer_keys.sub->parsed()) {
            apply_config(infer_keys, infer_opts.common.config);
            return run_infer(infer_opts);
        }
        if (eval_keys.sub->parsed()) {
            apply_config(eval_keys, eval_opts.common.config);
            return run_eval(eval_opts);
        }
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 64;
    } catch (const voxdiff::Error& e) {
        std::cerr << "error [" << category_name(e.category()) << "]: " << e.what() << "\n";
        return exit_code(e.category());
    } catch (const std::exception& e) {
        std::cerr << "error [internal]: " << e.what() << "\n";
        return 70;
    }
    return 0;
}
