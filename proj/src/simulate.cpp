#include "voxdiff/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>

#include <json.hpp>

#include "voxdiff/io.hpp"

namespace voxdiff {

namespace {

constexpr double kPi = std::numbers::pi;

bool roi_inside_dims(const Roi& roi, const std::array<int, 3>& dims) {
    for (int a = 0; a < 3; ++a) {
        const auto ai = static_cast<std::size_t>(a);
        if (roi.lo[ai] < 0 || roi.size[ai] <= 0 || roi.lo[ai] + roi.size[ai] > dims[ai])
            return false;
    }
    return true;
}

// Inverse DFT of the Gaussian modulation exp(-2 pi^2 sigma^2 f^2) sampled at
// the length-n DFT frequencies. Circular convolution with this kernel applies
// exactly that modulation to every frequency component.
std::vector<double> modulation_kernel(int n, double sigma) {
    const double c = 2.0 * kPi * kPi * sigma * sigma;
    std::vector<double> kernel(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int q = 0; q < n; ++q) {
            const int qs = q <= n / 2 ? q : q - n;
            const double f = static_cast<double>(qs) / n;
            acc += std::exp(-c * f * f) * std::cos(2.0 * kPi * q * j / n);
        }
        kernel[static_cast<std::size_t>(j)] = acc / n;
    }
    return kernel;
}

Volume convolve_axis(const Volume& in, const std::vector<double>& kernel, int axis) {
    const int n[3] = {in.nx, in.ny, in.nz};
    const std::size_t stride[3] = {1, static_cast<std::size_t>(in.nx),
                                   static_cast<std::size_t>(in.nx) * in.ny};
    const int b = (axis + 1) % 3, c = (axis + 2) % 3;
    const int len = n[axis];
    Volume out = in;
    std::vector<double> line(static_cast<std::size_t>(len));
    for (int jc = 0; jc < n[c]; ++jc)
        for (int jb = 0; jb < n[b]; ++jb) {
            const std::size_t base = stride[b] * static_cast<std::size_t>(jb) +
                                     stride[c] * static_cast<std::size_t>(jc);
            for (int i = 0; i < len; ++i)
                line[static_cast<std::size_t>(i)] = in.data[base + stride[axis] * i];
            for (int i = 0; i < len; ++i) {
                double acc = 0.0;
                for (int j = 0; j < len; ++j) {
                    int src = i - j;
                    if (src < 0) src += len;
                    acc += kernel[static_cast<std::size_t>(j)] *
                           line[static_cast<std::size_t>(src)];
                }
                out.data[base + stride[axis] * i] = acc;
            }
        }
    return out;
}

}  // namespace

void DegradeConfig::validate() const {
    for (double s : sigma)
        require(std::isfinite(s) && s >= 0.0, ErrorCategory::config,
                "blur sigma must be finite and nonnegative");
    double sum = 0.0;
    for (double k : crosstalk) {
        require(std::isfinite(k) && k >= 0.0, ErrorCategory::config,
                "crosstalk kernel entries must be finite and nonnegative");
        sum += k;
    }
    require(std::fabs(sum - 1.0) <= 1e-9, ErrorCategory::config,
            "crosstalk kernel must sum to 1");
    require(std::isfinite(photons) && photons > 0.0, ErrorCategory::config,
            "photon count must be positive");
    require(std::isfinite(attenuation) && attenuation > 0.0, ErrorCategory::config,
            "attenuation constant must be positive");
}

DegradeConfig degrade_from_pitch(double in_plane_ratio, double through_plane_ratio, double k) {
    require(in_plane_ratio >= 1.0 && through_plane_ratio >= 1.0, ErrorCategory::config,
            "pitch ratios are LR over HR and must be >= 1");
    require(k >= 0.0, ErrorCategory::config, "sigma scale must be nonnegative");
    DegradeConfig cfg;
    const double s_xy = k * (in_plane_ratio - 1.0);
    const double s_z = k * (through_plane_ratio - 1.0);
    cfg.sigma = {s_xy, s_xy, s_z};
    return cfg;
}

const std::array<double, 9>& identity_crosstalk() {
    static const std::array<double, 9> id{0, 0, 0, 0, 1, 0, 0, 0, 0};
    return id;
}

void BarPhantomSpec::validate(const std::array<int, 3>& dims) const {
    require(!frequencies.empty(), ErrorCategory::invalid_argument,
            "bar phantom needs at least one frequency");
    const int n_orient = dims[static_cast<std::size_t>(dim_index(orientation))];
    for (double f : frequencies) {
        require(std::isfinite(f) && f > 0.0 && f < 0.5, ErrorCategory::invalid_argument,
                "bar frequency must lie in (0, 0.5) cycles/voxel");
        require(static_cast<double>(n_orient) * f >= 3.0, ErrorCategory::invalid_argument,
                "volume too short for 3 full bar periods");
    }
    require(std::isfinite(amplitude) && std::isfinite(background),
            ErrorCategory::invalid_argument, "bar amplitude/background must be finite");
    if (!rois.empty()) {
        require(rois.size() == frequencies.size(), ErrorCategory::invalid_argument,
                "need one ROI per frequency");
        for (const Roi& roi : rois)
            require(roi_inside_dims(roi, dims), ErrorCategory::invalid_argument,
                    "bar phantom ROI extends outside the volume");
    } else {
        const int stack = orientation == Dim::x ? 1 : 0;
        require(dims[static_cast<std::size_t>(stack)] >=
                    static_cast<int>(frequencies.size()),
                ErrorCategory::invalid_argument,
                "volume too thin to stack one group per frequency");
    }
}

std::vector<BarRoi> bar_phantom_layout(const BarPhantomSpec& spec, int nx, int ny, int nz) {
    require(nx > 0 && ny > 0 && nz > 0, ErrorCategory::invalid_argument,
            "bar phantom dims must be positive");
    const std::array<int, 3> dims{nx, ny, nz};
    spec.validate(dims);

    std::vector<BarRoi> rois;
    if (!spec.rois.empty()) {
        for (std::size_t g = 0; g < spec.rois.size(); ++g)
            rois.push_back({spec.frequencies[g], spec.rois[g]});
        return rois;
    }

    const int o = dim_index(spec.orientation);
    const int s = spec.orientation == Dim::x ? 1 : 0;
    const int G = static_cast<int>(spec.frequencies.size());
    const int thickness = dims[static_cast<std::size_t>(s)] / G;
    const int n_o = dims[static_cast<std::size_t>(o)];
    for (int g = 0; g < G; ++g) {
        const double f = spec.frequencies[static_cast<std::size_t>(g)];
        const int start = g * thickness;
        const int extent = (g == G - 1 ? dims[static_cast<std::size_t>(s)] : start + thickness) -
                           start;
        const int inset = extent >= 8 ? 3 : (extent >= 3 ? 1 : 0);
        const int periods = static_cast<int>(std::floor(n_o * f + 1e-9));
        const int span = static_cast<int>(std::floor(periods / f + 1e-9));

        Roi roi;
        roi.lo = {0, 0, 0};
        roi.size = {dims[0], dims[1], dims[2]};
        roi.lo[static_cast<std::size_t>(s)] = start + inset;
        roi.size[static_cast<std::size_t>(s)] = extent - 2 * inset;
        roi.lo[static_cast<std::size_t>(o)] = (n_o - span) / 2;
        roi.size[static_cast<std::size_t>(o)] = span;
        rois.push_back({f, roi});
    }
    return rois;
}

BarPhantom gen_bar_phantom(const BarPhantomSpec& spec, int nx, int ny, int nz) {
    BarPhantom out;
    out.orientation = spec.orientation;
    out.rois = bar_phantom_layout(spec, nx, ny, nz);
    out.volume = Volume(nx, ny, nz, spec.background);

    const int o = dim_index(spec.orientation);
    const auto draw = [&](int x, int y, int z, double f) {
        const int coord[3] = {x, y, z};
        if (std::fmod(coord[o] * f, 1.0) < 0.5)
            out.volume.at(x, y, z) = spec.background + spec.amplitude;
    };

    if (!spec.rois.empty()) {
        // Caller-specified layout: each frequency's bars fill its ROI box,
        // everything else stays at background.
        for (std::size_t g = 0; g < spec.rois.size(); ++g) {
            const Roi& roi = spec.rois[g];
            const double f = spec.frequencies[g];
            for (int z = roi.lo[2]; z < roi.lo[2] + roi.size[2]; ++z)
                for (int y = roi.lo[1]; y < roi.lo[1] + roi.size[1]; ++y)
                    for (int x = roi.lo[0]; x < roi.lo[0] + roi.size[0]; ++x)
                        draw(x, y, z, f);
        }
        return out;
    }

    // Automatic layout: one slab per frequency along the stacking direction,
    // bars spanning the full volume inside each slab.
    const int s = spec.orientation == Dim::x ? 1 : 0;
    const int G = static_cast<int>(spec.frequencies.size());
    const std::array<int, 3> dims{nx, ny, nz};
    const int thickness = dims[static_cast<std::size_t>(s)] / G;
    for (int z = 0; z < nz; ++z)
        for (int y = 0; y < ny; ++y)
            for (int x = 0; x < nx; ++x) {
                const int coord[3] = {x, y, z};
                const int g = std::min(coord[s] / thickness, G - 1);
                draw(x, y, z, spec.frequencies[static_cast<std::size_t>(g)]);
            }
    return out;
}

void AnatomyParams::validate() const {
    require(blobs >= 0 && inserts >= 0, ErrorCategory::config,
            "structure counts must be nonnegative");
    require(blob_min_radius > 0 && blob_max_radius >= blob_min_radius,
            ErrorCategory::config, "blob radius range invalid");
    require(insert_min_radius > 0 && insert_max_radius >= insert_min_radius,
            ErrorCategory::config, "insert radius range invalid");
}

Volume gen_anatomy_like(int nx, int ny, int nz, const RngStream& rng,
                        const AnatomyParams& params) {
    require(nx > 0 && ny > 0 && nz > 0, ErrorCategory::invalid_argument,
            "volume dims must be positive");
    params.validate();
    RngStream seq = rng;
    Volume vol(nx, ny, nz, 0.0);

    for (int b = 0; b < params.blobs; ++b) {
        const double cx = seq.uniform01() * nx;
        const double cy = seq.uniform01() * ny;
        const double cz = seq.uniform01() * nz;
        const double span = params.blob_max_radius - params.blob_min_radius;
        const double rx = params.blob_min_radius + seq.uniform01() * span;
        const double ry = params.blob_min_radius + seq.uniform01() * span;
        const double rz = params.blob_min_radius + seq.uniform01() * span;
        const double amp = (seq.uniform01() < 0.5 ? -1.0 : 1.0) *
                           (0.3 + 0.7 * seq.uniform01());
        for (int z = 0; z < nz; ++z)
            for (int y = 0; y < ny; ++y)
                for (int x = 0; x < nx; ++x) {
                    const double dx = (x - cx) / rx, dy = (y - cy) / ry, dz = (z - cz) / rz;
                    vol.at(x, y, z) += amp * std::exp(-(dx * dx + dy * dy + dz * dz));
                }
    }
    for (int b = 0; b < params.inserts; ++b) {
        const double cx = seq.uniform01() * nx;
        const double cy = seq.uniform01() * ny;
        const double cz = seq.uniform01() * nz;
        const double span = params.insert_max_radius - params.insert_min_radius;
        const double r = params.insert_min_radius + seq.uniform01() * span;
        const double amp = (seq.uniform01() < 0.5 ? -1.0 : 1.0) *
                           (0.4 + 0.6 * seq.uniform01());
        const double r2 = r * r;
        for (int z = 0; z < nz; ++z)
            for (int y = 0; y < ny; ++y)
                for (int x = 0; x < nx; ++x) {
                    const double dx = x - cx, dy = y - cy, dz = z - cz;
                    if (dx * dx + dy * dy + dz * dz <= r2) vol.at(x, y, z) += amp;
                }
    }

    const auto [lo_it, hi_it] = std::minmax_element(vol.data.begin(), vol.data.end());
    const double lo = *lo_it, hi = *hi_it;
    if (hi - lo < 1e-12) {
        std::fill(vol.data.begin(), vol.data.end(), 0.0);
        return vol;
    }
    for (double& v : vol.data) v = 2.0 * (v - lo) / (hi - lo) - 1.0;
    return vol;
}

Volume gaussian_blur_periodic(const Volume& vol, const std::array<double, 3>& sigma) {
    vol.validate("gaussian_blur_periodic");
    for (double s : sigma)
        require(std::isfinite(s) && s >= 0.0, ErrorCategory::invalid_argument,
                "blur sigma must be finite and nonnegative");
    const int n[3] = {vol.nx, vol.ny, vol.nz};
    Volume out = vol;
    for (int a = 0; a < 3; ++a) {
        if (sigma[static_cast<std::size_t>(a)] == 0.0 || n[a] == 1) continue;
        out = convolve_axis(out, modulation_kernel(n[a], sigma[static_cast<std::size_t>(a)]), a);
    }
    return out;
}

Volume crosstalk_2d(const Volume& vol, const std::array<double, 9>& kernel) {
    vol.validate("crosstalk_2d");
    if (kernel == identity_crosstalk()) return vol;
    Volume out = vol;
    for (int z = 0; z < vol.nz; ++z)
        for (int y = 0; y < vol.ny; ++y)
            for (int x = 0; x < vol.nx; ++x) {
                double acc = 0.0;
                for (int r = 0; r < 3; ++r) {
                    int yy = y + r - 1;
                    yy = yy < 0 ? yy + vol.ny : (yy >= vol.ny ? yy - vol.ny : yy);
                    for (int c = 0; c < 3; ++c) {
                        int xx = x + c - 1;
                        xx = xx < 0 ? xx + vol.nx : (xx >= vol.nx ? xx - vol.nx : xx);
                        acc += kernel[static_cast<std::size_t>(r * 3 + c)] * vol.at(xx, yy, z);
                    }
                }
                out.at(x, y, z) = acc;
            }
    return out;
}

Volume degrade(const Volume& hr, const DegradeConfig& cfg, const RngStream& rng) {
    cfg.validate();
    hr.validate("degrade input");
    Volume out = gaussian_blur_periodic(hr, cfg.sigma);
    out = crosstalk_2d(out, cfg.crosstalk);
    if (cfg.noise_enabled) {
        RngStream seq = rng.child(stream_tag::noise);
        for (double& v : out.data) {
            const double counts_mean = cfg.photons * std::exp(-cfg.attenuation * v);
            const double counts =
                std::max(static_cast<double>(seq.poisson(counts_mean)), 0.5);
            v = -std::log(counts / cfg.photons) / cfg.attenuation;
        }
    }
    return out;
}

std::vector<DatasetPair> make_dataset(int n_volumes, int nx, int ny, int nz,
                                      const DegradeConfig& cfg, std::uint64_t seed,
                                      const std::string& out_dir,
                                      const AnatomyParams& params) {
    require(n_volumes >= 0, ErrorCategory::invalid_argument, "volume count must be >= 0");
    require(nx > 0 && ny > 0 && nz > 0, ErrorCategory::invalid_argument,
            "volume dims must be positive");
    cfg.validate();
    params.validate();
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) raise(ErrorCategory::io, "cannot create " + out_dir + ": " + ec.message());

    nlohmann::json manifest;
    manifest["format"] = "voxdiff-dataset";
    manifest["version"] = 1;
    manifest["seed"] = seed;
    manifest["dims"] = {nx, ny, nz};
    manifest["count"] = n_volumes;
    manifest["degrade"] = {{"sigma", cfg.sigma},
                           {"crosstalk", cfg.crosstalk},
                           {"photons", cfg.photons},
                           {"attenuation", cfg.attenuation},
                           {"noise_enabled", cfg.noise_enabled}};
    manifest["pairs"] = nlohmann::json::array();

    Provenance prov;
    prov.creator = "voxdiff simulate";
    prov.has_seed = true;
    prov.seed = seed;

    const RngStream root(seed);
    std::vector<DatasetPair> pairs;
    for (int i = 0; i < n_volumes; ++i) {
        const RngStream vol_rng =
            root.child(stream_tag::volume).child(static_cast<std::uint64_t>(i));
        const Volume hr = gen_anatomy_like(nx, ny, nz, vol_rng, params);
        const Volume lr = degrade(hr, cfg, vol_rng);

        char hr_name[32], lr_name[32];
        std::snprintf(hr_name, sizeof(hr_name), "hr_%03d.f32", i);
        std::snprintf(lr_name, sizeof(lr_name), "lr_%03d.f32", i);
        DatasetPair pair;
        pair.index = i;
        pair.hr_path = hr_name;
        pair.lr_path = lr_name;
        pair.hr_crc32 = write_volume(hr, out_dir + "/" + hr_name, prov);
        pair.lr_crc32 = write_volume(lr, out_dir + "/" + lr_name, prov);
        pairs.push_back(pair);
        manifest["pairs"].push_back({{"index", i},
                                     {"hr", pair.hr_path},
                                     {"lr", pair.lr_path},
                                     {"hr_crc32", pair.hr_crc32},
                                     {"lr_crc32", pair.lr_crc32}});
    }
    write_file_atomic(out_dir + "/manifest.json", manifest.dump(2) + "\n");
    return pairs;
}

}  // namespace voxdiff
