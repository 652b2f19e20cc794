#include "voxdiff/volume.hpp"

#include <algorithm>
#include <cmath>

namespace voxdiff {

const char* to_string(Axis axis) {
    switch (axis) {
        case Axis::axial: return "axial";
        case Axis::coronal: return "coronal";
        default: return "sagittal";
    }
}

const char* to_string(Dim dim) {
    switch (dim) {
        case Dim::x: return "x";
        case Dim::y: return "y";
        default: return "z";
    }
}

Axis axis_from_string(const std::string& name) {
    if (name == "axial") return Axis::axial;
    if (name == "coronal") return Axis::coronal;
    if (name == "sagittal") return Axis::sagittal;
    raise(ErrorCategory::invalid_argument, "unknown axis name: " + name);
}

Volume::Volume(int nx_, int ny_, int nz_, double fill)
    : nx(nx_), ny(ny_), nz(nz_) {
    require(nx > 0 && ny > 0 && nz > 0, ErrorCategory::invalid_argument,
            "volume dims must be positive");
    data.assign(static_cast<std::size_t>(nx) * ny * nz, fill);
}

void Volume::validate(const char* context) const {
    require(nx > 0 && ny > 0 && nz > 0, ErrorCategory::invalid_argument,
            std::string(context) + ": dims must be positive");
    require(data.size() == static_cast<std::size_t>(nx) * ny * nz,
            ErrorCategory::shape_mismatch,
            std::string(context) + ": data length does not match dims");
    require(spacing[0] > 0 && spacing[1] > 0 && spacing[2] > 0,
            ErrorCategory::invalid_argument, std::string(context) + ": spacing must be positive");
    for (double v : data) {
        if (!std::isfinite(v))
            raise(ErrorCategory::numeric, std::string(context) + ": non-finite value");
    }
}

Slice2D::Slice2D(int w_, int h_, double fill, Axis axis_, int index_)
    : axis(axis_), index(index_), w(w_), h(h_) {
    require(w > 0 && h > 0, ErrorCategory::invalid_argument, "slice dims must be positive");
    data.assign(static_cast<std::size_t>(w) * h, fill);
}

void Slice2D::validate(const char* context) const {
    require(w > 0 && h > 0, ErrorCategory::invalid_argument,
            std::string(context) + ": dims must be positive");
    require(data.size() == static_cast<std::size_t>(w) * h, ErrorCategory::shape_mismatch,
            std::string(context) + ": data length does not match dims");
    for (double v : data) {
        if (!std::isfinite(v))
            raise(ErrorCategory::numeric, std::string(context) + ": non-finite value");
    }
}

bool roi_inside(const Roi& roi, const Volume& vol) {
    const int hi[3] = {roi.lo[0] + roi.size[0], roi.lo[1] + roi.size[1], roi.lo[2] + roi.size[2]};
    return roi.lo[0] >= 0 && roi.lo[1] >= 0 && roi.lo[2] >= 0 && roi.size[0] > 0 &&
           roi.size[1] > 0 && roi.size[2] > 0 && hi[0] <= vol.nx && hi[1] <= vol.ny &&
           hi[2] <= vol.nz;
}

namespace {

void slice_dims(const Volume& vol, Axis axis, int& w, int& h) {
    switch (axis) {
        case Axis::axial: w = vol.nx; h = vol.ny; break;
        case Axis::coronal: w = vol.nx; h = vol.nz; break;
        default: w = vol.ny; h = vol.nz; break;
    }
}

}  // namespace

Slice2D extract_slice(const Volume& vol, Axis axis, int index) {
    int w, h;
    slice_dims(vol, axis, w, h);
    const int depth = vol.dim(slicing_dim(axis));
    require(index >= 0 && index < depth, ErrorCategory::invalid_argument,
            "slice index out of range");
    Slice2D s(w, h, 0.0, axis, index);
    switch (axis) {
        case Axis::axial: {
            const double* src = vol.data.data() + vol.index(0, 0, index);
            std::copy(src, src + s.size(), s.data.begin());
            break;
        }
        case Axis::coronal:
            for (int z = 0; z < vol.nz; ++z) {
                const double* src = vol.data.data() + vol.index(0, index, z);
                std::copy(src, src + vol.nx, s.data.begin() + static_cast<std::size_t>(z) * vol.nx);
            }
            break;
        default:
            for (int z = 0; z < vol.nz; ++z)
                for (int y = 0; y < vol.ny; ++y) s.at(y, z) = vol.at(index, y, z);
            break;
    }
    return s;
}

void insert_slice(Volume& vol, const Slice2D& slice) {
    int w, h;
    slice_dims(vol, slice.axis, w, h);
    require(slice.w == w && slice.h == h, ErrorCategory::shape_mismatch,
            "slice dims do not match volume");
    const int depth = vol.dim(slicing_dim(slice.axis));
    require(slice.index >= 0 && slice.index < depth, ErrorCategory::invalid_argument,
            "slice index out of range");
    switch (slice.axis) {
        case Axis::axial:
            std::copy(slice.data.begin(), slice.data.end(),
                      vol.data.begin() + vol.index(0, 0, slice.index));
            break;
        case Axis::coronal:
            for (int z = 0; z < vol.nz; ++z) {
                const double* src = slice.data.data() + static_cast<std::size_t>(z) * vol.nx;
                std::copy(src, src + vol.nx, vol.data.begin() + vol.index(0, slice.index, z));
            }
            break;
        default:
            for (int z = 0; z < vol.nz; ++z)
                for (int y = 0; y < vol.ny; ++y) vol.at(slice.index, y, z) = slice.at(y, z);
            break;
    }
}

std::vector<Slice2D> extract_slices(const Volume& vol, Axis axis) {
    const int depth = vol.dim(slicing_dim(axis));
    std::vector<Slice2D> out;
    out.reserve(static_cast<std::size_t>(depth));
    for (int k = 0; k < depth; ++k) out.push_back(extract_slice(vol, axis, k));
    return out;
}

Volume assemble_slices(const std::vector<Slice2D>& slices, Axis axis,
                       std::array<double, 3> spacing, std::array<double, 2> window) {
    require(!slices.empty(), ErrorCategory::invalid_argument, "no slices to assemble");
    const int w = slices.front().w;
    const int h = slices.front().h;
    const int depth = static_cast<int>(slices.size());
    int nx, ny, nz;
    switch (axis) {
        case Axis::axial: nx = w; ny = h; nz = depth; break;
        case Axis::coronal: nx = w; ny = depth; nz = h; break;
        default: nx = depth; ny = w; nz = h; break;
    }
    Volume vol(nx, ny, nz);
    vol.spacing = spacing;
    vol.window = window;
    std::vector<char> seen(static_cast<std::size_t>(depth), 0);
    for (const Slice2D& s : slices) {
        require(s.axis == axis, ErrorCategory::invalid_argument,
                "slice axis does not match assembly axis");
        require(s.w == w && s.h == h, ErrorCategory::shape_mismatch,
                "slices do not share dims");
        require(s.index >= 0 && s.index < depth, ErrorCategory::invalid_argument,
                "slice index out of range for assembly");
        require(!seen[static_cast<std::size_t>(s.index)], ErrorCategory::invalid_argument,
                "duplicate slice index");
        seen[static_cast<std::size_t>(s.index)] = 1;
        insert_slice(vol, s);
    }
    return vol;
}

Volume normalize(const Volume& vol, double lo, double hi) {
    require(hi > lo, ErrorCategory::invalid_argument, "normalize: degenerate range (hi <= lo)");
    Volume out = vol;
    const double scale = 2.0 / (hi - lo);
    for (double& v : out.data) v = (v - lo) * scale - 1.0;
    out.window = {lo, hi};
    return out;
}

Volume denormalize(const Volume& vol, double lo, double hi) {
    require(hi > lo, ErrorCategory::invalid_argument, "denormalize: degenerate range (hi <= lo)");
    Volume out = vol;
    const double scale = (hi - lo) / 2.0;
    for (double& v : out.data) v = (v + 1.0) * scale + lo;
    out.window = {lo, hi};
    return out;
}

Volume normal_volume(int nx, int ny, int nz, const RngStream& stream) {
    Volume vol(nx, ny, nz);
    const std::size_t n = vol.size();
    for (std::size_t i = 0; i < n; ++i) vol.data[i] = stream.normal_at(i);
    return vol;
}

Slice2D normal_slice(int w, int h, const RngStream& stream) {
    Slice2D s(w, h);
    const std::size_t n = s.size();
    for (std::size_t i = 0; i < n; ++i) s.data[i] = stream.normal_at(i);
    return s;
}

}  // namespace voxdiff
