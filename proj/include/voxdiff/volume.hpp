#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "voxdiff/errors.hpp"
#include "voxdiff/rng.hpp"

namespace voxdiff {

// Slicing families. An axis names the dimension that is iterated over when a
// volume is cut into 2D slices:
//   axial    -> z   (slices span x-y, the in-plane orientation)
//   coronal  -> y   (slices span x-z)
//   sagittal -> x   (slices span y-z)
enum class Axis { axial, coronal, sagittal };

// A single coordinate direction, used for bar orientations and MTF profiles.
enum class Dim { x, y, z };

const char* to_string(Axis axis);
const char* to_string(Dim dim);
Axis axis_from_string(const std::string& name);

// The dimension a slicing axis iterates over.
inline Dim slicing_dim(Axis axis) {
    switch (axis) {
        case Axis::axial: return Dim::z;
        case Axis::coronal: return Dim::y;
        default: return Dim::x;
    }
}

inline int dim_index(Dim d) { return d == Dim::x ? 0 : (d == Dim::y ? 1 : 2); }

struct Volume {
    int nx = 0, ny = 0, nz = 0;
    std::array<double, 3> spacing{1.0, 1.0, 1.0};
    // Intensity window this volume's normalized values correspond to.
    std::array<double, 2> window{-1.0, 1.0};
    std::vector<double> data;  // x-fastest linear layout

    Volume() = default;
    Volume(int nx_, int ny_, int nz_, double fill = 0.0);

    std::size_t size() const noexcept { return data.size(); }
    std::size_t index(int x, int y, int z) const noexcept {
        return static_cast<std::size_t>((z * ny + y) * static_cast<long long>(nx) + x);
    }
    double& at(int x, int y, int z) { return data[index(x, y, z)]; }
    double at(int x, int y, int z) const { return data[index(x, y, z)]; }

    int dim(Dim d) const noexcept { return d == Dim::x ? nx : (d == Dim::y ? ny : nz); }

    // Throws on inconsistent dims, byte count, or non-finite values.
    void validate(const char* context = "volume") const;
};

// A 2D slice cut from a volume. Storage is w-fastest; the (w, h) axes are the
// remaining coordinate directions in x-before-y-before-z order:
//   axial    slice: w = x, h = y
//   coronal  slice: w = x, h = z
//   sagittal slice: w = y, h = z
struct Slice2D {
    Axis axis = Axis::axial;
    int index = 0;
    int w = 0, h = 0;
    std::vector<double> data;

    Slice2D() = default;
    Slice2D(int w_, int h_, double fill = 0.0, Axis axis_ = Axis::axial, int index_ = 0);

    std::size_t size() const noexcept { return data.size(); }
    double& at(int i, int j) { return data[static_cast<std::size_t>(j) * w + i]; }
    double at(int i, int j) const { return data[static_cast<std::size_t>(j) * w + i]; }

    void validate(const char* context = "slice") const;
};

inline bool same_shape(const Slice2D& a, const Slice2D& b) { return a.w == b.w && a.h == b.h; }

// Axis-aligned box, lo inclusive, size in voxels.
struct Roi {
    std::array<int, 3> lo{0, 0, 0};
    std::array<int, 3> size{0, 0, 0};
};

bool roi_inside(const Roi& roi, const Volume& vol);

// Cuts vol into slices ordered by index along the slicing dimension.
std::vector<Slice2D> extract_slices(const Volume& vol, Axis axis);

Slice2D extract_slice(const Volume& vol, Axis axis, int index);
void insert_slice(Volume& vol, const Slice2D& slice);

// Inverse of extract_slices. Placement is index-driven, so any permutation of
// a complete slice set reassembles identically. Throws on mismatched dims or
// an incomplete/duplicated index range.
Volume assemble_slices(const std::vector<Slice2D>& slices, Axis axis,
                       std::array<double, 3> spacing = {1.0, 1.0, 1.0},
                       std::array<double, 2> window = {-1.0, 1.0});

// Affine map of [lo, hi] onto [-1, 1]. The result records {lo, hi} as its
// window; denormalize applies the inverse map.
Volume normalize(const Volume& vol, double lo, double hi);
Volume denormalize(const Volume& vol, double lo, double hi);

// Per-voxel standard normal field keyed by voxel coordinate: the value at
// (x, y, z) depends only on (stream key, linear index), never on traversal
// or thread order.
Volume normal_volume(int nx, int ny, int nz, const RngStream& stream);
Slice2D normal_slice(int w, int h, const RngStream& stream);

}  // namespace voxdiff
