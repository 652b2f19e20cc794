#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "voxdiff/rng.hpp"
#include "voxdiff/volume.hpp"

using namespace voxdiff;

namespace {

Volume random_volume(int nx, int ny, int nz, std::uint64_t seed) {
    RngStream rng(seed);
    Volume v(nx, ny, nz);
    for (double& x : v.data) x = 2.0 * rng.uniform01() - 1.0;
    return v;
}

}  // namespace

TEST_CASE("volume indexing is x-fastest") {
    Volume v(3, 4, 5);
    CHECK(v.index(0, 0, 0) == 0);
    CHECK(v.index(1, 0, 0) == 1);
    CHECK(v.index(0, 1, 0) == 3);
    CHECK(v.index(0, 0, 1) == 12);
    CHECK(v.index(2, 3, 4) == v.size() - 1);
}

TEST_CASE("extract_slices counts and dims per axis") {
    Volume v = random_volume(4, 4, 2, 11);

    auto axial = extract_slices(v, Axis::axial);
    REQUIRE(axial.size() == 2);
    CHECK(axial[0].w == 4);
    CHECK(axial[0].h == 4);

    auto sagittal = extract_slices(v, Axis::sagittal);
    REQUIRE(sagittal.size() == 4);
    CHECK(sagittal[0].w == 4);
    CHECK(sagittal[0].h == 2);

    auto coronal = extract_slices(v, Axis::coronal);
    REQUIRE(coronal.size() == 4);
    CHECK(coronal[0].w == 4);
    CHECK(coronal[0].h == 2);
}

TEST_CASE("slice values address the right voxels") {
    Volume v = random_volume(3, 4, 5, 7);
    Slice2D ax = extract_slice(v, Axis::axial, 2);
    CHECK(ax.at(1, 3) == v.at(1, 3, 2));
    Slice2D co = extract_slice(v, Axis::coronal, 1);
    CHECK(co.at(2, 4) == v.at(2, 1, 4));
    Slice2D sa = extract_slice(v, Axis::sagittal, 0);
    CHECK(sa.at(3, 4) == v.at(0, 3, 4));
}

TEST_CASE("assemble inverts extract bit-exactly on every axis") {
    Volume v = random_volume(5, 3, 7, 42);
    for (Axis a : {Axis::axial, Axis::coronal, Axis::sagittal}) {
        Volume back = assemble_slices(extract_slices(v, a), a, v.spacing, v.window);
        REQUIRE(back.nx == v.nx);
        REQUIRE(back.ny == v.ny);
        REQUIRE(back.nz == v.nz);
        CHECK(back.data == v.data);
    }
}

TEST_CASE("assemble handles degenerate shapes") {
    for (Axis a : {Axis::axial, Axis::coronal, Axis::sagittal}) {
        Volume v = random_volume(1, 1, 1, 3);
        Volume back = assemble_slices(extract_slices(v, a), a);
        CHECK(back.data == v.data);
    }
    Volume thin = random_volume(6, 1, 4, 9);
    auto slices = extract_slices(thin, Axis::coronal);
    REQUIRE(slices.size() == 1);
    CHECK(assemble_slices(slices, Axis::coronal).data == thin.data);
}

TEST_CASE("permuted slice list reassembles by index") {
    Volume v = random_volume(4, 5, 6, 13);
    auto slices = extract_slices(v, Axis::axial);
    std::reverse(slices.begin(), slices.end());
    std::swap(slices[0], slices[3]);
    Volume back = assemble_slices(slices, Axis::axial);
    CHECK(back.data == v.data);
}

TEST_CASE("assemble rejects malformed input") {
    Volume v = random_volume(4, 4, 3, 5);
    auto slices = extract_slices(v, Axis::axial);

    // Dropping a middle slice leaves a hole: index 2 is out of range for the
    // two-slice stack that remains.
    auto missing = slices;
    missing.erase(missing.begin() + 1);
    CHECK_THROWS_AS(assemble_slices(missing, Axis::axial), Error);

    auto dup = slices;
    dup[1].index = 0;
    CHECK_THROWS_AS(assemble_slices(dup, Axis::axial), Error);

    auto mismixed = slices;
    mismixed[1] = extract_slice(v, Axis::coronal, 0);
    CHECK_THROWS_AS(assemble_slices(mismixed, Axis::axial), Error);

    auto badshape = slices;
    badshape[1] = Slice2D(3, 4, 0.0, Axis::axial, 1);
    CHECK_THROWS_AS(assemble_slices(badshape, Axis::axial), Error);
}

TEST_CASE("insert after extract restores the volume") {
    Volume v = random_volume(4, 6, 5, 21);
    for (Axis a : {Axis::axial, Axis::coronal, Axis::sagittal}) {
        Volume work = v;
        const int depth = v.dim(slicing_dim(a));
        for (int k = depth - 1; k >= 0; --k) insert_slice(work, extract_slice(v, a, k));
        CHECK(work.data == v.data);
    }
}

TEST_CASE("normalize maps window endpoints and midpoint") {
    Volume v(2, 2, 1);
    v.data = {0.0, 400.0, 200.0, 100.0};
    Volume n = normalize(v, 0.0, 400.0);
    CHECK(n.data[0] == doctest::Approx(-1.0));
    CHECK(n.data[1] == doctest::Approx(1.0));
    CHECK(n.data[2] == doctest::Approx(0.0));
    CHECK(n.window[0] == 0.0);
    CHECK(n.window[1] == 400.0);
}

TEST_CASE("denormalize undoes normalize to 1e-12") {
    Volume v = random_volume(6, 5, 4, 77);
    for (double& x : v.data) x = 250.0 * (x + 1.0);
    Volume round = denormalize(normalize(v, -30.0, 520.0), -30.0, 520.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        worst = std::max(worst, std::abs(round.data[i] - v.data[i]));
    CHECK(worst < 1e-12);
}

TEST_CASE("normalize rejects degenerate windows") {
    Volume v(2, 2, 2);
    CHECK_THROWS_AS(normalize(v, 1.0, 1.0), Error);
    CHECK_THROWS_AS(normalize(v, 2.0, -1.0), Error);
    CHECK_THROWS_AS(denormalize(v, 5.0, 5.0), Error);
}

TEST_CASE("rng streams are reproducible and order-free") {
    RngStream a(123);
    RngStream b(123);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    RngStream c(123);
    CHECK(c.u64_at(57) == c.u64_at(57));
    CHECK(c.u64_at(3) != c.u64_at(4));

    // Indexed access equals sequential access at the same position.
    RngStream d(99), e(99);
    std::vector<double> seq;
    for (int i = 0; i < 16; ++i) seq.push_back(d.uniform01());
    for (int i = 0; i < 16; ++i) CHECK(e.uniform01_at(i) == seq[static_cast<std::size_t>(i)]);
}

TEST_CASE("rng sub-streams differ from parent and from each other") {
    RngStream root(7);
    RngStream s1 = root.child(stream_tag::step);
    RngStream s2 = root.child(stream_tag::plane);
    RngStream s1b = root.child(stream_tag::step);
    CHECK(s1.u64_at(0) == s1b.u64_at(0));
    CHECK(s1.u64_at(0) != s2.u64_at(0));
    CHECK(s1.u64_at(0) != root.u64_at(0));
    CHECK(root.child(1).child(2).u64_at(0) != root.child(2).child(1).u64_at(0));
}

TEST_CASE("different seeds decorrelate") {
    RngStream a(1), b(2);
    int same = 0;
    for (int i = 0; i < 64; ++i)
        if (a.u64_at(i) == b.u64_at(i)) ++same;
    CHECK(same == 0);
}

TEST_CASE("uniform01 stays strictly inside (0,1)") {
    RngStream rng(31);
    for (int i = 0; i < 10000; ++i) {
        double u = rng.uniform01();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("normal draws have sane moments") {
    RngStream rng(5);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = rng.normal();
        sum += x;
        sum2 += x * x;
    }
    double mean = sum / n;
    double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("poisson matches mean and variance across regimes") {
    RngStream rng(17);
    for (double mean : {0.5, 4.0, 25.0, 80.0, 4000.0}) {
        const int n = 20000;
        double sum = 0.0, sum2 = 0.0;
        for (int i = 0; i < n; ++i) {
            double k = static_cast<double>(rng.poisson(mean));
            sum += k;
            sum2 += k * k;
        }
        double m = sum / n;
        double v = sum2 / n - m * m;
        // Mean and variance both equal the rate; allow ~5 sigma of sampling noise.
        double tol = 5.0 * std::sqrt(mean / n);
        CHECK(std::abs(m - mean) < tol);
        CHECK(std::abs(v - mean) < 0.1 * mean + tol);
    }
}

TEST_CASE("uniform_int covers its range uniformly") {
    RngStream rng(23);
    std::array<int, 7> counts{};
    const int n = 70000;
    for (int i = 0; i < n; ++i) counts[static_cast<std::size_t>(rng.uniform_int(7))] += 1;
    for (int c : counts) CHECK(std::abs(c - 10000) < 500);
}

TEST_CASE("normal_volume is voxel-addressed") {
    RngStream stream = RngStream(9).child(stream_tag::noise);
    Volume a = normal_volume(4, 5, 6, stream);
    Volume b = normal_volume(4, 5, 6, stream);
    CHECK(a.data == b.data);
    // The field value at a voxel equals the stream's draw at its linear index.
    CHECK(a.at(2, 3, 1) == stream.normal_at(a.index(2, 3, 1)));

    Slice2D s = normal_slice(4, 5, stream);
    CHECK(s.at(2, 3) == stream.normal_at(static_cast<std::size_t>(3) * s.w + 2));
}

TEST_CASE("validate flags corrupt volumes") {
    Volume v(2, 2, 2);
    v.validate("test");
    v.data[3] = std::nan("");
    CHECK_THROWS_AS(v.validate("test"), Error);
    v.data[3] = 0.0;
    v.data.pop_back();
    CHECK_THROWS_AS(v.validate("test"), Error);
}

TEST_CASE("axis names round-trip") {
    for (Axis a : {Axis::axial, Axis::coronal, Axis::sagittal})
        CHECK(axis_from_string(to_string(a)) == a);
    CHECK_THROWS_AS(axis_from_string("oblique"), Error);
}
