#include "voxdiff/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <numbers>

#include "voxdiff/io.hpp"

namespace voxdiff {

namespace {

std::string format_g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string sanitize_label(const std::string& label) {
    std::string out = label;
    for (char& c : out)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '_' && c != '-')
            c = '-';
    return out;
}

}  // namespace

void MtfCurve::validate() const {
    require(!method.empty(), ErrorCategory::invalid_argument, "curve needs a method label");
    for (std::size_t i = 0; i < points.size(); ++i) {
        require(std::isfinite(points[i].modulation) && points[i].modulation >= 0.0,
                ErrorCategory::numeric, "modulation must be finite and nonnegative");
        require(i == 0 || points[i].frequency > points[i - 1].frequency,
                ErrorCategory::invalid_argument, "curve frequencies must strictly increase");
    }
}

double fundamental_amplitude(const Volume& vol, const Roi& roi, double frequency, Dim axis) {
    require(roi_inside(roi, vol), ErrorCategory::invalid_argument,
            "measurement ROI extends outside the volume");
    require(std::isfinite(frequency) && frequency > 0.0, ErrorCategory::invalid_argument,
            "frequency must be positive");
    const int a = dim_index(axis);
    const int len = roi.size[static_cast<std::size_t>(a)];
    require(static_cast<double>(len) * frequency >= 3.0, ErrorCategory::invalid_argument,
            "ROI shorter than 3 full periods at this frequency");
    const int bin = static_cast<int>(std::lround(len * frequency));
    require(bin >= 1 && 2 * bin < len, ErrorCategory::invalid_argument,
            "frequency bin out of range for this ROI");

    std::vector<double> profile(static_cast<std::size_t>(len), 0.0);
    for (int z = roi.lo[2]; z < roi.lo[2] + roi.size[2]; ++z)
        for (int y = roi.lo[1]; y < roi.lo[1] + roi.size[1]; ++y)
            for (int x = roi.lo[0]; x < roi.lo[0] + roi.size[0]; ++x) {
                const int coord[3] = {x, y, z};
                profile[static_cast<std::size_t>(coord[a] - roi.lo[static_cast<std::size_t>(a)])] +=
                    vol.at(x, y, z);
            }
    const double transverse =
        static_cast<double>(roi.size[0]) * roi.size[1] * roi.size[2] / len;
    std::complex<double> acc = 0.0;
    for (int i = 0; i < len; ++i)
        acc += (profile[static_cast<std::size_t>(i)] / transverse) *
               std::polar(1.0, -2.0 * std::numbers::pi * bin * static_cast<double>(i) / len);
    return 2.0 * std::abs(acc) / len;
}

double measure_modulation(const Volume& vol, const Volume& reference, const Roi& roi,
                          double frequency, Dim axis) {
    const double ref = fundamental_amplitude(reference, roi, frequency, axis);
    require(ref > 1e-12, ErrorCategory::numeric,
            "reference phantom has no contrast at this frequency");
    return fundamental_amplitude(vol, roi, frequency, axis) / ref;
}

MtfCurve mtf_curve(const Volume& vol, const Volume& reference, const std::vector<BarRoi>& rois,
                   Dim orientation, const std::string& method, PlaneKind plane) {
    require(!rois.empty(), ErrorCategory::invalid_argument, "phantom manifest has no ROIs");
    MtfCurve curve;
    curve.method = method;
    curve.plane = plane;
    for (const BarRoi& r : rois)
        curve.points.push_back(
            {r.frequency, measure_modulation(vol, reference, r.roi, r.frequency, orientation)});
    std::sort(curve.points.begin(), curve.points.end(),
              [](const MtfPoint& a, const MtfPoint& b) { return a.frequency < b.frequency; });
    curve.validate();
    return curve;
}

FidelityMetrics fidelity_metrics(const Volume& a, const Volume& b) {
    require(a.nx == b.nx && a.ny == b.ny && a.nz == b.nz, ErrorCategory::shape_mismatch,
            "fidelity_metrics: volume dims differ");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        acc += d * d;
    }
    FidelityMetrics m;
    m.rmse = std::sqrt(acc / static_cast<double>(a.size()));
    m.psnr = m.rmse == 0.0 ? std::numeric_limits<double>::infinity()
                           : 20.0 * std::log10(2.0 / m.rmse);
    return m;
}

std::vector<std::string> compare_report(const std::vector<MtfCurve>& curves,
                                        const std::string& out_dir) {
    require(!curves.empty(), ErrorCategory::invalid_argument, "no curves to report");
    for (const MtfCurve& c : curves) c.validate();
    const MtfCurve& first = curves.front();
    for (const MtfCurve& c : curves) {
        require(c.points.size() == first.points.size(), ErrorCategory::invalid_argument,
                "curves measured on different frequency grids");
        for (std::size_t i = 0; i < c.points.size(); ++i)
            require(c.points[i].frequency == first.points[i].frequency,
                    ErrorCategory::invalid_argument,
                    "curves measured on different frequency grids");
    }
    std::vector<std::string> names;
    for (const MtfCurve& c : curves) {
        const std::string name = sanitize_label(c.method);
        require(std::find(names.begin(), names.end(), name) == names.end(),
                ErrorCategory::invalid_argument, "duplicate method label: " + c.method);
        names.push_back(name);
    }

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) raise(ErrorCategory::io, "cannot create " + out_dir + ": " + ec.message());

    std::vector<std::string> written;
    for (std::size_t c = 0; c < curves.size(); ++c) {
        std::string csv = "frequency," + names[c] + "\n";
        for (const MtfPoint& p : curves[c].points)
            csv += format_g9(p.frequency) + "," + format_g9(p.modulation) + "\n";
        const std::string path = out_dir + "/mtf_" + names[c] + ".csv";
        write_file_atomic(path, csv);
        written.push_back(path);
    }

    std::string merged = "frequency";
    for (const std::string& n : names) merged += "," + n;
    merged += "\n";
    for (std::size_t i = 0; i < first.points.size(); ++i) {
        merged += format_g9(first.points[i].frequency);
        for (const MtfCurve& c : curves) merged += "," + format_g9(c.points[i].modulation);
        merged += "\n";
    }
    const std::string merged_path = out_dir + "/mtf_comparison.csv";
    write_file_atomic(merged_path, merged);
    written.push_back(merged_path);
    return written;
}

}  // namespace voxdiff
