#include "mosam/metrics.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "mosam/mask_ops.hpp"

namespace mosam {

double j_score(Mask const &pred, Mask const &gt) { return iou(pred, gt); }

int default_f_tolerance(int width, int height) {
    double const diag = std::sqrt(static_cast<double>(width) * width +
                                  static_cast<double>(height) * height);
    return static_cast<int>(std::ceil(0.008 * diag));
}

double f_score(Mask const &pred, Mask const &gt, int tolerance) {
    if (!pred.same_size(gt)) throw std::invalid_argument("f_score: dimension mismatch");
    if (tolerance < 0) throw std::invalid_argument("f_score: negative tolerance");

    auto const bp = boundary_pixels(pred);
    auto const bg = boundary_pixels(gt);
    if (bp.empty() && bg.empty()) return 1.0;
    if (bp.empty() || bg.empty()) return 0.0;

    auto as_mask = [&](std::vector<Pixel> const &pixels) {
        Mask m(pred.width, pred.height);
        for (auto const &p : pixels) m.set(p.x, p.y, true);
        return m;
    };
    Mask const gt_zone = dilate_mask(as_mask(bg), tolerance);
    Mask const pred_zone = dilate_mask(as_mask(bp), tolerance);

    std::size_t matched_p = 0, matched_g = 0;
    for (auto const &p : bp) matched_p += gt_zone.at(p.x, p.y);
    for (auto const &p : bg) matched_g += pred_zone.at(p.x, p.y);

    double const precision = static_cast<double>(matched_p) / static_cast<double>(bp.size());
    double const recall = static_cast<double>(matched_g) / static_cast<double>(bg.size());
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

double f_score(Mask const &pred, Mask const &gt) {
    return f_score(pred, gt, default_f_tolerance(gt.width, gt.height));
}

MetricsReport aggregate(std::span<FrameMetrics const> per_frame) {
    MetricsReport report;
    report.per_frame.assign(per_frame.begin(), per_frame.end());
    report.frames_evaluated = static_cast<int>(per_frame.size());
    if (per_frame.empty()) return report;
    double sj = 0.0, sf = 0.0;
    for (auto const &fm : per_frame) {
        sj += fm.j;
        sf += fm.f;
    }
    report.mean_j = sj / static_cast<double>(per_frame.size());
    report.mean_f = sf / static_cast<double>(per_frame.size());
    report.j_and_f = (report.mean_j + report.mean_f) / 2.0;
    return report;
}

MetricsReport evaluate_sequence(std::span<Mask const> pred, std::span<Mask const> gt,
                                std::span<bool const> occluded, bool include_occluded,
                                int tolerance) {
    if (pred.size() != gt.size())
        throw std::invalid_argument("evaluate_sequence: sequence length mismatch");
    if (!occluded.empty() && occluded.size() != gt.size())
        throw std::invalid_argument("evaluate_sequence: occlusion flag length mismatch");

    std::vector<FrameMetrics> rows;
    for (std::size_t t = 0; t < pred.size(); ++t) {
        bool const occ = !occluded.empty() && occluded[t];
        if (occ && !include_occluded) continue;
        int const tol = tolerance >= 0 ? tolerance : default_f_tolerance(gt[t].width, gt[t].height);
        rows.push_back({static_cast<int>(t), j_score(pred[t], gt[t]), f_score(pred[t], gt[t], tol)});
    }
    return aggregate(rows);
}

void write_metrics_csv(MetricsReport const &report, std::filesystem::path const &path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "frame_index,j,f\n";
    char buf[96];
    for (auto const &fm : report.per_frame) {
        std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f\n", fm.frame_index, fm.j, fm.f);
        out << buf;
    }
    std::snprintf(buf, sizeof buf, "mean,%.6f,%.6f\n", report.mean_j, report.mean_f);
    out << buf;
}

void write_metrics_json(MetricsReport const &report, std::filesystem::path const &path) {
    nlohmann::json j;
    j["mean_j"] = report.mean_j;
    j["mean_f"] = report.mean_f;
    j["j_and_f"] = report.j_and_f;
    j["frames_evaluated"] = report.frames_evaluated;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << j.dump(2) << "\n";
}

} // namespace mosam
