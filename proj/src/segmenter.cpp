#include "mosam/segmenter.hpp"

#include <algorithm>
#include <cmath>

#include "mosam/mask_ops.hpp"
#include "rng_util.hpp"

namespace mosam {

using detail::mix_seed;
using detail::Rng;

OracleSegmenter::OracleSegmenter(std::vector<GroundTruthRecord> gt, OracleConfig config)
    : gt_(std::move(gt)), config_(config) {
    if (gt_.empty()) throw std::invalid_argument("OracleSegmenter: no ground truth");
}

SegmenterOutput OracleSegmenter::segment(int frame_index, Frame const &frame,
                                         PromptSet const &prompts, MemoryBank const &bank) {
    (void)bank;
    if (frame_index < 0 || frame_index >= static_cast<int>(gt_.size()))
        throw std::invalid_argument("OracleSegmenter: frame index outside ground truth");
    GroundTruthRecord const &gt = gt_[frame_index];

    auto fail = [&](double s_occ) {
        tracked_ = false;
        SegmenterOutput out;
        out.prob = ProbMap(frame.width, frame.height);
        out.mask = Mask(frame.width, frame.height);
        out.scores = {0.1, s_occ};
        return out;
    };

    if (gt.occluded || gt.mask.empty()) return fail(-0.5);

    bool hit = prompts.first_frame_mask.has_value();
    for (auto const &p : prompts.positive_points) {
        if (hit) break;
        int const x = static_cast<int>(std::lround(p.x));
        int const y = static_cast<int>(std::lround(p.y));
        hit = gt.mask.contains(x, y) && gt.mask.at(x, y);
    }
    if (!hit && prompts.box)
        hit = box_iou(*prompts.box, bounding_box(gt.mask)) >= config_.reacquire_box_iou;

    if (!tracked_ && !hit) return fail(-0.3);

    // Success: the GT mask with seeded boundary flips. Pixels within
    // `boundary_noise` of the contour toggle independently at flip_rate.
    Rng rng(mix_seed(config_.seed, static_cast<std::uint64_t>(frame_index)));
    Mask perturbed = gt.mask;
    if (config_.boundary_noise > 0 && config_.flip_rate > 0.0) {
        double const r = config_.boundary_noise;
        Mask const eroded = erode_mask(gt.mask, r);
        Mask const dilated = dilate_mask(gt.mask, r);
        for (int y = 0; y < gt.mask.height; ++y)
            for (int x = 0; x < gt.mask.width; ++x) {
                bool const inner = gt.mask.at(x, y) && !eroded.at(x, y);
                bool const outer = !gt.mask.at(x, y) && dilated.at(x, y);
                if ((inner || outer) && rng.u01() < config_.flip_rate)
                    perturbed.set(x, y, outer);
            }
        // A success must return a nonempty mask; if the noise ever ate a tiny
        // object whole, fall back to the clean mask.
        if (perturbed.empty()) perturbed = gt.mask;
    }

    SegmenterOutput out;
    out.prob = ProbMap(frame.width, frame.height);
    Mask const halo = dilate_mask(perturbed, 1.0);
    for (int y = 0; y < frame.height; ++y)
        for (int x = 0; x < frame.width; ++x) {
            if (perturbed.at(x, y))
                out.prob.set(x, y, gt.mask.at(x, y) ? 0.9f : 0.6f);
            else if (halo.at(x, y))
                out.prob.set(x, y, 0.3f);
        }
    out.mask = std::move(perturbed);
    double const s_iou = iou(out.mask, gt.mask) - config_.score_noise * rng.u01();
    out.scores = {std::clamp(s_iou, 0.0, 1.0), 0.5};
    tracked_ = true;
    return out;
}

MatcherSegmenter::MatcherSegmenter(MatcherConfig config) : config_(config) {
    if (config.search_radius < 1) throw std::invalid_argument("MatcherSegmenter: bad radius");
}

SegmenterOutput MatcherSegmenter::segment(int frame_index, Frame const &frame,
                                          PromptSet const &prompts, MemoryBank const &bank) {
    (void)frame_index;
    if (bank.entries.empty()) throw std::invalid_argument("MatcherSegmenter: empty memory bank");

    // Search center: the box prompt when present (which also bounds the
    // reach), else the mean of the point prompts, else each entry's own box.
    std::optional<Point> center;
    int radius = config_.search_radius;
    if (prompts.box) {
        center = prompts.box->center();
        int const extent = static_cast<int>(
            std::lround(std::min(prompts.box->width(), prompts.box->height()) / 2.0 +
                        config_.box_margin));
        radius = std::min(radius, std::max(1, extent));
    } else if (!prompts.positive_points.empty()) {
        Point mean{0.0, 0.0};
        for (auto const &p : prompts.positive_points) {
            mean.x += p.x;
            mean.y += p.y;
        }
        mean.x /= static_cast<double>(prompts.positive_points.size());
        mean.y /= static_cast<double>(prompts.positive_points.size());
        center = mean;
    }

    std::vector<Mask> votes;
    std::vector<double> voter_ncc;
    double best_overall = -1.0;
    bool searched = false;

    for (auto const &entry : bank.entries) {
        if (entry.mask.empty()) continue;
        Box const box = bounding_box(entry.mask);
        if (box.width() > frame.width || box.height() > frame.height) continue;

        double pmean = 0.0;
        for (int y = box.y_min; y <= box.y_max; ++y)
            for (int x = box.x_min; x <= box.x_max; ++x) pmean += entry.appearance.at(x, y);
        pmean /= static_cast<double>(box.area());
        double pvar = 0.0;
        for (int y = box.y_min; y <= box.y_max; ++y)
            for (int x = box.x_min; x <= box.x_max; ++x) {
                double const d = entry.appearance.at(x, y) - pmean;
                pvar += d * d;
            }

        Point const own_center = box.center();
        Point const sc = center.value_or(own_center);
        int const base_dx = static_cast<int>(std::lround(sc.x - own_center.x));
        int const base_dy = static_cast<int>(std::lround(sc.y - own_center.y));

        double best_score = -2.0, best_ncc = -1.0;
        int best_sx = 0, best_sy = 0;
        bool found = false;
        for (int dy = -radius; dy <= radius; ++dy)
            for (int dx = -radius; dx <= radius; ++dx) {
                int const sx = base_dx + dx, sy = base_dy + dy;
                int const ox = box.x_min + sx, oy = box.y_min + sy;
                if (ox < 0 || oy < 0 || ox + box.width() > frame.width ||
                    oy + box.height() > frame.height)
                    continue;
                searched = true;
                double wmean = 0.0;
                for (int y = 0; y < box.height(); ++y)
                    for (int x = 0; x < box.width(); ++x) wmean += frame.at(ox + x, oy + y);
                wmean /= static_cast<double>(box.area());
                double cov = 0.0, wvar = 0.0;
                for (int y = 0; y < box.height(); ++y)
                    for (int x = 0; x < box.width(); ++x) {
                        double const a = entry.appearance.at(box.x_min + x, box.y_min + y) - pmean;
                        double const b = frame.at(ox + x, oy + y) - wmean;
                        cov += a * b;
                        wvar += b * b;
                    }
                double const denom = std::sqrt(pvar * wvar);
                double const ncc = denom > 1e-12 ? cov / denom : 0.0;
                double const dist = std::sqrt(static_cast<double>(dx) * dx +
                                              static_cast<double>(dy) * dy);
                double const score = ncc - config_.center_penalty * dist / config_.search_radius;
                if (!found || score > best_score) {
                    found = true;
                    best_score = score;
                    best_ncc = ncc;
                    best_sx = sx;
                    best_sy = sy;
                }
            }
        if (!found) continue;
        best_overall = std::max(best_overall, best_ncc);
        if (best_ncc >= config_.min_match) {
            votes.push_back(translate_mask(entry.mask, best_sx, best_sy));
            voter_ncc.push_back(best_ncc);
        }
    }

    SegmenterOutput out;
    out.prob = ProbMap(frame.width, frame.height);
    for (auto const &vote : votes)
        for (std::size_t i = 0; i < vote.cells.size(); ++i)
            out.prob.values[i] += vote.cells[i] ? 1.0f : 0.0f;
    float const denom = static_cast<float>(bank.entries.size());
    for (auto &v : out.prob.values) v /= denom;
    out.mask = out.prob.threshold(config_.vote_threshold);

    if (votes.empty()) {
        out.scores.s_iou = 0.0;
        out.scores.s_occ = searched ? best_overall - 0.5 : -0.5;
        return out;
    }
    if (votes.size() == 1) {
        out.scores.s_iou = 1.0;
    } else {
        double sum = 0.0;
        std::size_t pairs = 0;
        for (std::size_t i = 0; i < votes.size(); ++i)
            for (std::size_t j = i + 1; j < votes.size(); ++j) {
                sum += iou(votes[i], votes[j]);
                ++pairs;
            }
        out.scores.s_iou = sum / static_cast<double>(pairs);
    }
    out.scores.s_occ = *std::max_element(voter_ncc.begin(), voter_ncc.end()) - 0.5;
    return out;
}

} // namespace mosam
