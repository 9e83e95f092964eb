#include "mosam/memory_bank.hpp"

#include <algorithm>
#include <set>

namespace mosam {

MemoryEntry const *MemoryBank::first_frame_entry() const {
    for (auto const &e : entries)
        if (e.is_first_frame) return &e;
    return nullptr;
}

void MemoryBank::validate() const {
    if (capacity < 1) throw std::logic_error("MemoryBank: capacity must be positive");
    if (entries.size() > static_cast<std::size_t>(capacity))
        throw std::logic_error("MemoryBank: over capacity");
    int first_count = 0;
    std::set<int> seen;
    for (auto const &e : entries) {
        first_count += e.is_first_frame;
        if (!seen.insert(e.frame_index).second)
            throw std::logic_error("MemoryBank: duplicate frame index");
        if (e.mask.width != e.filtered_map.width || e.mask.height != e.filtered_map.height)
            throw std::logic_error("MemoryBank: entry mask/map size mismatch");
        for (std::size_t i = 0; i < e.mask.cells.size(); ++i)
            if ((e.filtered_map.values[i] > 0.0f) != (e.mask.cells[i] != 0))
                throw std::logic_error("MemoryBank: entry mask is not the map support");
    }
    if (!entries.empty() && first_count != 1)
        throw std::logic_error("MemoryBank: expected exactly one first-frame entry");
}

std::vector<Candidate> sample_candidates(std::span<FrameRecord const> history,
                                         SelectionConfig const &config, int current_frame,
                                         int capacity) {
    if (config.sample_interval < 1)
        throw std::invalid_argument("sample_candidates: sample interval must be positive");
    int const window = config.effective_window(capacity);
    std::vector<Candidate> out;
    for (auto const &rec : history) {
        if (rec.is_first_prompted) continue;
        int const offset = current_frame - rec.frame_index;
        if (offset < 1 || offset > window) continue;
        if (offset % config.sample_interval != 0) continue;
        out.push_back({rec.frame_index, rec.scores});
    }
    std::sort(out.begin(), out.end(),
              [](Candidate const &a, Candidate const &b) { return a.frame_index < b.frame_index; });
    return out;
}

SelectionDecision temporal_select(std::span<Candidate const> candidates,
                                  SelectionConfig const &config, int slots) {
    if (slots < 0) throw std::invalid_argument("temporal_select: negative slot count");
    SelectionDecision decision;

    // Tier 1: both scores above their thresholds, most recent first.
    std::vector<Candidate> rest;
    for (auto it = candidates.rbegin(); it != candidates.rend(); ++it) {
        bool const pass = it->scores.s_iou > config.tau_iou && it->scores.s_occ > config.tau_occ;
        if (pass && static_cast<int>(decision.tier1.size()) < slots)
            decision.tier1.push_back(it->frame_index);
        else
            rest.push_back(*it);
    }

    // Tier 2: what tier 1 did not take, ranked by combined score.
    int const left = slots - static_cast<int>(decision.tier1.size());
    std::vector<Candidate> ranked;
    for (auto const &c : rest) {
        if (c.scores.s_iou > config.tau_rank)
            ranked.push_back(c);
        else
            decision.rejected.push_back({c.frame_index, "s_iou<=tau_rank"});
    }
    std::sort(ranked.begin(), ranked.end(), [](Candidate const &a, Candidate const &b) {
        double const sa = a.scores.s_iou + a.scores.s_occ;
        double const sb = b.scores.s_iou + b.scores.s_occ;
        return sa != sb ? sa > sb : a.frame_index > b.frame_index;
    });
    for (auto const &c : ranked) {
        if (static_cast<int>(decision.tier2.size()) < left)
            decision.tier2.push_back(c.frame_index);
        else
            decision.rejected.push_back({c.frame_index, "rank_overflow"});
    }

    decision.chosen = decision.tier1;
    decision.chosen.insert(decision.chosen.end(), decision.tier2.begin(), decision.tier2.end());
    std::sort(decision.rejected.begin(), decision.rejected.end());
    return decision;
}

std::pair<ProbMap, Mask> spatial_select(ProbMap const &prob, double tau_pix) {
    ProbMap filtered(prob.width, prob.height);
    Mask mask(prob.width, prob.height);
    for (std::size_t i = 0; i < prob.values.size(); ++i) {
        if (prob.values[i] > tau_pix) {
            filtered.values[i] = prob.values[i];
            mask.cells[i] = 1;
        }
    }
    return {std::move(filtered), std::move(mask)};
}

namespace {

MemoryEntry make_entry(FrameRecord const &rec, bool spatial_filtering, double tau_pix) {
    MemoryEntry entry;
    entry.frame_index = rec.frame_index;
    entry.appearance = rec.appearance;
    entry.scores = rec.scores;
    entry.is_first_frame = rec.is_first_prompted;
    if (spatial_filtering && !rec.is_first_prompted) {
        auto [map, mask] = spatial_select(rec.prob, tau_pix);
        entry.filtered_map = std::move(map);
        entry.mask = std::move(mask);
    } else {
        entry.filtered_map = rec.prob;
        entry.mask = rec.prob.threshold(0.0);
    }
    return entry;
}

} // namespace

MemoryBank update_memory(std::span<FrameRecord const> history, SelectionConfig const &config,
                         int current_frame, int capacity, MemoryPolicy policy,
                         SelectionDecision *decision) {
    FrameRecord const *first = nullptr;
    for (auto const &rec : history)
        if (rec.is_first_prompted) {
            if (first) throw std::invalid_argument("update_memory: two first prompted frames");
            first = &rec;
        }
    if (!first) throw std::invalid_argument("update_memory: history has no first prompted frame");

    std::vector<int> picked;
    SelectionDecision local;
    if (policy.temporal_selection) {
        auto const candidates = sample_candidates(history, config, current_frame, capacity);
        local = temporal_select(candidates, config, capacity - 1);
        picked = local.chosen;
    } else {
        // FIFO baseline: newest capacity - 1 frames before `current_frame`,
        // no score gate.
        std::vector<int> indices;
        for (auto const &rec : history)
            if (!rec.is_first_prompted && rec.frame_index < current_frame)
                indices.push_back(rec.frame_index);
        std::sort(indices.rbegin(), indices.rend());
        indices.resize(std::min(indices.size(), static_cast<std::size_t>(capacity - 1)));
        picked = indices;
        local.chosen = picked;
        local.tier1 = picked;
    }
    if (decision) *decision = local;

    MemoryBank bank;
    bank.capacity = capacity;
    bank.entries.push_back(make_entry(*first, policy.spatial_filtering, config.tau_pix));
    std::sort(picked.begin(), picked.end());
    for (int frame : picked) {
        auto const it =
            std::find_if(history.begin(), history.end(),
                         [frame](FrameRecord const &r) { return r.frame_index == frame; });
        if (it == history.end())
            throw std::logic_error("update_memory: selected frame missing from history");
        bank.entries.push_back(make_entry(*it, policy.spatial_filtering, config.tau_pix));
    }
    bank.validate();
    return bank;
}

} // namespace mosam
