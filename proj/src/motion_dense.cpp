#include "mosam/motion_dense.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "mosam/mask_ops.hpp"
#include "mosam/pgm_io.hpp"

namespace mosam {

MaskedFlow masked_flow(FlowField const &flow, Mask const &m) {
    if (flow.width != m.width || flow.height != m.height)
        throw std::invalid_argument("masked_flow: dimension mismatch");
    if (m.empty()) throw std::invalid_argument("masked_flow: empty mask");

    MaskedFlow out;
    out.field = FlowField(flow.width, flow.height, flow.dt);
    double su = 0.0, sv = 0.0;
    std::size_t n = 0;
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x) {
            if (!m.at(x, y)) continue;
            std::size_t const i = flow.idx(x, y);
            out.field.u[i] = flow.u[i];
            out.field.v[i] = flow.v[i];
            su += flow.u[i];
            sv += flow.v[i];
            ++n;
        }
    out.mean_u = su / static_cast<double>(n);
    out.mean_v = sv / static_cast<double>(n);
    return out;
}

Mask warp_mask_forward(Mask const &m, FlowField const &flow, int horizon) {
    if (flow.width != m.width || flow.height != m.height)
        throw std::invalid_argument("warp_mask_forward: dimension mismatch");
    if (horizon < 1) throw std::invalid_argument("warp_mask_forward: horizon must be positive");

    double const step = static_cast<double>(horizon) / flow.dt;
    Mask splat(m.width, m.height);
    bool any = false;
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x) {
            if (!m.at(x, y)) continue;
            std::size_t const i = flow.idx(x, y);
            int const tx = static_cast<int>(std::lround(x + flow.u[i] * step));
            int const ty = static_cast<int>(std::lround(y + flow.v[i] * step));
            if (splat.contains(tx, ty)) {
                splat.set(tx, ty, true);
                any = true;
            }
        }
    if (!any) throw std::runtime_error("warp_mask_forward: warped mask left the frame entirely");
    return close_mask(splat, 1.0);
}

Box flow_box_prompt(Mask const &warped, int width, int height) {
    if (warped.empty()) throw std::invalid_argument("flow_box_prompt: empty mask");
    return clip_box(bounding_box(warped), width, height);
}

void write_flow_pgm(FlowField const &flow, std::filesystem::path const &u_path,
                    std::filesystem::path const &v_path,
                    std::filesystem::path const &sidecar_path) {
    float lo = 0.0f, hi = 0.0f;
    for (std::size_t i = 0; i < flow.u.size(); ++i) {
        lo = std::min({lo, flow.u[i], flow.v[i]});
        hi = std::max({hi, flow.u[i], flow.v[i]});
    }
    float const span = hi - lo > 1e-12f ? hi - lo : 1.0f;

    auto quantize = [&](std::vector<float> const &values) {
        ProbMap p(flow.width, flow.height);
        for (std::size_t i = 0; i < values.size(); ++i) p.values[i] = (values[i] - lo) / span;
        return p;
    };
    write_prob_pgm(quantize(flow.u), u_path);
    write_prob_pgm(quantize(flow.v), v_path);

    // gray/255 * scale + offset recovers the displacement in pixels.
    nlohmann::json j;
    j["offset"] = lo;
    j["scale"] = span;
    j["dt"] = flow.dt;
    std::ofstream out(sidecar_path);
    if (!out) throw std::runtime_error("cannot open for writing: " + sidecar_path.string());
    out << j.dump(2) << "\n";
}

} // namespace mosam
