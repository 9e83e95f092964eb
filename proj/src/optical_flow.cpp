#include "mosam/optical_flow.hpp"

#include <algorithm>
#include <cmath>

namespace mosam {

namespace {

float sample_bilinear(Frame const &f, double x, double y) {
    x = std::clamp(x, 0.0, static_cast<double>(f.width - 1));
    y = std::clamp(y, 0.0, static_cast<double>(f.height - 1));
    int const x0 = static_cast<int>(x), y0 = static_cast<int>(y);
    int const x1 = std::min(x0 + 1, f.width - 1), y1 = std::min(y0 + 1, f.height - 1);
    double const fx = x - x0, fy = y - y0;
    double const top = f.at(x0, y0) * (1.0 - fx) + f.at(x1, y0) * fx;
    double const bot = f.at(x0, y1) * (1.0 - fx) + f.at(x1, y1) * fx;
    return static_cast<float>(top * (1.0 - fy) + bot * fy);
}

// Factor-2 downsampling with a 4x4 box centered on each 2x2 block. The wide
// box keeps fine-grained texture from aliasing into the coarse levels, which
// would otherwise shrink the convergence basin right where the large motions
// must be absorbed.
Frame downsample2(Frame const &f) {
    Frame out((f.width + 1) / 2, (f.height + 1) / 2);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) {
            double sum = 0.0;
            int n = 0;
            for (int dy = -1; dy < 3; ++dy)
                for (int dx = -1; dx < 3; ++dx) {
                    int const sx = 2 * x + dx, sy = 2 * y + dy;
                    if (sx >= 0 && sx < f.width && sy >= 0 && sy < f.height) {
                        sum += f.at(sx, sy);
                        ++n;
                    }
                }
            out.set(x, y, static_cast<float>(sum / n));
        }
    return out;
}

// Doubles a coarse flow grid onto the given finer dimensions, scaling the
// vectors by 2 to match the resolution change.
void upsample_flow(std::vector<float> const &coarse, int cw, int ch, std::vector<float> &fine,
                   int fw, int fh) {
    for (int y = 0; y < fh; ++y)
        for (int x = 0; x < fw; ++x) {
            // coarse cell c covers fine columns {2c, 2c+1}, centered at 2c+0.5
            double const sx = std::clamp((x - 0.5) * 0.5, 0.0, static_cast<double>(cw - 1));
            double const sy = std::clamp((y - 0.5) * 0.5, 0.0, static_cast<double>(ch - 1));
            int const x0 = static_cast<int>(sx), y0 = static_cast<int>(sy);
            int const x1 = std::min(x0 + 1, cw - 1), y1 = std::min(y0 + 1, ch - 1);
            double const fx = sx - x0, fy = sy - y0;
            double const top = coarse[static_cast<std::size_t>(y0) * cw + x0] * (1.0 - fx) +
                               coarse[static_cast<std::size_t>(y0) * cw + x1] * fx;
            double const bot = coarse[static_cast<std::size_t>(y1) * cw + x0] * (1.0 - fx) +
                               coarse[static_cast<std::size_t>(y1) * cw + x1] * fx;
            fine[static_cast<std::size_t>(y) * fw + x] =
                static_cast<float>(2.0 * (top * (1.0 - fy) + bot * fy));
        }
}

void gradients(Frame const &f, std::vector<float> &gx, std::vector<float> &gy) {
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x) {
            int const xm = std::max(x - 1, 0), xp = std::min(x + 1, f.width - 1);
            int const ym = std::max(y - 1, 0), yp = std::min(y + 1, f.height - 1);
            std::size_t const i = static_cast<std::size_t>(y) * f.width + x;
            gx[i] = 0.5f * (f.at(xp, y) - f.at(xm, y));
            gy[i] = 0.5f * (f.at(x, yp) - f.at(x, ym));
        }
}

} // namespace

PyramidalLucasKanade::PyramidalLucasKanade(LucasKanadeConfig config) : config_(config) {
    if (config.pyramid_levels < 1 || config.window_radius < 1 || config.iterations < 1)
        throw std::invalid_argument("PyramidalLucasKanade: bad configuration");
}

FlowField PyramidalLucasKanade::estimate(Frame const &prev, Frame const &cur, int dt) const {
    if (!prev.same_size(cur)) throw std::invalid_argument("estimate: dimension mismatch");
    if (dt < 1) throw std::invalid_argument("estimate: dt must be positive");

    // Pyramid, finest first. Stop early if a level would be too small for the
    // integration window.
    int const min_side = 2 * config_.window_radius + 1;
    std::vector<Frame> pa{prev}, pb{cur};
    for (int level = 1; level < config_.pyramid_levels; ++level) {
        Frame next = downsample2(pa.back());
        if (next.width < min_side || next.height < min_side) break;
        pa.push_back(std::move(next));
        pb.push_back(downsample2(pb.back()));
    }

    int const coarsest = static_cast<int>(pa.size()) - 1;
    std::vector<float> u(pa[coarsest].intensity.size(), 0.0f);
    std::vector<float> v(pa[coarsest].intensity.size(), 0.0f);

    for (int level = coarsest; level >= 0; --level) {
        Frame const &a = pa[level];
        Frame const &b = pb[level];
        int const w = a.width, h = a.height, r = config_.window_radius;

        std::vector<float> gx(a.intensity.size()), gy(a.intensity.size());
        gradients(a, gx, gy);

        std::vector<float> nu(u.size()), nv(v.size());
        for (int iter = 0; iter < config_.iterations; ++iter) {
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) {
                    std::size_t const i = static_cast<std::size_t>(y) * w + x;
                    // The whole window is warped by this pixel's current flow
                    // so the residuals and the normal equations stay
                    // consistent with a single displacement hypothesis.
                    double const cu = u[i], cv = v[i];
                    double gxx = 0.0, gxy = 0.0, gyy = 0.0, bx = 0.0, by = 0.0;
                    for (int dy = -r; dy <= r; ++dy)
                        for (int dx = -r; dx <= r; ++dx) {
                            int const nx = x + dx, ny = y + dy;
                            if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                            std::size_t const j = static_cast<std::size_t>(ny) * w + nx;
                            double const px = gx[j], py = gy[j];
                            double const diff = sample_bilinear(b, nx + cu, ny + cv) - a.at(nx, ny);
                            gxx += px * px;
                            gxy += px * py;
                            gyy += py * py;
                            bx -= px * diff;
                            by -= py * diff;
                        }
                    nu[i] = static_cast<float>(cu);
                    nv[i] = static_cast<float>(cv);
                    double const tr = gxx + gyy;
                    double const det = gxx * gyy - gxy * gxy;
                    double const disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
                    double const min_eig = 0.5 * (tr - disc);
                    if (min_eig < config_.min_eigenvalue) continue; // degenerate window
                    double du = (gyy * bx - gxy * by) / det;
                    double dv = (gxx * by - gxy * bx) / det;
                    du = std::clamp(du, -config_.max_step, config_.max_step);
                    dv = std::clamp(dv, -config_.max_step, config_.max_step);
                    nu[i] = static_cast<float>(cu + du);
                    nv[i] = static_cast<float>(cv + dv);
                }
            u = nu;
            v = nv;
        }

        if (level > 0) {
            int const fw = pa[level - 1].width, fh = pa[level - 1].height;
            std::vector<float> fu(static_cast<std::size_t>(fw) * fh);
            std::vector<float> fv(fu.size());
            upsample_flow(u, w, h, fu, fw, fh);
            upsample_flow(v, w, h, fv, fw, fh);
            u = std::move(fu);
            v = std::move(fv);
        }
    }

    FlowField flow(prev.width, prev.height, dt);
    flow.u = std::move(u);
    flow.v = std::move(v);
    return flow;
}

FlowField estimate_flow(Frame const &prev, Frame const &cur, int dt) {
    return PyramidalLucasKanade{}.estimate(prev, cur, dt);
}

} // namespace mosam
