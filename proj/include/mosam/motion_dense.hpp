#pragma once

#include <filesystem>

#include "mosam/grid.hpp"
#include "mosam/optical_flow.hpp"

namespace mosam {

/// Flow gated by a mask, plus the mean over the foreground.
struct MaskedFlow {
    FlowField field; ///< zero outside the mask
    double mean_u = 0.0;
    double mean_v = 0.0;
};

/// Zero the flow outside the mask and average it over the foreground.
/// Throws when the mask is empty or sizes differ.
MaskedFlow masked_flow(FlowField const &flow, Mask const &m);

/// Forward-warp a mask: each foreground pixel splats to its position rounded
/// after moving by (u, v) / dt * horizon; the splat is cleaned up with a
/// radius-1 morphological closing. Splats leaving the frame are dropped;
/// throws when every pixel does.
Mask warp_mask_forward(Mask const &m, FlowField const &flow, int horizon);

/// Bounding box of a warped mask, clipped to the frame. Throws when empty.
Box flow_box_prompt(Mask const &warped, int width, int height);

/// Debug dump: u and v as PGMs plus a JSON sidecar recording the affine map
/// from gray levels back to pixel displacements.
void write_flow_pgm(FlowField const &flow, std::filesystem::path const &u_path,
                    std::filesystem::path const &v_path,
                    std::filesystem::path const &sidecar_path);

} // namespace mosam
