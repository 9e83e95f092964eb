#pragma once

#include <filesystem>
#include <string>

#include "mosam/grid.hpp"

namespace mosam {

/// Zero-padded frame file name, e.g. 42 -> "00042.pgm".
std::string frame_filename(int index);

// Binary PGM (P5, maxval 255). Masks are written as 255/0 and read back with
// values >= 128 counting as foreground; probability maps quantize to
// round(p * 255).

void write_mask_pgm(Mask const &m, std::filesystem::path const &path);
Mask read_mask_pgm(std::filesystem::path const &path);

void write_prob_pgm(ProbMap const &p, std::filesystem::path const &path);
ProbMap read_prob_pgm(std::filesystem::path const &path);

void write_frame_pgm(Frame const &f, std::filesystem::path const &path);
Frame read_frame_pgm(std::filesystem::path const &path);

} // namespace mosam
