#include "mosam/pgm_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace mosam {

namespace {

void write_pgm(std::filesystem::path const &path, int width, int height,
               std::vector<std::uint8_t> const &bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "P5\n" << width << " " << height << "\n255\n";
    out.write(reinterpret_cast<char const *>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

int next_token(std::istream &in) {
    // Skips whitespace and '#' comment lines, per the PGM header grammar.
    int c = in.get();
    while (c == '#' || std::isspace(c)) {
        if (c == '#')
            while (c != '\n' && c != EOF) c = in.get();
        c = in.get();
    }
    int value = 0;
    bool any = false;
    while (std::isdigit(c)) {
        value = value * 10 + (c - '0');
        any = true;
        c = in.get();
    }
    if (!any) throw std::runtime_error("malformed PGM header");
    return value;
}

std::vector<std::uint8_t> read_pgm(std::filesystem::path const &path, int &width, int &height) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
    char magic[2] = {};
    in.read(magic, 2);
    if (magic[0] != 'P' || magic[1] != '5')
        throw std::runtime_error("not a binary PGM (P5): " + path.string());
    width = next_token(in);
    height = next_token(in);
    int const maxval = next_token(in);
    if (maxval != 255) throw std::runtime_error("unsupported PGM maxval: " + path.string());
    if (width < 1 || height < 1) throw std::runtime_error("bad PGM dimensions: " + path.string());
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(width) * height);
    in.read(reinterpret_cast<char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
        throw std::runtime_error("truncated PGM: " + path.string());
    return bytes;
}

} // namespace

std::string frame_filename(int index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%05d.pgm", index);
    return buf;
}

void write_mask_pgm(Mask const &m, std::filesystem::path const &path) {
    std::vector<std::uint8_t> bytes(m.cells.size());
    for (std::size_t i = 0; i < m.cells.size(); ++i) bytes[i] = m.cells[i] ? 255 : 0;
    write_pgm(path, m.width, m.height, bytes);
}

Mask read_mask_pgm(std::filesystem::path const &path) {
    int w = 0, h = 0;
    auto const bytes = read_pgm(path, w, h);
    Mask m(w, h);
    for (std::size_t i = 0; i < bytes.size(); ++i) m.cells[i] = bytes[i] >= 128 ? 1 : 0;
    return m;
}

void write_prob_pgm(ProbMap const &p, std::filesystem::path const &path) {
    std::vector<std::uint8_t> bytes(p.values.size());
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        float const v = std::min(1.0f, std::max(0.0f, p.values[i]));
        bytes[i] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
    }
    write_pgm(path, p.width, p.height, bytes);
}

ProbMap read_prob_pgm(std::filesystem::path const &path) {
    int w = 0, h = 0;
    auto const bytes = read_pgm(path, w, h);
    ProbMap p(w, h);
    for (std::size_t i = 0; i < bytes.size(); ++i) p.values[i] = bytes[i] / 255.0f;
    return p;
}

void write_frame_pgm(Frame const &f, std::filesystem::path const &path) {
    std::vector<std::uint8_t> bytes(f.intensity.size());
    for (std::size_t i = 0; i < f.intensity.size(); ++i) {
        float const v = std::min(1.0f, std::max(0.0f, f.intensity[i]));
        bytes[i] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
    }
    write_pgm(path, f.width, f.height, bytes);
}

Frame read_frame_pgm(std::filesystem::path const &path) {
    int w = 0, h = 0;
    auto const bytes = read_pgm(path, w, h);
    Frame f(w, h);
    for (std::size_t i = 0; i < bytes.size(); ++i) f.intensity[i] = bytes[i] / 255.0f;
    return f;
}

} // namespace mosam
