#include "gapfill/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace gapfill {

namespace {

constexpr std::int64_t kMaxSide = 1 << 20;
constexpr std::int64_t kMaxBands = 4096;
constexpr std::int64_t kMaxPayload = std::int64_t{1} << 31;

// Reads one ASCII header line (terminated by '\n').
std::string read_header_line(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw ParseError(ParseError::Kind::BadHeader, "missing header line");
    return line;
}

void check_dims(std::int64_t w, std::int64_t h, std::int64_t b) {
    if (w < 1 || h < 1 || b < 1)
        throw ParseError(ParseError::Kind::BadDimensions,
                         "dimensions must be >= 1 (got " + std::to_string(w) + "x" +
                             std::to_string(h) + "x" + std::to_string(b) + ")");
    if (w > kMaxSide || h > kMaxSide || b > kMaxBands || w * h > kMaxPayload / b)
        throw ParseError(ParseError::Kind::BadDimensions, "dimension overflow");
}

} // namespace

Raster read_raster(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open raster file: " + path);

    const std::string header = read_header_line(in);
    std::istringstream hs(header);
    std::string magic;
    std::int64_t w = 0, h = 0, b = 0;
    if (!(hs >> magic >> w >> h >> b) || magic != "BRAW")
        throw ParseError(ParseError::Kind::BadHeader, "malformed BRAW header: \"" + header + "\"");
    std::string extra;
    if (hs >> extra)
        throw ParseError(ParseError::Kind::BadHeader, "trailing tokens in BRAW header");
    check_dims(w, h, b);

    Raster r(static_cast<int>(w), static_cast<int>(h), static_cast<int>(b));
    in.read(reinterpret_cast<char*>(r.data.data()), static_cast<std::streamsize>(r.size()));
    if (in.gcount() != static_cast<std::streamsize>(r.size()))
        throw ParseError(ParseError::Kind::Truncated,
                         "payload shorter than declared " + std::to_string(r.size()) + " bytes");
    return r;
}

void write_raster(const Raster& r, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open raster file for writing: " + path);
    out << "BRAW " << r.width << " " << r.height << " " << r.bands << "\n";
    out.write(reinterpret_cast<const char*>(r.data.data()),
              static_cast<std::streamsize>(r.size()));
    if (!out) throw std::runtime_error("raster write failed: " + path);
}

Raster read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open PGM file: " + path);

    // P5 header: magic, width, height, maxval, whitespace-separated with
    // optional '#' comments, then binary payload.
    std::string magic;
    in >> magic;
    if (magic != "P5") throw ParseError(ParseError::Kind::BadHeader, "not a P5 PGM file");
    auto next_int = [&in]() {
        for (;;) {
            int c = in.peek();
            if (c == '#') {
                in.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
            } else if (std::isspace(c)) {
                in.get();
            } else {
                break;
            }
        }
        std::int64_t v = -1;
        if (!(in >> v)) throw ParseError(ParseError::Kind::BadHeader, "malformed PGM header");
        return v;
    };
    const std::int64_t w = next_int();
    const std::int64_t h = next_int();
    const std::int64_t maxval = next_int();
    if (maxval != 255) throw ParseError(ParseError::Kind::BadHeader, "PGM maxval must be 255");
    check_dims(w, h, 1);
    in.get(); // single whitespace byte before payload

    Raster r(static_cast<int>(w), static_cast<int>(h), 1);
    in.read(reinterpret_cast<char*>(r.data.data()), static_cast<std::streamsize>(r.size()));
    if (in.gcount() != static_cast<std::streamsize>(r.size()))
        throw ParseError(ParseError::Kind::Truncated, "PGM payload truncated");
    return r;
}

void write_pgm(const Raster& r, int band, const std::string& path) {
    if (band < 0 || band >= r.bands) throw std::invalid_argument("band out of range");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open PGM file for writing: " + path);
    out << "P5\n" << r.width << " " << r.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(r.band(band).data()),
              static_cast<std::streamsize>(r.plane()));
    if (!out) throw std::runtime_error("PGM write failed: " + path);
}

GapMask mask_from_raster(const Raster& r) {
    if (r.bands != 1) throw std::invalid_argument("mask raster must have one band");
    GapMask m(r.width, r.height);
    for (std::size_t i = 0; i < m.missing.size(); ++i) m.missing[i] = r.data[i] != 0;
    return m;
}

Raster mask_to_raster(const GapMask& m) {
    Raster r(m.width, m.height, 1);
    for (std::size_t i = 0; i < m.missing.size(); ++i) r.data[i] = m.missing[i] ? 255 : 0;
    return r;
}

ClassMap classmap_from_raster(const Raster& r, int k_classes) {
    if (r.bands != 1) throw std::invalid_argument("class map raster must have one band");
    ClassMap c(r.width, r.height, k_classes);
    for (std::size_t i = 0; i < c.labels.size(); ++i) {
        c.labels[i] = r.data[i];
        if (c.labels[i] > k_classes)
            throw std::invalid_argument("class map label exceeds declared class count");
    }
    return c;
}

Raster classmap_to_raster(const ClassMap& c) {
    if (c.k_classes > 255) throw std::invalid_argument("class count exceeds 8-bit export range");
    Raster r(c.width, c.height, 1);
    for (std::size_t i = 0; i < c.labels.size(); ++i) {
        const std::int32_t l = c.labels[i];
        if (l < 0 || l > 255) throw std::invalid_argument("label outside [0,255]");
        r.data[i] = static_cast<std::uint8_t>(l);
    }
    return r;
}

} // namespace gapfill
