#include "gapfill/raster.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gapfill {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

} // namespace

Raster::Raster(int w, int h, int b, std::uint8_t fill)
    : width(w), height(h), bands(b) {
    require(w >= 1 && h >= 1 && b >= 1, "raster dimensions must be >= 1");
    data.assign(size(), fill);
}

RealRaster::RealRaster(int w, int h, int b, double fill)
    : width(w), height(h), bands(b) {
    require(w >= 1 && h >= 1 && b >= 1, "raster dimensions must be >= 1");
    data.assign(size(), fill);
}

RealRaster::RealRaster(const Raster& r)
    : width(r.width), height(r.height), bands(r.bands) {
    data.resize(r.data.size());
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = r.data[i];
}

GapMask::GapMask(int w, int h, bool fill) : width(w), height(h) {
    require(w >= 1 && h >= 1, "mask dimensions must be >= 1");
    missing.assign(static_cast<std::size_t>(w) * h, fill ? 1 : 0);
}

std::size_t GapMask::count() const {
    std::size_t n = 0;
    for (std::uint8_t m : missing) n += m != 0;
    return n;
}

double GapMask::fraction() const {
    return missing.empty() ? 0.0
                           : static_cast<double>(count()) / static_cast<double>(missing.size());
}

ClassMap::ClassMap(int w, int h, int k, std::int32_t fill)
    : width(w), height(h), k_classes(k) {
    require(w >= 1 && h >= 1 && k >= 0, "class map dimensions must be >= 1");
    labels.assign(static_cast<std::size_t>(w) * h, fill);
}

bool ClassMap::has_zero_labels() const {
    for (std::int32_t l : labels)
        if (l == 0) return true;
    return false;
}

BlockGrid::BlockGrid(int fine_width, int fine_height, int nz) : n_z(nz) {
    require(nz >= 1, "n_z must be >= 1");
    require(fine_width % nz == 0 && fine_height % nz == 0,
            "raster sides must be multiples of n_z");
    blocks_wide = fine_width / nz;
    blocks_high = fine_height / nz;
}

std::vector<std::uint8_t> BlockGrid::valid_blocks(const GapMask& mask) const {
    require(mask.width == blocks_wide * n_z && mask.height == blocks_high * n_z,
            "mask support does not match block grid");
    std::vector<std::uint8_t> valid(block_count(), 1);
    for (int row = 0; row < mask.height; ++row) {
        const int br = row / n_z;
        for (int col = 0; col < mask.width; ++col) {
            if (mask.is_missing(col, row)) valid[block_index(col / n_z, br)] = 0;
        }
    }
    return valid;
}

std::uint8_t quantize_value(double v) {
    const double r = std::floor(v + 0.5);
    if (r <= 0.0) return 0;
    if (r >= 255.0) return 255;
    return static_cast<std::uint8_t>(r);
}

Raster quantize(const RealRaster& r) {
    Raster out(r.width, r.height, r.bands);
    const std::int64_t n = static_cast<std::int64_t>(r.size());
#pragma omp parallel for
    for (std::int64_t i = 0; i < n; ++i) out.data[i] = quantize_value(r.data[i]);
    return out;
}

Raster expand_lowres(const Raster& z, int n_z) {
    require(z.width >= 1 && z.height >= 1 && z.bands >= 1, "empty raster");
    require(n_z >= 1, "n_z must be >= 1");
    Raster out(z.width * n_z, z.height * n_z, z.bands);
    for (int b = 0; b < z.bands; ++b) {
        const std::uint8_t* src = z.band(b).data();
        std::uint8_t* dst = out.band(b).data();
#pragma omp parallel for
        for (int row = 0; row < out.height; ++row) {
            const std::uint8_t* src_row = src + static_cast<std::size_t>(row / n_z) * z.width;
            std::uint8_t* dst_row = dst + static_cast<std::size_t>(row) * out.width;
            for (int col = 0; col < out.width; ++col) dst_row[col] = src_row[col / n_z];
        }
    }
    return out;
}

Raster crop(const Raster& r, int origin_col, int origin_row, int out_width, int out_height) {
    require(out_width >= 1 && out_height >= 1, "crop size must be >= 1");
    require(origin_col >= 0 && origin_row >= 0 &&
                origin_col + out_width <= r.width && origin_row + out_height <= r.height,
            "crop window out of bounds");
    Raster out(out_width, out_height, r.bands);
    for (int b = 0; b < r.bands; ++b) {
        for (int row = 0; row < out_height; ++row) {
            const std::uint8_t* src =
                r.band(b).data() + static_cast<std::size_t>(origin_row + row) * r.width + origin_col;
            std::uint8_t* dst = out.band(b).data() + static_cast<std::size_t>(row) * out_width;
            std::copy(src, src + out_width, dst);
        }
    }
    return out;
}

} // namespace gapfill
