#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gapfill/errors.hpp"

namespace gapfill {

/// Multi-band 8-bit raster. Bands are stored band-major, each band a
/// row-major width*height plane, values in [0,255]. Coordinates are
/// (col, row) with col in [0,width) and row in [0,height).
struct Raster {
    int width = 0;
    int height = 0;
    int bands = 0;
    std::vector<std::uint8_t> data;

    Raster() = default;
    Raster(int w, int h, int b, std::uint8_t fill = 0);

    std::size_t plane() const { return static_cast<std::size_t>(width) * height; }
    std::size_t size() const { return plane() * bands; }
    std::size_t index(int band, int col, int row) const {
        return static_cast<std::size_t>(band) * plane() +
               static_cast<std::size_t>(row) * width + col;
    }
    std::uint8_t at(int band, int col, int row) const { return data[index(band, col, row)]; }
    std::uint8_t& at(int band, int col, int row) { return data[index(band, col, row)]; }

    std::span<const std::uint8_t> band(int b) const {
        return {data.data() + static_cast<std::size_t>(b) * plane(), plane()};
    }
    std::span<std::uint8_t> band(int b) {
        return {data.data() + static_cast<std::size_t>(b) * plane(), plane()};
    }

    bool same_support(const Raster& o) const {
        return width == o.width && height == o.height && bands == o.bands;
    }

    bool operator==(const Raster& o) const = default;
};

/// Floating-point raster used by intermediate pipeline stages. Same layout
/// as Raster; quantization to 8 bits happens once, at raster write time.
struct RealRaster {
    int width = 0;
    int height = 0;
    int bands = 0;
    std::vector<double> data;

    RealRaster() = default;
    RealRaster(int w, int h, int b, double fill = 0.0);
    explicit RealRaster(const Raster& r);

    std::size_t plane() const { return static_cast<std::size_t>(width) * height; }
    std::size_t size() const { return plane() * bands; }
    std::size_t index(int band, int col, int row) const {
        return static_cast<std::size_t>(band) * plane() +
               static_cast<std::size_t>(row) * width + col;
    }
    double at(int band, int col, int row) const { return data[index(band, col, row)]; }
    double& at(int band, int col, int row) { return data[index(band, col, row)]; }
};

/// Boolean grid marking the gap (missing pixel set). One mask is shared by
/// all bands of the companion raster.
struct GapMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> missing; // 1 = pixel belongs to the gap

    GapMask() = default;
    GapMask(int w, int h, bool fill = false);

    std::size_t index(int col, int row) const {
        return static_cast<std::size_t>(row) * width + col;
    }
    bool is_missing(int col, int row) const { return missing[index(col, row)] != 0; }
    void set(int col, int row, bool m) { missing[index(col, row)] = m ? 1 : 0; }

    std::size_t count() const;
    double fraction() const;
    bool empty() const { return count() == 0; }

    bool operator==(const GapMask& o) const = default;
};

/// Integer label grid. Label 0 is reserved for missing pixels; real classes
/// are 1..k_classes.
struct ClassMap {
    int width = 0;
    int height = 0;
    int k_classes = 0;
    std::vector<std::int32_t> labels;

    ClassMap() = default;
    ClassMap(int w, int h, int k, std::int32_t fill = 0);

    std::size_t index(int col, int row) const {
        return static_cast<std::size_t>(row) * width + col;
    }
    std::int32_t at(int col, int row) const { return labels[index(col, row)]; }
    std::int32_t& at(int col, int row) { return labels[index(col, row)]; }

    bool has_zero_labels() const;

    bool operator==(const ClassMap& o) const = default;
};

/// Block geometry for a fine raster paired with a low-resolution companion:
/// n_z fine pixels per coarse pixel and axis. A block is valid iff none of
/// its n_z x n_z pixels is masked.
struct BlockGrid {
    int n_z = 1;
    int blocks_wide = 0;
    int blocks_high = 0;

    BlockGrid(int fine_width, int fine_height, int n_z);

    int block_col(int col) const { return col / n_z; }
    int block_row(int row) const { return row / n_z; }
    int offset_col(int col) const { return col % n_z; }
    int offset_row(int row) const { return row % n_z; }
    std::size_t block_index(int bc, int br) const {
        return static_cast<std::size_t>(br) * blocks_wide + bc;
    }
    std::size_t block_count() const {
        return static_cast<std::size_t>(blocks_wide) * blocks_high;
    }

    /// Per-block validity flags against a mask (1 = no masked pixel inside).
    std::vector<std::uint8_t> valid_blocks(const GapMask& mask) const;
};

/// Round half up and clamp to [0,255].
std::uint8_t quantize_value(double v);

/// Quantize a floating raster to 8 bits (round half up, clamp).
Raster quantize(const RealRaster& r);

/// Replace each low-resolution pixel by an n_z x n_z constant tile.
Raster expand_lowres(const Raster& z, int n_z);

/// Sub-raster copy; the window must lie fully inside the source.
Raster crop(const Raster& r, int origin_col, int origin_row, int out_width, int out_height);

} // namespace gapfill
