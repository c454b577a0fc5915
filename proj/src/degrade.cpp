#include "gapfill/degrade.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "gapfill/rng.hpp"

namespace gapfill {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

// Distribute `total` masked lines over the strips, each strip capped by its
// capacity, filling left to right.
std::vector<int> distribute_widths(const std::vector<int>& caps, long total) {
    const int n = static_cast<int>(caps.size());
    std::vector<int> widths(n, 0);
    const long base = total / n;
    long rem = total % n;
    for (int i = 0; i < n; ++i) {
        widths[i] = static_cast<int>(base) + (i < rem ? 1 : 0);
    }
    // Cap and carry the shortfall forward to strips with spare capacity.
    long shortfall = 0;
    for (int i = 0; i < n; ++i) {
        if (widths[i] > caps[i]) {
            shortfall += widths[i] - caps[i];
            widths[i] = caps[i];
        }
    }
    for (int i = 0; i < n && shortfall > 0; ++i) {
        const int spare = caps[i] - widths[i];
        const int take = static_cast<int>(std::min<long>(spare, shortfall));
        widths[i] += take;
        shortfall -= take;
    }
    return widths;
}

} // namespace

void GapSpec::validate() const {
    require(strip_width >= 1, "strip_width must be >= 1");
    require(period > strip_width, "period must exceed strip_width");
    require(target_fraction > 0.0 && target_fraction <= 0.5,
            "target_fraction must be in (0, 0.5]");
}

GapMask make_gap_mask(const GapSpec& spec, int width, int height) {
    spec.validate();
    require(width >= 1 && height >= 1, "mask dimensions must be >= 1");
    const int extent = spec.orientation == StripOrientation::Horizontal ? height : width;
    require(extent >= spec.period, "image extent must be >= strip period");

    std::vector<int> starts;
    for (int s = 0; s < extent; s += spec.period) starts.push_back(s);
    std::vector<int> caps(starts.size());
    long capacity = 0;
    for (std::size_t i = 0; i < starts.size(); ++i) {
        caps[i] = std::min(spec.strip_width, extent - starts[i]);
        capacity += caps[i];
    }

    long total = std::lround(spec.target_fraction * extent);
    total = std::max<long>(total, 1);
    if (total > capacity) {
        const double achievable = static_cast<double>(capacity) / extent;
        if (spec.target_fraction - achievable > 0.02)
            throw std::invalid_argument(
                "target_fraction " + std::to_string(spec.target_fraction) +
                " unreachable: strips can cover at most " + std::to_string(achievable));
        total = capacity;
    }

    const std::vector<int> widths = distribute_widths(caps, total);

    GapMask mask(width, height);
    for (std::size_t i = 0; i < starts.size(); ++i) {
        for (int d = 0; d < widths[i]; ++d) {
            const int line = starts[i] + d;
            if (spec.orientation == StripOrientation::Horizontal) {
                for (int col = 0; col < width; ++col) mask.set(col, line, true);
            } else {
                for (int row = 0; row < height; ++row) mask.set(line, row, true);
            }
        }
    }
    return mask;
}

RealRaster rrm0_block_average(const Raster& x, int n_z) {
    const BlockGrid grid(x.width, x.height, n_z);
    RealRaster out(grid.blocks_wide, grid.blocks_high, x.bands);
    const double inv = 1.0 / (static_cast<double>(n_z) * n_z);
    for (int b = 0; b < x.bands; ++b) {
#pragma omp parallel for
        for (int br = 0; br < grid.blocks_high; ++br) {
            for (int bc = 0; bc < grid.blocks_wide; ++bc) {
                std::int64_t sum = 0;
                for (int r = br * n_z; r < (br + 1) * n_z; ++r)
                    for (int c = bc * n_z; c < (bc + 1) * n_z; ++c) sum += x.at(b, c, r);
                out.at(b, bc, br) = static_cast<double>(sum) * inv;
            }
        }
    }
    return out;
}

RealRaster rrm1_smooth_resample(const Raster& x, int n_z) {
    const BlockGrid grid(x.width, x.height, n_z);
    RealRaster out(grid.blocks_wide, grid.blocks_high, x.bands);
    for (int b = 0; b < x.bands; ++b) {
#pragma omp parallel for
        for (int br = 0; br < grid.blocks_high; ++br) {
            const double sy = (br + 0.5) * n_z - 0.5;
            const int r0 = std::clamp(static_cast<int>(std::floor(sy)), 0, x.height - 1);
            const int r1 = std::min(r0 + 1, x.height - 1);
            const double fy = sy - std::floor(sy);
            for (int bc = 0; bc < grid.blocks_wide; ++bc) {
                const double sx = (bc + 0.5) * n_z - 0.5;
                const int c0 = std::clamp(static_cast<int>(std::floor(sx)), 0, x.width - 1);
                const int c1 = std::min(c0 + 1, x.width - 1);
                const double fx = sx - std::floor(sx);
                const double v00 = x.at(b, c0, r0);
                const double v10 = x.at(b, c1, r0);
                const double v01 = x.at(b, c0, r1);
                const double v11 = x.at(b, c1, r1);
                out.at(b, bc, br) = (1 - fy) * ((1 - fx) * v00 + fx * v10) +
                                    fy * ((1 - fx) * v01 + fx * v11);
            }
        }
    }
    return out;
}

RealRaster rrm2_shifted_average(const Raster& x, int n_z, int shift_rows, int shift_cols) {
    const BlockGrid grid(x.width, x.height, n_z);
    require(shift_rows >= 0 && shift_rows < n_z && shift_cols >= 0 && shift_cols < n_z,
            "shift components must lie in [0, n_z)");
    RealRaster out(grid.blocks_wide, grid.blocks_high, x.bands);
    const double inv = 1.0 / (static_cast<double>(n_z) * n_z);
    for (int b = 0; b < x.bands; ++b) {
#pragma omp parallel for
        for (int br = 0; br < grid.blocks_high; ++br) {
            for (int bc = 0; bc < grid.blocks_wide; ++bc) {
                std::int64_t sum = 0;
                for (int dr = 0; dr < n_z; ++dr) {
                    // Translate, clamping reads to the border (edge replication).
                    const int r = std::min(br * n_z + dr + shift_rows, x.height - 1);
                    for (int dc = 0; dc < n_z; ++dc) {
                        const int c = std::min(bc * n_z + dc + shift_cols, x.width - 1);
                        sum += x.at(b, c, r);
                    }
                }
                out.at(b, bc, br) = static_cast<double>(sum) * inv;
            }
        }
    }
    return out;
}

RealRaster apply_rrm(const Raster& x, int n_z, RrmKind kind, int shift_rows, int shift_cols) {
    switch (kind) {
        case RrmKind::BlockAverage: return rrm0_block_average(x, n_z);
        case RrmKind::SmoothResample: return rrm1_smooth_resample(x, n_z);
        case RrmKind::ShiftedBlockAverage:
            return rrm2_shifted_average(x, n_z, shift_rows, shift_cols);
    }
    throw std::invalid_argument("unknown RRM kind");
}

Raster synth_older(const Raster& x, std::uint64_t seed, double gain, double bias,
                   double patch_rate, double noise_sigma) {
    require(gain > 0.0, "gain must be > 0");
    require(patch_rate >= 0.0 && patch_rate <= 0.5, "patch_rate must be in [0, 0.5]");
    require(noise_sigma >= 0.0, "noise_sigma must be >= 0");

    RealRaster out(x.width, x.height, x.bands);
    const std::int64_t plane = static_cast<std::int64_t>(x.plane());
#pragma omp parallel for
    for (std::int64_t p = 0; p < plane; ++p) {
        PixelRng rng(seed, static_cast<std::uint64_t>(p));
        for (int b = 0; b < x.bands; ++b) {
            const double noise = noise_sigma > 0.0 ? noise_sigma * rng.next_gaussian() : 0.0;
            const std::size_t i = static_cast<std::size_t>(b) * plane + p;
            out.data[i] = gain * x.data[i] + bias + noise;
        }
    }

    if (patch_rate > 0.0) {
        PixelRng rng(seed, 0xA11CE5ULL);
        const int n_patches = 1 + static_cast<int>(rng.next_below(3));
        const double patch_area = patch_rate * x.width * x.height / n_patches;
        const int side = std::max(2, static_cast<int>(std::lround(std::sqrt(patch_area))));
        for (int p = 0; p < n_patches; ++p) {
            const int pw = std::min(side, x.width);
            const int ph = std::min(side, x.height);
            const int c0 = static_cast<int>(rng.next_below(x.width - pw + 1));
            const int r0 = static_cast<int>(rng.next_below(x.height - ph + 1));
            const double delta =
                (rng.next_u64() & 1 ? 1.0 : -1.0) * (20.0 + 40.0 * rng.next_double());
            for (int b = 0; b < x.bands; ++b)
                for (int r = r0; r < r0 + ph; ++r)
                    for (int c = c0; c < c0 + pw; ++c) out.at(b, c, r) += delta;
        }
    }
    return quantize(out);
}

Raster apply_gap(const Raster& x, const GapMask& mask, std::uint8_t sentinel) {
    require(x.width == mask.width && x.height == mask.height,
            "mask dimensions do not match raster");
    Raster out = x;
    const std::int64_t plane = static_cast<std::int64_t>(x.plane());
    for (int b = 0; b < x.bands; ++b) {
        std::uint8_t* dst = out.band(b).data();
#pragma omp parallel for
        for (std::int64_t i = 0; i < plane; ++i)
            if (mask.missing[i]) dst[i] = sentinel;
    }
    return out;
}

} // namespace gapfill
