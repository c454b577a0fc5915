#pragma once

#include <cstdint>

#include "gapfill/raster.hpp"

namespace gapfill {

enum class StripOrientation { Horizontal, Vertical };

/// Periodic strip-gap geometry mimicking SLC-off loss.
struct GapSpec {
    int strip_width = 14;      // max lines per strip
    int period = 54;           // lines between strip starts
    StripOrientation orientation = StripOrientation::Horizontal;
    double target_fraction = 0.26;

    void validate() const;
};

enum class RrmKind { BlockAverage = 0, SmoothResample = 1, ShiftedBlockAverage = 2 };

/// Build a periodic strip mask whose realized gap fraction lands within
/// +/- 2 percentage points of the target (strip widths are distributed, each
/// <= strip_width, so the masked-line count hits round(target * extent)).
GapMask make_gap_mask(const GapSpec& spec, int width, int height);

/// RRM0: per-band mean over consecutive n_z x n_z blocks. Output support is
/// width/n_z x height/n_z; values stay floating point until written.
RealRaster rrm0_block_average(const Raster& x, int n_z);

/// RRM1: bilinear interpolation of x sampled at block centers; a smooth
/// decimator that avoids the blocking artifacts of plain averaging.
RealRaster rrm1_smooth_resample(const Raster& x, int n_z);

/// RRM2: RRM0 applied to x translated by (shift_rows, shift_cols) with
/// edge-replication padding; models a small co-registration error.
RealRaster rrm2_shifted_average(const Raster& x, int n_z, int shift_rows, int shift_cols);

RealRaster apply_rrm(const Raster& x, int n_z, RrmKind kind, int shift_rows, int shift_cols);

/// Synthesize an "older" companion image: affine re-shading, Gaussian noise,
/// and a few re-shaded rectangular patches standing in for land-cover change.
/// Deterministic given the seed.
Raster synth_older(const Raster& x, std::uint64_t seed, double gain, double bias,
                   double patch_rate, double noise_sigma = 4.0);

/// Zero out (to the sentinel) the masked pixels of every band.
Raster apply_gap(const Raster& x, const GapMask& mask, std::uint8_t sentinel = 0);

} // namespace gapfill
