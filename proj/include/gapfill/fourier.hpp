#pragma once

#include "gapfill/raster.hpp"

namespace gapfill {

/// Ideal-filter radius as a fraction of the maximum centered-spectrum
/// radius. 1.0 passes everything into the low band.
struct CutoffSpec {
    double c_fraction = 0.5;

    void validate() const;
};

struct FilterPair {
    RealRaster low;  // single band: inverse transform of the in-disk spectrum
    RealRaster high; // complementary band; low + high reconstructs the input
};

/// Per-column Gaussian (mean/stddev) calibration of the older image against
/// the valid pixels of the damaged image's matching column. Population
/// moments; a zero-variance source column maps to the target mean.
RealRaster calibrate_columns(const Raster& x_old, const Raster& x_d, const GapMask& mask);

/// Split one band into ideal low-pass / high-pass components. The disk is
/// measured in centered normalized frequency; the DC bin is always low.
FilterPair ideal_filters(const RealRaster& x, int band, const CutoffSpec& cutoff);

/// Method A composite: masked pixels become |L_C(Z) + H_C(X_old_cal)|,
/// unmasked pixels are copied verbatim from the damaged image.
Raster method_a(const Raster& x_d, const GapMask& mask, const Raster& z_expanded,
                const RealRaster& x_old_cal, const CutoffSpec& cutoff);

} // namespace gapfill
