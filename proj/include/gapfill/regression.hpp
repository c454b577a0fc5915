#pragma once

#include <string>
#include <vector>

#include "gapfill/raster.hpp"

namespace gapfill {

/// Per-band, per-within-block-offset least-squares line fitted across valid
/// blocks: damaged value ~ alpha * Z + beta.
struct RegressionField {
    struct Cell {
        double alpha = 0.0;
        double beta = 0.0;
        int n_valid = 0;
        bool fallback = false;     // degenerate OLS, beta holds the offset mean
        double residual_var = 0.0; // SSE/(n-2); diagnostic only
        bool residual_var_set = false;
    };

    int bands = 0;
    int n_z = 1;
    std::vector<Cell> cells; // band-major, then offset row-major (g * n_z + d)

    const Cell& at(int band, int d, int g) const {
        return cells[(static_cast<std::size_t>(band) * n_z + g) * n_z + d];
    }
    Cell& at(int band, int d, int g) {
        return cells[(static_cast<std::size_t>(band) * n_z + g) * n_z + d];
    }
};

/// Fit the regression field over valid blocks (blocks containing no masked
/// pixel). Requires at least 2 valid blocks.
RegressionField fit_field(const Raster& x_d, const GapMask& mask, const Raster& z, int n_z);

/// Method B: masked pixels take the per-offset fitted prediction from Z;
/// unmasked pixels are copied verbatim.
Raster method_b(const Raster& x_d, const GapMask& mask, const Raster& z, int n_z);

/// CSV dump (band,d,g,alpha,beta,n_valid,fallback) for inspection.
std::string field_to_csv(const RegressionField& field);

} // namespace gapfill
