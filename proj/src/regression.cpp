#include "gapfill/regression.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "gapfill/errors.hpp"

namespace gapfill {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

void check_supports(const Raster& x_d, const GapMask& mask, const Raster& z, int n_z) {
    require(n_z >= 1, "n_z must be >= 1");
    require(x_d.width == z.width * n_z && x_d.height == z.height * n_z,
            "damaged raster sides must equal z sides times n_z");
    require(mask.width == x_d.width && mask.height == x_d.height,
            "mask dimensions do not match raster");
    if (x_d.bands != z.bands)
        throw std::invalid_argument(
            "method B requires matching band counts (damaged has " +
            std::to_string(x_d.bands) + ", z has " + std::to_string(z.bands) + ")");
}

} // namespace

RegressionField fit_field(const Raster& x_d, const GapMask& mask, const Raster& z, int n_z) {
    check_supports(x_d, mask, z, n_z);
    const BlockGrid grid(x_d.width, x_d.height, n_z);
    const std::vector<std::uint8_t> valid = grid.valid_blocks(mask);

    std::vector<std::size_t> valid_idx;
    valid_idx.reserve(valid.size());
    for (std::size_t i = 0; i < valid.size(); ++i)
        if (valid[i]) valid_idx.push_back(i);
    if (valid_idx.size() < 2)
        throw NotEnoughDataError("fewer than 2 valid blocks in the image (" +
                                 std::to_string(valid_idx.size()) + ")");
    const int n = static_cast<int>(valid_idx.size());

    // Global unmasked band means, the last-resort fallback.
    std::vector<double> band_mean(x_d.bands, 0.0);
    for (int b = 0; b < x_d.bands; ++b) {
        std::int64_t sum = 0, cnt = 0;
        const std::uint8_t* p = x_d.band(b).data();
        for (std::size_t i = 0; i < x_d.plane(); ++i) {
            if (!mask.missing[i]) {
                sum += p[i];
                ++cnt;
            }
        }
        band_mean[b] = cnt > 0 ? static_cast<double>(sum) / cnt : 0.0;
    }

    RegressionField field;
    field.bands = x_d.bands;
    field.n_z = n_z;
    field.cells.resize(static_cast<std::size_t>(x_d.bands) * n_z * n_z);

    const std::int64_t n_offsets = static_cast<std::int64_t>(x_d.bands) * n_z * n_z;
#pragma omp parallel for
    for (std::int64_t cell = 0; cell < n_offsets; ++cell) {
        const int b = static_cast<int>(cell / (n_z * n_z));
        const int g = static_cast<int>(cell / n_z % n_z);
        const int d = static_cast<int>(cell % n_z);

        // Exact integer accumulation over valid blocks, fixed block order.
        std::int64_t sz = 0, sx = 0, szz = 0, szx = 0, sxx = 0;
        for (std::size_t vi : valid_idx) {
            const int bc = static_cast<int>(vi % grid.blocks_wide);
            const int br = static_cast<int>(vi / grid.blocks_wide);
            const std::int64_t zv = z.at(b, bc, br);
            const std::int64_t xv = x_d.at(b, bc * n_z + d, br * n_z + g);
            sz += zv;
            sx += xv;
            szz += zv * zv;
            szx += zv * xv;
            sxx += xv * xv;
        }

        RegressionField::Cell& c = field.at(b, d, g);
        c.n_valid = n;
        const std::int64_t den = static_cast<std::int64_t>(n) * szz - sz * sz;
        if (n < 2 || den == 0) {
            c.fallback = true;
            c.alpha = 0.0;
            c.beta = n > 0 ? static_cast<double>(sx) / n : band_mean[b];
        } else {
            const std::int64_t num = static_cast<std::int64_t>(n) * szx - sz * sx;
            c.alpha = static_cast<double>(num) / static_cast<double>(den);
            c.beta = (static_cast<double>(sx) - c.alpha * static_cast<double>(sz)) / n;
            if (n > 2) {
                // SSE = Sxx_centered - alpha * Szx_centered
                const double sxx_c =
                    static_cast<double>(sxx) - static_cast<double>(sx) * sx / n;
                const double szx_c =
                    static_cast<double>(szx) - static_cast<double>(sz) * sx / n;
                c.residual_var = std::max(sxx_c - c.alpha * szx_c, 0.0) / (n - 2);
                c.residual_var_set = true;
            }
        }
    }
    return field;
}

Raster method_b(const Raster& x_d, const GapMask& mask, const Raster& z, int n_z) {
    const RegressionField field = fit_field(x_d, mask, z, n_z);
    Raster out = x_d;
    for (int b = 0; b < x_d.bands; ++b) {
#pragma omp parallel for
        for (int row = 0; row < x_d.height; ++row) {
            const int br = row / n_z, g = row % n_z;
            for (int col = 0; col < x_d.width; ++col) {
                if (!mask.is_missing(col, row)) continue;
                const RegressionField::Cell& c = field.at(b, col % n_z, g);
                const double pred = c.alpha * z.at(b, col / n_z, br) + c.beta;
                out.at(b, col, row) = quantize_value(pred);
            }
        }
    }
    return out;
}

std::string field_to_csv(const RegressionField& field) {
    std::string csv = "band,d,g,alpha,beta,n_valid,fallback\n";
    char line[160];
    for (int b = 0; b < field.bands; ++b) {
        for (int g = 0; g < field.n_z; ++g) {
            for (int d = 0; d < field.n_z; ++d) {
                const RegressionField::Cell& c = field.at(b, d, g);
                std::snprintf(line, sizeof line, "%d,%d,%d,%.12g,%.12g,%d,%d\n", b, d, g,
                              c.alpha, c.beta, c.n_valid, c.fallback ? 1 : 0);
                csv += line;
            }
        }
    }
    return csv;
}

} // namespace gapfill
