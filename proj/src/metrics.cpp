#include "gapfill/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gapfill/errors.hpp"

namespace gapfill {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

void check_pair(const Raster& y, const Raster& w, const GapMask* region) {
    require(y.same_support(w), "rasters must share support and bands");
    if (region)
        require(region->width == y.width && region->height == y.height,
                "region mask does not match raster support");
}

} // namespace

std::int64_t ConfusionMatrix::row_sum(int pred) const {
    std::int64_t s = 0;
    for (int j = 0; j < k; ++j) s += at(pred, j);
    return s;
}

std::int64_t ConfusionMatrix::col_sum(int truth) const {
    std::int64_t s = 0;
    for (int i = 0; i < k; ++i) s += at(i, truth);
    return s;
}

double rmse(const Raster& y, const Raster& w, const GapMask* region) {
    check_pair(y, w, region);
    const std::size_t plane = y.plane();

    // Exact integer accumulation; per-row partials keep the combine order fixed.
    std::vector<std::int64_t> row_sq(y.height, 0);
    std::vector<std::int64_t> row_n(y.height, 0);
#pragma omp parallel for
    for (int row = 0; row < y.height; ++row) {
        std::int64_t sq = 0, n = 0;
        for (int col = 0; col < y.width; ++col) {
            const std::size_t i = static_cast<std::size_t>(row) * y.width + col;
            if (region && !region->missing[i]) continue;
            ++n;
            for (int b = 0; b < y.bands; ++b) {
                const std::int64_t d = static_cast<std::int64_t>(y.data[b * plane + i]) -
                                       static_cast<std::int64_t>(w.data[b * plane + i]);
                sq += d * d;
            }
        }
        row_sq[row] = sq;
        row_n[row] = n;
    }
    std::int64_t total_sq = 0, total_n = 0;
    for (int row = 0; row < y.height; ++row) {
        total_sq += row_sq[row];
        total_n += row_n[row];
    }
    if (total_n == 0) throw std::invalid_argument("rmse region is empty");
    return std::sqrt(static_cast<double>(total_sq) / static_cast<double>(total_n));
}

QResult q_index(const Raster& y, const Raster& w, int window, const GapMask* region) {
    check_pair(y, w, region);
    require(window >= 2, "q window must be >= 2");

    const int tiles_x = y.width / window;
    const int tiles_y = y.height / window;
    if (tiles_x == 0 || tiles_y == 0)
        throw UndefinedMeasureError("image smaller than one q window");
    const int n_tiles = tiles_x * tiles_y;
    const std::size_t plane = y.plane();
    const int pixels = window * window;

    QResult result;
    double band_sum = 0.0;
    int bands_used = 0;

    for (int b = 0; b < y.bands; ++b) {
        const std::uint8_t* yp = y.data.data() + static_cast<std::size_t>(b) * plane;
        const std::uint8_t* wp = w.data.data() + static_cast<std::size_t>(b) * plane;

        // Tile values land in fixed slots; NaN marks skipped tiles.
        std::vector<double> tile_i(n_tiles, std::numeric_limits<double>::quiet_NaN());
#pragma omp parallel for
        for (int t = 0; t < n_tiles; ++t) {
            const int tx = t % tiles_x, ty = t / tiles_x;
            const int col0 = tx * window, row0 = ty * window;

            if (region) {
                bool touches = false;
                for (int r = row0; r < row0 + window && !touches; ++r)
                    for (int c = col0; c < col0 + window; ++c)
                        if (region->missing[static_cast<std::size_t>(r) * y.width + c]) {
                            touches = true;
                            break;
                        }
                if (!touches) continue;
            }

            std::int64_t sum_y = 0, sum_w = 0;
            for (int r = row0; r < row0 + window; ++r) {
                for (int c = col0; c < col0 + window; ++c) {
                    const std::size_t i = static_cast<std::size_t>(r) * y.width + c;
                    sum_y += yp[i];
                    sum_w += wp[i];
                }
            }
            const double mean_y = static_cast<double>(sum_y) / pixels;
            const double mean_w = static_cast<double>(sum_w) / pixels;

            double var_y = 0.0, var_w = 0.0, cov = 0.0;
            for (int r = row0; r < row0 + window; ++r) {
                for (int c = col0; c < col0 + window; ++c) {
                    const std::size_t i = static_cast<std::size_t>(r) * y.width + c;
                    const double dy = yp[i] - mean_y;
                    const double dw = wp[i] - mean_w;
                    var_y += dy * dy;
                    var_w += dw * dw;
                    cov += dy * dw;
                }
            }
            const double inv_nm1 = 1.0 / (pixels - 1);
            var_y *= inv_nm1;
            var_w *= inv_nm1;
            cov *= inv_nm1;

            const double var_term = var_y + var_w;
            const double mean_term = mean_y * mean_y + mean_w * mean_w;
            if (var_term == 0.0 || mean_term == 0.0) {
                tile_i[t] = std::numeric_limits<double>::infinity(); // degenerate marker
                continue;
            }
            tile_i[t] = 4.0 * cov * (mean_y * mean_w) / (var_term * mean_term);
        }

        double sum_i = 0.0;
        int used = 0, degenerate = 0;
        for (int t = 0; t < n_tiles; ++t) {
            if (std::isnan(tile_i[t])) continue; // outside the region
            if (std::isinf(tile_i[t])) {
                ++degenerate;
                continue;
            }
            sum_i += tile_i[t];
            ++used;
        }
        result.windows_degenerate += degenerate;
        if (used > 0) {
            band_sum += sum_i / used;
            ++bands_used;
            result.windows_used += used;
        }
    }

    if (bands_used == 0)
        throw UndefinedMeasureError("every q window is degenerate");
    result.q = band_sum / bands_used;
    return result;
}

ConfusionMatrix confusion(const ClassMap& truth, const ClassMap& pred, const GapMask* region) {
    require(truth.width == pred.width && truth.height == pred.height,
            "class maps must share support");
    if (region)
        require(region->width == truth.width && region->height == truth.height,
                "region mask does not match class maps");

    ConfusionMatrix m;
    m.k = std::max(truth.k_classes, pred.k_classes);
    require(m.k >= 1, "class maps declare no classes");
    m.counts.assign(static_cast<std::size_t>(m.k) * m.k, 0);

    for (std::size_t i = 0; i < truth.labels.size(); ++i) {
        if (region && !region->missing[i]) continue;
        const std::int32_t t = truth.labels[i];
        const std::int32_t p = pred.labels[i];
        if (t < 1 || t > m.k || p < 1 || p > m.k)
            throw std::invalid_argument(
                "label outside [1,k] inside the evaluation region (imputation incomplete?)");
        ++m.at(p - 1, t - 1);
        ++m.n;
    }
    if (m.n == 0) throw std::invalid_argument("confusion region is empty");
    return m;
}

double overall_accuracy(const ConfusionMatrix& m) {
    if (m.n <= 0) throw std::invalid_argument("confusion matrix is empty");
    std::int64_t diag = 0;
    for (int i = 0; i < m.k; ++i) diag += m.at(i, i);
    return static_cast<double>(diag) / static_cast<double>(m.n);
}

double kappa(const ConfusionMatrix& m) {
    if (m.n <= 0) throw std::invalid_argument("confusion matrix is empty");
    double p_o = 0.0, p_c = 0.0;
    const double n = static_cast<double>(m.n);
    for (int i = 0; i < m.k; ++i) {
        p_o += static_cast<double>(m.at(i, i)) / n;
        p_c += (static_cast<double>(m.row_sum(i)) / n) * (static_cast<double>(m.col_sum(i)) / n);
    }
    if (p_c == 1.0)
        throw UndefinedMeasureError("kappa undefined: expected agreement is 1 (single cell)");
    return (p_o - p_c) / (1.0 - p_c);
}

ClassMap align_labels(const KMeansModel& truth_model, const Raster& pred) {
    require(truth_model.bands == pred.bands, "band counts do not match the truth model");
    ClassMap out(pred.width, pred.height, truth_model.k, 0);
    const std::size_t plane = pred.plane();
    const std::int64_t n = static_cast<std::int64_t>(plane);
#pragma omp parallel for
    for (std::int64_t i = 0; i < n; ++i) {
        int best = 0;
        double best_d2 = std::numeric_limits<double>::max();
        for (int c = 0; c < truth_model.k; ++c) {
            double d2 = 0.0;
            for (int b = 0; b < pred.bands; ++b) {
                const double d = static_cast<double>(pred.data[b * plane + i]) -
                                 truth_model.centroid(c, b);
                d2 += d * d;
            }
            if (d2 < best_d2) {
                best_d2 = d2;
                best = c;
            }
        }
        out.labels[i] = best + 1;
    }
    return out;
}

} // namespace gapfill
