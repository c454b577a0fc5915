#include "gapfill/reference.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <stdexcept>

#include "gapfill/errors.hpp"

namespace gapfill::ref {

namespace {

bool in_region(const GapMask* region, std::size_t i) {
    return region == nullptr || region->missing[i] != 0;
}

} // namespace

double rmse(const Raster& y, const Raster& w, const GapMask* region) {
    double sum = 0.0;
    long n = 0;
    for (int row = 0; row < y.height; ++row) {
        for (int col = 0; col < y.width; ++col) {
            const std::size_t i = static_cast<std::size_t>(row) * y.width + col;
            if (!in_region(region, i)) continue;
            ++n;
            for (int b = 0; b < y.bands; ++b) {
                const double d = static_cast<double>(y.at(b, col, row)) - w.at(b, col, row);
                sum += d * d;
            }
        }
    }
    if (n == 0) throw std::invalid_argument("rmse region is empty");
    return std::sqrt(sum / n);
}

double q_window_value(const std::vector<double>& y, const std::vector<double>& w) {
    const std::size_t n = y.size();
    if (n < 2 || w.size() != n) throw std::invalid_argument("window needs >= 2 paired values");
    double mean_y = 0.0, mean_w = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_y += y[i];
        mean_w += w[i];
    }
    mean_y /= static_cast<double>(n);
    mean_w /= static_cast<double>(n);
    double var_y = 0.0, var_w = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        var_y += (y[i] - mean_y) * (y[i] - mean_y);
        var_w += (w[i] - mean_w) * (w[i] - mean_w);
        cov += (y[i] - mean_y) * (w[i] - mean_w);
    }
    var_y /= static_cast<double>(n - 1);
    var_w /= static_cast<double>(n - 1);
    cov /= static_cast<double>(n - 1);
    const double denom = (var_y + var_w) * (mean_y * mean_y + mean_w * mean_w);
    if (denom == 0.0) throw UndefinedMeasureError("degenerate window");
    return 4.0 * cov * (mean_y * mean_w) / ((var_y + var_w) * (mean_y * mean_y + mean_w * mean_w));
}

double q_index(const Raster& y, const Raster& w, int window, const GapMask* region) {
    const int tiles_x = y.width / window;
    const int tiles_y = y.height / window;
    double band_sum = 0.0;
    int bands_used = 0;
    for (int b = 0; b < y.bands; ++b) {
        double sum_i = 0.0;
        int used = 0;
        for (int ty = 0; ty < tiles_y; ++ty) {
            for (int tx = 0; tx < tiles_x; ++tx) {
                bool touches = region == nullptr;
                std::vector<double> ys, ws;
                for (int r = ty * window; r < (ty + 1) * window; ++r) {
                    for (int c = tx * window; c < (tx + 1) * window; ++c) {
                        ys.push_back(y.at(b, c, r));
                        ws.push_back(w.at(b, c, r));
                        if (!touches && region->is_missing(c, r)) touches = true;
                    }
                }
                if (!touches) continue;
                try {
                    sum_i += q_window_value(ys, ws);
                    ++used;
                } catch (const UndefinedMeasureError&) {
                    // excluded from the average
                }
            }
        }
        if (used > 0) {
            band_sum += sum_i / used;
            ++bands_used;
        }
    }
    if (bands_used == 0) throw UndefinedMeasureError("every q window is degenerate");
    return band_sum / bands_used;
}

ConfusionMatrix confusion(const ClassMap& truth, const ClassMap& pred, const GapMask* region) {
    ConfusionMatrix m;
    m.k = std::max(truth.k_classes, pred.k_classes);
    m.counts.assign(static_cast<std::size_t>(m.k) * m.k, 0);
    for (int row = 0; row < truth.height; ++row) {
        for (int col = 0; col < truth.width; ++col) {
            const std::size_t i = truth.index(col, row);
            if (!in_region(region, i)) continue;
            const std::int32_t t = truth.labels[i], p = pred.labels[i];
            if (t < 1 || t > m.k || p < 1 || p > m.k)
                throw std::invalid_argument("label outside [1,k] inside the region");
            ++m.counts[static_cast<std::size_t>(p - 1) * m.k + (t - 1)];
            ++m.n;
        }
    }
    if (m.n == 0) throw std::invalid_argument("confusion region is empty");
    return m;
}

double overall_accuracy(const ConfusionMatrix& m) {
    double trace = 0.0;
    for (int i = 0; i < m.k; ++i) trace += static_cast<double>(m.at(i, i));
    return trace / static_cast<double>(m.n);
}

double kappa(const ConfusionMatrix& m) {
    const double n = static_cast<double>(m.n);
    double p_o = 0.0;
    for (int i = 0; i < m.k; ++i) p_o += static_cast<double>(m.at(i, i)) / n;
    double p_c = 0.0;
    for (int i = 0; i < m.k; ++i) {
        double row = 0.0, col = 0.0;
        for (int j = 0; j < m.k; ++j) {
            row += static_cast<double>(m.at(i, j));
            col += static_cast<double>(m.at(j, i));
        }
        p_c += (row / n) * (col / n);
    }
    if (p_c == 1.0) throw UndefinedMeasureError("kappa undefined");
    return (p_o - p_c) / (1.0 - p_c);
}

ClassMap align_labels(const KMeansModel& truth_model, const Raster& pred) {
    ClassMap out(pred.width, pred.height, truth_model.k, 0);
    for (int row = 0; row < pred.height; ++row) {
        for (int col = 0; col < pred.width; ++col) {
            int best = 0;
            double best_d2 = std::numeric_limits<double>::max();
            for (int c = 0; c < truth_model.k; ++c) {
                double d2 = 0.0;
                for (int b = 0; b < pred.bands; ++b) {
                    const double d = pred.at(b, col, row) - truth_model.centroid(c, b);
                    d2 += d * d;
                }
                if (d2 < best_d2) {
                    best_d2 = d2;
                    best = c;
                }
            }
            out.at(col, row) = best + 1;
        }
    }
    return out;
}

RealRaster block_average(const Raster& x, int n_z) {
    RealRaster out(x.width / n_z, x.height / n_z, x.bands);
    for (int b = 0; b < x.bands; ++b)
        for (int br = 0; br < out.height; ++br)
            for (int bc = 0; bc < out.width; ++bc) {
                double sum = 0.0;
                for (int r = 0; r < n_z; ++r)
                    for (int c = 0; c < n_z; ++c)
                        sum += x.at(b, bc * n_z + c, br * n_z + r);
                out.at(b, bc, br) = sum / (static_cast<double>(n_z) * n_z);
            }
    return out;
}

RealRaster shifted_block_average(const Raster& x, int n_z, int shift_rows, int shift_cols) {
    RealRaster out(x.width / n_z, x.height / n_z, x.bands);
    for (int b = 0; b < x.bands; ++b)
        for (int br = 0; br < out.height; ++br)
            for (int bc = 0; bc < out.width; ++bc) {
                double sum = 0.0;
                for (int r = 0; r < n_z; ++r)
                    for (int c = 0; c < n_z; ++c) {
                        const int rr = std::min(br * n_z + r + shift_rows, x.height - 1);
                        const int cc = std::min(bc * n_z + c + shift_cols, x.width - 1);
                        sum += x.at(b, cc, rr);
                    }
                out.at(b, bc, br) = sum / (static_cast<double>(n_z) * n_z);
            }
    return out;
}

RealRaster bilinear_resample(const Raster& x, int n_z) {
    RealRaster out(x.width / n_z, x.height / n_z, x.bands);
    for (int b = 0; b < x.bands; ++b)
        for (int br = 0; br < out.height; ++br)
            for (int bc = 0; bc < out.width; ++bc) {
                const double sy = (br + 0.5) * n_z - 0.5;
                const double sx = (bc + 0.5) * n_z - 0.5;
                const int r0 = std::clamp(static_cast<int>(std::floor(sy)), 0, x.height - 1);
                const int c0 = std::clamp(static_cast<int>(std::floor(sx)), 0, x.width - 1);
                const int r1 = std::min(r0 + 1, x.height - 1);
                const int c1 = std::min(c0 + 1, x.width - 1);
                const double fy = sy - std::floor(sy);
                const double fx = sx - std::floor(sx);
                out.at(b, bc, br) =
                    (1 - fy) * ((1 - fx) * x.at(b, c0, r0) + fx * x.at(b, c1, r0)) +
                    fy * ((1 - fx) * x.at(b, c0, r1) + fx * x.at(b, c1, r1));
            }
    return out;
}

RealRaster calibrate_columns(const Raster& x_old, const Raster& x_d, const GapMask& mask) {
    RealRaster out(x_old.width, x_old.height, x_old.bands);
    for (int b = 0; b < x_old.bands; ++b) {
        for (int col = 0; col < x_old.width; ++col) {
            std::vector<double> target;
            for (int row = 0; row < x_old.height; ++row)
                if (!mask.is_missing(col, row)) target.push_back(x_d.at(b, col, row));
            if (target.size() < 2)
                throw CalibrationDegenerateError(b, col, "column with < 2 valid pixels");

            double mu_t = 0.0;
            for (double v : target) mu_t += v;
            mu_t /= static_cast<double>(target.size());
            double var_t = 0.0;
            for (double v : target) var_t += (v - mu_t) * (v - mu_t);
            var_t /= static_cast<double>(target.size());

            double mu_o = 0.0;
            for (int row = 0; row < x_old.height; ++row) mu_o += x_old.at(b, col, row);
            mu_o /= x_old.height;
            double var_o = 0.0;
            for (int row = 0; row < x_old.height; ++row)
                var_o += (x_old.at(b, col, row) - mu_o) * (x_old.at(b, col, row) - mu_o);
            var_o /= x_old.height;

            const double sigma_t = std::sqrt(var_t);
            const double sigma_o = std::sqrt(var_o);
            for (int row = 0; row < x_old.height; ++row) {
                const double v = sigma_o > 0.0
                                     ? (x_old.at(b, col, row) - mu_o) * (sigma_t / sigma_o) + mu_t
                                     : mu_t;
                out.at(b, col, row) = std::clamp(v, 0.0, 255.0);
            }
        }
    }
    return out;
}

RegressionField fit_field(const Raster& x_d, const GapMask& mask, const Raster& z, int n_z) {
    const BlockGrid grid(x_d.width, x_d.height, n_z);
    const std::vector<std::uint8_t> valid = grid.valid_blocks(mask);

    RegressionField field;
    field.bands = x_d.bands;
    field.n_z = n_z;
    field.cells.resize(static_cast<std::size_t>(x_d.bands) * n_z * n_z);

    for (int b = 0; b < x_d.bands; ++b) {
        for (int g = 0; g < n_z; ++g) {
            for (int d = 0; d < n_z; ++d) {
                // Textbook two-pass OLS over valid blocks.
                std::vector<double> zs, xs;
                for (int br = 0; br < grid.blocks_high; ++br)
                    for (int bc = 0; bc < grid.blocks_wide; ++bc) {
                        if (!valid[grid.block_index(bc, br)]) continue;
                        zs.push_back(z.at(b, bc, br));
                        xs.push_back(x_d.at(b, bc * n_z + d, br * n_z + g));
                    }
                RegressionField::Cell& cell = field.at(b, d, g);
                cell.n_valid = static_cast<int>(zs.size());
                double mean_z = 0.0, mean_x = 0.0;
                for (std::size_t i = 0; i < zs.size(); ++i) {
                    mean_z += zs[i];
                    mean_x += xs[i];
                }
                if (!zs.empty()) {
                    mean_z /= static_cast<double>(zs.size());
                    mean_x /= static_cast<double>(zs.size());
                }
                double num = 0.0, den = 0.0;
                for (std::size_t i = 0; i < zs.size(); ++i) {
                    num += (zs[i] - mean_z) * (xs[i] - mean_x);
                    den += (zs[i] - mean_z) * (zs[i] - mean_z);
                }
                if (zs.size() < 2 || den == 0.0) {
                    cell.fallback = true;
                    cell.alpha = 0.0;
                    cell.beta = mean_x;
                } else {
                    cell.alpha = num / den;
                    cell.beta = mean_x - cell.alpha * mean_z;
                }
            }
        }
    }
    return field;
}

void ideal_filters_dft(const RealRaster& x, int band, double c_fraction, RealRaster& low,
                       RealRaster& high) {
    const int w = x.width, h = x.height;
    const std::size_t n = static_cast<std::size_t>(w) * h;
    using Cplx = std::complex<double>;
    std::vector<Cplx> spec(n);

    const double two_pi = 6.283185307179586476925286766559;
    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            Cplx acc(0.0, 0.0);
            for (int r = 0; r < h; ++r)
                for (int c = 0; c < w; ++c) {
                    const double phase = -two_pi * (static_cast<double>(u) * c / w +
                                                    static_cast<double>(v) * r / h);
                    acc += x.at(band, c, r) * Cplx(std::cos(phase), std::sin(phase));
                }
            spec[static_cast<std::size_t>(v) * w + u] = acc;
        }
    }

    auto freq = [](int idx, int extent) {
        const int f = idx <= extent / 2 ? idx : idx - extent;
        return static_cast<double>(f) / extent;
    };
    double max_u = 0.0, max_v = 0.0;
    for (int u = 0; u < w; ++u) max_u = std::max(max_u, freq(u, w) * freq(u, w));
    for (int v = 0; v < h; ++v) max_v = std::max(max_v, freq(v, h) * freq(v, h));
    const double r2_cut = c_fraction * c_fraction * (max_u + max_v);

    low = RealRaster(w, h, 1);
    high = RealRaster(w, h, 1);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            Cplx acc_low(0.0, 0.0), acc_high(0.0, 0.0);
            for (int v = 0; v < h; ++v)
                for (int u = 0; u < w; ++u) {
                    const double phase = two_pi * (static_cast<double>(u) * c / w +
                                                   static_cast<double>(v) * r / h);
                    const Cplx e(std::cos(phase), std::sin(phase));
                    const double r2 = freq(u, w) * freq(u, w) + freq(v, h) * freq(v, h);
                    const Cplx term = spec[static_cast<std::size_t>(v) * w + u] * e;
                    if (r2 <= r2_cut)
                        acc_low += term;
                    else
                        acc_high += term;
                }
            low.at(0, c, r) = acc_low.real() / static_cast<double>(n);
            high.at(0, c, r) = acc_high.real() / static_cast<double>(n);
        }
    }
}

ClassMap enhance(const ClassMap& c_d, const Raster& x, const GapMask& mask) {
    const int w = c_d.width, h = c_d.height;
    auto label_at = [&](const ClassMap& m, int col, int row) -> std::int32_t {
        return m.at(col, row);
    };

    // Lonely pixels (no 8-neighbor of the same class).
    auto lonely = [&](int col, int row) {
        for (int dr = -1; dr <= 1; ++dr)
            for (int dc = -1; dc <= 1; ++dc) {
                if (dc == 0 && dr == 0) continue;
                const int c = col + dc, r = row + dr;
                if (c < 0 || c >= w || r < 0 || r >= h) continue;
                if (label_at(c_d, c, r) == label_at(c_d, col, row)) return false;
            }
        return true;
    };

    auto mode_of = [&](std::vector<std::int32_t> labels) -> int {
        if (labels.empty()) return -1;
        std::map<std::int32_t, int> counts;
        for (std::int32_t l : labels) ++counts[l];
        int best = -1, best_count = 0;
        for (const auto& [l, count] : counts)
            if (count > best_count) { // map order: ties resolve to the lowest label
                best_count = count;
                best = l;
            }
        return best;
    };

    ClassMap step3 = c_d;
    std::vector<std::pair<int, int>> n_m;
    for (int row = 0; row < h; ++row) {
        for (int col = 0; col < w; ++col) {
            if (!lonely(col, row)) continue;
            std::vector<std::int32_t> fwd, bwd;
            const int fwd_off[4][2] = {{-1, 0}, {-1, -1}, {0, -1}, {1, -1}};
            const int bwd_off[4][2] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}};
            for (const auto& o : fwd_off) {
                const int c = col + o[0], r = row + o[1];
                if (c >= 0 && c < w && r >= 0 && r < h) fwd.push_back(label_at(c_d, c, r));
            }
            for (const auto& o : bwd_off) {
                const int c = col + o[0], r = row + o[1];
                if (c >= 0 && c < w && r >= 0 && r < h) bwd.push_back(label_at(c_d, c, r));
            }
            const int fm = mode_of(fwd), bm = mode_of(bwd);
            if (fm < 0 || bm < 0) continue;
            if (fm == bm) {
                if (fm > 0) step3.at(col, row) = fm;
            } else {
                n_m.emplace_back(col, row);
            }
        }
    }

    ClassMap out = step3;
    for (const auto& [col, row] : n_m) {
        if (step3.at(col, row) == 0) continue;
        std::map<std::int32_t, std::pair<std::vector<double>, int>> per_class;
        for (int dr = -1; dr <= 1; ++dr)
            for (int dc = -1; dc <= 1; ++dc) {
                if (dc == 0 && dr == 0) continue;
                const int c = col + dc, r = row + dr;
                if (c < 0 || c >= w || r < 0 || r >= h) continue;
                if (mask.is_missing(c, r)) continue;
                const std::int32_t l = step3.at(c, r);
                if (l <= 0) continue;
                auto& [sums, count] = per_class[l];
                sums.resize(x.bands, 0.0);
                for (int b = 0; b < x.bands; ++b) sums[b] += x.at(b, c, r);
                ++count;
            }
        int best = -1;
        double best_d2 = std::numeric_limits<double>::max();
        for (const auto& [l, entry] : per_class) {
            double d2 = 0.0;
            for (int b = 0; b < x.bands; ++b) {
                const double m = entry.first[b] / entry.second;
                d2 += (x.at(b, col, row) - m) * (x.at(b, col, row) - m);
            }
            if (d2 < best_d2) { // map order gives lowest-label ties
                best_d2 = d2;
                best = l;
            }
        }
        if (best > 0) out.at(col, row) = best;
    }
    return out;
}

ClassMap impute_zero_class(const ClassMap& c, const Raster& z_expanded) {
    ClassMap out = c;
    for (int row = 0; row < c.height; ++row) {
        for (int col = 0; col < c.width; ++col) {
            if (c.at(col, row) != 0) continue;
            for (int t = 1;; ++t) {
                std::map<std::int32_t, std::pair<std::vector<double>, int>> per_class;
                for (int r = std::max(0, row - t); r <= std::min(c.height - 1, row + t); ++r)
                    for (int cc = std::max(0, col - t); cc <= std::min(c.width - 1, col + t);
                         ++cc) {
                        const std::int32_t l = c.at(cc, r);
                        if (l <= 0) continue;
                        auto& [sums, count] = per_class[l];
                        sums.resize(z_expanded.bands, 0.0);
                        for (int b = 0; b < z_expanded.bands; ++b)
                            sums[b] += z_expanded.at(b, cc, r);
                        ++count;
                    }
                if (per_class.empty()) {
                    if (t > std::max(c.width, c.height))
                        throw NotEnoughDataError("no non-zero labels");
                    continue;
                }
                int best = -1;
                double best_d2 = std::numeric_limits<double>::max();
                for (const auto& [l, entry] : per_class) {
                    double d2 = 0.0;
                    for (int b = 0; b < z_expanded.bands; ++b) {
                        const double m = entry.first[b] / entry.second;
                        d2 += (z_expanded.at(b, col, row) - m) *
                              (z_expanded.at(b, col, row) - m);
                    }
                    if (d2 < best_d2) {
                        best_d2 = d2;
                        best = l;
                    }
                }
                out.at(col, row) = best;
                break;
            }
        }
    }
    return out;
}

std::vector<std::size_t> donor_pixels(const ClassMap& c_filled, const GapMask& mask, int col,
                                      int row, int window) {
    const std::int32_t label = c_filled.at(col, row);
    for (int t = window; t <= std::max(c_filled.width, c_filled.height); ++t) {
        std::vector<std::size_t> donors;
        for (int r = std::max(0, row - t); r <= std::min(c_filled.height - 1, row + t); ++r)
            for (int c = std::max(0, col - t); c <= std::min(c_filled.width - 1, col + t); ++c)
                if (!mask.is_missing(c, r) && c_filled.at(c, r) == label)
                    donors.push_back(c_filled.index(c, r));
        if (!donors.empty()) return donors;
    }
    return {};
}

} // namespace gapfill::ref
