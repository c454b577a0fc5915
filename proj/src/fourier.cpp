#include "gapfill/fourier.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "gapfill/errors.hpp"

namespace gapfill {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

// FFTW planning is not thread-safe; execution is.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

using Cplx = std::complex<double>;

fftw_complex* as_fftw(Cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

void dft_2d(std::vector<Cplx>& buf, int width, int height, int sign) {
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        // Row-major data: FFTW's n0 is the slow dimension (rows).
        plan = fftw_plan_dft_2d(height, width, as_fftw(buf.data()), as_fftw(buf.data()), sign,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_destroy_plan(plan);
    }
}

// Squared centered radius of spectrum bin (u,v) in normalized frequency.
double radius_sq(int u, int extent) {
    const int f = u <= extent / 2 ? u : u - extent;
    const double nf = static_cast<double>(f) / extent;
    return nf * nf;
}

double max_radius_sq(int width, int height) {
    double mu = 0.0, mv = 0.0;
    for (int u = 0; u < width; ++u) mu = std::max(mu, radius_sq(u, width));
    for (int v = 0; v < height; ++v) mv = std::max(mv, radius_sq(v, height));
    return mu + mv;
}

// 1 for bins inside the low-pass disk, 0 outside. DC (0,0) is always 1.
std::vector<std::uint8_t> lowpass_disk(int width, int height, double c_fraction) {
    const double r2_cut = c_fraction * c_fraction * max_radius_sq(width, height);
    std::vector<std::uint8_t> in_disk(static_cast<std::size_t>(width) * height);
    for (int v = 0; v < height; ++v) {
        const double rv = radius_sq(v, height);
        for (int u = 0; u < width; ++u)
            in_disk[static_cast<std::size_t>(v) * width + u] =
                rv + radius_sq(u, width) <= r2_cut ? 1 : 0;
    }
    return in_disk;
}

} // namespace

void CutoffSpec::validate() const {
    if (!(c_fraction > 0.0 && c_fraction <= 1.0))
        throw std::invalid_argument("cutoff fraction must be in (0, 1]");
}

RealRaster calibrate_columns(const Raster& x_old, const Raster& x_d, const GapMask& mask) {
    require(x_old.same_support(x_d), "calibration rasters must share support and bands");
    require(mask.width == x_d.width && mask.height == x_d.height,
            "mask dimensions do not match rasters");

    RealRaster out(x_old.width, x_old.height, x_old.bands);
    for (int b = 0; b < x_old.bands; ++b) {
        bool degenerate = false;
        int degenerate_col = -1;
#pragma omp parallel for
        for (int col = 0; col < x_old.width; ++col) {
            std::int64_t sum_t = 0, sum_t2 = 0;
            int n_valid = 0;
            std::int64_t sum_o = 0, sum_o2 = 0;
            for (int row = 0; row < x_old.height; ++row) {
                const std::int64_t o = x_old.at(b, col, row);
                sum_o += o;
                sum_o2 += o * o;
                if (!mask.is_missing(col, row)) {
                    const std::int64_t t = x_d.at(b, col, row);
                    sum_t += t;
                    sum_t2 += t * t;
                    ++n_valid;
                }
            }
            if (n_valid < 2) {
                // Record and bail out after the loop; throwing inside an
                // OpenMP region would terminate.
#pragma omp critical
                {
                    degenerate = true;
                    degenerate_col = degenerate_col < 0 ? col : std::min(degenerate_col, col);
                }
                continue;
            }
            const int n = x_old.height;
            const double mu_t = static_cast<double>(sum_t) / n_valid;
            const double var_t =
                static_cast<double>(sum_t2) / n_valid - mu_t * mu_t;
            const double mu_o = static_cast<double>(sum_o) / n;
            const double var_o = static_cast<double>(sum_o2) / n - mu_o * mu_o;
            const double sigma_t = std::sqrt(std::max(var_t, 0.0));
            const double sigma_o = std::sqrt(std::max(var_o, 0.0));
            for (int row = 0; row < x_old.height; ++row) {
                double v;
                if (sigma_o <= 0.0) {
                    v = mu_t; // constant source column: affine match undefined
                } else {
                    v = (x_old.at(b, col, row) - mu_o) * (sigma_t / sigma_o) + mu_t;
                }
                out.at(b, col, row) = std::clamp(v, 0.0, 255.0);
            }
        }
        if (degenerate)
            throw CalibrationDegenerateError(
                b, degenerate_col,
                "calibration degenerate: column " + std::to_string(degenerate_col) + " of band " +
                    std::to_string(b) + " has fewer than 2 valid pixels");
    }
    return out;
}

FilterPair ideal_filters(const RealRaster& x, int band, const CutoffSpec& cutoff) {
    cutoff.validate();
    require(band >= 0 && band < x.bands, "band out of range");
    require(x.width >= 2 && x.height >= 2, "band dimensions must be >= 2x2");

    const int w = x.width, h = x.height;
    const std::size_t n = static_cast<std::size_t>(w) * h;
    std::vector<Cplx> spectrum(n);
    const double* src = x.data.data() + static_cast<std::size_t>(band) * n;
    for (std::size_t i = 0; i < n; ++i) spectrum[i] = Cplx(src[i], 0.0);
    dft_2d(spectrum, w, h, FFTW_FORWARD);

    const std::vector<std::uint8_t> in_disk = lowpass_disk(w, h, cutoff.c_fraction);
    std::vector<Cplx> low_spec(n), high_spec(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (in_disk[i]) {
            low_spec[i] = spectrum[i];
        } else {
            high_spec[i] = spectrum[i];
        }
    }
    dft_2d(low_spec, w, h, FFTW_BACKWARD);
    dft_2d(high_spec, w, h, FFTW_BACKWARD);

    FilterPair out{RealRaster(w, h, 1), RealRaster(w, h, 1)};
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.low.data[i] = low_spec[i].real() * scale;
        out.high.data[i] = high_spec[i].real() * scale;
    }
    return out;
}

Raster method_a(const Raster& x_d, const GapMask& mask, const Raster& z_expanded,
                const RealRaster& x_old_cal, const CutoffSpec& cutoff) {
    cutoff.validate();
    require(x_d.same_support(z_expanded), "method A rasters must share support and bands");
    require(x_old_cal.width == x_d.width && x_old_cal.height == x_d.height &&
                x_old_cal.bands == x_d.bands,
            "calibrated older image must share support and bands");
    require(mask.width == x_d.width && mask.height == x_d.height,
            "mask dimensions do not match rasters");
    require(x_d.width >= 2 && x_d.height >= 2, "support must be >= 2x2");

    Raster out = x_d;
    if (mask.empty()) return out;

    const int w = x_d.width, h = x_d.height;
    const std::size_t n = static_cast<std::size_t>(w) * h;
    const std::vector<std::uint8_t> in_disk = lowpass_disk(w, h, cutoff.c_fraction);

#pragma omp parallel for
    for (int b = 0; b < x_d.bands; ++b) {
        std::vector<Cplx> z_spec(n), old_spec(n);
        const std::uint8_t* zp = z_expanded.band(b).data();
        const double* op = x_old_cal.data.data() + static_cast<std::size_t>(b) * n;
        for (std::size_t i = 0; i < n; ++i) {
            z_spec[i] = Cplx(zp[i], 0.0);
            old_spec[i] = Cplx(op[i], 0.0);
        }
        dft_2d(z_spec, w, h, FFTW_FORWARD);
        dft_2d(old_spec, w, h, FFTW_FORWARD);

        // Composite spectrum: low band from Z, high band from the older image.
        std::vector<Cplx> mix(n);
        for (std::size_t i = 0; i < n; ++i) mix[i] = in_disk[i] ? z_spec[i] : old_spec[i];
        dft_2d(mix, w, h, FFTW_BACKWARD);

        std::uint8_t* dst = out.band(b).data();
        const double scale = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (mask.missing[i]) dst[i] = quantize_value(std::abs(mix[i].real() * scale));
        }
    }
    return out;
}

} // namespace gapfill
