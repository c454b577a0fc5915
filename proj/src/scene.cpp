#include "gapfill/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "gapfill/rng.hpp"

namespace gapfill {

namespace {

// Smooth Gaussian field: white noise on a coarse lattice, bilinearly
// interpolated. Landsat-like fine texture is spatially correlated, which is
// what separates block averaging from point decimation only mildly.
struct ValueNoise {
    int spacing;
    int nodes_x;
    int nodes_y;
    std::vector<double> nodes;

    ValueNoise(std::uint64_t seed, int width, int height, int spacing_)
        : spacing(spacing_) {
        nodes_x = width / spacing + 2;
        nodes_y = height / spacing + 2;
        nodes.resize(static_cast<std::size_t>(nodes_x) * nodes_y);
        for (int j = 0; j < nodes_y; ++j) {
            PixelRng rng(seed, static_cast<std::uint64_t>(j));
            for (int i = 0; i < nodes_x; ++i)
                nodes[static_cast<std::size_t>(j) * nodes_x + i] = rng.next_gaussian();
        }
    }

    double at(int col, int row) const {
        const int i = col / spacing, j = row / spacing;
        const double fx = static_cast<double>(col % spacing) / spacing;
        const double fy = static_cast<double>(row % spacing) / spacing;
        const double n00 = nodes[static_cast<std::size_t>(j) * nodes_x + i];
        const double n10 = nodes[static_cast<std::size_t>(j) * nodes_x + i + 1];
        const double n01 = nodes[static_cast<std::size_t>(j + 1) * nodes_x + i];
        const double n11 = nodes[static_cast<std::size_t>(j + 1) * nodes_x + i + 1];
        return (1 - fy) * ((1 - fx) * n00 + fx * n10) + fy * ((1 - fx) * n01 + fx * n11);
    }
};

} // namespace

Raster generate_scene(std::uint64_t seed, int width, int height, int bands, int n_classes) {
    if (width < 1 || height < 1 || bands < 1 || n_classes < 1)
        throw std::invalid_argument("scene dimensions and class count must be >= 1");

    PixelRng rng(seed, 0x5CE4EULL);

    // Class mean vectors: evenly spread levels with per-band jitter.
    std::vector<double> mean(static_cast<std::size_t>(n_classes) * bands);
    std::vector<double> sigma(n_classes);
    for (int c = 0; c < n_classes; ++c) {
        const double base =
            n_classes == 1 ? 128.0 : 30.0 + 195.0 * c / static_cast<double>(n_classes - 1);
        for (int b = 0; b < bands; ++b)
            mean[static_cast<std::size_t>(c) * bands + b] =
                std::clamp(base + (rng.next_double() - 0.5) * 22.0, 10.0, 245.0);
        sigma[c] = 9.0 + 8.0 * rng.next_double(); // wide within-class spread
    }

    // Mosaic sites; the first n_classes sites guarantee every class occurs.
    const int n_sites = std::max(4 * n_classes, n_classes);
    std::vector<int> site_col(n_sites), site_row(n_sites), site_class(n_sites);
    for (int s = 0; s < n_sites; ++s) {
        site_col[s] = static_cast<int>(rng.next_below(width));
        site_row[s] = static_cast<int>(rng.next_below(height));
        site_class[s] = s < n_classes ? s : static_cast<int>(rng.next_below(n_classes));
    }

    const double grad_col = (rng.next_double() - 0.5) * 20.0;
    const double grad_row = (rng.next_double() - 0.5) * 20.0;
    const int spot_col = static_cast<int>(rng.next_below(width));
    const int spot_row = static_cast<int>(rng.next_below(height));
    const double spot_radius = std::min(width, height) * (0.05 + 0.05 * rng.next_double());
    const double spot_gain = 20.0 + 25.0 * rng.next_double();

    // Small-scale features (fields, buildings, ponds): discs of 1..3 px
    // radius overriding the mosaic class.
    std::vector<std::int32_t> overlay(static_cast<std::size_t>(width) * height, -1);
    const int n_features = width * height / 2500;
    for (int f = 0; f < n_features; ++f) {
        const int fc = static_cast<int>(rng.next_below(width));
        const int fr = static_cast<int>(rng.next_below(height));
        const int radius = 1 + static_cast<int>(rng.next_below(3));
        const int fcls = static_cast<int>(rng.next_below(n_classes));
        for (int r = std::max(0, fr - radius); r <= std::min(height - 1, fr + radius); ++r)
            for (int c = std::max(0, fc - radius); c <= std::min(width - 1, fc + radius); ++c)
                if ((c - fc) * (c - fc) + (r - fr) * (r - fr) <= radius * radius)
                    overlay[static_cast<std::size_t>(r) * width + c] = fcls;
    }

    // Per-band smooth texture fields plus a small white component.
    const int spacing = 7 + static_cast<int>(rng.next_below(3));
    std::vector<ValueNoise> texture;
    texture.reserve(bands);
    for (int b = 0; b < bands; ++b)
        texture.emplace_back(derive_seed(seed, 7000 + b), width, height, spacing);
    const double white_sigma = 4.0;

    RealRaster out(width, height, bands);
    const std::size_t plane = out.plane();
#pragma omp parallel for
    for (int row = 0; row < height; ++row) {
        for (int col = 0; col < width; ++col) {
            // Nearest site in exact integer arithmetic, ties to lowest index.
            std::int64_t best_d2 = std::numeric_limits<std::int64_t>::max();
            int cls = 0;
            for (int s = 0; s < n_sites; ++s) {
                const std::int64_t dc = col - site_col[s];
                const std::int64_t dr = row - site_row[s];
                const std::int64_t d2 = dc * dc + dr * dr;
                if (d2 < best_d2) {
                    best_d2 = d2;
                    cls = site_class[s];
                }
            }
            const std::int32_t over = overlay[static_cast<std::size_t>(row) * width + col];
            if (over >= 0) cls = over;

            const double illum =
                grad_col * (static_cast<double>(col) / std::max(width - 1, 1) - 0.5) +
                grad_row * (static_cast<double>(row) / std::max(height - 1, 1) - 0.5);
            const double dcs = col - spot_col, drs = row - spot_row;
            const double spot =
                dcs * dcs + drs * drs <= spot_radius * spot_radius ? spot_gain : 0.0;

            const std::size_t pixel = static_cast<std::size_t>(row) * width + col;
            PixelRng prng(seed, pixel);
            for (int b = 0; b < bands; ++b)
                out.data[static_cast<std::size_t>(b) * plane + pixel] =
                    mean[static_cast<std::size_t>(cls) * bands + b] +
                    sigma[cls] * texture[b].at(col, row) +
                    white_sigma * prng.next_gaussian() + illum + spot;
        }
    }
    return quantize(out);
}

} // namespace gapfill
