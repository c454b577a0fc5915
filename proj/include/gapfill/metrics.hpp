#pragma once

#include <cstdint>
#include <vector>

#include "gapfill/raster.hpp"
#include "gapfill/classmap.hpp"

namespace gapfill {

/// k x k contingency counts: entry (i,j) holds the pixels of true class j
/// assigned class i (rows = predicted, columns = true).
struct ConfusionMatrix {
    int k = 0;
    std::vector<std::int64_t> counts; // row-major, counts[i*k + j]
    std::int64_t n = 0;

    std::int64_t at(int pred, int truth) const {
        return counts[static_cast<std::size_t>(pred) * k + truth];
    }
    std::int64_t& at(int pred, int truth) {
        return counts[static_cast<std::size_t>(pred) * k + truth];
    }
    std::int64_t row_sum(int pred) const;
    std::int64_t col_sum(int truth) const;
};

struct QResult {
    double q = 0.0;
    int windows_used = 0;
    int windows_degenerate = 0; // zero-denominator tiles excluded from the mean
};

/// Root mean square error over the region (Euclidean norm across bands per
/// pixel). region == nullptr evaluates the full support.
double rmse(const Raster& y, const Raster& w, const GapMask* region = nullptr);

/// Windowed universal quality index: mean of I over non-overlapping
/// window x window tiles (ragged edges dropped, degenerate tiles skipped),
/// per band, then averaged across bands. With a region, only tiles that
/// intersect it enter the average; tile statistics always use the full tile.
QResult q_index(const Raster& y, const Raster& w, int window, const GapMask* region = nullptr);

/// Contingency counts over the region. Labels must be 1..k inside it.
ConfusionMatrix confusion(const ClassMap& truth, const ClassMap& pred,
                          const GapMask* region = nullptr);

double overall_accuracy(const ConfusionMatrix& m);
double kappa(const ConfusionMatrix& m);

/// Label a raster by the nearest ground-truth centroid (ties to the lowest
/// label), producing a map in the truth model's label space.
ClassMap align_labels(const KMeansModel& truth_model, const Raster& pred);

} // namespace gapfill
