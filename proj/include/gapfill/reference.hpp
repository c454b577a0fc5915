#pragma once

#include <cstdint>
#include <vector>

#include "gapfill/classmap.hpp"
#include "gapfill/metrics.hpp"
#include "gapfill/raster.hpp"
#include "gapfill/regression.hpp"

// Serial reference implementations written straight from the definitions,
// with no code shared with the parallel kernels. Tests use them as oracles;
// the bench tool uses them as the single-thread baseline.
namespace gapfill::ref {

double rmse(const Raster& y, const Raster& w, const GapMask* region = nullptr);

double q_index(const Raster& y, const Raster& w, int window, const GapMask* region = nullptr);

/// The windowed index I evaluated directly on two value lists.
double q_window_value(const std::vector<double>& y, const std::vector<double>& w);

ConfusionMatrix confusion(const ClassMap& truth, const ClassMap& pred,
                          const GapMask* region = nullptr);
double overall_accuracy(const ConfusionMatrix& m);
double kappa(const ConfusionMatrix& m);

ClassMap align_labels(const KMeansModel& truth_model, const Raster& pred);

RealRaster block_average(const Raster& x, int n_z);
RealRaster shifted_block_average(const Raster& x, int n_z, int shift_rows, int shift_cols);
RealRaster bilinear_resample(const Raster& x, int n_z);

RealRaster calibrate_columns(const Raster& x_old, const Raster& x_d, const GapMask& mask);

RegressionField fit_field(const Raster& x_d, const GapMask& mask, const Raster& z, int n_z);

/// Naive O(N^2) DFT split into ideal low/high bands (small inputs only).
void ideal_filters_dft(const RealRaster& x, int band, double c_fraction, RealRaster& low,
                       RealRaster& high);

ClassMap enhance(const ClassMap& c_d, const Raster& x, const GapMask& mask);

ClassMap impute_zero_class(const ClassMap& c, const Raster& z_expanded);

/// Donor set for one masked pixel under the growing-window rule.
std::vector<std::size_t> donor_pixels(const ClassMap& c_filled, const GapMask& mask, int col,
                                      int row, int window);

} // namespace gapfill::ref
