#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "gapfill/classmap.hpp"
#include "gapfill/degrade.hpp"
#include "gapfill/fourier.hpp"
#include "gapfill/metrics.hpp"
#include "gapfill/reference.hpp"
#include "gapfill/regression.hpp"
#include "gapfill/scene.hpp"

using namespace gapfill;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

void report(const char* name, double serial_ms, double parallel_ms, double max_diff) {
    std::printf("%-22s %10.2f ms %12.2f ms %8.2fx   max|diff| %.3g\n", name, serial_ms,
                parallel_ms, serial_ms / parallel_ms, max_diff);
}

double max_abs_diff(const RealRaster& a, const RealRaster& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

} // namespace

int main(int argc, char** argv) {
    int side = 1000;
    int reps = 3;
    if (argc > 1) side = std::atoi(argv[1]);
    if (argc > 2) reps = std::atoi(argv[2]);
    side -= side % 40; // keep the side a multiple of n_z and the q window

#ifdef _OPENMP
    std::printf("threads: %d, raster: %dx%dx3, best of %d\n", omp_get_max_threads(), side,
                side, reps);
#else
    std::printf("threads: 1 (OpenMP off), raster: %dx%dx3, best of %d\n", side, side, reps);
#endif
    std::printf("%-22s %13s %15s %9s\n", "kernel", "serial", "parallel", "speedup");

    const Raster truth = generate_scene(7, side, side, 3, 5);
    const GapSpec spec{14, 54, StripOrientation::Horizontal, 0.26};
    const GapMask mask = make_gap_mask(spec, side, side);
    const Raster damaged = apply_gap(truth, mask, 0);
    const Raster z = quantize(rrm0_block_average(truth, 5));
    const Raster recon = generate_scene(8, side, side, 3, 5);

    {
        RealRaster a, b;
        const double s = time_ms([&] { a = ref::block_average(damaged, 5); }, reps);
        const double p = time_ms([&] { b = rrm0_block_average(damaged, 5); }, reps);
        report("block average", s, p, max_abs_diff(a, b));
    }
    {
        RealRaster a, b;
        const double s = time_ms([&] { a = ref::bilinear_resample(truth, 5); }, reps);
        const double p = time_ms([&] { b = rrm1_smooth_resample(truth, 5); }, reps);
        report("bilinear resample", s, p, max_abs_diff(a, b));
    }
    {
        RealRaster a, b;
        const double s = time_ms([&] { a = ref::calibrate_columns(truth, damaged, mask); }, reps);
        const double p = time_ms([&] { b = calibrate_columns(truth, damaged, mask); }, reps);
        report("column calibration", s, p, max_abs_diff(a, b));
    }
    {
        RegressionField fa, fb;
        const double s = time_ms([&] { fa = ref::fit_field(damaged, mask, z, 5); }, reps);
        const double p = time_ms([&] { fb = fit_field(damaged, mask, z, 5); }, reps);
        double diff = 0.0;
        for (std::size_t i = 0; i < fa.cells.size(); ++i)
            diff = std::max(diff, std::abs(fa.cells[i].alpha - fb.cells[i].alpha));
        report("regression fit", s, p, diff);
    }
    {
        double ra = 0.0, rb = 0.0;
        const double s = time_ms([&] { ra = ref::rmse(truth, recon, &mask); }, reps);
        const double p = time_ms([&] { rb = rmse(truth, recon, &mask); }, reps);
        report("rmse", s, p, std::abs(ra - rb));
    }
    {
        double qa = 0.0, qb = 0.0;
        const double s = time_ms([&] { qa = ref::q_index(truth, recon, 8); }, reps);
        const double p = time_ms([&] { qb = q_index(truth, recon, 8).q; }, reps);
        report("q index", s, p, std::abs(qa - qb));
    }
    {
        const KMeansModel model =
            kmeans_segment(truth, GapMask(side, side, false), 5, 99, 10);
        ClassMap ca, cb;
        const double s = time_ms([&] { ca = ref::align_labels(model, recon); }, reps);
        const double p = time_ms([&] { cb = align_labels(model, recon); }, reps);
        int diff = 0;
        for (std::size_t i = 0; i < ca.labels.size(); ++i) diff += ca.labels[i] != cb.labels[i];
        report("nearest-centroid map", s, p, diff);
    }
    {
        const KMeansModel model = kmeans_segment(damaged, mask, 5, 99, 10);
        ClassMap ca, cb;
        const double s = time_ms([&] { ca = ref::enhance(model.assignments, damaged, mask); },
                                 reps);
        const double p = time_ms([&] { cb = enhance(model.assignments, damaged, mask); }, reps);
        int diff = 0;
        for (std::size_t i = 0; i < ca.labels.size(); ++i) diff += ca.labels[i] != cb.labels[i];
        report("class enhancement", s, p, diff);

        const Raster z_exp = expand_lowres(z, 5);
        ClassMap za, zb;
        const double s2 =
            time_ms([&] { za = ref::impute_zero_class(model.assignments, z_exp); }, reps);
        const double p2 = time_ms([&] { zb = impute_zero_class(model.assignments, z_exp); },
                                  reps);
        diff = 0;
        for (std::size_t i = 0; i < za.labels.size(); ++i) diff += za.labels[i] != zb.labels[i];
        report("zero-class imputation", s2, p2, diff);
    }
    return 0;
}
