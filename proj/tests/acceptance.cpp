// Acceptance suite: runs every acceptance check at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exit status is nonzero if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "gapfill/classmap.hpp"
#include "gapfill/degrade.hpp"
#include "gapfill/errors.hpp"
#include "gapfill/fourier.hpp"
#include "gapfill/harness.hpp"
#include "gapfill/metrics.hpp"
#include "gapfill/reference.hpp"
#include "gapfill/regression.hpp"
#include "gapfill/rng.hpp"
#include "gapfill/scene.hpp"

namespace fs = std::filesystem;
using namespace gapfill;

namespace {

int g_failures = 0;

void report(int number, const std::string& name, bool pass, const std::string& detail) {
    std::printf("%s criterion %d: %s%s%s\n", pass ? "PASS" : "FAIL", number, name.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    if (!pass) ++g_failures;
}

bool rel_close(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

Raster random_raster(PixelRng& rng, int w, int h, int bands) {
    Raster r(w, h, bands);
    for (auto& v : r.data) v = static_cast<std::uint8_t>(rng.next_below(256));
    return r;
}

ClassMap random_classmap(PixelRng& rng, int w, int h, int k) {
    ClassMap c(w, h, k);
    for (auto& l : c.labels) l = 1 + static_cast<std::int32_t>(rng.next_below(k));
    return c;
}

GapMask random_mask(PixelRng& rng, int w, int h, double p) {
    GapMask m(w, h);
    for (auto& v : m.missing) v = rng.next_double() < p ? 1 : 0;
    return m;
}

double elapsed_s(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// --- criterion 1 -----------------------------------------------------------

void criterion_metric_oracles() {
    const auto t0 = std::chrono::steady_clock::now();
    PixelRng rng(101, 0);
    bool ok = true;
    std::string detail;

    for (int trial = 0; trial < 110 && ok; ++trial) {
        const int w = 8 + static_cast<int>(rng.next_below(25));
        const int h = 8 + static_cast<int>(rng.next_below(25));
        const int bands = 1 + static_cast<int>(rng.next_below(3));
        const int k = 2 + static_cast<int>(rng.next_below(3));

        const Raster y = random_raster(rng, w, h, bands);
        const Raster v = random_raster(rng, w, h, bands);
        const GapMask mask = random_mask(rng, w, h, 0.35);
        const GapMask* region = trial % 2 == 0 && mask.count() > 0 ? &mask : nullptr;

        if (!rel_close(rmse(y, v, region), ref::rmse(y, v, region), 1e-12)) {
            ok = false;
            detail = "rmse mismatch at trial " + std::to_string(trial);
            break;
        }

        try {
            const double mine = q_index(y, v, 8, region).q;
            const double direct = ref::q_index(y, v, 8, region);
            if (!rel_close(mine, direct, 1e-12)) {
                ok = false;
                detail = "q mismatch at trial " + std::to_string(trial);
                break;
            }
        } catch (const UndefinedMeasureError&) {
        }

        const ClassMap truth = random_classmap(rng, w, h, k);
        const ClassMap pred = random_classmap(rng, w, h, k);
        const ConfusionMatrix mine = confusion(truth, pred, region);
        const ConfusionMatrix brute = ref::confusion(truth, pred, region);
        if (mine.counts != brute.counts || mine.n != brute.n) {
            ok = false;
            detail = "confusion mismatch at trial " + std::to_string(trial);
            break;
        }
        if (!rel_close(overall_accuracy(mine), ref::overall_accuracy(brute), 1e-12)) {
            ok = false;
            detail = "overall accuracy mismatch at trial " + std::to_string(trial);
            break;
        }
        try {
            if (!rel_close(kappa(mine), ref::kappa(brute), 1e-12)) {
                ok = false;
                detail = "kappa mismatch at trial " + std::to_string(trial);
            }
        } catch (const UndefinedMeasureError&) {
        }
    }

    const double secs = elapsed_s(t0);
    if (secs >= 10.0) {
        ok = false;
        detail = "runtime " + std::to_string(secs) + " s exceeds 10 s";
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "110 randomized cases vs brute force, %.2f s", secs);
    report(1, "metric oracles at 1e-12", ok, ok ? buf : detail);
}

// --- criterion 2 -----------------------------------------------------------

void criterion_fixed_points() {
    bool ok = true;
    std::string detail;
    PixelRng rng(102, 0);

    const Raster y = random_raster(rng, 16, 16, 2);
    if (rmse(y, y) != 0.0) {
        ok = false;
        detail = "rmse(y,y) != 0";
    }
    if (ok && q_index(y, y, 8).q != 1.0) {
        ok = false;
        detail = "q(y,y) != 1";
    }

    if (ok) {
        const ClassMap map = random_classmap(rng, 16, 16, 3);
        const ConfusionMatrix m = confusion(map, map);
        if (overall_accuracy(m) != 1.0 || std::abs(kappa(m) - 1.0) > 1e-15) {
            ok = false;
            detail = "perfect class map does not give OA 1 / kappa 1";
        }
    }

    if (ok) {
        ConfusionMatrix m;
        m.k = 2;
        m.counts = {40, 10, 10, 40};
        m.n = 100;
        if (!rel_close(overall_accuracy(m), 0.8, 1e-12) || !rel_close(kappa(m), 0.6, 1e-12)) {
            ok = false;
            detail = "[[40,10],[10,40]] does not give OA 0.8 / kappa 0.6";
        }
    }
    report(2, "metric fixed points", ok, detail);
}

// --- criterion 3 -----------------------------------------------------------

void criterion_fourier() {
    bool ok = true;
    std::string detail;
    PixelRng rng(103, 0);

    for (int trial = 0; trial < 51 && ok; ++trial) {
        const int w = 8 + static_cast<int>(rng.next_below(25));
        const int h = 8 + static_cast<int>(rng.next_below(25));
        const RealRaster x(random_raster(rng, w, h, 1));
        for (double cutoff : {0.2, 0.5, 0.8}) {
            const FilterPair f = ideal_filters(x, 0, CutoffSpec{cutoff});
            double max_err = 0.0, max_abs = 1.0;
            for (std::size_t i = 0; i < x.plane(); ++i) {
                max_err = std::max(max_err,
                                   std::abs(f.low.data[i] + f.high.data[i] - x.data[i]));
                max_abs = std::max(max_abs, std::abs(x.data[i]));
            }
            if (max_err > 1e-9 * max_abs) {
                ok = false;
                detail = "complementarity violated at trial " + std::to_string(trial);
                break;
            }
        }
    }

    if (ok) {
        const Raster truth = generate_scene(3103, 120, 120, 3, 4);
        const GapMask mask = make_gap_mask({8, 30, StripOrientation::Horizontal, 0.26},
                                           120, 120);
        const Raster damaged = apply_gap(truth, mask);
        for (double cutoff : {0.2, 0.5, 0.8}) {
            const Raster recon =
                method_a(damaged, mask, truth, RealRaster(truth), CutoffSpec{cutoff});
            for (int b = 0; b < truth.bands && ok; ++b)
                for (int row = 0; row < truth.height && ok; ++row)
                    for (int col = 0; col < truth.width; ++col)
                        if (mask.is_missing(col, row) &&
                            std::abs(recon.at(b, col, row) - truth.at(b, col, row)) > 1) {
                            ok = false;
                            detail = "perfect side information misses by > 1 gray level";
                            break;
                        }
        }
    }
    report(3, "Fourier complementarity and self-reconstruction", ok, detail);
}

// --- criterion 4 -----------------------------------------------------------

void criterion_regression() {
    bool ok = true;
    std::string detail;
    PixelRng rng(104, 0);

    for (int n_z : {2, 5}) {
        for (double fraction : {0.1, 0.26}) {
            const int side = 100;
            Raster z = random_raster(rng, side / n_z, side / n_z, 2);
            for (auto& v : z.data) v = static_cast<std::uint8_t>(v % 101);
            const Raster z_exp = expand_lowres(z, n_z);

            // Per-offset affine ground truth with slopes in {1, 1.5, 2}.
            Raster truth = z_exp;
            std::vector<double> slope(static_cast<std::size_t>(n_z) * n_z);
            std::vector<int> intercept(static_cast<std::size_t>(n_z) * n_z);
            for (std::size_t i = 0; i < slope.size(); ++i) {
                const double slopes[3] = {1.0, 1.5, 2.0};
                slope[i] = slopes[rng.next_below(3)];
                intercept[i] = static_cast<int>(rng.next_below(10));
            }
            for (int b = 0; b < truth.bands; ++b)
                for (int row = 0; row < side; ++row)
                    for (int col = 0; col < side; ++col) {
                        const int off = (row % n_z) * n_z + col % n_z;
                        truth.at(b, col, row) = quantize_value(
                            slope[off] * z_exp.at(b, col, row) + intercept[off]);
                    }

            const GapMask mask =
                make_gap_mask({5, 20, StripOrientation::Horizontal, fraction}, side, side);
            const Raster recon = method_b(apply_gap(truth, mask), mask, z, n_z);
            const double err = rmse(truth, recon, &mask);
            if (err > 0.5) {
                ok = false;
                char buf[96];
                std::snprintf(buf, sizeof buf, "rmse %.3f > 0.5 at n_z=%d fraction=%.2f", err,
                              n_z, fraction);
                detail = buf;
            }
        }
    }
    report(4, "regression exactness on affine ground truth", ok, detail);
}

// --- criterion 5 -----------------------------------------------------------

void criterion_method_c() {
    bool ok = true;
    std::string detail;

    // Determinism, including across thread counts.
    {
        const Raster truth = generate_scene(3105, 80, 80, 2, 4);
        const GapMask mask = make_gap_mask({6, 20, StripOrientation::Horizontal, 0.26},
                                           80, 80);
        const Raster damaged = apply_gap(truth, mask);
        const Raster z_exp = expand_lowres(quantize(rrm0_block_average(truth, 4)), 4);
        const MethodCResult a = method_c(damaged, mask, z_exp, 4, 99, true);
#ifdef _OPENMP
        const int saved = omp_get_max_threads();
        omp_set_num_threads(1);
#endif
        const MethodCResult b = method_c(damaged, mask, z_exp, 4, 99, true);
#ifdef _OPENMP
        omp_set_num_threads(saved);
#endif
        if (!(a.raster == b.raster) || !(a.classes == b.classes)) {
            ok = false;
            detail = "same seed gave different outputs";
        }
        if (ok && a.classes.has_zero_labels()) {
            ok = false;
            detail = "filled class map contains zero labels";
        }

        // Hull property against brute-force donor enumeration.
        if (ok) {
            const ClassMap filled = impute_zero_class(a.model.assignments, z_exp);
            const SampleResult sampled =
                sample_radiometric(filled, damaged, mask, 3, derive_seed(99, 2), a.model);
            for (int row = 0; row < 80 && ok; ++row)
                for (int col = 0; col < 80; ++col) {
                    if (!mask.is_missing(col, row)) continue;
                    const auto donors = ref::donor_pixels(filled, mask, col, row, 3);
                    if (donors.empty()) continue;
                    for (int band = 0; band < damaged.bands; ++band) {
                        std::uint8_t lo = 255, hi = 0;
                        for (std::size_t d : donors) {
                            lo = std::min(lo, damaged.data[band * damaged.plane() + d]);
                            hi = std::max(hi, damaged.data[band * damaged.plane() + d]);
                        }
                        const std::uint8_t got = sampled.raster.at(band, col, row);
                        if (got < lo || got > hi) {
                            ok = false;
                            detail = "imputed vector escapes the donor hull bounds";
                            break;
                        }
                    }
                    if (!ok) break;
                }
        }
    }

    // Two-region constant mosaic with 26% strips: C1 recovers the partition.
    if (ok) {
        const int side = 250;
        Raster truth(side, side, 3);
        for (int b = 0; b < 3; ++b)
            for (int row = 0; row < side; ++row)
                for (int col = 0; col < side; ++col)
                    truth.at(b, col, row) = row < side / 2 ? 60 : 190;
        const GapMask mask = make_gap_mask({14, 54, StripOrientation::Horizontal, 0.26},
                                           side, side);
        const Raster damaged = apply_gap(truth, mask);
        const Raster z_exp = expand_lowres(quantize(rrm0_block_average(truth, 5)), 5);
        const MethodCResult res = method_c(damaged, mask, z_exp, 2, 4242, false);
        const ClassMap expected = ref::align_labels(res.model, truth);
        if (res.classes.labels != expected.labels) {
            ok = false;
            detail = "C1 class map differs from the ground-truth partition";
        }
    }
    report(5, "method C determinism, hull bounds, exact mosaic partition", ok, detail);
}

// --- criteria 6-8 ----------------------------------------------------------

struct GroupMeans {
    double rmse_mean = 0.0;
    double q_mean = 0.0;
    int n = 0;
};

void criteria_factorial() {
    const ExperimentConfig cfg; // desk-scale defaults, pinned seed
    const fs::path base = fs::temp_directory_path() / "gapfill_acceptance";
    fs::remove_all(base);
    const fs::path run_a = base / "run_a";
    const fs::path run_b = base / "run_b";

    auto run_once = [&cfg](const fs::path& dir) {
        build_database(cfg, dir.string());
        const ResultTable table = run_experiment(cfg, dir.string());
        write_results(table, cfg, dir.string());
        const SummaryTables sums = summarize(table.records);
        std::ofstream(dir / "mean_profiles.csv") << sums.mean_profiles;
        std::ofstream(dir / "method_means.csv") << sums.method_means;
        std::ofstream(dir / "rrm_means.csv") << sums.rrm_means;
        return table;
    };

    const auto t0 = std::chrono::steady_clock::now();
    const ResultTable table = run_once(run_a);
    const double secs_a = elapsed_s(t0);
    const auto t1 = std::chrono::steady_clock::now();
    run_once(run_b);
    const double secs_b = elapsed_s(t1);

    std::map<int, GroupMeans> by_method;
    std::map<int, GroupMeans> by_rrm;
    bool all_ok = true;
    for (const MeasureRecord& r : table.records) {
        if (!r.ok) all_ok = false;
        GroupMeans& m = by_method[static_cast<int>(r.method)];
        m.rmse_mean += r.rmse;
        m.q_mean += r.q;
        ++m.n;
        GroupMeans& g = by_rrm[r.rrm];
        g.rmse_mean += r.rmse;
        g.q_mean += r.q;
        ++g.n;
    }
    for (auto& [key, m] : by_method) {
        m.rmse_mean /= m.n;
        m.q_mean /= m.n;
    }
    for (auto& [key, m] : by_rrm) {
        m.rmse_mean /= m.n;
        m.q_mean /= m.n;
    }

    // Criterion 6: B strictly best on RMSE and Q, C strictly worst on RMSE.
    {
        bool ok = all_ok;
        std::string detail = all_ok ? "" : "factorial contains failed cells";
        const GroupMeans b = by_method[static_cast<int>(MethodId::B)];
        const GroupMeans c = by_method[static_cast<int>(MethodId::C)];
        double next_rmse = 1e300, worst_other = 0.0;
        for (const auto& [key, m] : by_method) {
            if (key != static_cast<int>(MethodId::B)) {
                next_rmse = std::min(next_rmse, m.rmse_mean);
                if (!(b.rmse_mean < m.rmse_mean) || !(b.q_mean > m.q_mean)) {
                    ok = false;
                    detail = "method B is not strictly best against " +
                             to_string(static_cast<MethodId>(key));
                }
            }
            if (key != static_cast<int>(MethodId::C)) {
                worst_other = std::max(worst_other, m.rmse_mean);
                if (!(c.rmse_mean > m.rmse_mean)) {
                    ok = false;
                    detail = "method C RMSE is not strictly worst against " +
                             to_string(static_cast<MethodId>(key));
                }
            }
        }
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "B rmse %.2f (next %.2f), B q %.3f, C rmse %.3f (next %.3f)",
                      b.rmse_mean, next_rmse, b.q_mean, c.rmse_mean, worst_other);
        report(6, "qualitative method ranking", ok, ok ? buf : detail);
    }

    // Criterion 7: co-registration sensitivity of the RRM grand means.
    {
        bool ok = true;
        std::string detail;
        const GroupMeans r0 = by_rrm[0];
        const GroupMeans r1 = by_rrm[1];
        const GroupMeans r2 = by_rrm[2];
        if (!(r2.rmse_mean > r0.rmse_mean)) {
            ok = false;
            detail = "RMSE(RRM2) is not above RMSE(RRM0)";
        }
        if (ok && !(r2.q_mean < r0.q_mean)) {
            ok = false;
            detail = "Q(RRM2) is not below Q(RRM0)";
        }
        if (ok && !(std::abs(r0.q_mean - r1.q_mean) < 0.05)) {
            ok = false;
            detail = "Q(RRM0) and Q(RRM1) differ by 0.05 or more";
        }
        char buf[128];
        std::snprintf(buf, sizeof buf, "rmse %.2f/%.2f/%.2f, q %.3f/%.3f/%.3f", r0.rmse_mean,
                      r1.rmse_mean, r2.rmse_mean, r0.q_mean, r1.q_mean, r2.q_mean);
        report(7, "co-registration sensitivity", ok, ok ? buf : detail);
    }

    // Criterion 8: runtime and byte-identical CSVs across the two runs.
    {
        bool ok = true;
        std::string detail;
        auto slurp = [](const fs::path& p) {
            std::ifstream in(p, std::ios::binary);
            std::ostringstream ss;
            ss << in.rdbuf();
            return ss.str();
        };
        for (const char* name :
             {"results.csv", "mean_profiles.csv", "method_means.csv", "rrm_means.csv"}) {
            if (slurp(run_a / name) != slurp(run_b / name)) {
                ok = false;
                detail = std::string(name) + " differs between runs";
                break;
            }
        }
        if (ok && slurp(run_a / "results.csv").empty()) {
            ok = false;
            detail = "results.csv is empty";
        }
        if (ok && (secs_a >= 300.0 || secs_b >= 300.0)) {
            ok = false;
            detail = "a run exceeded 5 minutes";
        }
        char buf[96];
        std::snprintf(buf, sizeof buf, "runs %.1f s and %.1f s, %zu records", secs_a, secs_b,
                      table.records.size());
        report(8, "end-to-end determinism and runtime", ok, ok ? buf : detail);
    }

    fs::remove_all(base);
}

} // namespace

int main() {
    criterion_metric_oracles();
    criterion_fixed_points();
    criterion_fourier();
    criterion_regression();
    criterion_method_c();
    criteria_factorial();

    if (g_failures == 0) {
        std::printf("acceptance: all criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d criterion(s) failed\n", g_failures);
    return 1;
}
