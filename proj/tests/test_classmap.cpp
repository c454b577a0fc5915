#include <doctest.h>

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "gapfill/classmap.hpp"
#include "gapfill/degrade.hpp"
#include "gapfill/errors.hpp"
#include "gapfill/reference.hpp"
#include "gapfill/rng.hpp"

#include "test_util.hpp"

using namespace gapfill;
using testutil::random_classmap;
using testutil::random_mask;
using testutil::random_raster;

namespace {

// Two constant horizontal halves, same value in every band.
Raster two_region_raster(int side, std::uint8_t top, std::uint8_t bottom, int bands) {
    Raster r(side, side, bands);
    for (int b = 0; b < bands; ++b)
        for (int row = 0; row < side; ++row)
            for (int col = 0; col < side; ++col)
                r.at(b, col, row) = row < side / 2 ? top : bottom;
    return r;
}

} // namespace

TEST_CASE("k equal to one labels everything and uses the band means") {
    PixelRng rng(61, 0);
    const Raster r = random_raster(rng, 10, 10, 2);
    const KMeansModel model = kmeans_segment(r, GapMask(10, 10), 1, 5);
    for (std::int32_t l : model.assignments.labels) CHECK(l == 1);
    for (int b = 0; b < 2; ++b) {
        std::int64_t sum = 0;
        for (std::size_t i = 0; i < r.plane(); ++i) sum += r.band(b)[i];
        CHECK(model.centroid(0, b) ==
              doctest::Approx(static_cast<double>(sum) / r.plane()).epsilon(1e-12));
    }
}

TEST_CASE("two constant regions split exactly at k = 2") {
    const Raster r = two_region_raster(16, 10, 200, 2);
    const KMeansModel model = kmeans_segment(r, GapMask(16, 16), 2, 7);
    // Verify against brute-force nearest-centroid labeling.
    const ClassMap brute = ref::align_labels(model, r);
    CHECK(model.assignments.labels == brute.labels);
    // And the halves are internally uniform.
    for (int row = 0; row < 16; ++row)
        for (int col = 0; col < 16; ++col)
            CHECK(model.assignments.at(col, row) ==
                  model.assignments.at(0, row < 8 ? 0 : 15));
    CHECK(model.assignments.at(0, 0) != model.assignments.at(0, 15));
}

TEST_CASE("k-means error cases") {
    const Raster constant(4, 4, 1, 9);
    CHECK_THROWS_AS(kmeans_segment(constant, GapMask(4, 4), 2, 1), NotEnoughDataError);
    CHECK_THROWS_AS(kmeans_segment(constant, GapMask(4, 4, true), 1, 1), NotEnoughDataError);
}

TEST_CASE("masked pixels stay label zero and assignments are nearest-centroid") {
    PixelRng rng(62, 0);
    const Raster r = random_raster(rng, 12, 12, 2);
    const GapMask mask = random_mask(rng, 12, 12, 0.3);
    const KMeansModel model = kmeans_segment(r, mask, 3, 11);
    const ClassMap brute = ref::align_labels(model, r);
    for (int row = 0; row < 12; ++row)
        for (int col = 0; col < 12; ++col) {
            if (mask.is_missing(col, row)) {
                CHECK(model.assignments.at(col, row) == 0);
            } else {
                CHECK(model.assignments.at(col, row) == brute.at(col, row));
            }
        }
}

TEST_CASE("k-means is deterministic across seeds and thread counts") {
    PixelRng rng(63, 0);
    const Raster r = random_raster(rng, 20, 20, 3);
    const GapMask mask = random_mask(rng, 20, 20, 0.2);
    const KMeansModel a = kmeans_segment(r, mask, 4, 99);
#ifdef _OPENMP
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
#endif
    const KMeansModel b = kmeans_segment(r, mask, 4, 99);
#ifdef _OPENMP
    omp_set_num_threads(saved);
#endif
    CHECK(a.assignments.labels == b.assignments.labels);
    CHECK(a.centroids == b.centroids);
}

TEST_CASE("enhancement leaves homogeneous maps unchanged") {
    ClassMap map(8, 8, 2, 1);
    const Raster x(8, 8, 1, 50);
    const ClassMap out = enhance(map, x, GapMask(8, 8));
    CHECK(out.labels == map.labels);
}

TEST_CASE("a lonely pixel is relabeled to the surrounding class") {
    ClassMap map(5, 5, 2, 1);
    map.at(2, 2) = 2;
    const Raster x(5, 5, 1, 50);
    const ClassMap out = enhance(map, x, GapMask(5, 5));
    CHECK(out.at(2, 2) == 1);
}

TEST_CASE("enhancement never touches pixels with a same-class neighbor") {
    PixelRng rng(64, 0);
    for (int trial = 0; trial < 6; ++trial) {
        const Raster x = random_raster(rng, 10, 10, 2);
        const GapMask mask = random_mask(rng, 10, 10, 0.2);
        ClassMap map = random_classmap(rng, 10, 10, 3);
        for (std::size_t i = 0; i < mask.missing.size(); ++i)
            if (mask.missing[i]) map.labels[i] = 0;
        const ClassMap out = enhance(map, x, mask);
        for (int row = 0; row < 10; ++row)
            for (int col = 0; col < 10; ++col) {
                bool lonely = true;
                for (int dr = -1; dr <= 1 && lonely; ++dr)
                    for (int dc = -1; dc <= 1; ++dc) {
                        if (dc == 0 && dr == 0) continue;
                        const int c = col + dc, r = row + dr;
                        if (c < 0 || c >= 10 || r < 0 || r >= 10) continue;
                        if (map.at(c, r) == map.at(col, row)) {
                            lonely = false;
                            break;
                        }
                    }
                if (!lonely) CHECK(out.at(col, row) == map.at(col, row));
            }
    }
}

TEST_CASE("checkerboard enhancement matches the brute-force rules") {
    const int side = 9;
    ClassMap map(side, side, 2);
    for (int row = 0; row < side; ++row)
        for (int col = 0; col < side; ++col) map.at(col, row) = 1 + (col + row) % 2;
    PixelRng rng(65, 0);
    const Raster x = random_raster(rng, side, side, 2);
    const GapMask mask(side, side);
    const ClassMap mine = enhance(map, x, mask);
    const ClassMap brute = ref::enhance(map, x, mask);
    CHECK(mine.labels == brute.labels);
}

TEST_CASE("random enhancement agrees with the independent reference") {
    PixelRng rng(66, 0);
    for (int trial = 0; trial < 10; ++trial) {
        const Raster x = random_raster(rng, 12, 10, 2);
        const GapMask mask = random_mask(rng, 12, 10, 0.25);
        ClassMap map = random_classmap(rng, 12, 10, 4);
        for (std::size_t i = 0; i < mask.missing.size(); ++i)
            if (mask.missing[i]) map.labels[i] = 0;
        const ClassMap mine = enhance(map, x, mask);
        const ClassMap brute = ref::enhance(map, x, mask);
        CHECK(mine.labels == brute.labels);
    }
}

TEST_CASE("zero-class imputation base cases") {
    // A single zero pixel surrounded by class 3 takes the only candidate.
    ClassMap map(3, 3, 3, 3);
    map.at(1, 1) = 0;
    const Raster z(3, 3, 1, 40);
    const ClassMap filled = impute_zero_class(map, z);
    CHECK(filled.at(1, 1) == 3);
    CHECK_FALSE(filled.has_zero_labels());
}

TEST_CASE("zero pixel picks the class with the nearest mean Z") {
    // Window classes {1, 2} with Z means 10 and 200; pixel Z = 15.
    ClassMap map(3, 1, 2);
    map.at(0, 0) = 1;
    map.at(1, 0) = 0;
    map.at(2, 0) = 2;
    Raster z(3, 1, 1);
    z.at(0, 0, 0) = 10;
    z.at(0, 1, 0) = 15;
    z.at(0, 2, 0) = 200;
    const ClassMap filled = impute_zero_class(map, z);
    CHECK(filled.at(1, 0) == 1);
}

TEST_CASE("equidistant class means break ties toward the lowest label") {
    ClassMap map(3, 1, 2);
    map.at(0, 0) = 2;
    map.at(1, 0) = 0;
    map.at(2, 0) = 1;
    Raster z(3, 1, 1);
    z.at(0, 0, 0) = 10; // class 2 mean 10
    z.at(0, 1, 0) = 15;
    z.at(0, 2, 0) = 20; // class 1 mean 20
    const ClassMap filled = impute_zero_class(map, z);
    CHECK(filled.at(1, 0) == 1);
}

TEST_CASE("all-zero maps cannot be imputed") {
    const ClassMap map(4, 4, 2, 0);
    const Raster z(4, 4, 1, 10);
    CHECK_THROWS_AS(impute_zero_class(map, z), NotEnoughDataError);
}

TEST_CASE("zero-class imputation matches the reference on random maps") {
    PixelRng rng(67, 0);
    for (int trial = 0; trial < 8; ++trial) {
        ClassMap map = random_classmap(rng, 11, 9, 3);
        const GapMask mask = random_mask(rng, 11, 9, 0.4);
        for (std::size_t i = 0; i < mask.missing.size(); ++i)
            if (mask.missing[i]) map.labels[i] = 0;
        if (!std::any_of(map.labels.begin(), map.labels.end(),
                         [](std::int32_t l) { return l > 0; }))
            continue;
        const Raster z = random_raster(rng, 11, 9, 2);
        const ClassMap mine = impute_zero_class(map, z);
        const ClassMap brute = ref::impute_zero_class(map, z);
        CHECK(mine.labels == brute.labels);
        CHECK_FALSE(mine.has_zero_labels());
    }
}

TEST_CASE("single donors are copied exactly") {
    // One masked pixel whose class has exactly one donor nearby.
    Raster x(3, 3, 2, 100);
    x.at(0, 0, 0) = 37;
    x.at(1, 0, 0) = 202;
    GapMask mask(3, 3);
    mask.set(1, 1, true);
    ClassMap map(3, 3, 2, 2);
    map.at(0, 0) = 1;
    map.at(1, 1) = 1;
    KMeansModel model;
    model.k = 2;
    model.bands = 2;
    model.centroids = {0, 0, 0, 0};
    const SampleResult out = sample_radiometric(map, x, mask, 1, 9, model);
    CHECK(out.raster.at(0, 1, 1) == 37);
    CHECK(out.raster.at(1, 1, 1) == 202);
}

TEST_CASE("sampled values stay inside the donors' per-band hull bounds") {
    PixelRng rng(68, 0);
    for (int trial = 0; trial < 8; ++trial) {
        const Raster truth = random_raster(rng, 14, 14, 2);
        const GapMask mask = random_mask(rng, 14, 14, 0.3);
        const Raster damaged = apply_gap(truth, mask);
        KMeansModel model;
        try {
            model = kmeans_segment(damaged, mask, 3, 1000 + trial);
        } catch (const NotEnoughDataError&) {
            continue;
        }
        const ClassMap filled = impute_zero_class(model.assignments, damaged);
        const SampleResult out = sample_radiometric(filled, damaged, mask, 3, 77, model);
        for (int row = 0; row < 14; ++row)
            for (int col = 0; col < 14; ++col) {
                if (!mask.is_missing(col, row)) continue;
                const auto donors = ref::donor_pixels(filled, mask, col, row, 3);
                if (donors.empty()) continue; // centroid fallback
                for (int b = 0; b < 2; ++b) {
                    std::uint8_t lo = 255, hi = 0;
                    for (std::size_t d : donors) {
                        lo = std::min(lo, damaged.data[b * damaged.plane() + d]);
                        hi = std::max(hi, damaged.data[b * damaged.plane() + d]);
                    }
                    CHECK(out.raster.at(b, col, row) >= lo);
                    CHECK(out.raster.at(b, col, row) <= hi);
                }
            }
    }
}

TEST_CASE("a class with no donors anywhere falls back to its centroid") {
    Raster x(4, 4, 1, 50);
    GapMask mask(4, 4);
    mask.set(0, 0, true);
    ClassMap map(4, 4, 2, 1);
    map.at(0, 0) = 2; // class 2 has no unmasked member
    KMeansModel model;
    model.k = 2;
    model.bands = 1;
    model.centroids = {50.0, 123.0};
    const SampleResult out = sample_radiometric(map, x, mask, 1, 3, model);
    CHECK(out.raster.at(0, 0, 0) == 123);
    CHECK(out.centroid_fallbacks == 1);
    REQUIRE(out.warnings.size() == 1);
}

TEST_CASE("method C fills the two-region mosaic class map exactly") {
    // Region boundary at row 8, strips at rows 0-3 and 11-14: each strip
    // lies strictly inside one constant region.
    const int side = 24;
    Raster truth(side, side, 2);
    for (int b = 0; b < 2; ++b)
        for (int row = 0; row < side; ++row)
            for (int col = 0; col < side; ++col)
                truth.at(b, col, row) = row < 8 ? 40 : 200;
    const GapMask mask = make_gap_mask({4, 11, StripOrientation::Horizontal, 0.33}, side, side);
    const Raster damaged = apply_gap(truth, mask);
    const Raster z_exp = expand_lowres(quantize(rrm0_block_average(truth, 4)), 4);

    const MethodCResult res = method_c(damaged, mask, z_exp, 2, 13, false);
    // Oracle: brute-force nearest-centroid labeling of the clean truth.
    const ClassMap brute = ref::align_labels(res.model, truth);
    CHECK(res.classes.labels == brute.labels);
    CHECK_FALSE(res.classes.has_zero_labels());
}

TEST_CASE("method C with an empty mask returns the input bit-exactly") {
    PixelRng rng(69, 0);
    const Raster x = random_raster(rng, 12, 12, 2);
    const Raster z = x;
    const MethodCResult with = method_c(x, GapMask(12, 12), z, 3, 5, true);
    const MethodCResult without = method_c(x, GapMask(12, 12), z, 3, 5, false);
    CHECK(with.raster == x);
    CHECK(without.raster == x);
}

TEST_CASE("method C is deterministic given the seed, including across thread counts") {
    PixelRng rng(70, 0);
    const Raster truth = random_raster(rng, 20, 20, 2);
    const GapMask mask = make_gap_mask({3, 10, StripOrientation::Horizontal, 0.3}, 20, 20);
    const Raster damaged = apply_gap(truth, mask);
    const Raster z_exp = expand_lowres(quantize(rrm0_block_average(truth, 4)), 4);

    const MethodCResult a = method_c(damaged, mask, z_exp, 3, 2024, true);
#ifdef _OPENMP
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
#endif
    const MethodCResult b = method_c(damaged, mask, z_exp, 3, 2024, true);
#ifdef _OPENMP
    omp_set_num_threads(saved);
#endif
    CHECK(a.raster == b.raster);
    CHECK(a.classes == b.classes);

    const MethodCResult c = method_c(damaged, mask, z_exp, 3, 2025, true);
    CHECK(a.raster.data != c.raster.data);
}
