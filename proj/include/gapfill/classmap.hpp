#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gapfill/raster.hpp"

namespace gapfill {

/// K-means clustering of unmasked pixel vectors. Labels are 1..k with 0
/// reserved for masked pixels; centroids live in band-space.
struct KMeansModel {
    int k = 0;
    int bands = 0;
    std::vector<double> centroids; // k * bands, centroid-major
    ClassMap assignments;
    int iterations_run = 0;
    std::uint64_t seed = 0;

    double centroid(int cls, int band) const {
        return centroids[static_cast<std::size_t>(cls) * bands + band];
    }
};

/// Lloyd iterations with k-means++ style seeding; runs to an assignment
/// fixpoint or max_iterations. Deterministic given the seed; empty clusters
/// are re-seeded to the farthest point.
KMeansModel kmeans_segment(const Raster& x, const GapMask& mask, int k, std::uint64_t seed,
                           int max_iterations = 100);

/// Coherence enhancement: lonely pixels (no same-class 8-neighbor) are
/// re-labeled where the causal and anti-causal mode filters agree; holdouts
/// where they disagree are settled by the nearest neighborhood class mean.
ClassMap enhance(const ClassMap& c_d, const Raster& x, const GapMask& mask);

/// Label every zero pixel with the class whose mean Z vector over the
/// smallest non-trivial square neighborhood is nearest to the pixel's own Z
/// vector. Reads labels from the input map only; the output has no zeros.
ClassMap impute_zero_class(const ClassMap& c, const Raster& z_expanded);

struct SampleResult {
    Raster raster;
    int centroid_fallbacks = 0; // classes with no donors anywhere, per pixel
    std::vector<std::string> warnings;
};

/// Give each masked pixel a random convex combination (uniform Dirichlet
/// weights) of the unmasked same-class pixel vectors inside the window,
/// growing the window until a donor exists. Deterministic given the seed.
SampleResult sample_radiometric(const ClassMap& c_filled, const Raster& x_d,
                                const GapMask& mask, int window, std::uint64_t seed,
                                const KMeansModel& model);

struct MethodCResult {
    Raster raster;
    ClassMap classes; // filled class map, no zero labels
    KMeansModel model;
    std::vector<std::string> warnings;
};

/// Full Method C pipeline; with_enhancement selects variant C (true) or the
/// simplification C1 (false).
MethodCResult method_c(const Raster& x_d, const GapMask& mask, const Raster& z_expanded,
                       int k, std::uint64_t seed, bool with_enhancement,
                       int sample_window = 3);

} // namespace gapfill
