#include "gapfill/classmap.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_set>

#include "gapfill/errors.hpp"
#include "gapfill/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gapfill {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

int thread_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

int thread_id() {
#ifdef _OPENMP
    return omp_get_thread_num();
#else
    return 0;
#endif
}

double sq_dist_to_centroid(const Raster& x, std::size_t pixel, const double* centroid,
                           int bands) {
    const std::size_t plane = x.plane();
    double d2 = 0.0;
    for (int b = 0; b < bands; ++b) {
        const double d = static_cast<double>(x.data[b * plane + pixel]) - centroid[b];
        d2 += d * d;
    }
    return d2;
}

// Nearest centroid, ties to the lowest index.
int nearest_centroid(const Raster& x, std::size_t pixel, const std::vector<double>& centroids,
                     int k, int bands) {
    int best = 0;
    double best_d2 = sq_dist_to_centroid(x, pixel, centroids.data(), bands);
    for (int c = 1; c < k; ++c) {
        const double d2 =
            sq_dist_to_centroid(x, pixel, centroids.data() + static_cast<std::size_t>(c) * bands,
                                bands);
        if (d2 < best_d2) {
            best_d2 = d2;
            best = c;
        }
    }
    return best;
}

// Fixed 8-neighborhood split into the causal half (W, NW, N, NE) and the
// anti-causal half (E, SE, S, SW), in raster scan order.
constexpr std::array<std::array<int, 2>, 4> kForwardHalf = {{{-1, 0}, {-1, -1}, {0, -1}, {1, -1}}};
constexpr std::array<std::array<int, 2>, 4> kBackwardHalf = {{{1, 0}, {1, 1}, {0, 1}, {-1, 1}}};

// Mode of the labels among the in-image half-neighborhood; ties to the
// lowest label. Returns -1 when the half is entirely off-image.
int half_mode(const ClassMap& map, int col, int row,
              const std::array<std::array<int, 2>, 4>& half) {
    int labels[4];
    int n = 0;
    for (const auto& d : half) {
        const int c = col + d[0], r = row + d[1];
        if (c < 0 || c >= map.width || r < 0 || r >= map.height) continue;
        labels[n++] = map.at(c, r);
    }
    if (n == 0) return -1;
    int best = -1, best_count = 0;
    for (int i = 0; i < n; ++i) {
        int count = 0;
        for (int j = 0; j < n; ++j) count += labels[j] == labels[i];
        if (count > best_count || (count == best_count && labels[i] < best)) {
            best_count = count;
            best = labels[i];
        }
    }
    return best;
}

bool has_same_class_neighbor(const ClassMap& map, int col, int row) {
    const std::int32_t label = map.at(col, row);
    for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
            if (dc == 0 && dr == 0) continue;
            const int c = col + dc, r = row + dr;
            if (c < 0 || c >= map.width || r < 0 || r >= map.height) continue;
            if (map.at(c, r) == label) return true;
        }
    }
    return false;
}

} // namespace

KMeansModel kmeans_segment(const Raster& x, const GapMask& mask, int k, std::uint64_t seed,
                           int max_iterations) {
    require(k >= 1, "k must be >= 1");
    require(mask.width == x.width && mask.height == x.height,
            "mask dimensions do not match raster");

    const std::size_t plane = x.plane();
    std::vector<std::size_t> pts;
    pts.reserve(plane);
    for (std::size_t i = 0; i < plane; ++i)
        if (!mask.missing[i]) pts.push_back(i);
    if (pts.empty()) throw NotEnoughDataError("every pixel is masked");

    // Count distinct unmasked vectors, early-exiting at k. Vectors of up to
    // 8 bands pack exactly into the key; wider ones fall back to FNV-1a.
    {
        std::unordered_set<std::uint64_t> distinct;
        for (std::size_t i : pts) {
            std::uint64_t key;
            if (x.bands <= 8) {
                key = 0;
                for (int b = 0; b < x.bands; ++b)
                    key = key << 8 | x.data[b * plane + i];
            } else {
                key = 0xcbf29ce484222325ULL;
                for (int b = 0; b < x.bands; ++b) {
                    key ^= x.data[b * plane + i];
                    key *= 0x100000001b3ULL;
                }
            }
            distinct.insert(key);
            if (static_cast<int>(distinct.size()) >= k) break;
        }
        if (static_cast<int>(distinct.size()) < k)
            throw NotEnoughDataError("fewer distinct pixel vectors than classes");
    }

    KMeansModel model;
    model.k = k;
    model.bands = x.bands;
    model.seed = seed;
    model.centroids.assign(static_cast<std::size_t>(k) * x.bands, 0.0);

    // k-means++ seeding (serial; the data scan dominates and stays parallel-free
    // for determinism).
    PixelRng rng(seed, 0x5EEDULL);
    {
        const std::size_t first = pts[rng.next_below(pts.size())];
        for (int b = 0; b < x.bands; ++b)
            model.centroids[b] = x.data[b * plane + first];
        std::vector<double> d2(pts.size());
        for (int chosen = 1; chosen < k; ++chosen) {
            double total = 0.0;
            for (std::size_t i = 0; i < pts.size(); ++i) {
                double best = std::numeric_limits<double>::max();
                for (int c = 0; c < chosen; ++c)
                    best = std::min(best, sq_dist_to_centroid(
                                              x, pts[i],
                                              model.centroids.data() +
                                                  static_cast<std::size_t>(c) * x.bands,
                                              x.bands));
                d2[i] = best;
                total += best;
            }
            std::size_t pick = 0;
            if (total > 0.0) {
                const double target = rng.next_double() * total;
                double acc = 0.0;
                for (std::size_t i = 0; i < pts.size(); ++i) {
                    acc += d2[i];
                    if (acc >= target) {
                        pick = i;
                        break;
                    }
                }
            }
            for (int b = 0; b < x.bands; ++b)
                model.centroids[static_cast<std::size_t>(chosen) * x.bands + b] =
                    x.data[b * plane + pts[pick]];
        }
    }

    std::vector<std::int32_t> assign(pts.size(), -1);
    std::vector<std::int32_t> prev(pts.size(), -1);
    const int nt = thread_count();

    for (int iter = 0; iter < max_iterations; ++iter) {
        model.iterations_run = iter + 1;
        std::swap(assign, prev);

        const std::int64_t npts = static_cast<std::int64_t>(pts.size());
#pragma omp parallel for
        for (std::int64_t i = 0; i < npts; ++i)
            assign[i] = nearest_centroid(x, pts[i], model.centroids, k, x.bands);

        // Fixpoint before the update: the centroids are already the means of
        // this assignment, so labels stay nearest-centroid consistent.
        if (assign == prev) break;

        // Integer accumulation keeps the update exact and schedule-independent.
        std::vector<std::int64_t> sums(static_cast<std::size_t>(nt) * k * x.bands, 0);
        std::vector<std::int64_t> counts(static_cast<std::size_t>(nt) * k, 0);
#pragma omp parallel
        {
            const int t = thread_id();
            std::int64_t* my_sums = sums.data() + static_cast<std::size_t>(t) * k * x.bands;
            std::int64_t* my_counts = counts.data() + static_cast<std::size_t>(t) * k;
#pragma omp for
            for (std::int64_t i = 0; i < npts; ++i) {
                const int c = assign[i];
                ++my_counts[c];
                for (int b = 0; b < x.bands; ++b)
                    my_sums[static_cast<std::size_t>(c) * x.bands + b] +=
                        x.data[b * plane + pts[i]];
            }
        }
        for (int t = 1; t < nt; ++t) {
            for (int c = 0; c < k; ++c) {
                counts[c] += counts[static_cast<std::size_t>(t) * k + c];
                for (int b = 0; b < x.bands; ++b)
                    sums[static_cast<std::size_t>(c) * x.bands + b] +=
                        sums[(static_cast<std::size_t>(t) * k + c) * x.bands + b];
            }
        }

        for (int c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                // Re-seed an empty cluster to the farthest point from its centroid.
                std::size_t far_pt = pts[0];
                double far_d2 = -1.0;
                for (std::size_t i = 0; i < pts.size(); ++i) {
                    const double d2 = sq_dist_to_centroid(
                        x, pts[i],
                        model.centroids.data() + static_cast<std::size_t>(assign[i]) * x.bands,
                        x.bands);
                    if (d2 > far_d2) {
                        far_d2 = d2;
                        far_pt = pts[i];
                    }
                }
                for (int b = 0; b < x.bands; ++b)
                    model.centroids[static_cast<std::size_t>(c) * x.bands + b] =
                        x.data[b * plane + far_pt];
            } else {
                for (int b = 0; b < x.bands; ++b)
                    model.centroids[static_cast<std::size_t>(c) * x.bands + b] =
                        static_cast<double>(sums[static_cast<std::size_t>(c) * x.bands + b]) /
                        static_cast<double>(counts[c]);
            }
        }
    }

    model.assignments = ClassMap(x.width, x.height, k, 0);
    for (std::size_t i = 0; i < pts.size(); ++i)
        model.assignments.labels[pts[i]] = assign[i] + 1;
    return model;
}

ClassMap enhance(const ClassMap& c_d, const Raster& x, const GapMask& mask) {
    require(c_d.width == x.width && c_d.height == x.height, "class map/raster support mismatch");
    require(mask.width == x.width && mask.height == x.height, "mask/raster support mismatch");

    const int w = c_d.width, h = c_d.height;

    // Step 2: lonely pixels, computed on the input map.
    std::vector<std::uint8_t> in_ng(static_cast<std::size_t>(w) * h, 0);
#pragma omp parallel for
    for (int row = 0; row < h; ++row)
        for (int col = 0; col < w; ++col)
            in_ng[c_d.index(col, row)] = has_same_class_neighbor(c_d, col, row) ? 0 : 1;

    // Step 3: mode-filter agreement relabels; disagreement goes to N_M.
    ClassMap step3 = c_d;
    std::vector<std::uint8_t> in_nm(static_cast<std::size_t>(w) * h, 0);
#pragma omp parallel for
    for (int row = 0; row < h; ++row) {
        for (int col = 0; col < w; ++col) {
            if (!in_ng[c_d.index(col, row)]) continue;
            const int fwd = half_mode(c_d, col, row, kForwardHalf);
            const int bwd = half_mode(c_d, col, row, kBackwardHalf);
            if (fwd < 0 || bwd < 0) continue; // border with an empty half: keep, skip N_M
            if (fwd == bwd) {
                // Never relabel to class 0; zero stays only where masked.
                if (fwd > 0) step3.at(col, row) = fwd;
            } else {
                in_nm[c_d.index(col, row)] = 1;
            }
        }
    }

    // Step 4: settle non-zero holdouts by the nearest per-class radiometric
    // mean over unmasked 8-neighbors, reading the post-step-3 map.
    ClassMap out = step3;
#pragma omp parallel for
    for (int row = 0; row < h; ++row) {
        for (int col = 0; col < w; ++col) {
            if (!in_nm[step3.index(col, row)]) continue;
            if (step3.at(col, row) == 0) continue;

            // Per-class sums over unmasked neighbors.
            std::vector<double> mean(static_cast<std::size_t>(step3.k_classes + 1) * x.bands,
                                     0.0);
            std::vector<int> count(step3.k_classes + 1, 0);
            for (int dr = -1; dr <= 1; ++dr) {
                for (int dc = -1; dc <= 1; ++dc) {
                    if (dc == 0 && dr == 0) continue;
                    const int c = col + dc, r = row + dr;
                    if (c < 0 || c >= w || r < 0 || r >= h) continue;
                    if (mask.is_missing(c, r)) continue;
                    const std::int32_t l = step3.at(c, r);
                    if (l <= 0) continue;
                    ++count[l];
                    for (int b = 0; b < x.bands; ++b)
                        mean[static_cast<std::size_t>(l) * x.bands + b] += x.at(b, c, r);
                }
            }
            int best = -1;
            double best_d2 = std::numeric_limits<double>::max();
            for (int l = 1; l <= step3.k_classes; ++l) {
                if (count[l] == 0) continue;
                double d2 = 0.0;
                for (int b = 0; b < x.bands; ++b) {
                    const double m = mean[static_cast<std::size_t>(l) * x.bands + b] / count[l];
                    const double d = static_cast<double>(x.at(b, col, row)) - m;
                    d2 += d * d;
                }
                if (d2 < best_d2) {
                    best_d2 = d2;
                    best = l;
                }
            }
            if (best > 0) out.at(col, row) = best;
        }
    }
    return out;
}

ClassMap impute_zero_class(const ClassMap& c, const Raster& z_expanded) {
    require(c.width == z_expanded.width && c.height == z_expanded.height,
            "class map support does not match expanded Z");

    bool any_nonzero = false;
    for (std::int32_t l : c.labels)
        if (l > 0) {
            any_nonzero = true;
            break;
        }
    if (!any_nonzero) throw NotEnoughDataError("class map has no non-zero labels");

    const int w = c.width, h = c.height;
    const std::size_t plane = z_expanded.plane();
    ClassMap out = c;
    const int max_radius = std::max(w, h);

#pragma omp parallel for schedule(dynamic, 8)
    for (int row = 0; row < h; ++row) {
        std::vector<double> sum(static_cast<std::size_t>(c.k_classes + 1) * z_expanded.bands);
        std::vector<int> count(c.k_classes + 1);
        for (int col = 0; col < w; ++col) {
            if (c.at(col, row) != 0) continue;

            // Grow the square neighborhood until it holds a labeled pixel,
            // then average Z per class over that whole neighborhood.
            for (int t = 1; t <= max_radius; ++t) {
                std::fill(sum.begin(), sum.end(), 0.0);
                std::fill(count.begin(), count.end(), 0);
                bool found = false;
                const int r0 = std::max(0, row - t), r1 = std::min(h - 1, row + t);
                const int c0 = std::max(0, col - t), c1 = std::min(w - 1, col + t);
                for (int r = r0; r <= r1; ++r) {
                    for (int cc = c0; cc <= c1; ++cc) {
                        const std::int32_t l = c.at(cc, r);
                        if (l <= 0) continue;
                        found = true;
                        ++count[l];
                        for (int b = 0; b < z_expanded.bands; ++b)
                            sum[static_cast<std::size_t>(l) * z_expanded.bands + b] +=
                                z_expanded.data[b * plane + z_expanded.index(0, cc, r)];
                    }
                }
                if (!found) continue;

                int best = 0;
                double best_d2 = std::numeric_limits<double>::max();
                for (int l = 1; l <= c.k_classes; ++l) {
                    if (count[l] == 0) continue;
                    double d2 = 0.0;
                    for (int b = 0; b < z_expanded.bands; ++b) {
                        const double zb =
                            z_expanded.data[b * plane + z_expanded.index(0, col, row)];
                        const double d =
                            zb - sum[static_cast<std::size_t>(l) * z_expanded.bands + b] /
                                     count[l];
                        d2 += d * d;
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

SampleResult sample_radiometric(const ClassMap& c_filled, const Raster& x_d,
                                const GapMask& mask, int window, std::uint64_t seed,
                                const KMeansModel& model) {
    require(window >= 1, "window radius must be >= 1");
    require(c_filled.width == x_d.width && c_filled.height == x_d.height,
            "class map support mismatch");
    require(mask.width == x_d.width && mask.height == x_d.height, "mask support mismatch");
    if (c_filled.has_zero_labels())
        throw std::invalid_argument("class map still contains zero labels");

    const int w = x_d.width, h = x_d.height;
    const std::size_t plane = x_d.plane();

    // Classes with no unmasked donor anywhere fall back to the model centroid.
    std::vector<std::int64_t> global_donors(c_filled.k_classes + 1, 0);
    for (std::size_t i = 0; i < plane; ++i)
        if (!mask.missing[i]) ++global_donors[c_filled.labels[i]];

    SampleResult result;
    result.raster = x_d;
    const int max_radius = std::max(w, h);
    std::vector<int> fallback_classes;

#pragma omp parallel for schedule(dynamic, 8)
    for (int row = 0; row < h; ++row) {
        std::vector<std::size_t> donors;
        std::vector<double> weights;
        for (int col = 0; col < w; ++col) {
            if (!mask.is_missing(col, row)) continue;
            const std::int32_t label = c_filled.at(col, row);
            const std::size_t pixel = c_filled.index(col, row);

            if (global_donors[label] == 0) {
#pragma omp critical
                fallback_classes.push_back(label);
                for (int b = 0; b < x_d.bands; ++b)
                    result.raster.data[b * plane + pixel] =
                        quantize_value(model.centroid(label - 1, b));
                continue;
            }

            donors.clear();
            for (int t = window; t <= max_radius && donors.empty(); ++t) {
                const int r0 = std::max(0, row - t), r1 = std::min(h - 1, row + t);
                const int c0 = std::max(0, col - t), c1 = std::min(w - 1, col + t);
                for (int r = r0; r <= r1; ++r)
                    for (int cc = c0; cc <= c1; ++cc)
                        if (!mask.is_missing(cc, r) && c_filled.at(cc, r) == label)
                            donors.push_back(c_filled.index(cc, r));
            }

            // Uniform Dirichlet weights from the pixel's own stream.
            PixelRng rng(seed, static_cast<std::uint64_t>(pixel));
            weights.resize(donors.size());
            double total = 0.0;
            for (double& wt : weights) {
                wt = -std::log(1.0 - rng.next_double());
                total += wt;
            }
            if (total <= 0.0) {
                std::fill(weights.begin(), weights.end(), 1.0);
                total = static_cast<double>(weights.size());
            }
            for (int b = 0; b < x_d.bands; ++b) {
                double v = 0.0;
                for (std::size_t i = 0; i < donors.size(); ++i)
                    v += weights[i] * x_d.data[b * plane + donors[i]];
                result.raster.data[b * plane + pixel] = quantize_value(v / total);
            }
        }
    }

    if (!fallback_classes.empty()) {
        std::sort(fallback_classes.begin(), fallback_classes.end());
        fallback_classes.erase(std::unique(fallback_classes.begin(), fallback_classes.end()),
                               fallback_classes.end());
        result.centroid_fallbacks = static_cast<int>(fallback_classes.size());
        for (int cls : fallback_classes)
            result.warnings.push_back("class " + std::to_string(cls) +
                                      " has no unmasked donors; used its centroid");
    }
    return result;
}

MethodCResult method_c(const Raster& x_d, const GapMask& mask, const Raster& z_expanded,
                       int k, std::uint64_t seed, bool with_enhancement, int sample_window) {
    require(x_d.same_support(z_expanded), "damaged raster and expanded Z must share support");

    MethodCResult result;
    result.model = kmeans_segment(x_d, mask, k, derive_seed(seed, 1));
    ClassMap map = result.model.assignments;
    if (with_enhancement) map = enhance(map, x_d, mask);
    result.classes = impute_zero_class(map, z_expanded);
    SampleResult sampled =
        sample_radiometric(result.classes, x_d, mask, sample_window, derive_seed(seed, 2),
                           result.model);
    result.raster = std::move(sampled.raster);
    result.warnings = std::move(sampled.warnings);
    return result;
}

} // namespace gapfill
