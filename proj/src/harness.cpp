#include "gapfill/harness.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "gapfill/classmap.hpp"
#include "gapfill/fourier.hpp"
#include "gapfill/io.hpp"
#include "gapfill/metrics.hpp"
#include "gapfill/regression.hpp"
#include "gapfill/rng.hpp"
#include "gapfill/scene.hpp"
#include "gapfill/sha256.hpp"

namespace fs = std::filesystem;

namespace gapfill {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Seed stream ids for the deterministic sub-seeds.
constexpr std::uint64_t kSceneStream = 1000;
constexpr std::uint64_t kOlderStream = 2000;
constexpr std::uint64_t kTruthModelStream = 3000;
constexpr std::uint64_t kMethodCStream = 4000;

std::uint64_t sub_stream(std::uint64_t base, int image, int subimage) {
    return base + static_cast<std::uint64_t>(image) * 1024 + subimage;
}

std::string format_measure(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string region_name(EvalRegion r) { return r == EvalRegion::Gap ? "gap" : "full"; }

EvalRegion region_from_string(const std::string& s) {
    if (s == "gap") return EvalRegion::Gap;
    if (s == "full") return EvalRegion::Full;
    throw std::invalid_argument("unknown region: " + s + " (expected gap or full)");
}

std::string raster_name(int image, int subimage, const std::string& role) {
    return "img" + std::to_string(image) + "_sub" + std::to_string(subimage) + "_" + role +
           ".braw";
}

std::vector<std::string> split_csv_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(s);
    while (std::getline(ss, item, ',')) {
        const auto a = item.find_first_not_of(" \t");
        if (a == std::string::npos) continue;
        const auto b = item.find_last_not_of(" \t");
        out.push_back(item.substr(a, b - a + 1));
    }
    return out;
}

} // namespace

std::string to_string(MethodId m) {
    switch (m) {
        case MethodId::A1: return "A1";
        case MethodId::A2: return "A2";
        case MethodId::A3: return "A3";
        case MethodId::B: return "B";
        case MethodId::C: return "C";
        case MethodId::C1: return "C1";
    }
    return "?";
}

MethodId method_from_string(const std::string& s) {
    std::string u;
    for (char c : s) u.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    if (u == "A1") return MethodId::A1;
    if (u == "A2") return MethodId::A2;
    if (u == "A3") return MethodId::A3;
    if (u == "B") return MethodId::B;
    if (u == "C") return MethodId::C;
    if (u == "C1") return MethodId::C1;
    throw std::invalid_argument("unknown method: " + s);
}

double method_a_cutoff(MethodId m) {
    switch (m) {
        case MethodId::A1: return 0.2;
        case MethodId::A2: return 0.5;
        case MethodId::A3: return 0.8;
        default: throw std::invalid_argument("method has no cutoff: " + to_string(m));
    }
}

void ExperimentConfig::validate() const {
    if (scene_paths.empty() && images < 1)
        throw std::invalid_argument("config: need at least one input image");
    if (subimages_per_image < 1 || subimages_per_image > 1024)
        throw std::invalid_argument("config: subimages_per_image must be in [1, 1024]");
    if (subimage_size < 2) throw std::invalid_argument("config: subimage_size >= 2");
    if (n_z < 1) throw std::invalid_argument("config: nz >= 1");
    if (subimage_size % n_z != 0)
        throw std::invalid_argument("config: subimage_size must be a multiple of nz");
    if (methods.empty()) throw std::invalid_argument("config: method list is empty");
    if (rrms.empty()) throw std::invalid_argument("config: rrm list is empty");
    for (int r : rrms)
        if (r < 0 || r > 2) throw std::invalid_argument("config: rrm must be 0, 1 or 2");
    if (k_classes < 1) throw std::invalid_argument("config: k >= 1");
    if (q_window < 2) throw std::invalid_argument("config: q_window >= 2");
    if (sample_window < 1) throw std::invalid_argument("config: window >= 1");
    if (shift_rows < 0 || shift_rows >= n_z || shift_cols < 0 || shift_cols >= n_z)
        throw std::invalid_argument("config: shift components must lie in [0, nz)");
    if (bands < 1) throw std::invalid_argument("config: bands >= 1");
    gap.validate();
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw std::invalid_argument("config line " + std::to_string(line_no) +
                                            ": expected key = value");
            continue;
        }
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            if (a == std::string::npos) return std::string();
            const auto b = s.find_last_not_of(" \t\r");
            return s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": empty key or value");

        try {
            if (key == "images") cfg.images = std::stoi(value);
            else if (key == "scene_paths") cfg.scene_paths = split_csv_list(value);
            else if (key == "seed") cfg.master_seed = std::stoull(value);
            else if (key == "subimages_per_image") cfg.subimages_per_image = std::stoi(value);
            else if (key == "subimage_size") cfg.subimage_size = std::stoi(value);
            else if (key == "bands") cfg.bands = std::stoi(value);
            else if (key == "nz") cfg.n_z = std::stoi(value);
            else if (key == "strip_width") cfg.gap.strip_width = std::stoi(value);
            else if (key == "period") cfg.gap.period = std::stoi(value);
            else if (key == "orientation")
                cfg.gap.orientation = value == "vertical" ? StripOrientation::Vertical
                                                          : StripOrientation::Horizontal;
            else if (key == "target_fraction") cfg.gap.target_fraction = std::stod(value);
            else if (key == "methods") {
                cfg.methods.clear();
                for (const std::string& m : split_csv_list(value))
                    cfg.methods.push_back(method_from_string(m));
            } else if (key == "rrms") {
                cfg.rrms.clear();
                for (const std::string& r : split_csv_list(value))
                    cfg.rrms.push_back(std::stoi(r));
            } else if (key == "k") cfg.k_classes = std::stoi(value);
            else if (key == "q_window") cfg.q_window = std::stoi(value);
            else if (key == "region") cfg.region = region_from_string(value);
            else if (key == "window") cfg.sample_window = std::stoi(value);
            else if (key == "shift_rows") cfg.shift_rows = std::stoi(value);
            else if (key == "shift_cols") cfg.shift_cols = std::stoi(value);
            else if (key == "older_gain") cfg.older_gain = std::stod(value);
            else if (key == "older_bias") cfg.older_bias = std::stod(value);
            else if (key == "older_noise_sigma") cfg.older_noise_sigma = std::stod(value);
            else if (key == "older_patch_rate") cfg.older_patch_rate = std::stod(value);
            else
                throw std::invalid_argument("unknown key");
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("config line " + std::to_string(line_no) + " (" + key +
                                        "): " + e.what());
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string canonical_config_text(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "images = " << cfg.images << "\n";
    if (!cfg.scene_paths.empty()) {
        out << "scene_paths = ";
        for (std::size_t i = 0; i < cfg.scene_paths.size(); ++i)
            out << (i ? "," : "") << cfg.scene_paths[i];
        out << "\n";
    }
    out << "seed = " << cfg.master_seed << "\n";
    out << "subimages_per_image = " << cfg.subimages_per_image << "\n";
    out << "subimage_size = " << cfg.subimage_size << "\n";
    out << "bands = " << cfg.bands << "\n";
    out << "nz = " << cfg.n_z << "\n";
    out << "strip_width = " << cfg.gap.strip_width << "\n";
    out << "period = " << cfg.gap.period << "\n";
    out << "orientation = "
        << (cfg.gap.orientation == StripOrientation::Vertical ? "vertical" : "horizontal")
        << "\n";
    out << "target_fraction = " << format_measure(cfg.gap.target_fraction) << "\n";
    out << "methods = ";
    for (std::size_t i = 0; i < cfg.methods.size(); ++i)
        out << (i ? "," : "") << to_string(cfg.methods[i]);
    out << "\n";
    out << "rrms = ";
    for (std::size_t i = 0; i < cfg.rrms.size(); ++i) out << (i ? "," : "") << cfg.rrms[i];
    out << "\n";
    out << "k = " << cfg.k_classes << "\n";
    out << "q_window = " << cfg.q_window << "\n";
    out << "region = " << region_name(cfg.region) << "\n";
    out << "window = " << cfg.sample_window << "\n";
    out << "shift_rows = " << cfg.shift_rows << "\n";
    out << "shift_cols = " << cfg.shift_cols << "\n";
    out << "older_gain = " << format_measure(cfg.older_gain) << "\n";
    out << "older_bias = " << format_measure(cfg.older_bias) << "\n";
    out << "older_noise_sigma = " << format_measure(cfg.older_noise_sigma) << "\n";
    out << "older_patch_rate = " << format_measure(cfg.older_patch_rate) << "\n";
    return out.str();
}

namespace {

int scene_count(const ExperimentConfig& cfg) {
    return cfg.scene_paths.empty() ? cfg.images : static_cast<int>(cfg.scene_paths.size());
}

// Sub-images are cropped from a scene laid out on a near-square grid.
void subimage_grid(int count, int& cols, int& rows) {
    cols = 1;
    while (cols * cols < count) ++cols;
    rows = (count + cols - 1) / cols;
}

Raster load_scene(const ExperimentConfig& cfg, int image) {
    if (!cfg.scene_paths.empty()) return read_raster(cfg.scene_paths[image]);
    int cols = 0, rows = 0;
    subimage_grid(cfg.subimages_per_image, cols, rows);
    return generate_scene(derive_seed(cfg.master_seed, kSceneStream + image),
                          cols * cfg.subimage_size, rows * cfg.subimage_size, cfg.bands,
                          cfg.k_classes);
}

struct ManifestEntry {
    std::string role;
    int image = 0;
    int subimage = 0;
    int rrm = -1; // -1 = not a low-resolution raster
    std::string path;
    std::string sha256;
};

std::string manifest_line(const ManifestEntry& e) {
    return e.role + "," + std::to_string(e.image) + "," + std::to_string(e.subimage) + "," +
           (e.rrm < 0 ? std::string() : std::to_string(e.rrm)) + "," + e.path + "," + e.sha256;
}

} // namespace

void build_database(const ExperimentConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    const fs::path db = fs::path(out_dir) / "db";
    fs::create_directories(db);

    const int n_images = scene_count(cfg);
    std::vector<ManifestEntry> manifest;

    for (int i = 0; i < n_images; ++i) {
        const Raster scene = load_scene(cfg, i);
        int cols = 0, rows = 0;
        subimage_grid(cfg.subimages_per_image, cols, rows);
        if (scene.width < cols * cfg.subimage_size || scene.height < rows * cfg.subimage_size)
            throw std::invalid_argument("scene " + std::to_string(i) +
                                        " is too small for the requested sub-images");

        for (int s = 0; s < cfg.subimages_per_image; ++s) {
            const int gc = s % cols, gr = s / cols;
            const Raster truth =
                crop(scene, gc * cfg.subimage_size, gr * cfg.subimage_size, cfg.subimage_size,
                     cfg.subimage_size);
            const GapMask mask = make_gap_mask(cfg.gap, truth.width, truth.height);
            const Raster damaged = apply_gap(truth, mask, 0);
            const Raster older =
                synth_older(truth, derive_seed(cfg.master_seed, sub_stream(kOlderStream, i, s)),
                            cfg.older_gain, cfg.older_bias, cfg.older_patch_rate,
                            cfg.older_noise_sigma);

            auto persist = [&](const Raster& r, const std::string& role, int rrm) {
                const std::string name = raster_name(i, s, role);
                write_raster(r, (db / name).string());
                manifest.push_back(
                    {role, i, s, rrm, name, sha256_file_hex((db / name).string())});
            };
            persist(truth, "truth", -1);
            persist(damaged, "damaged", -1);
            persist(older, "older", -1);
            for (int r : cfg.rrms) {
                const Raster z = quantize(apply_rrm(truth, cfg.n_z, static_cast<RrmKind>(r),
                                                    cfg.shift_rows, cfg.shift_cols));
                persist(z, "z" + std::to_string(r), r);
            }
        }
    }

    std::ofstream out(db / "manifest.csv", std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write manifest");
    for (const ManifestEntry& e : manifest) out << manifest_line(e) << "\n";
}

namespace {

struct SubimageJob {
    int image = 0;
    int subimage = 0;
    std::vector<MeasureRecord> records;
};

// Translate Method C's own label space into the truth model's by matching
// centroids (nearest truth centroid, ties to the lowest label).
ClassMap relabel_to_truth(const ClassMap& filled, const KMeansModel& method_model,
                          const KMeansModel& truth_model) {
    std::vector<std::int32_t> lookup(method_model.k + 1, 0);
    for (int c = 0; c < method_model.k; ++c) {
        int best = 0;
        double best_d2 = std::numeric_limits<double>::max();
        for (int t = 0; t < truth_model.k; ++t) {
            double d2 = 0.0;
            for (int b = 0; b < method_model.bands; ++b) {
                const double d = method_model.centroid(c, b) - truth_model.centroid(t, b);
                d2 += d * d;
            }
            if (d2 < best_d2) {
                best_d2 = d2;
                best = t;
            }
        }
        lookup[c + 1] = best + 1;
    }
    ClassMap out(filled.width, filled.height, truth_model.k, 0);
    for (std::size_t i = 0; i < filled.labels.size(); ++i)
        out.labels[i] = lookup[filled.labels[i]];
    return out;
}

void run_subimage(const ExperimentConfig& cfg, const fs::path& db, SubimageJob& job) {
    const int i = job.image, s = job.subimage;
    const Raster truth = read_raster((db / raster_name(i, s, "truth")).string());
    const Raster damaged = read_raster((db / raster_name(i, s, "damaged")).string());
    const Raster older = read_raster((db / raster_name(i, s, "older")).string());
    const GapMask mask = make_gap_mask(cfg.gap, truth.width, truth.height);
    const GapMask* region = cfg.region == EvalRegion::Gap ? &mask : nullptr;

    std::vector<Raster> z_lowres(3), z_expanded(3);
    for (int r : cfg.rrms) {
        z_lowres[r] = read_raster((db / raster_name(i, s, "z" + std::to_string(r))).string());
        z_expanded[r] = expand_lowres(z_lowres[r], cfg.n_z);
    }

    const bool any_a = std::any_of(cfg.methods.begin(), cfg.methods.end(), [](MethodId m) {
        return m == MethodId::A1 || m == MethodId::A2 || m == MethodId::A3;
    });

    RealRaster old_cal;
    if (any_a) old_cal = calibrate_columns(older, damaged, mask);

    const KMeansModel truth_model = kmeans_segment(
        truth, GapMask(truth.width, truth.height, false), cfg.k_classes,
        derive_seed(cfg.master_seed, sub_stream(kTruthModelStream, i, s)));

    for (int r : cfg.rrms) {
        for (MethodId m : cfg.methods) {
            MeasureRecord rec;
            rec.method = m;
            rec.rrm = r;
            rec.image = i;
            rec.subimage = s;
            rec.region = cfg.region;
            try {
                if (mask.empty()) {
                    // Nothing to impute: every method returns the input.
                    rec.rmse = 0.0;
                    rec.q = 1.0;
                    rec.oa = 1.0;
                    rec.kappa = 1.0;
                    job.records.push_back(rec);
                    continue;
                }

                Raster recon;
                ClassMap pred_map;
                switch (m) {
                    case MethodId::A1:
                    case MethodId::A2:
                    case MethodId::A3: {
                        recon = method_a(damaged, mask, z_expanded[r], old_cal,
                                         CutoffSpec{method_a_cutoff(m)});
                        pred_map = align_labels(truth_model, recon);
                        break;
                    }
                    case MethodId::B: {
                        recon = method_b(damaged, mask, z_lowres[r], cfg.n_z);
                        pred_map = align_labels(truth_model, recon);
                        break;
                    }
                    case MethodId::C:
                    case MethodId::C1: {
                        MethodCResult res = method_c(
                            damaged, mask, z_expanded[r], cfg.k_classes,
                            derive_seed(cfg.master_seed, sub_stream(kMethodCStream, i, s)),
                            m == MethodId::C, cfg.sample_window);
                        recon = std::move(res.raster);
                        pred_map = relabel_to_truth(res.classes, res.model, truth_model);
                        break;
                    }
                }

                rec.rmse = rmse(truth, recon, region);
                rec.q = q_index(truth, recon, cfg.q_window, region).q;
                const ConfusionMatrix cm = confusion(truth_model.assignments, pred_map, region);
                rec.oa = overall_accuracy(cm);
                rec.kappa = kappa(cm);
            } catch (const std::exception& e) {
                rec.ok = false;
                rec.error = e.what();
                rec.rmse = rec.q = rec.kappa = rec.oa = kNan;
            }
            job.records.push_back(rec);
        }
    }
}

} // namespace

ResultTable run_experiment(const ExperimentConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    const fs::path db = fs::path(out_dir) / "db";
    const fs::path manifest = db / "manifest.csv";
    if (!fs::exists(manifest))
        throw std::runtime_error("dataset not built: missing manifest " + manifest.string());

    const int n_images = scene_count(cfg);
    std::vector<SubimageJob> jobs;
    for (int i = 0; i < n_images; ++i)
        for (int s = 0; s < cfg.subimages_per_image; ++s) jobs.push_back({i, s, {}});

    const std::int64_t n_jobs = static_cast<std::int64_t>(jobs.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t j = 0; j < n_jobs; ++j) run_subimage(cfg, db, jobs[j]);

    ResultTable table;
    table.config_sha256 = sha256_hex(canonical_config_text(cfg));
    table.master_seed = cfg.master_seed;
    table.tool_version = version_string();
    for (const SubimageJob& job : jobs)
        table.records.insert(table.records.end(), job.records.begin(), job.records.end());
    return table;
}

std::string results_to_csv(const ResultTable& table) {
    std::string csv = "method,rrm,image,subimage,region,rmse,q,kappa,oa\n";
    for (const MeasureRecord& r : table.records) {
        csv += to_string(r.method) + "," + std::to_string(r.rrm) + "," +
               std::to_string(r.image) + "," + std::to_string(r.subimage) + "," +
               region_name(r.region) + "," + format_measure(r.rmse) + "," +
               format_measure(r.q) + "," + format_measure(r.kappa) + "," +
               format_measure(r.oa) + "\n";
    }
    return csv;
}

void write_results(const ResultTable& table, const ExperimentConfig& cfg,
                   const std::string& out_dir) {
    const fs::path dir(out_dir);
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "results.csv", std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write results.csv");
        out << results_to_csv(table);
    }
    {
        std::ofstream meta(dir / "run_meta.txt", std::ios::trunc);
        meta << "tool = " << table.tool_version << "\n";
        meta << "config_sha256 = " << table.config_sha256 << "\n";
        meta << "seed = " << table.master_seed << "\n";
        meta << "--- config ---\n" << canonical_config_text(cfg);
    }
    bool any_error = false;
    std::ostringstream errors;
    for (const MeasureRecord& r : table.records) {
        if (!r.ok) {
            any_error = true;
            errors << to_string(r.method) << "," << r.rrm << "," << r.image << "," << r.subimage
                   << ": " << r.error << "\n";
        }
    }
    if (any_error) {
        std::ofstream err(dir / "errors.txt", std::ios::trunc);
        err << errors.str();
    }
}

namespace {

struct MeanAccumulator {
    double rmse = 0.0, q = 0.0, kappa = 0.0, oa = 0.0;
    int n = 0;

    void add(const MeasureRecord& r) {
        if (!r.ok || std::isnan(r.rmse)) return;
        rmse += r.rmse;
        q += r.q;
        kappa += r.kappa;
        oa += r.oa;
        ++n;
    }
    std::string csv() const {
        if (n == 0) return "nan,nan,nan,nan";
        return format_measure(rmse / n) + "," + format_measure(q / n) + "," +
               format_measure(kappa / n) + "," + format_measure(oa / n);
    }
};

constexpr MethodId kCanonicalMethods[] = {MethodId::A1, MethodId::A2, MethodId::A3,
                                          MethodId::B, MethodId::C, MethodId::C1};

} // namespace

SummaryTables summarize(const std::vector<MeasureRecord>& records) {
    if (records.empty()) throw std::invalid_argument("result table is empty");

    std::map<std::pair<int, int>, MeanAccumulator> by_method_image; // (method, image)
    std::map<int, MeanAccumulator> by_method;
    std::map<int, MeanAccumulator> by_rrm;
    for (const MeasureRecord& r : records) {
        const int m = static_cast<int>(r.method);
        by_method_image[{m, r.image}].add(r);
        by_method[m].add(r);
        by_rrm[r.rrm].add(r);
    }

    SummaryTables tables;
    tables.mean_profiles = "method,image,rmse,q,kappa,oa\n";
    for (MethodId m : kCanonicalMethods) {
        for (const auto& [key, acc] : by_method_image) {
            if (key.first != static_cast<int>(m)) continue;
            tables.mean_profiles +=
                to_string(m) + "," + std::to_string(key.second) + "," + acc.csv() + "\n";
        }
    }
    tables.method_means = "method,rmse,q,kappa,oa,n\n";
    for (MethodId m : kCanonicalMethods) {
        const auto it = by_method.find(static_cast<int>(m));
        if (it == by_method.end()) continue;
        tables.method_means +=
            to_string(m) + "," + it->second.csv() + "," + std::to_string(it->second.n) + "\n";
    }
    tables.rrm_means = "rrm,rmse,q,kappa,oa,n\n";
    for (const auto& [r, acc] : by_rrm)
        tables.rrm_means += std::to_string(r) + "," + acc.csv() + "," + std::to_string(acc.n) +
                            "\n";
    return tables;
}

std::vector<MeasureRecord> parse_results_csv(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line) || line != "method,rrm,image,subimage,region,rmse,q,kappa,oa")
        throw std::invalid_argument("results CSV has an unexpected header");

    std::vector<MeasureRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> f = split_csv_list(line);
        if (f.size() != 9)
            throw std::invalid_argument("results CSV row with " + std::to_string(f.size()) +
                                        " fields: " + line);
        MeasureRecord r;
        r.method = method_from_string(f[0]);
        r.rrm = std::stoi(f[1]);
        r.image = std::stoi(f[2]);
        r.subimage = std::stoi(f[3]);
        r.region = region_from_string(f[4]);
        auto num = [](const std::string& s) { return s == "nan" ? kNan : std::stod(s); };
        r.rmse = num(f[5]);
        r.q = num(f[6]);
        r.kappa = num(f[7]);
        r.oa = num(f[8]);
        r.ok = !std::isnan(r.rmse);
        records.push_back(r);
    }
    return records;
}

std::string version_string() { return "gapfill 0.1.0"; }

} // namespace gapfill
