#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "gapfill/classmap.hpp"
#include "gapfill/degrade.hpp"
#include "gapfill/fourier.hpp"
#include "gapfill/harness.hpp"
#include "gapfill/io.hpp"
#include "gapfill/metrics.hpp"
#include "gapfill/regression.hpp"
#include "gapfill/rng.hpp"

namespace fs = std::filesystem;
using namespace gapfill;

namespace {

struct DegradeArgs {
    std::string input;
    std::string out_dir = ".";
    int n_z = 5;
    std::vector<int> rrms = {0, 1, 2};
    int strip_width = 14;
    int period = 54;
    std::string orientation = "horizontal";
    double target_fraction = 0.26;
    int shift_rows = 3;
    int shift_cols = 2;
    std::uint64_t seed = 42;
    double older_gain = 1.1;
    double older_bias = 5.0;
    double older_noise_sigma = 4.0;
    double older_patch_rate = 0.08;
    bool skip_older = false;
};

int run_degrade(const DegradeArgs& a) {
    const Raster x = read_raster(a.input);
    GapSpec spec{a.strip_width, a.period,
                 a.orientation == "vertical" ? StripOrientation::Vertical
                                             : StripOrientation::Horizontal,
                 a.target_fraction};
    const GapMask mask = make_gap_mask(spec, x.width, x.height);
    const Raster damaged = apply_gap(x, mask, 0);

    fs::create_directories(a.out_dir);
    const fs::path dir(a.out_dir);
    const std::string stem = fs::path(a.input).stem().string();
    write_raster(damaged, (dir / (stem + "_damaged.braw")).string());
    write_raster(mask_to_raster(mask), (dir / (stem + "_mask.braw")).string());
    if (!a.skip_older) {
        const Raster older = synth_older(x, a.seed, a.older_gain, a.older_bias,
                                         a.older_patch_rate, a.older_noise_sigma);
        write_raster(older, (dir / (stem + "_older.braw")).string());
    }
    for (int r : a.rrms) {
        const Raster z = quantize(
            apply_rrm(x, a.n_z, static_cast<RrmKind>(r), a.shift_rows, a.shift_cols));
        write_raster(z, (dir / (stem + "_z" + std::to_string(r) + ".braw")).string());
    }
    std::cout << "degrade: wrote damaged/mask";
    if (!a.skip_older) std::cout << "/older";
    std::cout << " and " << a.rrms.size() << " low-res rasters to " << a.out_dir
              << " (gap fraction " << mask.fraction() << ")\n";
    return 0;
}

struct ImputeArgs {
    std::string method = "b";
    std::string damaged_path;
    std::string mask_path;
    std::string z_path;
    std::string old_path;
    std::string output = "recon.braw";
    std::string classmap_output;
    std::string field_output;
    std::string pgm_output;
    double cutoff = 0.5;
    int n_z = 5;
    int k = 5;
    std::uint64_t seed = 42;
    int window = 3;
};

int run_impute(const ImputeArgs& a) {
    const Raster damaged = read_raster(a.damaged_path);
    const GapMask mask = mask_from_raster(read_raster(a.mask_path));

    std::string m;
    for (char c : a.method) m.push_back(static_cast<char>(std::tolower(c)));

    Raster recon;
    if (m == "a" || m == "a1" || m == "a2" || m == "a3") {
        if (a.z_path.empty() || a.old_path.empty())
            throw std::invalid_argument("method a needs --z and --old");
        const Raster z = read_raster(a.z_path);
        const Raster older = read_raster(a.old_path);
        double cutoff = a.cutoff;
        if (m != "a") cutoff = method_a_cutoff(method_from_string(m));
        const Raster z_exp = a.n_z == 1 && z.width == damaged.width ? z
                                                                    : expand_lowres(z, a.n_z);
        const RealRaster old_cal = calibrate_columns(older, damaged, mask);
        recon = method_a(damaged, mask, z_exp, old_cal, CutoffSpec{cutoff});
    } else if (m == "b") {
        if (a.z_path.empty()) throw std::invalid_argument("method b needs --z");
        const Raster z = read_raster(a.z_path);
        if (!a.field_output.empty()) {
            const RegressionField field = fit_field(damaged, mask, z, a.n_z);
            std::ofstream out(a.field_output, std::ios::trunc);
            out << field_to_csv(field);
        }
        recon = method_b(damaged, mask, z, a.n_z);
    } else if (m == "c" || m == "c1") {
        if (a.z_path.empty()) throw std::invalid_argument("method c needs --z");
        const Raster z = read_raster(a.z_path);
        const Raster z_exp = a.n_z == 1 && z.width == damaged.width ? z
                                                                    : expand_lowres(z, a.n_z);
        MethodCResult res = method_c(damaged, mask, z_exp, a.k, a.seed, m == "c", a.window);
        for (const std::string& warning : res.warnings)
            std::cerr << "warning: " << warning << "\n";
        if (!a.classmap_output.empty()) {
            const Raster map = classmap_to_raster(res.classes);
            if (a.classmap_output.size() > 4 &&
                a.classmap_output.substr(a.classmap_output.size() - 4) == ".pgm") {
                write_pgm(map, 0, a.classmap_output);
            } else {
                write_raster(map, a.classmap_output);
            }
        }
        recon = std::move(res.raster);
    } else {
        throw std::invalid_argument("unknown method: " + a.method);
    }

    write_raster(recon, a.output);
    if (!a.pgm_output.empty())
        for (int b = 0; b < recon.bands; ++b)
            write_pgm(recon, b, a.pgm_output + "_b" + std::to_string(b) + ".pgm");
    std::cout << "impute: wrote " << a.output << "\n";
    return 0;
}

struct SegmentArgs {
    std::string input;
    std::string mask_path;
    std::string output = "classes.braw";
    std::string pgm_output;
    int k = 5;
    std::uint64_t seed = 42;
    bool enhance_map = false;
};

int run_segment(const SegmentArgs& a) {
    const Raster x = read_raster(a.input);
    const GapMask mask = a.mask_path.empty() ? GapMask(x.width, x.height, false)
                                             : mask_from_raster(read_raster(a.mask_path));
    const KMeansModel model = kmeans_segment(x, mask, a.k, a.seed);
    ClassMap map = model.assignments;
    if (a.enhance_map) map = enhance(map, x, mask);
    write_raster(classmap_to_raster(map), a.output);
    if (!a.pgm_output.empty()) write_pgm(classmap_to_raster(map), 0, a.pgm_output);
    std::cout << "segment: k=" << a.k << ", " << model.iterations_run << " iterations, wrote "
              << a.output << "\n";
    return 0;
}

struct EvaluateArgs {
    std::string truth_path;
    std::string recon_path;
    std::string mask_path;
    std::string truth_classmap;
    std::string pred_classmap;
    std::string region = "gap";
    std::string method_label = "B";
    int rrm_label = 0;
    int image_label = 0;
    int subimage_label = 0;
    int q_window = 8;
    int k = 5;
    std::uint64_t seed = 42;
};

int run_evaluate(const EvaluateArgs& a) {
    const Raster truth = read_raster(a.truth_path);
    const Raster recon = read_raster(a.recon_path);
    const GapMask mask = mask_from_raster(read_raster(a.mask_path));
    const GapMask* region = a.region == "full" ? nullptr : &mask;

    ClassMap truth_map, pred_map;
    if (!a.truth_classmap.empty() && !a.pred_classmap.empty()) {
        truth_map = classmap_from_raster(read_raster(a.truth_classmap), a.k);
        pred_map = classmap_from_raster(read_raster(a.pred_classmap), a.k);
    } else {
        const KMeansModel model =
            kmeans_segment(truth, GapMask(truth.width, truth.height, false), a.k, a.seed);
        truth_map = model.assignments;
        pred_map = align_labels(model, recon);
    }

    MeasureRecord rec;
    rec.method = method_from_string(a.method_label);
    rec.rrm = a.rrm_label;
    rec.image = a.image_label;
    rec.subimage = a.subimage_label;
    rec.region = a.region == "full" ? EvalRegion::Full : EvalRegion::Gap;
    rec.rmse = rmse(truth, recon, region);
    rec.q = q_index(truth, recon, a.q_window, region).q;
    const ConfusionMatrix cm = confusion(truth_map, pred_map, region);
    rec.oa = overall_accuracy(cm);
    rec.kappa = kappa(cm);

    ResultTable table;
    table.records.push_back(rec);
    std::cout << results_to_csv(table);
    return 0;
}

struct ExperimentArgs {
    std::string config_path;
    std::string out_dir = "experiment_out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool reuse_db = false;
    std::vector<std::string> overrides; // key=value pairs, applied after the file
};

int run_experiment_cmd(const ExperimentArgs& a) {
    ExperimentConfig cfg;
    if (!a.config_path.empty()) cfg = load_config(a.config_path);
    if (!a.overrides.empty()) {
        // Re-parse with the overrides appended; later lines win.
        std::string text = canonical_config_text(cfg);
        for (const std::string& kv : a.overrides) text += kv + "\n";
        cfg = parse_config_text(text);
    }
    if (a.seed_set) cfg.master_seed = a.seed;
    cfg.validate();

    const double cells = static_cast<double>(cfg.methods.size()) * cfg.rrms.size() *
                         (cfg.scene_paths.empty() ? cfg.images : cfg.scene_paths.size()) *
                         cfg.subimages_per_image;
    const double work = cells * cfg.subimage_size * cfg.subimage_size * cfg.bands;
    if (work > 2e10)
        std::cerr << "note: large configuration (" << static_cast<long long>(cells)
                  << " cells of " << cfg.subimage_size << "x" << cfg.subimage_size << "x"
                  << cfg.bands << "); this run may take a long time\n";

    if (!a.reuse_db || !fs::exists(fs::path(a.out_dir) / "db" / "manifest.csv"))
        build_database(cfg, a.out_dir);
    const ResultTable table = run_experiment(cfg, a.out_dir);
    write_results(table, cfg, a.out_dir);

    int failed = 0;
    for (const MeasureRecord& r : table.records) failed += r.ok ? 0 : 1;
    std::cout << "experiment: " << table.records.size() << " records ("
              << failed << " failed) -> " << (fs::path(a.out_dir) / "results.csv").string()
              << "\n";
    return 0;
}

struct SummarizeArgs {
    std::string results_path = "experiment_out/results.csv";
    std::string out_dir;
};

int run_summarize(const SummarizeArgs& a) {
    std::ifstream in(a.results_path);
    if (!in) throw std::runtime_error("cannot open results CSV: " + a.results_path);
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::vector<MeasureRecord> records = parse_results_csv(ss.str());
    const SummaryTables tables = summarize(records);

    const fs::path dir =
        a.out_dir.empty() ? fs::path(a.results_path).parent_path() : fs::path(a.out_dir);
    fs::create_directories(dir.empty() ? "." : dir);
    auto write = [&](const std::string& name, const std::string& text) {
        std::ofstream out(dir / name, std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + name);
        out << text;
    };
    write("mean_profiles.csv", tables.mean_profiles);
    write("method_means.csv", tables.method_means);
    write("rrm_means.csv", tables.rrm_means);
    std::cout << "summarize: wrote mean_profiles.csv, method_means.csv, rrm_means.csv to "
              << (dir.empty() ? "." : dir.string()) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gapfill: imputation of large gaps in multi-band rasters"};
    app.require_subcommand(1);

    DegradeArgs deg;
    CLI::App* degrade = app.add_subcommand(
        "degrade", "Build damaged/mask/older/low-res companions for one raster");
    degrade->add_option("--input", deg.input, "ground-truth BRAW raster")->required();
    degrade->add_option("--outdir", deg.out_dir, "output directory");
    degrade->add_option("--nz", deg.n_z, "fine pixels per low-res pixel");
    degrade->add_option("--rrms", deg.rrms, "resolution reduction methods (0,1,2)");
    degrade->add_option("--strip-width", deg.strip_width, "max strip width in lines");
    degrade->add_option("--period", deg.period, "lines between strip starts");
    degrade->add_option("--orientation", deg.orientation, "horizontal|vertical");
    degrade->add_option("--target-fraction", deg.target_fraction, "desired gap fraction");
    degrade->add_option("--shift-rows", deg.shift_rows, "RRM2 row shift");
    degrade->add_option("--shift-cols", deg.shift_cols, "RRM2 column shift");
    degrade->add_option("--seed", deg.seed, "seed for the synthetic older image");
    degrade->add_option("--older-gain", deg.older_gain, "older image gain");
    degrade->add_option("--older-bias", deg.older_bias, "older image bias");
    degrade->add_option("--older-noise-sigma", deg.older_noise_sigma, "older image noise");
    degrade->add_option("--older-patch-rate", deg.older_patch_rate, "re-shaded patch fraction");
    degrade->add_flag("--skip-older", deg.skip_older, "do not synthesize an older image");

    ImputeArgs imp;
    CLI::App* impute = app.add_subcommand("impute", "Fill the gap of a damaged raster");
    impute->add_option("--method", imp.method, "a|a1|a2|a3|b|c|c1")->required();
    impute->add_option("--damaged", imp.damaged_path, "damaged BRAW raster")->required();
    impute->add_option("--mask", imp.mask_path, "gap mask (single-band BRAW)")->required();
    impute->add_option("--z", imp.z_path, "low-resolution BRAW raster");
    impute->add_option("--old", imp.old_path, "older BRAW raster (method a)");
    impute->add_option("--output", imp.output, "reconstruction output path");
    impute->add_option("--classmap-output", imp.classmap_output, "filled class map (method c)");
    impute->add_option("--field-output", imp.field_output, "regression field CSV (method b)");
    impute->add_option("--pgm-output", imp.pgm_output, "per-band PGM prefix");
    impute->add_option("--cutoff", imp.cutoff, "filter radius fraction for --method a");
    impute->add_option("--nz", imp.n_z, "fine pixels per low-res pixel");
    impute->add_option("--k", imp.k, "class count (method c)");
    impute->add_option("--seed", imp.seed, "random seed (method c)");
    impute->add_option("--window", imp.window, "donor window radius (method c)");

    SegmentArgs seg;
    CLI::App* segment = app.add_subcommand("segment", "K-means class map of a raster");
    segment->add_option("--input", seg.input, "BRAW raster")->required();
    segment->add_option("--mask", seg.mask_path, "optional gap mask");
    segment->add_option("--output", seg.output, "class map output (single-band BRAW)");
    segment->add_option("--pgm-output", seg.pgm_output, "class map as PGM");
    segment->add_option("--k", seg.k, "class count");
    segment->add_option("--seed", seg.seed, "random seed");
    segment->add_flag("--enhance", seg.enhance_map, "apply coherence enhancement");

    EvaluateArgs ev;
    CLI::App* evaluate = app.add_subcommand(
        "evaluate", "Four-measure comparison of a reconstruction against ground truth");
    evaluate->add_option("--truth", ev.truth_path, "ground-truth BRAW raster")->required();
    evaluate->add_option("--recon", ev.recon_path, "reconstructed BRAW raster")->required();
    evaluate->add_option("--mask", ev.mask_path, "gap mask (single-band BRAW)")->required();
    evaluate->add_option("--truth-classmap", ev.truth_classmap, "truth class map (BRAW)");
    evaluate->add_option("--pred-classmap", ev.pred_classmap, "predicted class map (BRAW)");
    evaluate->add_option("--region", ev.region, "gap|full")->check(CLI::IsMember({"gap", "full"}));
    evaluate->add_option("--method-label", ev.method_label, "method column value");
    evaluate->add_option("--rrm-label", ev.rrm_label, "rrm column value");
    evaluate->add_option("--image-label", ev.image_label, "image column value");
    evaluate->add_option("--subimage-label", ev.subimage_label, "subimage column value");
    evaluate->add_option("--q-window", ev.q_window, "Q tile side length");
    evaluate->add_option("--k", ev.k, "class count for the derived class maps");
    evaluate->add_option("--seed", ev.seed, "K-means seed for the derived class maps");

    ExperimentArgs ex;
    CLI::App* experiment = app.add_subcommand(
        "experiment", "Build the synthetic database and run the method x RRM factorial");
    experiment->add_option("--config", ex.config_path, "key=value config file");
    experiment->add_option("--outdir", ex.out_dir, "output directory");
    experiment->add_option("--seed", ex.seed, "override the master seed")
        ->each([&ex](const std::string&) { ex.seed_set = true; });
    experiment->add_option("--set", ex.overrides,
                           "override a config key, e.g. --set methods=b,c1 --set nz=5");
    experiment->add_flag("--reuse-db", ex.reuse_db, "skip database rebuild when present");

    SummarizeArgs su;
    CLI::App* summarize_cmd =
        app.add_subcommand("summarize", "Mean profiles and grand means from a results CSV");
    summarize_cmd->add_option("--results", su.results_path, "results.csv path");
    summarize_cmd->add_option("--outdir", su.out_dir, "summary output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (degrade->parsed()) return run_degrade(deg);
        if (impute->parsed()) return run_impute(imp);
        if (segment->parsed()) return run_segment(seg);
        if (evaluate->parsed()) return run_evaluate(ev);
        if (experiment->parsed()) return run_experiment_cmd(ex);
        if (summarize_cmd->parsed()) return run_summarize(su);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
