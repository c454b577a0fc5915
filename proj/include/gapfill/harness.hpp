#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gapfill/degrade.hpp"
#include "gapfill/raster.hpp"

namespace gapfill {

enum class MethodId { A1, A2, A3, B, C, C1 };

std::string to_string(MethodId m);
MethodId method_from_string(const std::string& s);

/// Cutoff presets: A1/A2/A3 are Method A at 20/50/80% filter radius.
double method_a_cutoff(MethodId m);

enum class EvalRegion { Gap, Full };

struct ExperimentConfig {
    // Inputs: synthetic scenes by default, or explicit truth-scene rasters.
    int images = 4;
    std::vector<std::string> scene_paths; // when nonempty, overrides `images`
    std::uint64_t master_seed = 73;

    int subimages_per_image = 4;
    int subimage_size = 250;
    int bands = 3;
    int n_z = 5;

    GapSpec gap;

    std::vector<MethodId> methods = {MethodId::A1, MethodId::A2, MethodId::A3,
                                     MethodId::B, MethodId::C, MethodId::C1};
    std::vector<int> rrms = {0, 1, 2};

    int k_classes = 5;
    int q_window = 8;
    EvalRegion region = EvalRegion::Gap;
    int sample_window = 3;
    int shift_rows = 3;
    int shift_cols = 2;

    double older_gain = 1.1;
    double older_bias = 5.0;
    double older_noise_sigma = 18.0;
    double older_patch_rate = 0.4;

    void validate() const;
};

/// One factorial cell's response vector.
struct MeasureRecord {
    MethodId method = MethodId::B;
    int rrm = 0;
    int image = 0;
    int subimage = 0;
    EvalRegion region = EvalRegion::Gap;
    double rmse = 0.0;
    double q = 0.0;
    double kappa = 0.0;
    double oa = 0.0;
    bool ok = true;
    std::string error; // set when ok is false; measures are NaN
};

struct ResultTable {
    std::vector<MeasureRecord> records;
    std::string config_sha256;
    std::uint64_t master_seed = 0;
    std::string tool_version;
};

// Flat key=value config text ('#' comments). CLI flags override file values.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);
/// Canonical key=value rendering; its SHA-256 is the config hash.
std::string canonical_config_text(const ExperimentConfig& cfg);

/// Generate and persist the dataset (truth/damaged/older/Z* per sub-image,
/// all BRAW) plus the manifest, under <out_dir>/db.
void build_database(const ExperimentConfig& cfg, const std::string& out_dir);

/// Run the full method x RRM factorial against a built database. Cell
/// failures yield NaN-measure records instead of aborting.
ResultTable run_experiment(const ExperimentConfig& cfg, const std::string& out_dir);

/// Pinned results CSV (`method,rrm,image,subimage,region,rmse,q,kappa,oa`).
std::string results_to_csv(const ResultTable& table);
void write_results(const ResultTable& table, const ExperimentConfig& cfg,
                   const std::string& out_dir);

struct SummaryTables {
    std::string mean_profiles; // method,image,rmse,q,kappa,oa
    std::string method_means;  // method,rmse,q,kappa,oa,n
    std::string rrm_means;     // rrm,rmse,q,kappa,oa,n
};

/// Recompute the summary CSVs from raw records (per-(method,image) mean
/// profiles, per-method and per-RRM grand means).
SummaryTables summarize(const std::vector<MeasureRecord>& records);

/// Parse a results CSV back into records (used by the summarize subcommand).
std::vector<MeasureRecord> parse_results_csv(const std::string& csv);

std::string version_string();

} // namespace gapfill
