#pragma once

#include "sewlab/experiments.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sewlab {

inline constexpr const char* kVersion = "sewlab 0.1.0";
inline constexpr const char* kCsvSchemaVersion = "v1";

enum class ExperimentKind {
    euler_rate,
    occupation_rate,
    averaging_probe,
    sew_check,
    jn_check,
    coupling_sweep,
};

std::string experiment_name(ExperimentKind kind);
ExperimentKind parse_experiment(const std::string& name);

struct SlopeAssertion {
    double target = 0.0;
    double tol = 0.0;
    bool operator==(const SlopeAssertion&) const = default;
};

// Parses "<target>±<tol>" (also accepts the ASCII form "<target>+-<tol>").
SlopeAssertion parse_slope_assertion(const std::string& text);

// Flat experiment configuration; one struct for all experiment kinds, with
// per-kind required/ignored fields resolved during validation.
struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::euler_rate;
    std::string drift = "holder:0.5";
    std::string noise = "bm"; // bm | fbm:<H> | stable:<alpha>
    int dim = 1;
    std::vector<int> n_list{64, 128, 256, 512, 1024};
    int n_ref = 0; // 0: defaults to 16 * max(n_list)
    int m = 2;
    std::vector<int> m_list{2, 4, 8};
    int paths = 4096;
    int restart_paths = 256;
    std::vector<double> lambda_list{1, 2, 4, 8, 16};
    std::uint64_t master_seed = 2025;
    std::string output_prefix = "sewlab_out";

    int x_points = 256;     // averaging-probe
    int n_time = 2048;      // averaging-probe time grid
    std::string germ = "young"; // sew-check
    int max_level = 10;     // sew-check
    double pair_x = 0.1;    // sew-check ssl-pair shift
    double pair_y = 0.0;
    int n_occupation = 256; // jn-check coarse grid ("n" in configs)
    int sim_factor = 4;     // jn-check fine grid multiplier
    int n_sim = 4096;       // coupling-sweep
    double delta_mollify = 0.0;
    int workers = 0;

    std::optional<SlopeAssertion> assert_slope;

    bool operator==(const ExperimentConfig& other) const = default;
};

// Parses either the flat key = value format or JSON (detected by a leading
// '{'), validates, fills defaults, and applies the SEWLAB_SEED override.
// Warnings (e.g. out-of-theory-regime parameters) are appended to `warnings`
// when the pointer is non-null.
ExperimentConfig load_config_text(const std::string& text, std::vector<std::string>* warnings = nullptr);
ExperimentConfig load_config_file(const std::string& path, std::vector<std::string>* warnings = nullptr);

// Flat-format serialization; load_config_text(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

struct ResultRecord {
    ExperimentConfig config;
    std::string csv_path;
    std::string summary_path;
    std::string csv_text;    // exact bytes written to csv_path
    std::string summary_text;
    int exit_code = 0; // 0 ok, 2 assertion failure
    double wall_seconds = 0.0;
};

// Dispatches to the experiments module, writes <prefix>.csv and
// <prefix>.json, and returns the record. Deterministic CSV bytes for a fixed
// (config, binary, kernel backend).
ResultRecord run(const ExperimentConfig& config);

// Writes a self-contained gnuplot script next to the summary; requires at
// least 2 data rows.
std::string emit_plot_script(const std::string& summary_path);

// Quick end-to-end property checks; prints one line per check to `out`.
bool selftest(std::ostream& out);

NoiseModel parse_noise(const std::string& text);

} // namespace sewlab
