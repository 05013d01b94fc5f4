#pragma once

#include "hapbutton/activation.hpp"
#include "hapbutton/ingest.hpp"
#include "hapbutton/representative.hpp"
#include "hapbutton/synth.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hapbutton::pipeline {

/// Everything a command needs. Relative paths resolve against base_dir.
struct ProjectConfig {
    std::filesystem::path base_dir = ".";

    // paths
    std::filesystem::path sessions_root;  // every subdirectory is a session
    std::filesystem::path frf;
    std::filesystem::path area_stream;
    std::vector<std::pair<std::string, std::filesystem::path>> confusion;  // condition name -> CSV
    std::filesystem::path ratings;
    std::filesystem::path out_dir = "out";

    double rate_hz = 5000.0;
    ingest::ActivationOptions detect;
    ingest::ExtractOptions extract;
    representative::RepresentativeOptions represent;

    synth::SynthConfig synth;
    double peak_to_peak_V = 100.0;
    bool write_wav = false;

    int min_poles = 2;
    int max_poles = 12;
    double floor_fraction = 0.01;

    double a_min_mm2 = 50.0;
    double a_max_mm2 = 150.0;
    activation::MachineOptions machine;

    std::int64_t chance_trials = 10000;
    std::uint64_t seed = 1;

    /// Throws InvalidParameter naming the offending key.
    void validate() const;
    /// Canonical JSON of every setting (paths as written, not resolved).
    [[nodiscard]] std::string to_json() const;
    /// FNV-1a of to_json(); stamped into every output.
    [[nodiscard]] std::string hash() const;
    [[nodiscard]] std::filesystem::path resolve(const std::filesystem::path& p) const;
    [[nodiscard]] std::filesystem::path out(const std::filesystem::path& sub) const { return resolve(out_dir) / sub; }
};

/// Missing keys take the defaults above; unknown keys are rejected.
ProjectConfig parse_config(std::string_view text, const std::filesystem::path& base_dir, std::string_view source);
ProjectConfig load_config(const std::filesystem::path& path);

struct IngestSummary {
    std::size_t sessions = 0;
    std::size_t events = 0;
    std::vector<std::string> skipped;  // "<session>/trial N: reason"
};
IngestSummary cmd_ingest(const ProjectConfig& cfg);

struct RepresentSummary {
    std::vector<std::filesystem::path> profiles;
};
RepresentSummary cmd_represent(const ProjectConfig& cfg);

struct RenderSummary {
    int forward_poles = 0;
    int inverse_poles = 0;
    /// Band-limited, aligned NRMSE of the closed loop per button.
    std::vector<std::pair<ButtonType, double>> nrmse;
};
RenderSummary cmd_render(const ProjectConfig& cfg);

struct ActivateSummary {
    std::vector<activation::ActivationEvent> events;
};
/// Uses cfg.area_stream unless an override is given.
ActivateSummary cmd_activate(const ProjectConfig& cfg, const std::optional<std::filesystem::path>& stream = {});

struct EvalSummary {
    std::string table;
};
EvalSummary cmd_eval(const ProjectConfig& cfg);

/// ingest, represent, render, activate, eval in order.
void cmd_pipeline(const ProjectConfig& cfg);

struct FixtureOptions {
    int participants = 3;
    int trials_per_button = 4;
    std::uint64_t seed = 1;
};

/// Writes a self-contained synthetic project (sessions, plate FRF, area
/// stream, confusion matrices, ratings, config.json) and returns the config path.
std::filesystem::path make_fixture(const std::filesystem::path& dir, const FixtureOptions& opts = {});

}  // namespace hapbutton::pipeline
