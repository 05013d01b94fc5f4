#include "hapbutton/error.hpp"
#include "hapbutton/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

namespace {

namespace fs = std::filesystem;
using namespace hapbutton;

// Exit codes: 0 ok, 1 data or configuration error, 2 numeric failure.
int exit_code(ErrorCategory c) { return c == ErrorCategory::numeric ? 2 : 1; }

std::string_view category_name(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::config: return "config";
        case ErrorCategory::data: return "data";
        case ErrorCategory::numeric: return "numeric";
    }
    return "unknown";
}

// Command-line overrides; unset options leave the config file value alone.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<double> rate_hz, cutoff_hz, carrier_hz, output_rate_hz, vpp;
    std::optional<int> min_poles, max_poles;
    std::optional<double> floor_fraction, hysteresis, dwell_ms, a_min, a_max;
    std::optional<std::int64_t> chance_trials;
    std::vector<std::string> confusion;  // name=path, replaces the config list
    std::optional<std::string> stream;

    void apply(pipeline::ProjectConfig& cfg) const {
        if (seed) cfg.seed = *seed;
        if (out) cfg.out_dir = fs::absolute(*out);
        if (rate_hz) cfg.rate_hz = *rate_hz;
        if (cutoff_hz) cfg.extract.highpass_hz = *cutoff_hz;
        if (carrier_hz) cfg.synth.carrier_hz = *carrier_hz;
        if (output_rate_hz) cfg.synth.output_rate_hz = *output_rate_hz;
        if (vpp) cfg.peak_to_peak_V = *vpp;
        if (min_poles) cfg.min_poles = *min_poles;
        if (max_poles) cfg.max_poles = *max_poles;
        if (floor_fraction) cfg.floor_fraction = *floor_fraction;
        if (hysteresis) cfg.machine.hysteresis = *hysteresis;
        if (dwell_ms) cfg.machine.dwell_s = *dwell_ms * 1e-3;
        if (a_min) cfg.a_min_mm2 = *a_min;
        if (a_max) cfg.a_max_mm2 = *a_max;
        if (chance_trials) cfg.chance_trials = *chance_trials;
        if (!confusion.empty()) {
            cfg.confusion.clear();
            for (const auto& item : confusion) {
                const auto eq = item.find('=');
                if (eq == std::string::npos || eq == 0 || eq + 1 == item.size()) {
                    throw InvalidParameter("--confusion expects NAME=PATH, got '" + item + "'");
                }
                cfg.confusion.emplace_back(item.substr(0, eq), fs::absolute(item.substr(eq + 1)));
            }
        }
        cfg.validate();
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Buckling-button haptics: ingest, representative waveforms, plate rendering, activation and evaluation"};
    app.require_subcommand(1);
    std::string config_path;
    Overrides ov;

    auto with_config = [&](CLI::App* cmd) {
        cmd->add_option("-c,--config", config_path, "Project config (JSON)")->required()->check(CLI::ExistingFile);
        cmd->add_option("--seed", ov.seed, "Random seed for chance simulation");
        cmd->add_option("--out", ov.out, "Output directory (overrides paths.out_dir)");
        return cmd;
    };
    auto acquisition = [&](CLI::App* cmd) {
        cmd->add_option("--rate", ov.rate_hz, "Acquisition rate in Hz");
        cmd->add_option("--cutoff", ov.cutoff_hz, "High-pass cutoff in Hz");
    };
    auto rendering = [&](CLI::App* cmd) {
        cmd->add_option("--carrier", ov.carrier_hz, "Carrier frequency in Hz");
        cmd->add_option("--output-rate", ov.output_rate_hz, "Output sample rate in Hz");
        cmd->add_option("--vpp", ov.vpp, "Peak-to-peak drive voltage");
        cmd->add_option("--min-poles", ov.min_poles, "Smallest model order tried");
        cmd->add_option("--max-poles", ov.max_poles, "Largest model order tried");
        cmd->add_option("--floor", ov.floor_fraction, "FRF magnitude floor as a fraction of the peak");
    };
    auto activating = [&](CLI::App* cmd) {
        cmd->add_option("--hysteresis", ov.hysteresis, "Release fraction of the threshold");
        cmd->add_option("--dwell-ms", ov.dwell_ms, "Time above threshold before a press fires");
        cmd->add_option("--a-min", ov.a_min, "Calibrated light-touch area in mm2");
        cmd->add_option("--a-max", ov.a_max, "Calibrated firm-press area in mm2");
    };
    auto evaluating = [&](CLI::App* cmd) {
        cmd->add_option("--chance-trials", ov.chance_trials, "Simulated chance trials per button");
        cmd->add_option("--confusion", ov.confusion, "Confusion matrix as NAME=PATH (repeatable)");
    };

    auto* ingest = with_config(app.add_subcommand("ingest", "Segment buckling events from session recordings"));
    acquisition(ingest);
    auto* represent = with_config(app.add_subcommand("represent", "Build one representative waveform per button"));
    auto* render = with_config(app.add_subcommand("render", "Fit plate models and render drive voltages"));
    rendering(render);
    auto* activate = with_config(app.add_subcommand("activate", "Run the activation state machines on an area stream"));
    activating(activate);
    activate->add_option("--stream", ov.stream, "Contact-area CSV (overrides paths.area_stream)");
    auto* eval = with_config(app.add_subcommand("eval", "Compute identification metrics and normalize ratings"));
    evaluating(eval);
    auto* run = with_config(app.add_subcommand("pipeline", "Run every stage in order"));
    acquisition(run);
    rendering(run);
    activating(run);
    evaluating(run);

    pipeline::FixtureOptions fx;
    std::string fixture_dir;
    auto* fixture = app.add_subcommand("make-fixture", "Write a synthetic project and its config.json");
    fixture->add_option("dir", fixture_dir, "Target directory")->required();
    fixture->add_option("--participants", fx.participants, "Synthetic participants")->check(CLI::Range(1, 99));
    fixture->add_option("--trials", fx.trials_per_button, "Trials per button")->check(CLI::Range(1, 999));
    fixture->add_option("--seed", fx.seed, "Noise seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (fixture->parsed()) {
            std::cout << pipeline::make_fixture(fixture_dir, fx).string() << "\n";
            return 0;
        }
        auto cfg = pipeline::load_config(config_path);
        ov.apply(cfg);
        std::cerr << "config " << cfg.hash() << ", output " << cfg.resolve(cfg.out_dir).string() << "\n";

        if (ingest->parsed()) {
            const auto s = pipeline::cmd_ingest(cfg);
            std::cout << s.sessions << " sessions, " << s.events << " events, " << s.skipped.size() << " skipped\n";
            for (const auto& why : s.skipped) std::cerr << "skipped " << why << "\n";
        } else if (represent->parsed()) {
            for (const auto& p : pipeline::cmd_represent(cfg).profiles) std::cout << p.string() << "\n";
        } else if (render->parsed()) {
            const auto s = pipeline::cmd_render(cfg);
            std::cout << "forward " << s.forward_poles << " poles, inverse " << s.inverse_poles << " poles\n";
            for (const auto& [button, e] : s.nrmse) {
                std::printf("%-7s band NRMSE %.2f%%\n", std::string(to_string(button)).c_str(), 100.0 * e);
            }
        } else if (activate->parsed()) {
            std::optional<fs::path> stream;
            if (ov.stream) stream = fs::absolute(*ov.stream);
            const auto s = pipeline::cmd_activate(cfg, stream);
            std::cout << s.events.size() << " events\n";
        } else if (eval->parsed()) {
            std::cout << pipeline::cmd_eval(cfg).table;
        } else if (run->parsed()) {
            pipeline::cmd_pipeline(cfg);
            std::cout << "done\n";
        }
        return 0;
    } catch (const Error& e) {
        std::cerr << "error (" << category_name(e.category()) << "): " << e.what() << "\n";
        return exit_code(e.category());
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error (data): " << e.what() << "\n";
        return 1;
    }
}
