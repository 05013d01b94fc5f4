#include "hapbutton/pipeline.hpp"

#include "hapbutton/artifacts.hpp"
#include "hapbutton/error.hpp"
#include "hapbutton/evaluation.hpp"
#include "hapbutton/fixtures.hpp"
#include "hapbutton/io.hpp"
#include "hapbutton/sysid.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <set>

namespace hapbutton::pipeline {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// ---- config ------------------------------------------------------------------------

void reject_unknown(const json& section, std::string_view name, std::initializer_list<std::string_view> allowed) {
    if (!section.is_object()) throw InvalidParameter("config: '" + std::string(name) + "' must be an object");
    for (const auto& item : section.items()) {
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
            throw InvalidParameter("config: unknown key '" + std::string(name) + "." + item.key() + "'");
        }
    }
}

template <typename T>
void read_key(const json& section, std::string_view section_name, const char* key, T& target) {
    if (!section.contains(key)) return;
    try {
        target = section.at(key).get<T>();
    } catch (const json::exception&) {
        throw InvalidParameter("config: '" + std::string(section_name) + "." + key + "' has the wrong type");
    }
}

void read_path(const json& section, std::string_view section_name, const char* key, fs::path& target) {
    std::string s = target.generic_string();
    read_key(section, section_name, key, s);
    target = s;
}

const json& section_of(const json& root, const char* name) {
    static const json empty = json::object();
    return root.contains(name) ? root.at(name) : empty;
}

std::string_view method_name(representative::RepresentativeMethod m) {
    return m == representative::RepresentativeMethod::medoid ? "medoid" : "barycenter";
}

std::string_view distance_name(representative::LocalDistance d) {
    return d == representative::LocalDistance::absolute ? "absolute" : "squared";
}

artifacts::Provenance provenance(const ProjectConfig& cfg) { return {HAPBUTTON_VERSION, cfg.hash()}; }

json provenance_json(const ProjectConfig& cfg) {
    return {{"tool", "hapbutton"}, {"version", HAPBUTTON_VERSION}, {"config_hash", cfg.hash()}};
}

void require_exists(const fs::path& p, std::string_view what) {
    if (p.empty()) throw InvalidParameter("config: no " + std::string(what) + " path configured");
    if (!fs::exists(p)) throw InvalidInput(std::string(what) + " '" + p.string() + "' does not exist");
}

json read_json_file(const fs::path& p) {
    try {
        return json::parse(io::read_text(p));
    } catch (const json::exception& e) {
        throw InvalidInput(p.string() + ": " + e.what());
    }
}

// ---- small writers -----------------------------------------------------------------

std::string psd_csv(const Spectrum& s, const artifacts::Provenance& prov) {
    std::string out = prov.comment_line() + "\nf_hz,power\n";
    for (std::size_t k = 0; k < s.frequencies_hz.size(); ++k) {
        out += io::format_double(s.frequencies_hz[k]) + "," + io::format_double(s.power[k]) + "\n";
    }
    return out;
}

std::string segment_name(const std::string& participant, ButtonType b, int trial) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%03d", trial);
    return participant + "_" + std::string(to_string(b)) + "_t" + buf + ".csv";
}

// Deterministic uniform in [0, 1) from the raw 64-bit stream; independent of
// the standard library's distribution implementations.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

// ---- ProjectConfig -----------------------------------------------------------------

void ProjectConfig::validate() const {
    auto fail = [](const std::string& key, const std::string& why) {
        throw InvalidParameter("config: " + key + " " + why);
    };
    if (!(rate_hz > 0.0)) fail("acquisition.rate_hz", "must be positive");
    if (!(detect.debounce_ms >= 0.0)) fail("acquisition.debounce_ms", "must be non-negative");
    if (!(detect.min_range_sigmas > 0.0)) fail("acquisition.min_range_sigmas", "must be positive");
    if (!(extract.highpass_hz > 0.0) || !(extract.highpass_hz < rate_hz / 2.0)) {
        fail("filter.highpass_hz", "must lie in (0, rate/2)");
    }
    if (extract.highpass_order < 1 || extract.highpass_order > 8) fail("filter.order", "must be in [1, 8]");
    if (!(extract.pre_ms > 0.0) || !(extract.post_ms > 0.0)) fail("extract.pre_ms/post_ms", "must be positive");
    if (!(extract.noise_ms > 0.0) || extract.noise_ms > extract.pre_ms) fail("extract.noise_ms", "must lie in (0, pre_ms]");
    if (!(extract.onset_sigmas > 0.0)) fail("extract.onset_sigmas", "must be positive");
    if (represent.barycenter_iterations < 1) fail("representative.barycenter_iterations", "must be at least 1");
    try {
        synth.validate();
    } catch (const InvalidParameter& e) {
        fail("synth", e.what());
    }
    if (!(peak_to_peak_V > 0.0)) fail("synth.peak_to_peak_V", "must be positive");
    if (min_poles < 0 || max_poles < min_poles) fail("fit.min_poles/max_poles", "must form a nonempty range");
    if (!(floor_fraction >= 0.0) || !(floor_fraction < 1.0)) fail("fit.floor_fraction", "must lie in [0, 1)");
    if (!(a_min_mm2 > 0.0) || !(a_max_mm2 > a_min_mm2)) fail("activation.a_min_mm2/a_max_mm2", "need 0 < a_min < a_max");
    try {
        machine.validate();
    } catch (const InvalidParameter& e) {
        fail("activation", e.what());
    }
    if (chance_trials < 1) fail("evaluation.chance_trials", "must be positive");
    std::set<std::string> names;
    for (const auto& [name, path] : confusion) {
        if (!names.insert(name).second) fail("paths.confusion", "repeats condition '" + name + "'");
    }
}

std::string ProjectConfig::to_json() const {
    json j;
    json conf = json::object();
    for (const auto& [name, path] : confusion) conf[name] = path.generic_string();
    j["paths"] = {{"sessions_root", sessions_root.generic_string()},
                  {"frf", frf.generic_string()},
                  {"area_stream", area_stream.generic_string()},
                  {"confusion", conf},
                  {"ratings", ratings.generic_string()},
                  {"out_dir", out_dir.generic_string()}};
    j["acquisition"] = {{"rate_hz", rate_hz},
                        {"debounce_ms", detect.debounce_ms},
                        {"min_range_sigmas", detect.min_range_sigmas}};
    j["filter"] = {{"highpass_hz", extract.highpass_hz}, {"order", extract.highpass_order}};
    j["extract"] = {{"pre_ms", extract.pre_ms},
                    {"post_ms", extract.post_ms},
                    {"onset_sigmas", extract.onset_sigmas},
                    {"noise_ms", extract.noise_ms}};
    j["representative"] = {{"method", method_name(represent.method)},
                           {"distance", distance_name(represent.dtw.distance)},
                           {"band_radius", represent.dtw.band_radius ? json(*represent.dtw.band_radius) : json(nullptr)},
                           {"barycenter_iterations", represent.barycenter_iterations}};
    j["synth"] = {{"carrier_hz", synth.carrier_hz},
                  {"output_rate_hz", synth.output_rate_hz},
                  {"peak_to_peak_V", peak_to_peak_V},
                  {"write_wav", write_wav}};
    j["fit"] = {{"min_poles", min_poles}, {"max_poles", max_poles}, {"floor_fraction", floor_fraction}};
    j["activation"] = {{"a_min_mm2", a_min_mm2},
                       {"a_max_mm2", a_max_mm2},
                       {"hysteresis", machine.hysteresis},
                       {"dwell_ms", machine.dwell_s * 1e3}};
    j["evaluation"] = {{"chance_trials", chance_trials}};
    j["seed"] = seed;
    return j.dump(2) + "\n";
}

std::string ProjectConfig::hash() const { return io::fnv1a_hex(to_json()); }

fs::path ProjectConfig::resolve(const fs::path& p) const { return p.is_absolute() ? p : base_dir / p; }

ProjectConfig parse_config(std::string_view text, const fs::path& base_dir, std::string_view source) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw InvalidParameter(std::string(source) + ": " + e.what());
    }
    reject_unknown(root, "<root>",
                   {"paths", "acquisition", "filter", "extract", "representative", "synth", "fit", "activation",
                    "evaluation", "seed"});
    ProjectConfig cfg;
    cfg.base_dir = base_dir;

    const auto& paths = section_of(root, "paths");
    reject_unknown(paths, "paths", {"sessions_root", "frf", "area_stream", "confusion", "ratings", "out_dir"});
    read_path(paths, "paths", "sessions_root", cfg.sessions_root);
    read_path(paths, "paths", "frf", cfg.frf);
    read_path(paths, "paths", "area_stream", cfg.area_stream);
    read_path(paths, "paths", "ratings", cfg.ratings);
    read_path(paths, "paths", "out_dir", cfg.out_dir);
    if (paths.contains("confusion")) {
        const auto& c = paths.at("confusion");
        if (!c.is_object()) throw InvalidParameter("config: 'paths.confusion' must map condition names to files");
        for (const auto& item : c.items()) {
            if (!item.value().is_string()) throw InvalidParameter("config: 'paths.confusion." + item.key() + "' must be a path");
            cfg.confusion.emplace_back(item.key(), item.value().get<std::string>());
        }
    }

    const auto& acq = section_of(root, "acquisition");
    reject_unknown(acq, "acquisition", {"rate_hz", "debounce_ms", "min_range_sigmas"});
    read_key(acq, "acquisition", "rate_hz", cfg.rate_hz);
    read_key(acq, "acquisition", "debounce_ms", cfg.detect.debounce_ms);
    read_key(acq, "acquisition", "min_range_sigmas", cfg.detect.min_range_sigmas);

    const auto& filter = section_of(root, "filter");
    reject_unknown(filter, "filter", {"highpass_hz", "order"});
    read_key(filter, "filter", "highpass_hz", cfg.extract.highpass_hz);
    read_key(filter, "filter", "order", cfg.extract.highpass_order);

    const auto& ex = section_of(root, "extract");
    reject_unknown(ex, "extract", {"pre_ms", "post_ms", "onset_sigmas", "noise_ms"});
    read_key(ex, "extract", "pre_ms", cfg.extract.pre_ms);
    read_key(ex, "extract", "post_ms", cfg.extract.post_ms);
    read_key(ex, "extract", "onset_sigmas", cfg.extract.onset_sigmas);
    read_key(ex, "extract", "noise_ms", cfg.extract.noise_ms);

    const auto& rep = section_of(root, "representative");
    reject_unknown(rep, "representative", {"method", "distance", "band_radius", "barycenter_iterations"});
    if (rep.contains("method")) {
        std::string m;
        read_key(rep, "representative", "method", m);
        if (m == "medoid") cfg.represent.method = representative::RepresentativeMethod::medoid;
        else if (m == "barycenter") cfg.represent.method = representative::RepresentativeMethod::barycenter;
        else throw InvalidParameter("config: representative.method must be 'medoid' or 'barycenter'");
    }
    if (rep.contains("distance")) {
        std::string d;
        read_key(rep, "representative", "distance", d);
        if (d == "absolute") cfg.represent.dtw.distance = representative::LocalDistance::absolute;
        else if (d == "squared") cfg.represent.dtw.distance = representative::LocalDistance::squared;
        else throw InvalidParameter("config: representative.distance must be 'absolute' or 'squared'");
    }
    if (rep.contains("band_radius") && !rep.at("band_radius").is_null()) {
        std::size_t r = 0;
        read_key(rep, "representative", "band_radius", r);
        cfg.represent.dtw.band_radius = r;
    }
    read_key(rep, "representative", "barycenter_iterations", cfg.represent.barycenter_iterations);

    const auto& syn = section_of(root, "synth");
    reject_unknown(syn, "synth", {"carrier_hz", "output_rate_hz", "peak_to_peak_V", "write_wav"});
    read_key(syn, "synth", "carrier_hz", cfg.synth.carrier_hz);
    read_key(syn, "synth", "output_rate_hz", cfg.synth.output_rate_hz);
    read_key(syn, "synth", "peak_to_peak_V", cfg.peak_to_peak_V);
    read_key(syn, "synth", "write_wav", cfg.write_wav);

    const auto& fit = section_of(root, "fit");
    reject_unknown(fit, "fit", {"min_poles", "max_poles", "floor_fraction"});
    read_key(fit, "fit", "min_poles", cfg.min_poles);
    read_key(fit, "fit", "max_poles", cfg.max_poles);
    read_key(fit, "fit", "floor_fraction", cfg.floor_fraction);

    const auto& act = section_of(root, "activation");
    reject_unknown(act, "activation", {"a_min_mm2", "a_max_mm2", "hysteresis", "dwell_ms"});
    read_key(act, "activation", "a_min_mm2", cfg.a_min_mm2);
    read_key(act, "activation", "a_max_mm2", cfg.a_max_mm2);
    read_key(act, "activation", "hysteresis", cfg.machine.hysteresis);
    double dwell_ms = cfg.machine.dwell_s * 1e3;
    read_key(act, "activation", "dwell_ms", dwell_ms);
    cfg.machine.dwell_s = dwell_ms * 1e-3;

    const auto& ev = section_of(root, "evaluation");
    reject_unknown(ev, "evaluation", {"chance_trials"});
    read_key(ev, "evaluation", "chance_trials", cfg.chance_trials);

    read_key(root, "<root>", "seed", cfg.seed);
    cfg.validate();
    return cfg;
}

ProjectConfig load_config(const fs::path& path) {
    if (!fs::exists(path)) throw InvalidParameter("config file '" + path.string() + "' does not exist");
    return parse_config(io::read_text(path), path.parent_path().empty() ? fs::path(".") : path.parent_path(),
                        path.string());
}

// ---- ingest ------------------------------------------------------------------------

IngestSummary cmd_ingest(const ProjectConfig& cfg) {
    const fs::path root = cfg.resolve(cfg.sessions_root);
    require_exists(root, "sessions root");
    std::vector<fs::path> sessions;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory()) sessions.push_back(entry.path());
    }
    std::sort(sessions.begin(), sessions.end());
    if (sessions.empty()) throw InvalidInput("no session directories under '" + root.string() + "'");

    const fs::path out = cfg.out("ingest");
    const auto prov = provenance(cfg);
    IngestSummary summary;
    summary.sessions = sessions.size();
    json events = json::array();
    std::vector<ingest::LabeledEvent> labeled;
    for (const auto& dir : sessions) {
        const auto trials = ingest::parse_session(dir);
        for (const auto& trial : trials) {
            if (std::abs(trial.sample_rate_hz() - cfg.rate_hz) > 1e-9 * cfg.rate_hz) {
                throw InvalidInput(dir.filename().string() + ": rate " + io::format_double(trial.sample_rate_hz()) +
                                   " Hz differs from configured " + io::format_double(cfg.rate_hz) + " Hz");
            }
            const std::string where = dir.filename().string() + "/trial " + std::to_string(trial.trial_index);
            std::optional<ingest::BucklingExtraction> ex;
            try {
                const auto acts = ingest::detect_activation(trial.activation_voltage, trial.button_type, cfg.detect);
                if (acts.empty()) throw InvalidInput("no activation found");
                ex = ingest::extract_buckling(trial, acts.front(), cfg.extract);
            } catch (const InvalidInput& e) {
                summary.skipped.push_back(where + ": " + e.what());
                continue;
            }
            const std::string seg = segment_name(trial.participant_id, trial.button_type, trial.trial_index);
            io::write_text(out / "segments" / seg, artifacts::format_timeseries_csv(ex->filtered_window, prov));
            const auto& e = ex->event;
            events.push_back({{"participant", trial.participant_id},
                              {"button", std::string(to_string(trial.button_type))},
                              {"trial", trial.trial_index},
                              {"session", dir.filename().generic_string()},
                              {"activation_index", e.activation_index},
                              {"onset_index", e.onset_index},
                              {"window_first", e.window.first},
                              {"window_last", e.window.last},
                              {"activation_force_N", e.activation_force_N},
                              {"segment", "segments/" + seg}});
            labeled.push_back({trial.participant_id, trial.button_type, trial.trial_index, e});
        }
    }
    summary.events = labeled.size();
    if (labeled.empty()) throw InvalidInput("no buckling events could be extracted");

    const auto stats = ingest::force_statistics(labeled);
    json pooled = json::object();
    for (const auto& [button, s] : stats.pooled) {
        pooled[std::string(to_string(button))] = {{"mean_N", s.mean_N}, {"std_N", s.std_N}, {"count", s.count}};
    }
    json per = json::array();
    for (const auto& [key, s] : stats.per_participant) {
        per.push_back({{"participant", key.first},
                       {"button", std::string(to_string(key.second))},
                       {"mean_N", s.mean_N},
                       {"std_N", s.std_N},
                       {"count", s.count}});
    }
    json index;
    index["provenance"] = provenance_json(cfg);
    index["events"] = std::move(events);
    index["skipped"] = summary.skipped;
    index["force_statistics"] = {{"pooled", pooled}, {"per_participant", per}};
    io::write_text(out / "index.json", index.dump(2) + "\n");
    return summary;
}

// ---- represent ---------------------------------------------------------------------

RepresentSummary cmd_represent(const ProjectConfig& cfg) {
    const fs::path in = cfg.out("ingest");
    const fs::path index_path = in / "index.json";
    require_exists(index_path, "ingest index (run 'ingest' first)");
    const auto index = read_json_file(index_path);

    // button -> participant -> segments, both ordered.
    std::map<ButtonType, std::map<std::string, std::vector<TimeSeries>>> grouped;
    try {
        for (const auto& e : index.at("events")) {
            const auto button = button_from_string(e.at("button").get<std::string>());
            grouped[button][e.at("participant").get<std::string>()].push_back(
                artifacts::read_timeseries_csv(in / e.at("segment").get<std::string>()));
        }
    } catch (const json::exception& ex) {
        throw InvalidInput(index_path.string() + ": " + ex.what());
    }
    const auto& pooled = index.at("force_statistics").at("pooled");

    RepresentSummary summary;
    const auto prov = provenance(cfg);
    for (const auto& [button, by_participant] : grouped) {
        std::vector<TimeSeries> reps;
        std::vector<std::string> ids;
        for (const auto& [participant, trials] : by_participant) {
            reps.push_back(representative::participant_representative(trials, cfg.represent));
            ids.push_back(participant);
        }
        const double force = pooled.at(std::string(to_string(button))).at("mean_N").get<double>();
        const auto profile = representative::button_profile(button, reps, ids, force, cfg.represent);
        summary.profiles.push_back(artifacts::write_profile(cfg.out("profiles"), profile, prov));
    }
    return summary;
}

// ---- render ------------------------------------------------------------------------

RenderSummary cmd_render(const ProjectConfig& cfg) {
    const fs::path frf_path = cfg.resolve(cfg.frf);
    require_exists(frf_path, "FRF file");
    auto h = drop_nonpositive_frequencies(artifacts::read_frf_csv(frf_path));
    if (h.quantity == FrfQuantity::displacement_per_volt) h = differentiate_frf(h, 2);
    if (h.quantity != FrfQuantity::acceleration_per_volt) {
        throw InvalidInput(frf_path.string() + ": expected a displacement- or acceleration-per-volt FRF");
    }
    const auto models = sysid::fit_plate_models(h, cfg.floor_fraction, cfg.min_poles, cfg.max_poles);

    const fs::path out = cfg.out("render");
    const auto prov = provenance(cfg);
    io::write_text(out / "model_forward.json",
                   artifacts::model_to_json(models.forward.model, cfg.synth.output_rate_hz, prov));
    io::write_text(out / "model_inverse.json",
                   artifacts::model_to_json(models.inverse.model, cfg.synth.output_rate_hz, prov));

    RenderSummary summary{models.forward.model.n_poles(), models.inverse.model.n_poles(), {}};
    json buttons = json::object();
    const std::pair<double, double> band{cfg.synth.carrier_hz - 50.0, cfg.synth.carrier_hz + 50.0};
    for (auto button : all_buttons) {
        const fs::path pj = artifacts::profile_json_path(cfg.out("profiles"), button);
        if (!fs::exists(pj)) continue;
        const auto profile = artifacts::read_profile(pj);
        const std::string name(to_string(button));

        const auto voltage = sysid::render_voltage(profile, models.inverse.model, cfg.synth, cfg.peak_to_peak_V);
        const auto accel = sysid::reconstruct(voltage, models.forward.model);
        const auto target = synth::modulate(profile.representative_acceleration, cfg.synth);
        const auto cmp = sysid::compare_waveforms(target, accel, {.band_hz = band});
        const auto recorded_psd = power_spectral_density(profile.representative_acceleration);
        const auto target_psd = power_spectral_density(target);
        const auto rebuilt_psd = power_spectral_density(accel);
        const auto full = sysid::compare_waveforms(target, accel);

        // Envelopes of the modulated target and the gain-aligned reconstruction.
        std::vector<double> aligned(accel.samples().begin(), accel.samples().end());
        for (double& v : aligned) v *= cmp.gain;
        const auto env_target = synth::recover_envelope(target, cfg.synth.carrier_hz);
        const auto env_rebuilt = synth::recover_envelope(accel.with_samples(std::move(aligned)), cfg.synth.carrier_hz);
        const double env_nrmse = synth::nrmse(env_target.samples(), env_rebuilt.samples());

        io::write_text(out / ("voltage_" + name + ".csv"), artifacts::format_timeseries_csv(voltage, prov));
        io::write_text(out / ("reconstruction_" + name + ".csv"), artifacts::format_timeseries_csv(accel, prov));
        io::write_text(out / ("psd_recorded_" + name + ".csv"), psd_csv(recorded_psd, prov));
        io::write_text(out / ("psd_target_" + name + ".csv"), psd_csv(target_psd, prov));
        io::write_text(out / ("psd_reconstructed_" + name + ".csv"), psd_csv(rebuilt_psd, prov));
        if (cfg.write_wav) synth::write_wav(out / ("voltage_" + name + ".wav"), voltage);

        buttons[name] = {{"samples", voltage.size()},
                         {"peak_to_peak_V", cfg.peak_to_peak_V},
                         {"nrmse_band_raw", cmp.nrmse_raw},
                         {"nrmse_band_aligned", cmp.nrmse_aligned},
                         {"nrmse_full_aligned", full.nrmse_aligned},
                         {"alignment_gain", cmp.gain},
                         {"alignment_lag_samples", cmp.lag_samples},
                         {"envelope_nrmse", env_nrmse},
                         {"psd_peak_recorded_hz", recorded_psd.peak_frequency_hz()},
                         {"psd_peak_target_hz", target_psd.peak_frequency_hz()},
                         {"psd_peak_reconstructed_hz", rebuilt_psd.peak_frequency_hz()},
                         {"psd_bin_hz", rebuilt_psd.bin_width_hz()}};
        summary.nrmse.emplace_back(button, cmp.nrmse_aligned);
    }
    if (summary.nrmse.empty()) throw InvalidInput("no button profiles found (run 'represent' first)");

    auto candidates = [](const sysid::OrderSelection& sel) {
        json arr = json::array();
        for (const auto& c : sel.candidates) {
            arr.push_back({{"poles", c.n_poles},
                           {"zeros", c.n_zeros},
                           {"criterion", c.failure.empty() ? json(c.criterion) : json(nullptr)},
                           {"relative_error", c.failure.empty() ? json(c.relative_error) : json(nullptr)},
                           {"failure", c.failure}});
        }
        return arr;
    };
    json report;
    report["provenance"] = provenance_json(cfg);
    report["carrier_hz"] = cfg.synth.carrier_hz;
    report["comparison_band_hz"] = {band.first, band.second};
    report["inverse_fit_band_lo_hz"] = models.inverse_band_lo_hz;
    report["forward_order"] = {{"selected_poles", summary.forward_poles}, {"candidates", candidates(models.forward)}};
    report["inverse_order"] = {{"selected_poles", summary.inverse_poles}, {"candidates", candidates(models.inverse)}};
    report["buttons"] = std::move(buttons);
    io::write_text(out / "report.json", report.dump(2) + "\n");
    return summary;
}

// ---- activate ----------------------------------------------------------------------

ActivateSummary cmd_activate(const ProjectConfig& cfg, const std::optional<fs::path>& stream) {
    const fs::path stream_path = stream ? *stream : cfg.resolve(cfg.area_stream);
    require_exists(stream_path, "area stream");

    std::array<double, 3> forces{};
    for (auto button : all_buttons) {
        const fs::path pj = artifacts::profile_json_path(cfg.out("profiles"), button);
        require_exists(pj, std::string(to_string(button)) + " profile (run 'represent' first)");
        forces[index_of(button)] = artifacts::read_profile(pj).mean_activation_force_N;
    }
    const activation::CalibrationProfile cal{cfg.a_min_mm2, cfg.a_max_mm2, ""};
    const auto thresholds = activation::thresholds_from_forces(cal, forces);

    ActivateSummary summary;
    if (const auto area = activation::read_area_stream(stream_path)) {
        for (auto button : all_buttons) {
            const auto ev = activation::run_stream(button, *area, thresholds, cfg.machine);
            summary.events.insert(summary.events.end(), ev.begin(), ev.end());
        }
    }
    std::stable_sort(summary.events.begin(), summary.events.end(), [](const auto& a, const auto& b) {
        if (a.sample_index != b.sample_index) return a.sample_index < b.sample_index;
        return index_of(a.button) < index_of(b.button);
    });

    const fs::path out = cfg.out("activation");
    io::write_text(out / "events.jsonl", activation::events_to_jsonl(summary.events));
    std::string triggers;
    for (const auto& e : summary.events) {
        if (e.kind != activation::EventKind::press) continue;
        json j;
        j["t"] = e.t_s;
        j["sample"] = e.sample_index;
        j["button"] = std::string(to_string(e.button));
        j["waveform"] = "render/voltage_" + std::string(to_string(e.button)) + ".csv";
        triggers += j.dump() + "\n";
    }
    io::write_text(out / "triggers.jsonl", triggers);
    json th;
    th["provenance"] = provenance_json(cfg);
    th["calibration"] = {{"a_min_mm2", cfg.a_min_mm2}, {"a_max_mm2", cfg.a_max_mm2}};
    th["hysteresis"] = cfg.machine.hysteresis;
    th["dwell_ms"] = cfg.machine.dwell_s * 1e3;
    for (auto button : all_buttons) {
        th["thresholds_mm2"][std::string(to_string(button))] = thresholds.at(button);
        th["mean_forces_N"][std::string(to_string(button))] = forces[index_of(button)];
    }
    th["events"] = summary.events.size();
    io::write_text(out / "summary.json", th.dump(2) + "\n");
    return summary;
}

// ---- eval --------------------------------------------------------------------------

EvalSummary cmd_eval(const ProjectConfig& cfg) {
    if (cfg.confusion.empty() && cfg.ratings.empty()) {
        throw InvalidParameter("config: nothing to evaluate (paths.confusion and paths.ratings are empty)");
    }
    using namespace evaluation;
    const fs::path out = cfg.out("eval");
    const auto prov = provenance(cfg);

    std::vector<std::pair<std::string, MetricsReport>> conditions;
    for (const auto& [name, path] : cfg.confusion) {
        const fs::path p = cfg.resolve(path);
        require_exists(p, "confusion matrix '" + name + "'");
        conditions.emplace_back(name, metrics(read_confusion_csv(p)));
    }
    const auto chance_cm = simulate_chance(cfg.chance_trials, cfg.seed);
    io::write_text(out / "chance_confusion.csv", prov.comment_line() + "\n" + format_confusion_csv(chance_cm));

    json report = json::parse(report_json(conditions));
    json full;
    full["provenance"] = provenance_json(cfg);
    full["conditions"] = std::move(report);
    json deltas = json::array();
    for (std::size_t i = 1; i < conditions.size(); ++i) {
        const auto d = improvement(conditions[i - 1].second, conditions[i].second);
        json entry;
        entry["from"] = conditions[i - 1].first;
        entry["to"] = conditions[i].first;
        for (auto b : all_buttons) {
            const auto k = index_of(b);
            entry["accuracy_points"][std::string(to_string(b))] = d.accuracy[k];
            entry["precision_points"][std::string(to_string(b))] = d.precision[k] ? json(*d.precision[k]) : json(nullptr);
            entry["sensitivity_points"][std::string(to_string(b))] =
                d.sensitivity[k] ? json(*d.sensitivity[k]) : json(nullptr);
        }
        deltas.push_back(std::move(entry));
    }
    full["improvements"] = std::move(deltas);
    const auto chance = metrics(chance_cm);
    json chance_j;
    chance_j["trials_per_button"] = cfg.chance_trials;
    chance_j["seed"] = cfg.seed;
    for (auto b : all_buttons) chance_j["sensitivity"][std::string(to_string(b))] = *chance.at(b).sensitivity;
    full["chance"] = std::move(chance_j);

    if (!cfg.ratings.empty()) {
        const fs::path p = cfg.resolve(cfg.ratings);
        require_exists(p, "ratings table");
        const auto table = read_ratings_csv(p);
        const auto normalized = normalize_ratings(table);
        io::write_text(out / "ratings_normalized.csv", prov.comment_line() + "\n" + format_ratings_csv(normalized));
        std::vector<double> all;
        for (const auto& row : table.ratings) all.insert(all.end(), row.begin(), row.end());
        json r;
        r["grand_geometric_mean"] = geometric_mean(all);
        for (std::size_t i = 0; i < table.participants.size(); ++i) {
            r["factors"][table.participants[i]] = geometric_mean(all) / geometric_mean(table.ratings[i]);
        }
        full["ratings"] = std::move(r);
    }
    io::write_text(out / "report.json", full.dump(2) + "\n");

    EvalSummary summary;
    if (!conditions.empty()) summary.table = format_metrics_table(conditions);
    io::write_text(out / "table.txt", prov.comment_line() + "\n" + summary.table);
    return summary;
}

void cmd_pipeline(const ProjectConfig& cfg) {
    cmd_ingest(cfg);
    cmd_represent(cfg);
    cmd_render(cfg);
    cmd_activate(cfg);
    cmd_eval(cfg);
}

// ---- fixture -----------------------------------------------------------------------

fs::path make_fixture(const fs::path& dir, const FixtureOptions& opts) {
    fixtures::write_sessions(dir / "sessions", opts.participants, opts.trials_per_button, opts.seed);
    io::write_text(dir / "plate_frf.csv",
                   artifacts::format_frf_csv(fixtures::plate_displacement_frf(fixtures::PlateModel{}, 10, 625, 1)));

    // Camera-rate contact area: three presses of rising depth with small jitter.
    std::mt19937_64 rng(opts.seed ^ 0x5eedULL);
    std::string area = "t,area_mm2\n";
    const double rate = 60.0;
    const std::array<double, 3> peaks{80.0, 125.0, 170.0};
    std::size_t k = 0;
    auto emit = [&](double v) {
        area += io::format_double(static_cast<double>(k) / rate) + "," +
                io::format_double(std::max(0.0, v + 3.0 * (unit_uniform(rng) - 0.5))) + "\n";
        ++k;
    };
    for (double peak : peaks) {
        for (int i = 0; i < 20; ++i) emit(10.0);
        for (int i = 0; i <= 30; ++i) emit(10.0 + (peak - 10.0) * i / 30.0);
        for (int i = 0; i < 20; ++i) emit(peak);
        for (int i = 30; i >= 0; --i) emit(10.0 + (peak - 10.0) * i / 30.0);
    }
    io::write_text(dir / "area_stream.csv", area);

    // Matrices consistent with the reference Group-I sensitivity and precision.
    evaluation::ConfusionMatrix day1, day2;
    day1.counts = {{{75, 10, 15}, {23, 67, 10}, {4, 28, 68}}};
    day2.counts = {{{92, 1, 7}, {5, 83, 12}, {5, 16, 79}}};
    io::write_text(dir / "confusion_day1.csv", evaluation::format_confusion_csv(day1));
    io::write_text(dir / "confusion_day2.csv", evaluation::format_confusion_csv(day2));

    evaluation::RatingTable ratings;
    ratings.items = {"Latch:soft-hard", "Toggle:soft-hard", "Push:soft-hard"};
    for (int p = 1; p <= opts.participants; ++p) {
        char id[16];
        std::snprintf(id, sizeof id, "P%02d", p);
        ratings.participants.emplace_back(id);
        std::vector<double> row;
        for (std::size_t i = 0; i < ratings.items.size(); ++i) {
            row.push_back(std::round(1.0 + 99.0 * unit_uniform(rng)));
        }
        ratings.ratings.push_back(std::move(row));
    }
    io::write_text(dir / "ratings.csv", evaluation::format_ratings_csv(ratings));

    ProjectConfig cfg;
    cfg.sessions_root = "sessions";
    cfg.frf = "plate_frf.csv";
    cfg.area_stream = "area_stream.csv";
    cfg.confusion = {{"Day-I", "confusion_day1.csv"}, {"Day-II", "confusion_day2.csv"}};
    cfg.ratings = "ratings.csv";
    cfg.out_dir = "out";
    cfg.seed = opts.seed;
    const fs::path config_path = dir / "config.json";
    io::write_text(config_path, cfg.to_json());
    return config_path;
}

}  // namespace hapbutton::pipeline
