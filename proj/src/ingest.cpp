#include "hapbutton/ingest.hpp"

#include "hapbutton/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace hapbutton {

std::string_view to_string(ButtonType button) {
    switch (button) {
        case ButtonType::Latch: return "Latch";
        case ButtonType::Toggle: return "Toggle";
        case ButtonType::Push: return "Push";
    }
    return "Latch";
}

ButtonType button_from_string(std::string_view name) {
    for (auto b : all_buttons) {
        if (to_string(b) == name) return b;
    }
    throw InvalidInput("unknown button type '" + std::string(name) + "'");
}

}  // namespace hapbutton

namespace hapbutton::ingest {

namespace {

using json = nlohmann::ordered_json;

constexpr std::array<const char*, 3> axis_names{"ax", "ay", "az"};
constexpr std::array<const char*, 6> trial_columns{"t", "ax", "ay", "az", "f", "v"};

struct Units {
    std::string acceleration = "m/s2";
    std::string force = "N";
    std::string voltage = "V";
};

std::size_t axis_index(const std::string& name) {
    for (std::size_t k = 0; k < axis_names.size(); ++k) {
        if (name == axis_names[k]) return k;
    }
    throw InvalidInput("manifest: vertical_axis must be one of ax, ay, az; got '" + name + "'");
}

json load_manifest(const std::filesystem::path& dir) {
    const auto path = dir / "manifest.json";
    try {
        return json::parse(io::read_text(path));
    } catch (const json::exception& e) {
        throw InvalidInput(path.string() + ": " + e.what());
    }
}

TrialRecording parse_trial(const std::filesystem::path& file, int index, const std::string& participant,
                           ButtonType button, double rate, std::size_t vertical) {
    if (!std::filesystem::exists(file)) {
        throw TrialError(index, "missing file '" + file.string() + "'");
    }
    io::CsvTable table;
    try {
        table = io::read_csv(file);
    } catch (const InvalidInput& e) {
        throw TrialError(index, e.what());
    }
    if (table.header.size() != trial_columns.size() ||
        !std::equal(table.header.begin(), table.header.end(), trial_columns.begin())) {
        throw TrialError(index, file.filename().string() + ": header must be t,ax,ay,az,f,v");
    }
    if (table.rows.empty()) throw TrialError(index, file.filename().string() + ": no samples");

    const std::size_t n = table.rows.size();
    const double t0 = table.rows.front()[0];
    std::array<std::vector<double>, 6> cols;
    for (auto& c : cols) c.reserve(n);
    for (std::size_t r = 0; r < n; ++r) {
        const double expected_t = t0 + static_cast<double>(r) / rate;
        if (std::abs(table.rows[r][0] - expected_t) > 0.5 / rate) {
            throw TrialError(index, file.filename().string() + " row " + std::to_string(r + 2) +
                                        ": time column disagrees with manifest rate " +
                                        io::format_double(rate) + " Hz");
        }
        for (std::size_t c = 0; c < cols.size(); ++c) cols[c].push_back(table.rows[r][c]);
    }
    return TrialRecording{
        {TimeSeries(std::move(cols[1]), rate, Unit::acceleration_m_s2, t0),
         TimeSeries(std::move(cols[2]), rate, Unit::acceleration_m_s2, t0),
         TimeSeries(std::move(cols[3]), rate, Unit::acceleration_m_s2, t0)},
        vertical,
        TimeSeries(std::move(cols[4]), rate, Unit::force_N, t0),
        TimeSeries(std::move(cols[5]), rate, Unit::voltage_V, t0),
        participant,
        button,
        index};
}

std::string trial_file_name(int index) {
    std::string digits = std::to_string(index);
    while (digits.size() < 3) digits.insert(digits.begin(), '0');
    return "trial_" + digits + ".csv";
}

}  // namespace

std::vector<TrialRecording> parse_session(const std::filesystem::path& dir) {
    const json manifest = load_manifest(dir);
    std::string participant;
    ButtonType button{};
    double rate = 0.0;
    std::size_t vertical = 2;
    std::vector<std::string> files;
    try {
        participant = manifest.at("participant").get<std::string>();
        button = button_from_string(manifest.at("button").get<std::string>());
        rate = manifest.at("rate_hz").get<double>();
        vertical = axis_index(manifest.value("vertical_axis", std::string("az")));
        files = manifest.at("files").get<std::vector<std::string>>();
        if (manifest.contains("units")) {
            const Units want;
            const auto& u = manifest.at("units");
            if (u.value("acceleration", want.acceleration) != want.acceleration ||
                u.value("force", want.force) != want.force ||
                u.value("voltage", want.voltage) != want.voltage) {
                throw InvalidInput("manifest: unit mismatch; expected acceleration m/s2, force N, voltage V");
            }
        }
    } catch (const json::exception& e) {
        throw InvalidInput((dir / "manifest.json").string() + ": " + e.what());
    }
    if (!(rate > 0.0)) throw InvalidInput("manifest: rate_hz must be positive");

    std::vector<TrialRecording> trials;
    trials.reserve(files.size());
    for (std::size_t k = 0; k < files.size(); ++k) {
        trials.push_back(parse_trial(dir / files[k], static_cast<int>(k), participant, button, rate,
                                     vertical));
    }
    return trials;
}

void write_session(const std::filesystem::path& dir, const std::vector<TrialRecording>& trials) {
    if (trials.empty()) throw InvalidInput("cannot write an empty session");
    const auto& first = trials.front();
    json manifest;
    manifest["participant"] = first.participant_id;
    manifest["button"] = std::string(to_string(first.button_type));
    manifest["rate_hz"] = first.sample_rate_hz();
    manifest["vertical_axis"] = axis_names[first.vertical_axis];
    const Units units;
    manifest["units"] = {{"acceleration", units.acceleration},
                         {"force", units.force},
                         {"voltage", units.voltage}};
    std::vector<std::string> files;
    for (const auto& trial : trials) {
        if (trial.participant_id != first.participant_id || trial.button_type != first.button_type) {
            throw InvalidInput("a session holds one participant and one button");
        }
        const auto name = trial_file_name(trial.trial_index);
        files.push_back(name);
        std::string text = "t,ax,ay,az,f,v\n";
        for (std::size_t r = 0; r < trial.size(); ++r) {
            text += io::format_double(trial.force.time_at(r));
            for (const auto& axis : trial.acceleration_axes) {
                text += ',' + io::format_double(axis[r]);
            }
            text += ',' + io::format_double(trial.force[r]);
            text += ',' + io::format_double(trial.activation_voltage[r]);
            text += '\n';
        }
        io::write_text(dir / name, text);
    }
    manifest["files"] = files;
    io::write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

// ---- activation detection ---------------------------------------------------

std::vector<Transition> detect_transitions(const TimeSeries& voltage, const ActivationOptions& opts) {
    const auto v = voltage.samples();
    const double lo = percentile(v, 5.0);
    const double hi = percentile(v, 95.0);
    const double range = hi - lo;

    // Robust noise scale from first differences (MAD, Gaussian-consistent).
    std::vector<double> diffs;
    diffs.reserve(v.size());
    for (std::size_t k = 1; k < v.size(); ++k) diffs.push_back(std::abs(v[k] - v[k - 1]));
    const double sigma = diffs.empty() ? 0.0 : percentile(diffs, 50.0) / (0.6745 * std::sqrt(2.0));
    const double scale = std::max({std::abs(lo), std::abs(hi), range});
    if (!(range > opts.min_range_sigmas * sigma) || !(range > 1e-12 * scale) || range == 0.0) {
        throw InvalidInput("activation voltage is flat; no activation step found");
    }

    const double mid = 0.5 * (lo + hi);
    std::vector<Transition> raw;
    bool above = v[0] >= mid;
    for (std::size_t k = 1; k < v.size(); ++k) {
        const bool now = v[k] >= mid;
        if (now != above) raw.push_back({k, now});
        above = now;
    }

    // Crossings closer than the debounce interval form one group. A group
    // whose net effect leaves the level unchanged is a glitch.
    const auto gap = static_cast<std::size_t>(std::llround(opts.debounce_ms * 1e-3 * voltage.sample_rate_hz()));
    std::vector<Transition> out;
    std::size_t g = 0;
    while (g < raw.size()) {
        std::size_t end = g + 1;
        while (end < raw.size() && raw[end].index - raw[end - 1].index < gap) ++end;
        const bool before = !raw[g].rising;
        const bool after = raw[end - 1].rising;
        if (before != after) out.push_back(raw[g]);
        g = end;
    }
    return out;
}

std::vector<std::size_t> detect_activation(const TimeSeries& voltage, ButtonType button,
                                           const ActivationOptions& opts) {
    std::vector<std::size_t> out;
    for (const auto& t : detect_transitions(voltage, opts)) {
        if (t.rising || is_momentary(button)) out.push_back(t.index);
    }
    return out;
}

// ---- buckling extraction ------------------------------------------------------

BucklingExtraction extract_buckling(const TrialRecording& trial, std::size_t activation_index,
                                    const ExtractOptions& opts) {
    const double rate = trial.sample_rate_hz();
    const auto pre = static_cast<std::size_t>(std::llround(opts.pre_ms * 1e-3 * rate));
    const auto post = static_cast<std::size_t>(std::llround(opts.post_ms * 1e-3 * rate));
    if (activation_index >= trial.size() || activation_index < pre ||
        activation_index + post >= trial.size()) {
        throw InvalidParameter("buckling window [" + io::format_double(-opts.pre_ms) + ", +" +
                               io::format_double(opts.post_ms) + "] ms around sample " +
                               std::to_string(activation_index) + " leaves the recording of " +
                               std::to_string(trial.size()) + " samples");
    }
    const IndexRange window{activation_index - pre, activation_index + post};

    const auto filtered = highpass_filter(trial.acceleration(), opts.highpass_hz, opts.highpass_order);
    const auto fw = filtered.slice(window.first, window.last + 1);

    const auto noise_len = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(opts.noise_ms * 1e-3 * rate)), 2, fw.size());
    const auto noise = fw.samples().subspan(0, noise_len);
    const double threshold = opts.onset_sigmas * sample_stddev(noise);

    std::optional<std::size_t> onset;
    for (std::size_t k = 0; k < fw.size(); ++k) {
        if (std::abs(fw[k]) > threshold) {
            onset = window.first + k;
            break;
        }
    }
    if (!onset) throw InvalidInput("no acceleration burst above the onset threshold in the window");

    return {BucklingEvent{*onset, window, activation_index,
                          std::max(0.0, trial.force[activation_index])},
            fw};
}

// ---- force statistics -------------------------------------------------------

namespace {

ForceStat summarize(const std::vector<double>& forces) {
    return {mean(forces), sample_stddev(forces), forces.size()};
}

}  // namespace

ForceStatistics force_statistics(const std::vector<LabeledEvent>& events) {
    if (events.empty()) throw InvalidInput("force statistics need at least one event");
    std::map<std::pair<std::string, ButtonType>, std::vector<double>> by_participant;
    std::map<ButtonType, std::vector<double>> by_button;
    for (const auto& e : events) {
        by_participant[{e.participant_id, e.button_type}].push_back(e.event.activation_force_N);
        by_button[e.button_type].push_back(e.event.activation_force_N);
    }
    ForceStatistics out;
    for (const auto& [key, forces] : by_participant) out.per_participant[key] = summarize(forces);
    for (const auto& [key, forces] : by_button) out.pooled[key] = summarize(forces);
    return out;
}

}  // namespace hapbutton::ingest
