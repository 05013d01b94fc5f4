#include "hapbutton/activation.hpp"

#include "hapbutton/error.hpp"
#include "hapbutton/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace hapbutton::activation {

void CalibrationProfile::validate() const {
    if (!(a_min_mm2 > 0.0) || !(a_max_mm2 > a_min_mm2) || !std::isfinite(a_max_mm2)) {
        throw InvalidParameter("calibration needs 0 < a_min < a_max (got " + io::format_double(a_min_mm2) + ", " +
                               io::format_double(a_max_mm2) + ")");
    }
}

CalibrationProfile calibrate(std::span<const double> light_presses_mm2, std::span<const double> firm_presses_mm2,
                             std::string participant_id) {
    if (light_presses_mm2.empty() || firm_presses_mm2.empty()) {
        throw InvalidInput("calibration needs at least one press per condition");
    }
    CalibrationProfile cal{mean(light_presses_mm2), mean(firm_presses_mm2), std::move(participant_id)};
    cal.validate();
    return cal;
}

ActivationThresholds thresholds_from_forces(const CalibrationProfile& cal, const std::array<double, 3>& mean_forces_N) {
    cal.validate();
    for (double f : mean_forces_N) {
        if (!(f > 0.0) || !std::isfinite(f)) throw InvalidParameter("mean activation forces must be positive");
    }
    const auto [lo, hi] = std::minmax_element(mean_forces_N.begin(), mean_forces_N.end());
    const double f_min = *lo, f_max = *hi;
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = i + 1; j < 3; ++j) {
            if (mean_forces_N[i] == mean_forces_N[j]) {
                throw InvalidParameter("mean activation forces must be distinct");
            }
        }
    }
    ActivationThresholds out;
    for (std::size_t b = 0; b < 3; ++b) {
        out.threshold_mm2[b] =
            cal.a_min_mm2 + (cal.a_max_mm2 - cal.a_min_mm2) * (mean_forces_N[b] - f_min) / (f_max - f_min);
    }
    return out;
}

std::string_view to_string(EventKind kind) { return kind == EventKind::press ? "press" : "release"; }

void MachineOptions::validate() const {
    if (!(hysteresis > 0.0) || !(hysteresis <= 1.0)) throw InvalidParameter("hysteresis must lie in (0, 1]");
    if (!(dwell_s >= 0.0) || !std::isfinite(dwell_s)) throw InvalidParameter("dwell must be non-negative");
}

ActivationMachine::ActivationMachine(ButtonType button, double threshold_mm2, MachineOptions opts)
    : button_(button), threshold_(threshold_mm2), opts_(opts) {
    opts_.validate();
    if (!(threshold_mm2 > 0.0) || !std::isfinite(threshold_mm2)) {
        throw InvalidParameter("activation threshold must be positive");
    }
}

std::optional<ActivationEvent> ActivationMachine::step(std::size_t sample_index, double t_s, double area_mm2) {
    if (!(area_mm2 >= 0.0) || !std::isfinite(area_mm2)) {
        throw InvalidInput("contact area must be non-negative (sample " + std::to_string(sample_index) + ")");
    }
    if (last_t_ && t_s < *last_t_) throw InvalidInput("area samples out of time order");
    last_t_ = t_s;

    switch (state_) {
    case State::idle:
        if (area_mm2 < threshold_) return std::nullopt;
        state_ = State::arming;
        armed_at_s_ = t_s;
        [[fallthrough]];
    case State::arming:
        if (area_mm2 < threshold_) {
            state_ = State::idle;
            return std::nullopt;
        }
        if (t_s - armed_at_s_ < opts_.dwell_s) return std::nullopt;
        state_ = State::held;
        return ActivationEvent{button_, EventKind::press, sample_index, t_s};
    case State::held:
        if (area_mm2 >= release_mm2()) return std::nullopt;
        state_ = State::idle;
        if (is_momentary(button_)) return ActivationEvent{button_, EventKind::release, sample_index, t_s};
        return std::nullopt;
    }
    return std::nullopt;
}

std::vector<ActivationEvent> run_stream(ButtonType button, const TimeSeries& area_stream,
                                        const ActivationThresholds& thresholds, const MachineOptions& opts) {
    ActivationMachine machine(button, thresholds.at(button), opts);
    std::vector<ActivationEvent> events;
    for (std::size_t k = 0; k < area_stream.size(); ++k) {
        if (auto e = machine.step(k, area_stream.time_at(k), area_stream[k])) events.push_back(*e);
    }
    return events;
}

std::optional<TimeSeries> parse_area_stream(std::string_view text, std::string_view source) {
    const auto table = io::parse_csv(text, source);
    const std::size_t t_col = table.column("t");
    const std::size_t a_col = table.column("area_mm2");
    const std::size_t n = table.rows.size();
    if (n == 0) return std::nullopt;
    if (n == 1) throw InvalidInput(std::string(source) + ": one sample does not define a frame rate");
    const double t0 = table.rows.front()[t_col];
    const double span = table.rows.back()[t_col] - t0;
    if (!(span > 0.0)) throw InvalidInput(std::string(source) + ": time column must increase");
    const double rate = static_cast<double>(n - 1) / span;
    std::vector<double> area;
    area.reserve(n);
    for (std::size_t r = 0; r < n; ++r) {
        const double expected = t0 + static_cast<double>(r) / rate;
        if (std::abs(table.rows[r][t_col] - expected) > 0.25 / rate) {
            throw InvalidInput(std::string(source) + ": sample " + std::to_string(r + 1) +
                               " is off the uniform frame grid");
        }
        const double a = table.rows[r][a_col];
        if (!(a >= 0.0)) throw InvalidInput(std::string(source) + ": negative area at sample " + std::to_string(r + 1));
        area.push_back(a);
    }
    return TimeSeries(std::move(area), rate, Unit::area_mm2, t0);
}

std::optional<TimeSeries> read_area_stream(const std::filesystem::path& path) {
    return parse_area_stream(io::read_text(path), path.string());
}

std::string format_area_stream(const TimeSeries& stream) {
    std::string out = "t,area_mm2\n";
    for (std::size_t k = 0; k < stream.size(); ++k) {
        out += io::format_double(stream.time_at(k));
        out += ',';
        out += io::format_double(stream[k]);
        out += '\n';
    }
    return out;
}

std::string events_to_jsonl(std::span<const ActivationEvent> events) {
    std::string out;
    for (const auto& e : events) {
        nlohmann::ordered_json j;
        j["t"] = e.t_s;
        j["button"] = std::string(to_string(e.button));
        j["kind"] = std::string(to_string(e.kind));
        j["sample"] = e.sample_index;
        out += j.dump();
        out += '\n';
    }
    return out;
}

}  // namespace hapbutton::activation
