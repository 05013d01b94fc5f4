#pragma once

#include "hapbutton/button.hpp"
#include "hapbutton/signal.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hapbutton::activation {

struct CalibrationProfile {
    double a_min_mm2;
    double a_max_mm2;
    std::string participant_id;

    /// Throws InvalidParameter unless 0 < a_min < a_max.
    void validate() const;
};

/// Mean contact area of the light and firm calibration presses.
CalibrationProfile calibrate(std::span<const double> light_presses_mm2, std::span<const double> firm_presses_mm2,
                             std::string participant_id);

struct ActivationThresholds {
    std::array<double, 3> threshold_mm2{};  // indexed by index_of(ButtonType)

    [[nodiscard]] double at(ButtonType button) const { return threshold_mm2[index_of(button)]; }
};

/// Linear force-to-area map: the lightest button lands on a_min, the
/// heaviest on a_max. Forces are indexed by index_of(ButtonType).
ActivationThresholds thresholds_from_forces(const CalibrationProfile& cal, const std::array<double, 3>& mean_forces_N);

enum class EventKind { press, release };

std::string_view to_string(EventKind kind);

struct ActivationEvent {
    ButtonType button;
    EventKind kind;
    /// Stream sample at which playback of the rendered waveform starts.
    std::size_t sample_index;
    double t_s;

    bool operator==(const ActivationEvent&) const = default;
};

struct MachineOptions {
    /// Release once the area falls below hysteresis * threshold.
    double hysteresis = 0.8;
    /// Area must stay at or above threshold this long before a press fires.
    double dwell_s = 0.0;

    void validate() const;
};

class ActivationMachine {
public:
    ActivationMachine(ButtonType button, double threshold_mm2, MachineOptions opts = {});

    /// Feeds one area sample; samples must arrive in time order.
    std::optional<ActivationEvent> step(std::size_t sample_index, double t_s, double area_mm2);

    [[nodiscard]] bool held() const noexcept { return state_ == State::held; }
    [[nodiscard]] ButtonType button() const noexcept { return button_; }
    [[nodiscard]] double threshold_mm2() const noexcept { return threshold_; }
    [[nodiscard]] double release_mm2() const noexcept { return threshold_ * opts_.hysteresis; }

private:
    enum class State { idle, arming, held };

    ButtonType button_;
    double threshold_;
    MachineOptions opts_;
    State state_ = State::idle;
    double armed_at_s_ = 0.0;
    std::optional<double> last_t_;
};

std::vector<ActivationEvent> run_stream(ButtonType button, const TimeSeries& area_stream,
                                        const ActivationThresholds& thresholds, const MachineOptions& opts = {});

/// CSV with columns t,area_mm2 on a uniform frame grid; nullopt when the file
/// has a header but no samples.
std::optional<TimeSeries> read_area_stream(const std::filesystem::path& path);
std::optional<TimeSeries> parse_area_stream(std::string_view text, std::string_view source);
std::string format_area_stream(const TimeSeries& stream);

/// One JSON object per line: {"t":..,"button":..,"kind":..,"sample":..}.
std::string events_to_jsonl(std::span<const ActivationEvent> events);

}  // namespace hapbutton::activation
