#pragma once

#include "hapbutton/button.hpp"
#include "hapbutton/error.hpp"
#include "hapbutton/signal.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hapbutton::ingest {

/// One press of one button by one participant, all channels at a common rate.
struct TrialRecording {
    std::array<TimeSeries, 3> acceleration_axes;  // ax, ay, az in m/s^2
    std::size_t vertical_axis = 2;
    TimeSeries force;               // N
    TimeSeries activation_voltage;  // V
    std::string participant_id;
    ButtonType button_type = ButtonType::Latch;
    int trial_index = 0;

    [[nodiscard]] const TimeSeries& acceleration() const { return acceleration_axes[vertical_axis]; }
    [[nodiscard]] double sample_rate_hz() const { return force.sample_rate_hz(); }
    [[nodiscard]] std::size_t size() const { return force.size(); }
};

/// Session parsing failure tied to a particular trial.
class TrialError : public InvalidInput {
public:
    TrialError(int trial_index, const std::string& what)
        : InvalidInput("trial " + std::to_string(trial_index) + ": " + what),
          trial_index_(trial_index) {}
    [[nodiscard]] int trial_index() const noexcept { return trial_index_; }

private:
    int trial_index_;
};

/// Session directory: manifest.json plus one `t,ax,ay,az,f,v` CSV per trial.
std::vector<TrialRecording> parse_session(const std::filesystem::path& dir);

/// Writes the canonical form that parse_session reads back.
void write_session(const std::filesystem::path& dir, const std::vector<TrialRecording>& trials);

struct Transition {
    std::size_t index;
    bool rising;
};

struct ActivationOptions {
    double debounce_ms = 20.0;
    /// Plateau range must exceed this many robust noise deviations.
    double min_range_sigmas = 8.0;
};

/// Midpoint crossings of the [5th, 95th] percentile range, debounced.
std::vector<Transition> detect_transitions(const TimeSeries& voltage,
                                           const ActivationOptions& opts = {});

/// Activation instants: rising edges for maintained buttons, rising and
/// falling edges for the momentary Push button.
std::vector<std::size_t> detect_activation(const TimeSeries& voltage,
                                           ButtonType button = ButtonType::Latch,
                                           const ActivationOptions& opts = {});

struct IndexRange {
    std::size_t first;
    std::size_t last;  // inclusive
    [[nodiscard]] bool contains(std::size_t k) const { return k >= first && k <= last; }
    [[nodiscard]] std::size_t length() const { return last - first + 1; }
};

struct BucklingEvent {
    std::size_t onset_index;
    IndexRange window;
    std::size_t activation_index;
    double activation_force_N;
};

struct ExtractOptions {
    double pre_ms = 50.0;
    double post_ms = 200.0;
    double highpass_hz = 10.0;
    int highpass_order = 4;
    double onset_sigmas = 5.0;
    double noise_ms = 20.0;
};

struct BucklingExtraction {
    BucklingEvent event;
    TimeSeries filtered_window;  // highpassed vertical acceleration over the window
};

BucklingExtraction extract_buckling(const TrialRecording& trial, std::size_t activation_index,
                                    const ExtractOptions& opts = {});

struct LabeledEvent {
    std::string participant_id;
    ButtonType button_type;
    int trial_index;
    BucklingEvent event;
};

struct ForceStat {
    double mean_N;
    double std_N;  // sample standard deviation
    std::size_t count;
};

struct ForceStatistics {
    std::map<std::pair<std::string, ButtonType>, ForceStat> per_participant;
    std::map<ButtonType, ForceStat> pooled;
};

ForceStatistics force_statistics(const std::vector<LabeledEvent>& events);

}  // namespace hapbutton::ingest
