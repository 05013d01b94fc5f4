#pragma once

// Synthetic recordings and plate responses. These stand in for the
// hardware-derived inputs so the whole toolchain can be exercised offline.

#include "hapbutton/button.hpp"
#include "hapbutton/ingest.hpp"
#include "hapbutton/signal.hpp"

#include <cstdint>
#include <filesystem>

namespace hapbutton::fixtures {

struct TrialShape {
    double rate_hz = 5000.0;
    double duration_s = 1.0;
    double activation_s = 0.5;
    double noise_m_s2 = 0.02;
    double gravity_m_s2 = 9.81;
};

/// Characteristic burst of each button, starting at t = 0.
double button_burst(ButtonType button, double t);
/// Seconds between burst start and the voltage step.
double burst_lead_s(ButtonType button);
/// Nominal activation force; Latch > Push > Toggle.
double nominal_force_N(ButtonType button);

/// One synthetic trial. Deterministic in (seed, participant_number, trial_index).
ingest::TrialRecording make_trial(ButtonType button, int participant_number, int trial_index,
                                  std::uint64_t seed, const TrialShape& shape = {});

/// Writes sessions/<participant>_<button>/ for every participant and button.
/// Returns the session directories in a stable order.
std::vector<std::filesystem::path> write_sessions(const std::filesystem::path& root, int participants,
                                                  int trials_per_button, std::uint64_t seed,
                                                  const TrialShape& shape = {});

struct PlateModel {
    double resonance_hz = 263.5;
    double quality = 30.0;
    double static_compliance = 1e-6;  // m/V at DC
};

/// Displacement/volt FRF of a single-mode plate, sampled on [f_lo, f_hi] with
/// step df. f_lo may be 0, in which case a DC bin is included.
FrequencyResponse plate_displacement_frf(const PlateModel& plate, double f_lo, double f_hi, double df);

}  // namespace hapbutton::fixtures
