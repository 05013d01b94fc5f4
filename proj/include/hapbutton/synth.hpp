#pragma once

#include "hapbutton/signal.hpp"

#include <cstdint>
#include <filesystem>

namespace hapbutton::synth {

struct SynthConfig {
    double carrier_hz = 263.5;
    double output_rate_hz = 5000.0;

    /// Throws InvalidParameter unless 0 < carrier < output_rate / 2.
    void validate() const;
};

/// Amplitude-modulates the envelope onto sin(2 pi f_c t), t = 0 at the first
/// sample. The envelope is linearly resampled when its rate differs.
TimeSeries modulate(const TimeSeries& envelope, const SynthConfig& cfg = {});

/// Inverse of modulate for slowly varying envelopes: full-wave rectify,
/// zero-phase lowpass at f_c/4, undo the 2/pi rectifier mean.
TimeSeries recover_envelope(const TimeSeries& modulated, double carrier_hz);

/// RMS of (estimate - reference) over RMS of reference.
double nrmse(std::span<const double> reference, std::span<const double> estimate);

/// Smallest B such that [0, B] holds `fraction` of the signal's power.
double occupied_bandwidth_hz(const TimeSeries& x, double fraction = 0.95);

/// 16-bit PCM mono WAV. Samples are divided by full_scale (peak |x| when 0)
/// and clipped to [-1, 1].
void write_wav(const std::filesystem::path& path, const TimeSeries& x, double full_scale = 0.0);

}  // namespace hapbutton::synth
