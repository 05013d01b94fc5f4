#include "hapbutton/synth.hpp"

#include "hapbutton/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

namespace hapbutton::synth {

namespace {
constexpr double pi = std::numbers::pi;
}

void SynthConfig::validate() const {
    if (!(output_rate_hz > 0.0)) throw InvalidParameter("output rate must be positive");
    if (!(carrier_hz > 0.0) || !(carrier_hz < output_rate_hz / 2.0)) {
        throw InvalidParameter("carrier " + std::to_string(carrier_hz) +
                               " Hz must lie below Nyquist (" + std::to_string(output_rate_hz / 2.0) +
                               " Hz)");
    }
}

TimeSeries modulate(const TimeSeries& envelope, const SynthConfig& cfg) {
    cfg.validate();
    const auto env = resample_linear(envelope, cfg.output_rate_hz);
    std::vector<double> out(env.size());
    const double w = 2.0 * pi * cfg.carrier_hz / cfg.output_rate_hz;
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = env[k] * std::sin(w * static_cast<double>(k));
    }
    return TimeSeries(std::move(out), cfg.output_rate_hz, envelope.unit(), envelope.t0_s());
}

TimeSeries recover_envelope(const TimeSeries& modulated, double carrier_hz) {
    std::vector<double> rect(modulated.samples().begin(), modulated.samples().end());
    for (double& v : rect) v = std::abs(v) * (pi / 2.0);
    return lowpass_filter(modulated.with_samples(std::move(rect)), carrier_hz / 4.0, 4);
}

double nrmse(std::span<const double> reference, std::span<const double> estimate) {
    if (reference.size() != estimate.size()) throw InvalidInput("NRMSE needs equal-length signals");
    const double ref = rms(reference);
    if (ref == 0.0) throw InvalidInput("NRMSE reference is identically zero");
    double acc = 0.0;
    for (std::size_t k = 0; k < reference.size(); ++k) {
        const double d = estimate[k] - reference[k];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(reference.size())) / ref;
}

double occupied_bandwidth_hz(const TimeSeries& x, double fraction) {
    const auto spec = power_spectral_density(x);
    const double total = spec.total_power();
    if (total == 0.0) return 0.0;
    double acc = 0.0;
    for (std::size_t k = 0; k < spec.power.size(); ++k) {
        acc += spec.power[k] * spec.bin_width_hz();
        if (acc >= fraction * total) return spec.frequencies_hz[k];
    }
    return spec.frequencies_hz.back();
}

namespace {

void put_u32(std::ofstream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u16(std::ofstream& out, std::uint16_t v) {
    const unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
    out.write(reinterpret_cast<const char*>(b), 2);
}

}  // namespace

void write_wav(const std::filesystem::path& path, const TimeSeries& x, double full_scale) {
    double scale = full_scale;
    if (scale <= 0.0) {
        for (double v : x.samples()) scale = std::max(scale, std::abs(v));
        if (scale == 0.0) scale = 1.0;
    }
    const double rate = std::round(x.sample_rate_hz());
    if (rate < 1.0 || rate > 4294967295.0) throw InvalidParameter("WAV rate out of range");
    const auto rate_u = static_cast<std::uint32_t>(rate);
    const auto data_bytes = static_cast<std::uint32_t>(x.size() * 2);

    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write("RIFF", 4);
    put_u32(out, 36 + data_bytes);
    out.write("WAVEfmt ", 8);
    put_u32(out, 16);
    put_u16(out, 1);  // PCM
    put_u16(out, 1);  // mono
    put_u32(out, rate_u);
    put_u32(out, rate_u * 2);
    put_u16(out, 2);
    put_u16(out, 16);
    out.write("data", 4);
    put_u32(out, data_bytes);
    for (double v : x.samples()) {
        const double s = std::clamp(v / scale, -1.0, 1.0);
        put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::lround(s * 32767.0))));
    }
    if (!out) throw InvalidInput("cannot write '" + path.string() + "'");
}

}  // namespace hapbutton::synth
