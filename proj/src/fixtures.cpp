#include "hapbutton/fixtures.hpp"

#include "hapbutton/error.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace hapbutton::fixtures {

namespace {

constexpr double pi = std::numbers::pi;

double decaying(double t, double freq, double tau, double amp) {
    if (t < 0.0) return 0.0;
    return amp * std::exp(-t / tau) * std::sin(2.0 * pi * freq * t);
}

// Portable normal deviates; std::normal_distribution differs across vendors.
class Noise {
public:
    explicit Noise(std::uint64_t seed) : rng_(seed) {}
    double uniform() { return (static_cast<double>(rng_() >> 11) + 0.5) * 0x1.0p-53; }
    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * pi * u2);
    }

private:
    std::mt19937_64 rng_;
};

std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t h = seed ^ 0x9e3779b97f4a7c15ULL;
    for (auto v : {a, b, c}) {
        h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        h *= 0xbf58476d1ce4e5b9ULL;
        h ^= h >> 31;
    }
    return h;
}

}  // namespace

double button_burst(ButtonType button, double t) {
    switch (button) {
        case ButtonType::Latch:
            // Two-stage click: the latch catches about 15 ms after the first snap.
            return decaying(t, 180.0, 0.012, 4.0) + decaying(t - 0.015, 220.0, 0.010, 3.0);
        case ButtonType::Toggle:
            return decaying(t, 320.0, 0.006, 5.0);
        case ButtonType::Push:
            return decaying(t, 120.0, 0.020, 2.5);
    }
    return 0.0;
}

double burst_lead_s(ButtonType button) {
    switch (button) {
        case ButtonType::Latch: return 0.002;
        case ButtonType::Toggle: return 0.010;
        case ButtonType::Push: return 0.006;
    }
    return 0.0;
}

double nominal_force_N(ButtonType button) {
    switch (button) {
        case ButtonType::Latch: return 4.2;
        case ButtonType::Toggle: return 1.6;
        case ButtonType::Push: return 2.8;
    }
    return 0.0;
}

ingest::TrialRecording make_trial(ButtonType button, int participant_number, int trial_index,
                                  std::uint64_t seed, const TrialShape& shape) {
    Noise noise(mix(seed, static_cast<std::uint64_t>(participant_number),
                    static_cast<std::uint64_t>(trial_index), index_of(button)));
    const double rate = shape.rate_hz;
    const auto n = static_cast<std::size_t>(std::llround(shape.duration_s * rate)) + 1;

    const double jitter = 0.02 * (noise.uniform() - 0.5);
    const double t_act = shape.activation_s + jitter;
    const double t_burst = t_act - burst_lead_s(button);
    const double t_release = t_act + 0.3;
    const double participant_scale = 0.85 + 0.03 * (participant_number % 10);
    const double f_act = nominal_force_N(button) * participant_scale * (1.0 + 0.05 * noise.normal());
    const double gain = 1.0 + 0.1 * noise.normal();
    const double ramp = 0.15;

    std::array<std::vector<double>, 3> axes;
    for (auto& a : axes) a.resize(n);
    std::vector<double> force(n), volt(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) / rate;
        axes[0][k] = shape.noise_m_s2 * noise.normal();
        axes[1][k] = shape.noise_m_s2 * noise.normal();
        axes[2][k] = shape.gravity_m_s2 + gain * button_burst(button, t - t_burst) +
                     shape.noise_m_s2 * noise.normal();
        // Force rises linearly, reaching the activation force at the step.
        double f = 0.0;
        if (t > t_act - ramp) f = f_act * std::min(1.0, (t - (t_act - ramp)) / ramp);
        if (t > t_release) f = std::max(0.0, f_act * (1.0 - (t - t_release) / ramp));
        force[k] = f + 0.005 * noise.normal();
        const bool on = t >= t_act && (!is_momentary(button) || t < t_release);
        volt[k] = (on ? 5.0 : 0.0) + 0.01 * noise.normal();
    }

    std::string pid = std::to_string(participant_number);
    while (pid.size() < 2) pid.insert(pid.begin(), '0');
    return ingest::TrialRecording{
        {TimeSeries(std::move(axes[0]), rate, Unit::acceleration_m_s2),
         TimeSeries(std::move(axes[1]), rate, Unit::acceleration_m_s2),
         TimeSeries(std::move(axes[2]), rate, Unit::acceleration_m_s2)},
        2,
        TimeSeries(std::move(force), rate, Unit::force_N),
        TimeSeries(std::move(volt), rate, Unit::voltage_V),
        "P" + pid,
        button,
        trial_index};
}

std::vector<std::filesystem::path> write_sessions(const std::filesystem::path& root, int participants,
                                                  int trials_per_button, std::uint64_t seed,
                                                  const TrialShape& shape) {
    if (participants < 1 || trials_per_button < 1) {
        throw InvalidParameter("fixture needs at least one participant and one trial");
    }
    std::vector<std::filesystem::path> dirs;
    for (int p = 1; p <= participants; ++p) {
        for (auto button : all_buttons) {
            std::vector<ingest::TrialRecording> trials;
            for (int t = 0; t < trials_per_button; ++t) {
                trials.push_back(make_trial(button, p, t, seed, shape));
            }
            const auto dir = root / (trials.front().participant_id + "_" + std::string(to_string(button)));
            ingest::write_session(dir, trials);
            dirs.push_back(dir);
        }
    }
    return dirs;
}

FrequencyResponse plate_displacement_frf(const PlateModel& plate, double f_lo, double f_hi, double df) {
    if (!(df > 0.0) || !(f_hi > f_lo) || f_lo < 0.0) {
        throw InvalidParameter("frequency grid needs 0 <= f_lo < f_hi and df > 0");
    }
    const double w0 = 2.0 * pi * plate.resonance_hz;
    FrequencyResponse h;
    h.quantity = FrfQuantity::displacement_per_volt;
    const auto count = static_cast<std::size_t>(std::floor((f_hi - f_lo) / df + 1e-9)) + 1;
    for (std::size_t k = 0; k < count; ++k) {
        const double f = f_lo + static_cast<double>(k) * df;
        const std::complex<double> s(0.0, 2.0 * pi * f);
        h.frequencies_hz.push_back(f);
        h.values.push_back(plate.static_compliance * w0 * w0 / (s * s + (w0 / plate.quality) * s + w0 * w0));
    }
    return h;
}

}  // namespace hapbutton::fixtures
