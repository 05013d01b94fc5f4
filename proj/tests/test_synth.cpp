#include <doctest.h>

#include "hapbutton/error.hpp"
#include "hapbutton/io.hpp"
#include "hapbutton/synth.hpp"

#include "support/temp_dir.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace hapbutton;
using namespace hapbutton::synth;

namespace {

constexpr double pi = std::numbers::pi;

// Smooth positive envelope built from tones below 20 Hz.
TimeSeries slow_envelope(std::size_t n, double rate, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0, 1);
    const double f1 = 2 + 8 * u(rng), f2 = 5 + 12 * u(rng), p1 = 2 * pi * u(rng), p2 = 2 * pi * u(rng);
    std::vector<double> e(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = k / rate;
        e[k] = 2.0 + 0.8 * std::sin(2 * pi * f1 * t + p1) + 0.5 * std::sin(2 * pi * f2 * t + p2);
    }
    return TimeSeries(std::move(e), rate, Unit::acceleration_m_s2);
}

}  // namespace

TEST_CASE("modulate basic examples") {
    const TimeSeries zeros(std::vector<double>(1000, 0.0), 5000, Unit::acceleration_m_s2);
    const auto silent = modulate(zeros);
    for (double v : silent.samples()) CHECK(v == 0.0);

    const TimeSeries ones(std::vector<double>(5000, 1.0), 5000, Unit::acceleration_m_s2);
    const auto tone = modulate(ones);
    CHECK(tone.unit() == Unit::acceleration_m_s2);
    CHECK(tone[0] == 0.0);
    const auto spec = power_spectral_density(tone);
    CHECK(std::abs(spec.peak_frequency_hz() - 263.5) <= spec.bin_width_hz());
    for (std::size_t k = 0; k < 50; ++k) {
        CHECK(tone[k] == doctest::Approx(std::sin(2 * pi * 263.5 * k / 5000.0)));
    }
}

TEST_CASE("modulated output is bounded by the envelope and zero at t=0") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> nd(0, 3);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> e(777);
        for (double& v : e) v = nd(rng);
        const TimeSeries env(e, 5000, Unit::acceleration_m_s2);
        const auto out = modulate(env);
        CHECK(out[0] == 0.0);
        for (std::size_t k = 0; k < e.size(); ++k) CHECK(std::abs(out[k]) <= std::abs(e[k]));
    }
}

TEST_CASE("carrier must stay below Nyquist") {
    const TimeSeries env(std::vector<double>(10, 1.0), 5000);
    CHECK_THROWS_AS(modulate(env, {.carrier_hz = 2500, .output_rate_hz = 5000}), InvalidParameter);
    CHECK_THROWS_AS(modulate(env, {.carrier_hz = 300, .output_rate_hz = 500}), InvalidParameter);
}

TEST_CASE("envelope is resampled to the output rate") {
    const TimeSeries env(std::vector<double>(1001, 1.0), 2500, Unit::acceleration_m_s2);
    const auto out = modulate(env, {.carrier_hz = 263.5, .output_rate_hz = 5000});
    CHECK(out.sample_rate_hz() == 5000);
    CHECK(out.size() == 2001);
}

TEST_CASE("envelope recovery stays within 10% for slow envelopes") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const auto env = slow_envelope(10000, 5000, seed);
        const auto rec = recover_envelope(modulate(env), 263.5);
        // Skip filter edges; compare the interior.
        const auto ref = env.slice(1000, 9000);
        const auto est = rec.slice(1000, 9000);
        CHECK(nrmse(ref.samples(), est.samples()) <= 0.10);
    }
}

TEST_CASE("modulated power concentrates around the carrier") {
    for (std::uint64_t seed = 3; seed <= 6; ++seed) {
        std::vector<double> e(8192);
        for (std::size_t k = 0; k < e.size(); ++k) {
            const double t = k / 5000.0;
            e[k] = std::exp(-t / 0.3) * (1.0 + 0.5 * std::sin(2 * pi * (3.0 + seed) * t));
        }
        const TimeSeries env(e, 5000, Unit::acceleration_m_s2);
        const double bw = occupied_bandwidth_hz(env, 0.95);
        const auto spec = power_spectral_density(modulate(env));
        const double in_band = spec.band_power(263.5 - bw, 263.5 + bw);
        CHECK(in_band >= 0.90 * spec.total_power());
    }
}

TEST_CASE("wav writer emits a valid 16-bit mono header") {
    test::TempDir tmp;
    const TimeSeries x({0.0, 0.5, -1.0, 1.0}, 5000);
    write_wav(tmp.path() / "a.wav", x);
    const auto bytes = io::read_text(tmp.path() / "a.wav");
    REQUIRE(bytes.size() == 44 + 8);
    CHECK(bytes.substr(0, 4) == "RIFF");
    CHECK(bytes.substr(8, 8) == "WAVEfmt ");
    auto le16 = [&](std::size_t off) {
        return static_cast<std::int16_t>(static_cast<unsigned char>(bytes[off]) |
                                         (static_cast<unsigned char>(bytes[off + 1]) << 8));
    };
    CHECK(le16(44) == 0);
    CHECK(le16(46) == 16384);
    CHECK(le16(48) == -32767);
    CHECK(le16(50) == 32767);
}

TEST_CASE("nrmse") {
    const std::vector<double> a{1, -1, 1, -1}, b{1.1, -0.9, 1.1, -0.9};
    CHECK(nrmse(a, b) == doctest::Approx(0.1));
    CHECK_THROWS_AS(nrmse(std::vector<double>{0, 0}, std::span<const double>(a).first(2)), InvalidInput);
}
