#include <doctest.h>

#include "hapbutton/error.hpp"
#include "hapbutton/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace hapbutton;

namespace {

constexpr double pi = std::numbers::pi;

TimeSeries sine(double freq, double rate, std::size_t n, double amp = 1.0) {
    std::vector<double> x(n);
    for (std::size_t k = 0; k < n; ++k) x[k] = amp * std::sin(2 * pi * freq * k / rate);
    return TimeSeries(std::move(x), rate, Unit::acceleration_m_s2);
}

double max_abs(std::span<const double> x) {
    double m = 0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
}

// Closed-form magnitude of a bilinear Butterworth highpass, applied twice.
double analytic_zero_phase_highpass(double f, double fc, double fs, int order) {
    const double ratio = std::tan(pi * fc / fs) / std::tan(pi * f / fs);
    return 1.0 / (1.0 + std::pow(ratio, 2 * order));
}

}  // namespace

TEST_CASE("highpass rejects a constant signal") {
    TimeSeries x(std::vector<double>(5000, 3.0), 5000.0);
    const auto y = highpass_filter(x, 10.0, 4);
    CHECK(y.size() == x.size());
    CHECK(max_abs(y.samples()) < 1e-6);
}

TEST_CASE("highpass passes the carrier at unit gain") {
    const auto x = sine(263.5, 5000.0, 20000);
    const auto y = highpass_filter(x, 10.0, 4);
    const double amp = max_abs(y.slice(5000, 15000).samples());
    CHECK(amp == doctest::Approx(1.0).epsilon(0.01));
    CHECK(amp == doctest::Approx(analytic_zero_phase_highpass(263.5, 10, 5000, 4)).epsilon(1e-3));
}

TEST_CASE("highpass attenuates 1 Hz far below the cutoff") {
    const double expected = analytic_zero_phase_highpass(1.0, 10, 5000, 4);
    REQUIRE(expected < 1e-7);
    const auto x = sine(1.0, 5000.0, 100000);
    const auto y = highpass_filter(x, 10.0, 4);
    CHECK(max_abs(y.slice(25000, 75000).samples()) <= 0.01);
}

TEST_CASE("designed magnitude matches the closed form") {
    for (int order : {1, 2, 3, 4, 7}) {
        const auto sos = butterworth(FilterKind::highpass, order, 10.0, 5000.0);
        for (double f : {2.0, 10.0, 40.0, 263.5}) {
            const double single = std::sqrt(analytic_zero_phase_highpass(f, 10, 5000, order));
            CHECK(magnitude_response(sos, f, 5000.0) == doctest::Approx(single).epsilon(1e-9));
        }
    }
    const auto lp = butterworth(FilterKind::lowpass, 4, 100.0, 5000.0);
    CHECK(magnitude_response(lp, 0.0, 5000.0) == doctest::Approx(1.0));
    CHECK(magnitude_response(lp, 100.0, 5000.0) == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("filter parameters are validated") {
    TimeSeries x(std::vector<double>(100, 1.0), 5000.0);
    CHECK_THROWS_AS(highpass_filter(x, 2500.0, 4), InvalidParameter);
    CHECK_THROWS_AS(highpass_filter(x, 3000.0, 4), InvalidParameter);
    CHECK_THROWS_AS(highpass_filter(x, 10.0, 0), InvalidParameter);
    CHECK_THROWS_AS(highpass_filter(x, 10.0, 9), InvalidParameter);
}

TEST_CASE("highpass is linear") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> a(3000), b(3000), mix(3000);
        const double ca = nd(rng), cb = nd(rng);
        for (std::size_t k = 0; k < a.size(); ++k) {
            a[k] = nd(rng);
            b[k] = nd(rng) + 2.0;
            mix[k] = ca * a[k] + cb * b[k];
        }
        const auto fa = highpass_filter(TimeSeries(a, 5000), 10, 4);
        const auto fb = highpass_filter(TimeSeries(b, 5000), 10, 4);
        const auto fm = highpass_filter(TimeSeries(mix, 5000), 10, 4);
        double scale = 0;
        double err = 0;
        for (std::size_t k = 0; k < a.size(); ++k) {
            scale = std::max(scale, std::abs(fm[k]));
            err = std::max(err, std::abs(fm[k] - (ca * fa[k] + cb * fb[k])));
        }
        CHECK(err <= 1e-9 * scale);
    }
}

TEST_CASE("zero-phase filtering preserves burst timing") {
    std::vector<double> x(5000, 0.0);
    for (std::size_t k = 2000; k < 2600; ++k) {
        const double t = (k - 2000) / 5000.0;
        x[k] = std::exp(-t / 0.02) * std::sin(2 * pi * 150 * t);
    }
    const auto y = highpass_filter(TimeSeries(x, 5000), 10, 4);
    int best_lag = 0;
    double best = -1e300;
    for (int lag = -50; lag <= 50; ++lag) {
        double acc = 0;
        for (int k = 100; k < 4900; ++k) acc += x[k] * y[k + lag];
        if (acc > best) {
            best = acc;
            best_lag = lag;
        }
    }
    CHECK(best_lag == 0);
}

TEST_CASE("psd peak sits on the tone") {
    const auto x = sine(100.0, 5000.0, 10000);
    const auto s = power_spectral_density(x, 1000);
    CHECK(s.method == SpectrumMethod::averaged);
    CHECK(std::abs(s.peak_frequency_hz() - 100.0) <= s.bin_width_hz());
    // Parseval: mean square of a unit sine is 1/2.
    CHECK(s.total_power() == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("psd of white noise integrates to its variance") {
    std::mt19937_64 rng(1234);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<double> x(50000);
    for (double& v : x) v = nd(rng);
    const auto s = power_spectral_density(TimeSeries(x, 5000), 512);
    CHECK(s.total_power() == doctest::Approx(1.0).epsilon(0.10));
    for (double p : s.power) CHECK(p >= 0.0);
}

TEST_CASE("psd edge cases") {
    const auto z = power_spectral_density(TimeSeries(std::vector<double>(256, 0.0), 5000), 64);
    CHECK(std::all_of(z.power.begin(), z.power.end(), [](double p) { return p == 0.0; }));
    CHECK_THROWS_AS(power_spectral_density(TimeSeries(std::vector<double>(10, 0.0), 5000), 11),
                    InvalidParameter);
    const auto whole = power_spectral_density(sine(50, 1000, 1000));
    CHECK(whole.method == SpectrumMethod::periodogram);
    for (std::size_t k = 1; k < whole.frequencies_hz.size(); ++k) {
        CHECK(whole.frequencies_hz[k] > whole.frequencies_hz[k - 1]);
    }
}

TEST_CASE("differentiate_frf analytic values") {
    FrequencyResponse h{{1.0 / (2 * pi)}, {1.0}, FrfQuantity::displacement_per_volt};
    const auto d2 = differentiate_frf(h, 2);
    CHECK(d2.values[0].real() == doctest::Approx(-1.0));
    CHECK(d2.values[0].imag() == doctest::Approx(0.0));
    CHECK(d2.quantity == FrfQuantity::acceleration_per_volt);

    FrequencyResponse h10{{10.0}, {1.0}, FrfQuantity::displacement_per_volt};
    const auto d1 = differentiate_frf(h10, 1);
    CHECK(std::abs(d1.values[0]) == doctest::Approx(2 * pi * 10));
    CHECK(std::arg(d1.values[0]) == doctest::Approx(pi / 2));

    FrequencyResponse flat{{50.0, 100.0}, {1.0, 1.0}, FrfQuantity::displacement_per_volt};
    const auto f2 = differentiate_frf(flat, 2);
    CHECK(std::abs(f2.values[1]) / std::abs(f2.values[0]) == doctest::Approx(4.0));
}

TEST_CASE("differentiate_frf composes exactly") {
    FrequencyResponse h{{3.0, 17.5, 263.5}, {{1.0, 2.0}, {-0.5, 0.25}, {3.0, -1.0}},
                        FrfQuantity::displacement_per_volt};
    const auto once_twice = differentiate_frf(differentiate_frf(h, 1), 1);
    const auto twice = differentiate_frf(h, 2);
    for (std::size_t k = 0; k < h.size(); ++k) {
        CHECK(std::abs(once_twice.values[k] - twice.values[k]) <=
              1e-12 * std::abs(twice.values[k]));
    }
}

TEST_CASE("differentiate_frf rejects a zero-frequency bin") {
    FrequencyResponse h{{0.0, 1.0}, {1.0, 1.0}, FrfQuantity::displacement_per_volt};
    CHECK_THROWS_AS(differentiate_frf(h, 1), InvalidInput);
    CHECK_THROWS_AS(differentiate_frf(h, 3), InvalidParameter);
    const auto trimmed = drop_nonpositive_frequencies(h);
    CHECK(trimmed.size() == 1);
    CHECK_NOTHROW(differentiate_frf(trimmed, 2));
}

TEST_CASE("invert_frf") {
    FrequencyResponse h{{10.0, 20.0, 30.0}, {2.0, 2.0, 2.0}, FrfQuantity::acceleration_per_volt};
    const auto inv = invert_frf(h, 0.01);
    for (const auto& v : inv.values) {
        CHECK(v.real() == doctest::Approx(0.5));
        CHECK(v.imag() == doctest::Approx(0.0));
    }
    CHECK(inv.quantity == FrfQuantity::volt_per_acceleration);

    FrequencyResponse wc{{1.0, 2.0, 3.0}, {{1.0, 0.5}, {-0.3, 0.2}, {0.7, -0.9}},
                         FrfQuantity::acceleration_per_volt};
    const auto back = invert_frf(invert_frf(wc, 0.0), 0.0);
    CHECK(back.quantity == FrfQuantity::acceleration_per_volt);
    for (std::size_t k = 0; k < wc.size(); ++k) {
        CHECK(std::abs(back.values[k] - wc.values[k]) <= 1e-12 * std::abs(wc.values[k]));
    }

    FrequencyResponse notch{{1.0, 2.0}, {1.0, 1e-9}, FrfQuantity::acceleration_per_volt};
    const auto clamped = invert_frf(notch, 0.01);
    CHECK(std::abs(clamped.values[1]) <= 100.0 + 1e-9);

    FrequencyResponse zero{{1.0, 2.0}, {0.0, 0.0}, FrfQuantity::acceleration_per_volt};
    CHECK_THROWS_AS(invert_frf(zero, 0.01), InvalidInput);
}

TEST_CASE("bandlimit keeps in-band tones only") {
    std::vector<double> x(5000);
    for (std::size_t k = 0; k < x.size(); ++k) {
        x[k] = std::sin(2 * pi * 100 * k / 5000.0) + std::sin(2 * pi * 700 * k / 5000.0);
    }
    const auto y = bandlimit(TimeSeries(x, 5000), 50, 150);
    for (std::size_t k = 0; k < x.size(); k += 97) {
        CHECK(y[k] == doctest::Approx(std::sin(2 * pi * 100 * k / 5000.0)).epsilon(1e-9).scale(1));
    }
}

TEST_CASE("small statistics") {
    const std::vector<double> v{1.0, 2.0, 3.0};
    CHECK(mean(v) == doctest::Approx(2.0));
    CHECK(sample_stddev(v) == doctest::Approx(1.0));
    CHECK(percentile(v, 50) == doctest::Approx(2.0));
    CHECK(percentile(v, 25) == doctest::Approx(1.5));
    const auto r = resample_linear(TimeSeries({0.0, 1.0, 2.0}, 2.0), 4.0);
    CHECK(r.size() == 5);
    CHECK(r[1] == doctest::Approx(0.5));
}
