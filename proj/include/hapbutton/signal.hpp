#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hapbutton {

enum class Unit { acceleration_m_s2, force_N, voltage_V, area_mm2, dimensionless };

std::string_view to_string(Unit unit);
Unit unit_from_string(std::string_view name);

/// Uniformly sampled real signal. Always holds at least one sample.
class TimeSeries {
public:
    TimeSeries(std::vector<double> samples, double sample_rate_hz,
               Unit unit = Unit::dimensionless, double t0_s = 0.0);

    [[nodiscard]] std::span<const double> samples() const noexcept { return samples_; }
    [[nodiscard]] std::vector<double>& mutable_samples() noexcept { return samples_; }
    [[nodiscard]] double sample_rate_hz() const noexcept { return rate_; }
    [[nodiscard]] Unit unit() const noexcept { return unit_; }
    [[nodiscard]] double t0_s() const noexcept { return t0_; }
    [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }
    [[nodiscard]] double duration_s() const noexcept {
        return static_cast<double>(samples_.size() - 1) / rate_;
    }
    [[nodiscard]] double time_at(std::size_t k) const noexcept {
        return t0_ + static_cast<double>(k) / rate_;
    }
    double operator[](std::size_t k) const noexcept { return samples_[k]; }

    /// Same rate, unit and time origin, new samples.
    [[nodiscard]] TimeSeries with_samples(std::vector<double> samples) const;
    /// Samples [first, last) with t0 shifted accordingly.
    [[nodiscard]] TimeSeries slice(std::size_t first, std::size_t last) const;

private:
    std::vector<double> samples_;
    double rate_;
    Unit unit_;
    double t0_;
};

enum class SpectrumMethod { periodogram, averaged };

struct Spectrum {
    std::vector<double> frequencies_hz;
    std::vector<double> power;
    SpectrumMethod method = SpectrumMethod::averaged;

    [[nodiscard]] double bin_width_hz() const;
    [[nodiscard]] std::size_t peak_index() const;
    [[nodiscard]] double peak_frequency_hz() const { return frequencies_hz[peak_index()]; }
    /// Integral of power over [lo_hz, hi_hz].
    [[nodiscard]] double band_power(double lo_hz, double hi_hz) const;
    [[nodiscard]] double total_power() const;
};

enum class FrfQuantity { displacement_per_volt, acceleration_per_volt, volt_per_acceleration };

std::string_view to_string(FrfQuantity quantity);
FrfQuantity frf_quantity_from_string(std::string_view name);

struct FrequencyResponse {
    std::vector<double> frequencies_hz;
    std::vector<std::complex<double>> values;
    FrfQuantity quantity = FrfQuantity::displacement_per_volt;

    /// Checks ascending, positive, finite, equal-length; throws InvalidInput.
    void validate() const;
    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
};

// ---- filtering ----------------------------------------------------------

/// One biquad in direct form II transposed, a0 normalized to 1.
struct Biquad {
    double b0, b1, b2, a1, a2;
};

enum class FilterKind { lowpass, highpass };

/// Digital Butterworth design via the prewarped bilinear transform.
std::vector<Biquad> butterworth(FilterKind kind, int order, double cutoff_hz, double rate_hz);

/// Magnitude of the cascade at a physical frequency.
double magnitude_response(std::span<const Biquad> sections, double freq_hz, double rate_hz);

/// Causal cascade filter with zero initial state.
std::vector<double> sosfilt(std::span<const Biquad> sections, std::span<const double> x);

/// Forward-backward filtering with odd-extension padding and steady-state
/// initial conditions. Zero phase; magnitude is squared.
std::vector<double> sosfiltfilt(std::span<const Biquad> sections, std::span<const double> x);

/// Zero-phase Butterworth highpass (order in [1, 8]).
TimeSeries highpass_filter(const TimeSeries& x, double cutoff_hz, int order = 4);
/// Zero-phase Butterworth lowpass (order in [1, 8]).
TimeSeries lowpass_filter(const TimeSeries& x, double cutoff_hz, int order = 4);

/// Keeps only spectral content in [lo_hz, hi_hz] (FFT mask, zero phase).
TimeSeries bandlimit(const TimeSeries& x, double lo_hz, double hi_hz);

// ---- spectra -------------------------------------------------------------

/// Welch estimate: Hann window, 50% overlap, one-sided density.
/// segment_len defaults to the whole signal when 0.
Spectrum power_spectral_density(const TimeSeries& x, std::size_t segment_len = 0);

// ---- FRF calculus --------------------------------------------------------

/// Multiply by (i 2 pi f)^times. times must be 1 or 2.
FrequencyResponse differentiate_frf(const FrequencyResponse& h, int times);

/// Pointwise reciprocal; magnitudes below floor_fraction * max|H| are raised
/// to the floor (phase kept) before inversion.
FrequencyResponse invert_frf(const FrequencyResponse& h, double floor_fraction);

/// Removes bins at or below 0 Hz.
FrequencyResponse drop_nonpositive_frequencies(const FrequencyResponse& h);

// ---- small numeric helpers ----------------------------------------------

double rms(std::span<const double> x);
double mean(std::span<const double> x);
/// Sample standard deviation (n - 1); 0 for a single value.
double sample_stddev(std::span<const double> x);
/// Linear-interpolated percentile, p in [0, 100].
double percentile(std::span<const double> x, double p);

/// Linear-interpolation resampling to a new rate, same start time.
TimeSeries resample_linear(const TimeSeries& x, double new_rate_hz);

}  // namespace hapbutton
