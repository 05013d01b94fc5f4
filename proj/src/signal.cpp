#include "hapbutton/signal.hpp"

#include "hapbutton/error.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace hapbutton {

namespace {

constexpr double pi = std::numbers::pi;

void require_order(int order) {
    if (order < 1 || order > 8) {
        throw InvalidParameter("filter order must be in [1, 8], got " + std::to_string(order));
    }
}

}  // namespace

// ---- enums ----------------------------------------------------------------

std::string_view to_string(Unit unit) {
    switch (unit) {
        case Unit::acceleration_m_s2: return "acceleration_m_s2";
        case Unit::force_N: return "force_N";
        case Unit::voltage_V: return "voltage_V";
        case Unit::area_mm2: return "area_mm2";
        case Unit::dimensionless: return "dimensionless";
    }
    return "dimensionless";
}

Unit unit_from_string(std::string_view name) {
    for (auto u : {Unit::acceleration_m_s2, Unit::force_N, Unit::voltage_V, Unit::area_mm2,
                   Unit::dimensionless}) {
        if (to_string(u) == name) return u;
    }
    throw InvalidInput("unknown unit '" + std::string(name) + "'");
}

std::string_view to_string(FrfQuantity quantity) {
    switch (quantity) {
        case FrfQuantity::displacement_per_volt: return "displacement_per_volt";
        case FrfQuantity::acceleration_per_volt: return "acceleration_per_volt";
        case FrfQuantity::volt_per_acceleration: return "volt_per_acceleration";
    }
    return "displacement_per_volt";
}

FrfQuantity frf_quantity_from_string(std::string_view name) {
    for (auto q : {FrfQuantity::displacement_per_volt, FrfQuantity::acceleration_per_volt,
                   FrfQuantity::volt_per_acceleration}) {
        if (to_string(q) == name) return q;
    }
    throw InvalidInput("unknown FRF quantity '" + std::string(name) + "'");
}

// ---- TimeSeries -----------------------------------------------------------

TimeSeries::TimeSeries(std::vector<double> samples, double sample_rate_hz, Unit unit, double t0_s)
    : samples_(std::move(samples)), rate_(sample_rate_hz), unit_(unit), t0_(t0_s) {
    if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
        throw InvalidParameter("sample rate must be positive and finite");
    }
    if (samples_.empty()) {
        throw InvalidInput("time series needs at least one sample");
    }
}

TimeSeries TimeSeries::with_samples(std::vector<double> samples) const {
    return TimeSeries(std::move(samples), rate_, unit_, t0_);
}

TimeSeries TimeSeries::slice(std::size_t first, std::size_t last) const {
    if (first >= last || last > samples_.size()) {
        throw InvalidParameter("slice [" + std::to_string(first) + ", " + std::to_string(last) +
                               ") outside series of length " + std::to_string(samples_.size()));
    }
    return TimeSeries(std::vector<double>(samples_.begin() + static_cast<std::ptrdiff_t>(first),
                                          samples_.begin() + static_cast<std::ptrdiff_t>(last)),
                      rate_, unit_, time_at(first));
}

// ---- Spectrum -------------------------------------------------------------

double Spectrum::bin_width_hz() const {
    return frequencies_hz.size() > 1 ? frequencies_hz[1] - frequencies_hz[0] : 0.0;
}

std::size_t Spectrum::peak_index() const {
    return static_cast<std::size_t>(
        std::distance(power.begin(), std::max_element(power.begin(), power.end())));
}

double Spectrum::band_power(double lo_hz, double hi_hz) const {
    double sum = 0.0;
    for (std::size_t k = 0; k < power.size(); ++k) {
        if (frequencies_hz[k] >= lo_hz && frequencies_hz[k] <= hi_hz) sum += power[k];
    }
    return sum * bin_width_hz();
}

double Spectrum::total_power() const {
    return std::accumulate(power.begin(), power.end(), 0.0) * bin_width_hz();
}

// ---- FrequencyResponse ----------------------------------------------------

void FrequencyResponse::validate() const {
    if (frequencies_hz.size() != values.size()) {
        throw InvalidInput("FRF frequency and value arrays differ in length");
    }
    if (values.empty()) throw InvalidInput("FRF is empty");
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (!std::isfinite(values[k].real()) || !std::isfinite(values[k].imag())) {
            throw InvalidInput("FRF value at bin " + std::to_string(k) + " is not finite");
        }
        if (k > 0 && !(frequencies_hz[k] > frequencies_hz[k - 1])) {
            throw InvalidInput("FRF frequencies not strictly ascending at bin " + std::to_string(k));
        }
    }
}

// ---- Butterworth ------------------------------------------------------------

std::vector<Biquad> butterworth(FilterKind kind, int order, double cutoff_hz, double rate_hz) {
    require_order(order);
    if (!(cutoff_hz > 0.0) || !(cutoff_hz < rate_hz / 2.0)) {
        throw InvalidParameter("cutoff " + std::to_string(cutoff_hz) +
                               " Hz must lie strictly between 0 and Nyquist (" +
                               std::to_string(rate_hz / 2.0) + " Hz)");
    }
    const double fs2 = 2.0 * rate_hz;
    const double warped = fs2 * std::tan(pi * cutoff_hz / rate_hz);
    const bool high = kind == FilterKind::highpass;
    // Numerator zeros sit at z = 1 (highpass) or z = -1 (lowpass).
    const double zsign = high ? -1.0 : 1.0;

    auto to_z = [&](std::complex<double> s) { return (fs2 + s) / (fs2 - s); };
    auto analog_pole = [&](int k) {
        const std::complex<double> proto =
            std::polar(1.0, pi * (2.0 * k + order + 1) / (2.0 * order));
        return high ? warped / proto : warped * proto;
    };
    // Gain is normalized where the passband is flat: z = -1 for highpass, z = 1 for lowpass.
    const double zref = high ? -1.0 : 1.0;
    auto normalize = [&](Biquad s) {
        const double num = s.b0 + s.b1 * zref + s.b2 * zref * zref;
        const double den = 1.0 + s.a1 * zref + s.a2 * zref * zref;
        const double g = den / num;
        s.b0 *= g;
        s.b1 *= g;
        s.b2 *= g;
        return s;
    };

    std::vector<Biquad> sections;
    for (int k = 0; k < order / 2; ++k) {
        const auto zp = to_z(analog_pole(k));
        sections.push_back(normalize(
            {1.0, 2.0 * zsign, 1.0, -2.0 * zp.real(), std::norm(zp)}));
    }
    if (order % 2 == 1) {
        const double zp = to_z(analog_pole(order / 2)).real();
        sections.push_back(normalize({1.0, zsign, 0.0, -zp, 0.0}));
    }
    return sections;
}

double magnitude_response(std::span<const Biquad> sections, double freq_hz, double rate_hz) {
    const auto zinv = std::polar(1.0, -2.0 * pi * freq_hz / rate_hz);
    std::complex<double> h = 1.0;
    for (const auto& s : sections) {
        h *= (s.b0 + s.b1 * zinv + s.b2 * zinv * zinv) / (1.0 + s.a1 * zinv + s.a2 * zinv * zinv);
    }
    return std::abs(h);
}

namespace {

struct SectionState {
    double s1 = 0.0, s2 = 0.0;
};

void run_cascade(std::span<const Biquad> sections, std::vector<SectionState> state,
                 std::vector<double>& data) {
    for (std::size_t i = 0; i < sections.size(); ++i) {
        const auto& c = sections[i];
        auto [s1, s2] = state[i];
        for (double& v : data) {
            const double y = c.b0 * v + s1;
            s1 = c.b1 * v - c.a1 * y + s2;
            s2 = c.b2 * v - c.a2 * y;
            v = y;
        }
    }
}

// State that makes each section sit at steady state for a unit constant input.
std::vector<SectionState> steady_state(std::span<const Biquad> sections) {
    std::vector<SectionState> out;
    double level = 1.0;
    for (const auto& c : sections) {
        const double gain = (c.b0 + c.b1 + c.b2) / (1.0 + c.a1 + c.a2);
        const double s2 = (c.b2 - c.a2 * gain) * level;
        const double s1 = (c.b1 - c.a1 * gain) * level + s2;
        out.push_back({s1, s2});
        level *= gain;
    }
    return out;
}

std::vector<SectionState> scaled(std::vector<SectionState> zi, double x0) {
    for (auto& s : zi) {
        s.s1 *= x0;
        s.s2 *= x0;
    }
    return zi;
}

}  // namespace

std::vector<double> sosfilt(std::span<const Biquad> sections, std::span<const double> x) {
    std::vector<double> y(x.begin(), x.end());
    run_cascade(sections, std::vector<SectionState>(sections.size()), y);
    return y;
}

std::vector<double> sosfiltfilt(std::span<const Biquad> sections, std::span<const double> x) {
    const std::size_t n = x.size();
    if (n == 0) return {};
    const std::size_t wanted = 3 * (2 * sections.size() + 1);
    const std::size_t pad = std::min(wanted, n - 1);

    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (std::size_t k = pad; k >= 1; --k) ext.push_back(2.0 * x[0] - x[k]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t k = 1; k <= pad; ++k) ext.push_back(2.0 * x[n - 1] - x[n - 1 - k]);

    const auto zi = steady_state(sections);
    run_cascade(sections, scaled(zi, ext.front()), ext);
    std::reverse(ext.begin(), ext.end());
    run_cascade(sections, scaled(zi, ext.front()), ext);
    std::reverse(ext.begin(), ext.end());

    return {ext.begin() + static_cast<std::ptrdiff_t>(pad),
            ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

TimeSeries highpass_filter(const TimeSeries& x, double cutoff_hz, int order) {
    const auto sections = butterworth(FilterKind::highpass, order, cutoff_hz, x.sample_rate_hz());
    return x.with_samples(sosfiltfilt(sections, x.samples()));
}

TimeSeries lowpass_filter(const TimeSeries& x, double cutoff_hz, int order) {
    const auto sections = butterworth(FilterKind::lowpass, order, cutoff_hz, x.sample_rate_hz());
    return x.with_samples(sosfiltfilt(sections, x.samples()));
}

TimeSeries bandlimit(const TimeSeries& x, double lo_hz, double hi_hz) {
    if (!(lo_hz <= hi_hz)) throw InvalidParameter("band lower edge exceeds upper edge");
    const std::size_t n = x.size();
    const double fs = x.sample_rate_hz();
    std::vector<double> in(x.samples().begin(), x.samples().end());
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spec;
    fft.fwd(spec, in);
    for (std::size_t k = 0; k < n; ++k) {
        // Physical frequency of bin k, folding the upper half onto negatives.
        const double f = static_cast<double>(std::min(k, n - k)) * fs / static_cast<double>(n);
        if (f < lo_hz || f > hi_hz) spec[k] = 0.0;
    }
    std::vector<double> out;
    fft.inv(out, spec);
    out.resize(n);
    return x.with_samples(std::move(out));
}

// ---- PSD --------------------------------------------------------------------

Spectrum power_spectral_density(const TimeSeries& x, std::size_t segment_len) {
    const std::size_t n = x.size();
    if (n == 0) throw InvalidInput("cannot estimate the spectrum of an empty signal");
    if (segment_len > n) {
        throw InvalidParameter("segment length " + std::to_string(segment_len) +
                               " exceeds signal length " + std::to_string(n));
    }
    const std::size_t len = segment_len == 0 ? n : segment_len;
    const std::size_t step = std::max<std::size_t>(1, len / 2);
    const double fs = x.sample_rate_hz();

    std::vector<double> window(len, 1.0);
    if (len > 1) {
        for (std::size_t k = 0; k < len; ++k) {
            window[k] = 0.5 - 0.5 * std::cos(2.0 * pi * static_cast<double>(k) /
                                             static_cast<double>(len));
        }
    }
    const double wsum2 = std::inner_product(window.begin(), window.end(), window.begin(), 0.0);

    const std::size_t bins = len / 2 + 1;
    Spectrum out;
    out.method = len == n ? SpectrumMethod::periodogram : SpectrumMethod::averaged;
    out.frequencies_hz.resize(bins);
    out.power.assign(bins, 0.0);
    for (std::size_t k = 0; k < bins; ++k) {
        out.frequencies_hz[k] = static_cast<double>(k) * fs / static_cast<double>(len);
    }

    Eigen::FFT<double> fft;
    std::vector<double> seg(len);
    std::vector<std::complex<double>> spec;
    std::size_t count = 0;
    const auto xs = x.samples();
    for (std::size_t start = 0; start + len <= n; start += step) {
        for (std::size_t k = 0; k < len; ++k) seg[k] = xs[start + k] * window[k];
        fft.fwd(spec, seg);
        for (std::size_t k = 0; k < bins; ++k) {
            double p = std::norm(spec[k]) / (fs * wsum2);
            const bool nyquist = len % 2 == 0 && k == len / 2;
            if (k != 0 && !nyquist) p *= 2.0;
            out.power[k] += p;
        }
        ++count;
    }
    for (double& p : out.power) p /= static_cast<double>(count);
    return out;
}

// ---- FRF calculus -----------------------------------------------------------

FrequencyResponse differentiate_frf(const FrequencyResponse& h, int times) {
    if (times != 1 && times != 2) {
        throw InvalidParameter("differentiation count must be 1 or 2");
    }
    h.validate();
    if (h.frequencies_hz.front() <= 0.0) {
        throw InvalidInput("FRF grid contains a non-positive frequency; drop it before differentiating");
    }
    FrequencyResponse out = h;
    for (std::size_t k = 0; k < h.size(); ++k) {
        const std::complex<double> jw(0.0, 2.0 * pi * h.frequencies_hz[k]);
        out.values[k] *= times == 1 ? jw : jw * jw;
    }
    if (h.quantity == FrfQuantity::displacement_per_volt && times == 2) {
        out.quantity = FrfQuantity::acceleration_per_volt;
    }
    return out;
}

FrequencyResponse invert_frf(const FrequencyResponse& h, double floor_fraction) {
    if (!(floor_fraction >= 0.0) || !(floor_fraction < 1.0)) {
        throw InvalidParameter("floor fraction must lie in [0, 1)");
    }
    h.validate();
    double peak = 0.0;
    for (const auto& v : h.values) peak = std::max(peak, std::abs(v));
    if (peak == 0.0) throw InvalidInput("cannot invert an all-zero FRF");

    const double floor = floor_fraction * peak;
    FrequencyResponse out = h;
    for (auto& v : out.values) {
        const double mag = std::abs(v);
        if (mag == 0.0 && floor == 0.0) {
            throw InvalidInput("FRF has a zero bin and no inversion floor");
        }
        if (mag < floor) {
            const double phase = std::arg(v);
            v = std::polar(1.0 / floor, -phase);
        } else {
            v = 1.0 / v;
        }
    }
    switch (h.quantity) {
        case FrfQuantity::acceleration_per_volt:
            out.quantity = FrfQuantity::volt_per_acceleration;
            break;
        case FrfQuantity::volt_per_acceleration:
            out.quantity = FrfQuantity::acceleration_per_volt;
            break;
        case FrfQuantity::displacement_per_volt:
            // No dedicated tag for volt/displacement; callers differentiate first.
            throw InvalidInput("invert the acceleration FRF, not the displacement FRF");
    }
    return out;
}

FrequencyResponse drop_nonpositive_frequencies(const FrequencyResponse& h) {
    FrequencyResponse out;
    out.quantity = h.quantity;
    for (std::size_t k = 0; k < h.frequencies_hz.size(); ++k) {
        if (h.frequencies_hz[k] > 0.0) {
            out.frequencies_hz.push_back(h.frequencies_hz[k]);
            out.values.push_back(h.values[k]);
        }
    }
    return out;
}

// ---- helpers ----------------------------------------------------------------

double mean(std::span<const double> x) {
    if (x.empty()) return 0.0;
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double rms(std::span<const double> x) {
    if (x.empty()) return 0.0;
    return std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0) /
                     static_cast<double>(x.size()));
}

double sample_stddev(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const double m = mean(x);
    double acc = 0.0;
    for (double v : x) acc += (v - m) * (v - m);
    return std::sqrt(acc / static_cast<double>(x.size() - 1));
}

double percentile(std::span<const double> x, double p) {
    if (x.empty()) throw InvalidInput("percentile of an empty set");
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    const double pos = std::clamp(p, 0.0, 100.0) / 100.0 * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

TimeSeries resample_linear(const TimeSeries& x, double new_rate_hz) {
    if (!(new_rate_hz > 0.0)) throw InvalidParameter("target rate must be positive");
    if (new_rate_hz == x.sample_rate_hz()) return x;
    const auto count = static_cast<std::size_t>(std::floor(x.duration_s() * new_rate_hz + 1e-9)) + 1;
    std::vector<double> out(count);
    const auto xs = x.samples();
    for (std::size_t k = 0; k < count; ++k) {
        const double pos = static_cast<double>(k) / new_rate_hz * x.sample_rate_hz();
        const auto i = std::min(static_cast<std::size_t>(pos), xs.size() - 1);
        const std::size_t j = std::min(i + 1, xs.size() - 1);
        const double frac = pos - static_cast<double>(i);
        out[k] = xs[i] + frac * (xs[j] - xs[i]);
    }
    return TimeSeries(std::move(out), new_rate_hz, x.unit(), x.t0_s());
}

}  // namespace hapbutton
