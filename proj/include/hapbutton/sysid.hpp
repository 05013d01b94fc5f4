#pragma once

#include "hapbutton/representative.hpp"
#include "hapbutton/signal.hpp"
#include "hapbutton/synth.hpp"

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace hapbutton::sysid {

struct FitInfo {
    /// sqrt(sum |H - G|^2 / sum |H|^2) over the fitted grid.
    double relative_error = 0.0;
    /// Weighted objective sum w |H - G|^2 at the returned model.
    double weighted_sse = 0.0;
    int iterations = 0;
    bool converged = true;
    bool rank_deficient = false;
    /// Poles reflected out of the right half-plane or moved off the origin.
    int poles_reflected = 0;
    std::size_t points = 0;
};

/// G(s) = N(s) / D(s), coefficients in descending powers of s, D monic.
struct RationalTransferFunction {
    std::vector<double> numerator;
    std::vector<double> denominator;
    bool dc_normalized = false;
    std::optional<FrfQuantity> quantity;
    FitInfo fit;

    [[nodiscard]] int n_poles() const { return static_cast<int>(denominator.size()) - 1; }
    [[nodiscard]] int n_zeros() const { return static_cast<int>(numerator.size()) - 1; }
    [[nodiscard]] std::complex<double> evaluate(std::complex<double> s) const;
    [[nodiscard]] std::complex<double> at_frequency(double hz) const;
    [[nodiscard]] std::vector<std::complex<double>> poles() const;
    [[nodiscard]] std::vector<std::complex<double>> zeros() const;
    [[nodiscard]] bool is_stable() const;
    /// Copy scaled to unit gain at s = 0; throws if G(0) is 0 or infinite.
    [[nodiscard]] RationalTransferFunction normalized_dc() const;
};

/// Natural frequency (Hz) and damping ratio of a pole.
struct ModalParameters {
    double natural_hz;
    double damping;
};
ModalParameters modal_parameters(std::complex<double> pole);

enum class Weighting { inverse_magnitude, uniform };

struct FitOptions {
    int max_iterations = 20;
    /// Stop when the largest relative denominator change falls below this.
    double tolerance = 1e-10;
    Weighting weighting = Weighting::inverse_magnitude;
    bool enforce_stability = true;
    /// Reflected poles keep at least this decay rate, as a fraction of the
    /// lowest grid frequency. Poles closer to the origin than that rate are
    /// unidentifiable from the grid and land at -2 pi f_min x on the real axis.
    double min_decay_fraction = 0.01;
};

/// Sanathanan-Koerner iterated weighted linear least squares.
RationalTransferFunction fit_transfer_function(const FrequencyResponse& h, int n_poles, int n_zeros,
                                               const FitOptions& opts = {});

struct OrderCandidate {
    int n_poles;
    int n_zeros;
    double criterion;
    double relative_error;
    std::string failure;  // empty on success
};

struct OrderSelection {
    RationalTransferFunction model;
    std::vector<OrderCandidate> candidates;
};

struct SelectOptions {
    FitOptions fit;
    /// Zeros per candidate: n_poles - relative_degree (clamped at 0).
    int relative_degree = 0;
    /// SSE is floored at this fraction of sum w |H|^2 so that numerically
    /// exact fits of different orders tie and the penalty decides.
    double sse_floor = 1e-12;
};

/// AIC-style choice N ln(SSE) + 2k over n_poles in [min_poles, max_poles].
OrderSelection select_order(const FrequencyResponse& h, int min_poles, int max_poles,
                            const SelectOptions& opts = {});

/// Forward (acceleration per volt) and inverse (volt per acceleration) plate
/// models fitted from one measured FRF.
struct PlateModels {
    OrderSelection forward;
    OrderSelection inverse;
    /// Lowest frequency whose |H| clears the inversion floor.
    double inverse_band_lo_hz;
};

/// The inverse is fitted to invert_frf(h, floor_fraction) on the bins where
/// |H| >= floor; clamped bins carry no causal structure and are left out.
PlateModels fit_plate_models(const FrequencyResponse& acceleration_per_volt, double floor_fraction,
                             int min_poles, int max_poles, const SelectOptions& opts = {});

struct StateSpaceModel {
    Eigen::MatrixXd A;
    Eigen::VectorXd B;
    Eigen::RowVectorXd C;
    double D = 0.0;
    bool discrete = true;
    double sample_rate_hz = 0.0;
    std::optional<FrfQuantity> quantity;

    [[nodiscard]] int order() const { return static_cast<int>(A.rows()); }
    /// Spectral radius (discrete) or largest real part (continuous) of A.
    [[nodiscard]] double stability_margin_value() const;
    [[nodiscard]] bool is_stable() const;
};

/// Controllable-canonical continuous realization.
StateSpaceModel realize_continuous(const RationalTransferFunction& g);

/// Tustin discretization, controllable-canonical realization.
StateSpaceModel to_discrete(const RationalTransferFunction& g, double rate_hz);

/// Zero initial state; y[k] = C x[k] + D u[k], x[k+1] = A x[k] + B u[k].
TimeSeries simulate(const StateSpaceModel& m, const TimeSeries& u);

/// Actuation voltage for a button profile: modulate, drive the inverse plate
/// model, scale to the requested peak-to-peak voltage.
TimeSeries render_voltage(const representative::ButtonProfile& profile,
                          const RationalTransferFunction& plate_inverse, const synth::SynthConfig& cfg = {},
                          double peak_to_peak_V = 100.0);

/// Surface acceleration predicted by the forward plate model.
TimeSeries reconstruct(const TimeSeries& voltage, const RationalTransferFunction& plate_forward);

struct ComparisonOptions {
    /// Optional [lo, hi] band applied to both signals before comparing.
    std::optional<std::pair<double, double>> band_hz;
    double max_lag_s = 0.02;
};

struct Comparison {
    double nrmse_raw;
    double nrmse_aligned;
    double gain;
    long lag_samples;  // estimate is shifted by this many samples
};

/// NRMSE before and after optimal scalar gain and integer lag alignment.
Comparison compare_waveforms(const TimeSeries& reference, const TimeSeries& estimate,
                             const ComparisonOptions& opts = {});

}  // namespace hapbutton::sysid
