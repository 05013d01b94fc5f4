#pragma once

#include "hapbutton/button.hpp"
#include "hapbutton/signal.hpp"

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hapbutton::representative {

enum class LocalDistance { absolute, squared };

struct WarpPath {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    double total_cost = 0.0;
};

struct DtwOptions {
    /// Sakoe-Chiba radius on |i - j|; unrestricted when empty.
    std::optional<std::size_t> band_radius;
    LocalDistance distance = LocalDistance::absolute;
};

/// Minimal-cost monotone, continuous alignment from (0,0) to (n-1,m-1).
WarpPath dtw(std::span<const double> x, std::span<const double> y, const DtwOptions& opts = {});
WarpPath dtw(const TimeSeries& x, const TimeSeries& y, const DtwOptions& opts = {});

/// Cost only; O(min(n, m)) memory.
double dtw_cost(std::span<const double> x, std::span<const double> y, const DtwOptions& opts = {});

/// Symmetric matrix of pairwise DTW costs.
std::vector<std::vector<double>> dtw_cost_matrix(std::span<const TimeSeries> signals,
                                                 const DtwOptions& opts = {});

/// Index of the member with minimal summed DTW cost; lowest index on ties.
std::size_t medoid_index(std::span<const TimeSeries> signals, const DtwOptions& opts = {});

enum class RepresentativeMethod { medoid, barycenter };

struct RepresentativeOptions {
    RepresentativeMethod method = RepresentativeMethod::medoid;
    DtwOptions dtw;
    /// Refinement passes for barycenter averaging.
    int barycenter_iterations = 10;
};

/// DTW barycenter averaging seeded from the medoid; keeps the medoid's length.
TimeSeries dtw_barycenter(std::span<const TimeSeries> signals, const DtwOptions& opts = {},
                          int iterations = 10);

/// Representative of one participant's filtered trials.
TimeSeries participant_representative(std::span<const TimeSeries> trials,
                                      const RepresentativeOptions& opts = {});

struct ButtonProfile {
    ButtonType button_type;
    TimeSeries representative_acceleration;
    double mean_activation_force_N;
    std::vector<std::string> contributing_participants;
};

/// Representative over per-participant representatives (same rule), plus the
/// pooled mean activation force.
ButtonProfile button_profile(ButtonType button, std::span<const TimeSeries> per_participant,
                             std::vector<std::string> participants, double pooled_mean_force_N,
                             const RepresentativeOptions& opts = {});

}  // namespace hapbutton::representative
