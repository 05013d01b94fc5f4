#pragma once

#include "hapbutton/button.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hapbutton::evaluation {

/// Rows are the presented button, columns the response, both in
/// index_of(ButtonType) order.
struct ConfusionMatrix {
    std::array<std::array<std::int64_t, 3>, 3> counts{};

    [[nodiscard]] std::int64_t total() const;
    [[nodiscard]] std::int64_t row_sum(std::size_t presented) const;
    [[nodiscard]] std::int64_t column_sum(std::size_t response) const;
    /// Throws InvalidInput on a negative cell.
    void validate() const;

    bool operator==(const ConfusionMatrix&) const = default;
};

struct ButtonMetrics {
    std::int64_t tp, fp, fn, tn;
    double accuracy;
    /// Absent when the button was never chosen.
    std::optional<double> precision;
    /// Absent when the button was never presented.
    std::optional<double> sensitivity;
};

struct MetricsReport {
    std::array<ButtonMetrics, 3> per_button;

    [[nodiscard]] const ButtonMetrics& at(ButtonType b) const { return per_button[index_of(b)]; }
};

/// One-vs-rest counts and ACC, PREC, SN per button.
MetricsReport metrics(const ConfusionMatrix& cm);

/// Uniformly random responses from a seeded 64-bit Mersenne Twister; the
/// draw-to-response mapping is fixed so results match across platforms.
ConfusionMatrix simulate_chance(std::int64_t trials_per_button, std::uint64_t seed);

struct MetricDeltas {
    /// Percentage points, after minus before.
    std::array<double, 3> accuracy;
    std::array<std::optional<double>, 3> precision;
    std::array<std::optional<double>, 3> sensitivity;
};

MetricDeltas improvement(const MetricsReport& before, const MetricsReport& after);

struct RatingTable {
    std::vector<std::string> participants;
    std::vector<std::string> items;
    /// ratings[p][i]; all strictly positive.
    std::vector<std::vector<double>> ratings;

    void validate() const;
};

/// Multiplies each participant's ratings by GGM / GM_P.
RatingTable normalize_ratings(const RatingTable& table);

double geometric_mean(const std::vector<double>& values);

// CSV: header "presented,Latch,Toggle,Push", one row per presented button.
ConfusionMatrix parse_confusion_csv(std::string_view text, std::string_view source);
ConfusionMatrix read_confusion_csv(const std::filesystem::path& path);
std::string format_confusion_csv(const ConfusionMatrix& cm);

// CSV: header "participant,<item>...", one row per participant.
RatingTable parse_ratings_csv(std::string_view text, std::string_view source);
RatingTable read_ratings_csv(const std::filesystem::path& path);
std::string format_ratings_csv(const RatingTable& table);

std::string report_json(const std::vector<std::pair<std::string, MetricsReport>>& conditions);

/// Plain-text table: one column block per condition, rows ACC / PREC / SN in
/// percent with two decimals.
std::string format_metrics_table(const std::vector<std::pair<std::string, MetricsReport>>& conditions);

}  // namespace hapbutton::evaluation
