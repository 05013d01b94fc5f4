#pragma once

// Rebuilds 3x3 confusion matrices from reference per-button sensitivity and
// precision, assuming an equal number of presentations per button.

#include "hapbutton/evaluation.hpp"

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace hapbutton::test {

struct ReferenceMetrics {
    std::array<double, 3> sn_percent;    // index_of(ButtonType) order
    std::array<double, 3> prec_percent;
};

struct ReconstructedCounts {
    std::array<std::int64_t, 3> tp, fn, fp;
};

// TP = SN * n; FP is the integer that brings TP / (TP + FP) back to the
// reference precision at two-decimal rounding. Throws if no integer fits.
inline ReconstructedCounts reconstruct_counts(const ReferenceMetrics& pub, std::int64_t n) {
    ReconstructedCounts c{};
    for (std::size_t b = 0; b < 3; ++b) {
        const double tp = pub.sn_percent[b] * static_cast<double>(n) / 100.0;
        if (std::abs(tp - std::round(tp)) > 1e-9) throw std::runtime_error("SN does not give an integer TP");
        c.tp[b] = std::llround(tp);
        c.fn[b] = n - c.tp[b];
        std::optional<std::int64_t> fp;
        for (std::int64_t cand = 0; cand <= 2 * n; ++cand) {
            const double prec = 100.0 * static_cast<double>(c.tp[b]) / static_cast<double>(c.tp[b] + cand);
            if (std::abs(prec - pub.prec_percent[b]) < 0.005 + 1e-9) {
                if (fp) throw std::runtime_error("precision admits more than one FP count");
                fp = cand;
            }
        }
        if (!fp) throw std::runtime_error("no FP count reproduces the reference precision");
        c.fp[b] = *fp;
    }
    return c;
}

// Brute-force search for a non-negative matrix with the given diagonal, row
// off-diagonal sums (FN) and column off-diagonal sums (FP). With three
// classes one off-diagonal pair is free; the first feasible solution is
// returned. Metrics do not depend on the choice.
inline std::optional<hapbutton::evaluation::ConfusionMatrix> matrix_from_counts(const ReconstructedCounts& c) {
    for (std::int64_t c01 = 0; c01 <= c.fn[0]; ++c01) {
        for (std::int64_t c10 = 0; c10 <= c.fn[1]; ++c10) {
            const std::int64_t c02 = c.fn[0] - c01;
            const std::int64_t c12 = c.fn[1] - c10;
            const std::int64_t c20 = c.fp[0] - c10;
            const std::int64_t c21 = c.fn[2] - c20;
            if (c20 < 0 || c21 < 0) continue;
            if (c01 + c21 != c.fp[1] || c02 + c12 != c.fp[2]) continue;
            hapbutton::evaluation::ConfusionMatrix m;
            m.counts = {{{c.tp[0], c01, c02}, {c10, c.tp[1], c12}, {c20, c21, c.tp[2]}}};
            return m;
        }
    }
    return std::nullopt;
}

}  // namespace hapbutton::test
