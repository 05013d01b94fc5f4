#include "hapbutton/representative.hpp"

#include "hapbutton/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hapbutton::representative {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

double local(double a, double b, LocalDistance d) {
    const double diff = a - b;
    return d == LocalDistance::absolute ? std::abs(diff) : diff * diff;
}

void check_inputs(std::span<const double> x, std::span<const double> y, const DtwOptions& opts) {
    if (x.empty() || y.empty()) throw InvalidInput("DTW needs two non-empty signals");
    if (opts.band_radius) {
        const std::size_t gap = x.size() > y.size() ? x.size() - y.size() : y.size() - x.size();
        if (gap > *opts.band_radius) {
            throw InvalidParameter("band radius " + std::to_string(*opts.band_radius) +
                                   " cannot connect signals of lengths " + std::to_string(x.size()) +
                                   " and " + std::to_string(y.size()));
        }
    }
}

// Column range [lo, hi] of row i allowed by the band.
std::pair<std::size_t, std::size_t> row_span(std::size_t i, std::size_t m, const DtwOptions& opts) {
    if (!opts.band_radius) return {0, m - 1};
    const std::size_t r = *opts.band_radius;
    const std::size_t lo = i > r ? i - r : 0;
    const std::size_t hi = std::min(m - 1, i + r);
    return {lo, hi};
}

}  // namespace

WarpPath dtw(std::span<const double> x, std::span<const double> y, const DtwOptions& opts) {
    check_inputs(x, y, opts);
    const std::size_t n = x.size();
    const std::size_t m = y.size();
    std::vector<double> acc(n * m, inf);
    auto at = [&](std::size_t i, std::size_t j) -> double& { return acc[i * m + j]; };

    for (std::size_t i = 0; i < n; ++i) {
        const auto [lo, hi] = row_span(i, m, opts);
        for (std::size_t j = lo; j <= hi; ++j) {
            const double c = local(x[i], y[j], opts.distance);
            if (i == 0 && j == 0) {
                at(i, j) = c;
                continue;
            }
            double best = inf;
            if (i > 0 && j > 0) best = at(i - 1, j - 1);
            if (i > 0) best = std::min(best, at(i - 1, j));
            if (j > 0) best = std::min(best, at(i, j - 1));
            at(i, j) = c + best;
        }
    }

    WarpPath path;
    path.total_cost = at(n - 1, m - 1);
    std::size_t i = n - 1;
    std::size_t j = m - 1;
    path.pairs.emplace_back(i, j);
    while (i > 0 || j > 0) {
        if (i == 0) {
            --j;
        } else if (j == 0) {
            --i;
        } else {
            const double diag = at(i - 1, j - 1);
            const double up = at(i - 1, j);
            const double left = at(i, j - 1);
            if (diag <= up && diag <= left) {
                --i;
                --j;
            } else if (up <= left) {
                --i;
            } else {
                --j;
            }
        }
        path.pairs.emplace_back(i, j);
    }
    std::reverse(path.pairs.begin(), path.pairs.end());
    return path;
}

WarpPath dtw(const TimeSeries& x, const TimeSeries& y, const DtwOptions& opts) {
    return dtw(x.samples(), y.samples(), opts);
}

double dtw_cost(std::span<const double> x, std::span<const double> y, const DtwOptions& opts) {
    check_inputs(x, y, opts);
    const std::size_t n = x.size();
    const std::size_t m = y.size();
    std::vector<double> prev(m, inf), cur(m, inf);
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(cur.begin(), cur.end(), inf);
        const auto [lo, hi] = row_span(i, m, opts);
        for (std::size_t j = lo; j <= hi; ++j) {
            const double c = local(x[i], y[j], opts.distance);
            if (i == 0 && j == 0) {
                cur[j] = c;
                continue;
            }
            double best = inf;
            if (i > 0 && j > 0) best = prev[j - 1];
            if (i > 0) best = std::min(best, prev[j]);
            if (j > 0) best = std::min(best, cur[j - 1]);
            cur[j] = c + best;
        }
        std::swap(prev, cur);
    }
    return prev[m - 1];
}

std::vector<std::vector<double>> dtw_cost_matrix(std::span<const TimeSeries> signals,
                                                 const DtwOptions& opts) {
    const std::size_t n = signals.size();
    std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            d[a][b] = d[b][a] = dtw_cost(signals[a].samples(), signals[b].samples(), opts);
        }
    }
    return d;
}

std::size_t medoid_index(std::span<const TimeSeries> signals, const DtwOptions& opts) {
    if (signals.empty()) throw InvalidInput("medoid of an empty set");
    const auto d = dtw_cost_matrix(signals, opts);
    std::size_t best = 0;
    double best_sum = inf;
    for (std::size_t a = 0; a < signals.size(); ++a) {
        double sum = 0.0;
        for (double v : d[a]) sum += v;
        if (sum < best_sum) {
            best_sum = sum;
            best = a;
        }
    }
    return best;
}

TimeSeries dtw_barycenter(std::span<const TimeSeries> signals, const DtwOptions& opts, int iterations) {
    const auto seed = medoid_index(signals, opts);
    std::vector<double> average(signals[seed].samples().begin(), signals[seed].samples().end());
    for (int it = 0; it < iterations; ++it) {
        std::vector<double> sum(average.size(), 0.0);
        std::vector<std::size_t> count(average.size(), 0);
        for (const auto& s : signals) {
            for (const auto& [i, j] : dtw(average, s.samples(), opts).pairs) {
                sum[i] += s[j];
                ++count[i];
            }
        }
        std::vector<double> next(average.size());
        for (std::size_t i = 0; i < next.size(); ++i) next[i] = sum[i] / static_cast<double>(count[i]);
        if (next == average) break;
        average = std::move(next);
    }
    return signals[seed].with_samples(std::move(average));
}

TimeSeries participant_representative(std::span<const TimeSeries> trials,
                                      const RepresentativeOptions& opts) {
    if (trials.empty()) throw InvalidInput("representative of an empty trial list");
    if (opts.method == RepresentativeMethod::barycenter) {
        return dtw_barycenter(trials, opts.dtw, opts.barycenter_iterations);
    }
    return trials[medoid_index(trials, opts.dtw)];
}

ButtonProfile button_profile(ButtonType button, std::span<const TimeSeries> per_participant,
                             std::vector<std::string> participants, double pooled_mean_force_N,
                             const RepresentativeOptions& opts) {
    if (per_participant.empty()) throw InvalidInput("button profile needs at least one participant");
    if (pooled_mean_force_N < 0.0) throw InvalidInput("mean activation force must be non-negative");
    return ButtonProfile{button, participant_representative(per_participant, opts),
                         pooled_mean_force_N, std::move(participants)};
}

}  // namespace hapbutton::representative
