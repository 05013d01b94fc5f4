// Acceptance checks. One line per criterion: PASS or FAIL with wall time.
// Exit status is non-zero when any criterion fails.

#include "hapbutton/activation.hpp"
#include "hapbutton/evaluation.hpp"
#include "hapbutton/pipeline.hpp"
#include "hapbutton/representative.hpp"
#include "hapbutton/synth.hpp"
#include "hapbutton/sysid.hpp"

#include "support/dtw_oracle.hpp"
#include "support/table_reconstruction.hpp"
#include "support/temp_dir.hpp"
#include "support/tree_snapshot.hpp"

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace hapbutton;

namespace {

constexpr double pi = std::numbers::pi;

// Collects failed expectations for one criterion.
class Check {
public:
    void expect(bool ok, const std::string& what) {
        if (!ok && failures_.size() < 8) failures_.push_back(what);
        failed_ = failed_ || !ok;
    }
    void near(double got, double want, double tol, const std::string& what) {
        std::ostringstream os;
        os << what << ": got " << got << ", want " << want << " +- " << tol;
        expect(std::abs(got - want) <= tol, os.str());
    }
    [[nodiscard]] bool failed() const { return failed_; }
    [[nodiscard]] const std::vector<std::string>& failures() const { return failures_; }

private:
    bool failed_ = false;
    std::vector<std::string> failures_;
};

double pct(double fraction) { return 100.0 * fraction; }

evaluation::MetricsReport reference(const test::ReferenceMetrics& pub, Check& c) {
    const auto counts = test::reconstruct_counts(pub, 100);
    const auto cm = test::matrix_from_counts(counts);
    c.expect(cm.has_value(), "reference metrics admit a 100-per-button matrix");
    return cm ? evaluation::metrics(*cm) : evaluation::MetricsReport{};
}

const test::ReferenceMetrics group1_day1{{75, 67, 68}, {73.53, 63.81, 73.12}};
const test::ReferenceMetrics group2_day1{{95, 83, 81}, {95.96, 79.81, 83.51}};
const test::ReferenceMetrics group2_day2{{100, 87, 90}, {100, 89.69, 87.38}};

void metrics_day_one(Check& c) {
    const auto r = reference(group1_day1, c);
    const std::array<double, 3> acc{82.67, 76.33, 81.00};
    const std::array<double, 3> prec{73.53, 63.81, 73.12};
    const auto& latch = r.at(ButtonType::Latch);
    c.expect(latch.tp == 75 && latch.fp == 27, "Latch TP=75, FP=27");
    c.expect(r.at(ButtonType::Toggle).tp == 67, "Toggle TP=67");
    c.expect(r.at(ButtonType::Push).tp == 68, "Push TP=68");
    for (auto b : all_buttons) {
        const auto& m = r.at(b);
        const std::string name(to_string(b));
        c.near(pct(m.accuracy), acc[index_of(b)], 0.01, name + " ACC");
        c.expect(m.precision.has_value(), name + " has precision");
        if (m.precision) c.near(pct(*m.precision), prec[index_of(b)], 0.01, name + " PREC");
    }
}

void metrics_day_two(Check& c) {
    const auto before = reference(group2_day1, c);
    const auto after = reference(group2_day2, c);
    const auto& latch = after.at(ButtonType::Latch);
    c.expect(latch.fn == 0 && latch.fp == 0, "perfect Latch row and column");
    c.near(pct(latch.accuracy), 100.0, 1e-12, "Latch ACC");
    c.near(pct(latch.precision.value_or(0)), 100.0, 1e-12, "Latch PREC");
    c.near(pct(latch.sensitivity.value_or(0)), 100.0, 1e-12, "Latch SN");
    const auto d = evaluation::improvement(before, after);
    const std::array<double, 3> want{3.0, 5.0, 4.0};
    for (auto b : all_buttons) {
        c.near(d.accuracy[index_of(b)], want[index_of(b)], 0.01, std::string(to_string(b)) + " ACC delta");
    }
}

void chance_level(Check& c) {
    const auto r = evaluation::metrics(evaluation::simulate_chance(10000, 1));
    for (auto b : all_buttons) {
        const double sn = pct(r.at(b).sensitivity.value_or(0));
        c.expect(sn >= 31.8 && sn <= 34.8, std::string(to_string(b)) + " SN " + std::to_string(sn));
    }
}

void dtw_oracle(Check& c) {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> len(1, 8), val(0, 3);
    std::size_t pairs = 0;
    // Every length combination first, then random draws.
    auto draw = [&](std::size_t n) {
        std::vector<double> v(n);
        for (double& x : v) x = val(rng);
        return v;
    };
    auto compare = [&](const std::vector<double>& x, const std::vector<double>& y) {
        const double fast = representative::dtw_cost(x, y);
        const double slow = test::brute_force_dtw(x, y);
        if (fast != slow) {
            c.expect(false, "cost " + std::to_string(fast) + " vs oracle " + std::to_string(slow) + " at lengths " +
                                std::to_string(x.size()) + "x" + std::to_string(y.size()));
        }
        ++pairs;
    };
    for (std::size_t n = 1; n <= 8; ++n) {
        for (std::size_t m = 1; m <= 8; ++m) {
            for (int rep = 0; rep < 20; ++rep) compare(draw(n), draw(m));
        }
    }
    while (pairs < 12000) compare(draw(static_cast<std::size_t>(len(rng))), draw(static_cast<std::size_t>(len(rng))));
    c.expect(pairs >= 10000, "at least 10000 pairs");
}

// Analytic compliance of a single resonance, independent of the fixture code.
FrequencyResponse analytic_plate(double f0, double q) {
    FrequencyResponse h;
    h.quantity = FrfQuantity::displacement_per_volt;
    const double w0 = 2 * pi * f0;
    for (int f = 10; f <= 625; ++f) {
        const std::complex<double> s(0.0, 2 * pi * f);
        h.frequencies_hz.push_back(f);
        h.values.push_back(1e-6 * w0 * w0 / (s * s + (w0 / q) * s + w0 * w0));
    }
    return h;
}

void sysid_recovery(Check& c) {
    const auto h = analytic_plate(263.5, 30.0);
    const auto sel = sysid::select_order(h, 2, 8);
    c.expect(sel.model.n_poles() == 2, "order selection picks 2 poles, got " + std::to_string(sel.model.n_poles()));
    const auto poles = sel.model.poles();
    c.expect(!poles.empty(), "model has poles");
    if (poles.empty()) return;
    const auto m = sysid::modal_parameters(poles.front());
    c.near(m.natural_hz, 263.5, 0.01 * 263.5, "natural frequency");
    c.near(m.damping, 1.0 / 60.0, 0.05 / 60.0, "damping ratio");
}

void closed_loop(Check& c) {
    const auto acc = differentiate_frf(analytic_plate(263.5, 30.0), 2);
    const auto models = sysid::fit_plate_models(acc, 0.01, 2, 12);
    // 150 ms decaying burst at 5 kHz.
    std::vector<double> e(750);
    for (std::size_t k = 0; k < e.size(); ++k) {
        const double t = static_cast<double>(k) / 5000.0;
        e[k] = std::exp(-t / 0.03) * std::sin(pi / 2 * std::min(1.0, t / 0.005));
    }
    const representative::ButtonProfile profile{ButtonType::Push, TimeSeries(e, 5000, Unit::acceleration_m_s2), 2.5,
                                                {"P01"}};
    const auto v = sysid::render_voltage(profile, models.inverse.model);
    const auto a = sysid::reconstruct(v, models.forward.model);
    const auto target = synth::modulate(profile.representative_acceleration);
    const auto cmp = sysid::compare_waveforms(target, a, {.band_hz = std::pair{213.5, 313.5}});
    c.expect(cmp.nrmse_aligned <= 0.10, "aligned band NRMSE " + std::to_string(cmp.nrmse_aligned));
    const auto spec = power_spectral_density(a);
    c.near(spec.peak_frequency_hz(), 263.5, spec.bin_width_hz(), "reconstruction PSD peak");
}

void modulation_properties(Check& c) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> e(2000);
        for (double& x : e) x = 6.0 * (u(rng) - 0.5);
        const auto out = synth::modulate(TimeSeries(e, 5000, Unit::acceleration_m_s2));
        c.expect(out[0] == 0.0, "output at t=0 is exactly zero");
        for (std::size_t k = 0; k < e.size(); ++k) {
            if (std::abs(out[k]) > std::abs(e[k])) {
                c.expect(false, "sample " + std::to_string(k) + " exceeds its envelope");
                break;
            }
        }
    }
    // Envelopes built from tones below f_c / 4.
    const double fc = 263.5;
    for (int trial = 0; trial < 8; ++trial) {
        const double f1 = 2.0 + 30.0 * u(rng), f2 = 20.0 + (fc / 4.0 - 21.0) * u(rng);
        const double p1 = 2 * pi * u(rng), p2 = 2 * pi * u(rng);
        std::vector<double> e(10000);
        for (std::size_t k = 0; k < e.size(); ++k) {
            const double t = static_cast<double>(k) / 5000.0;
            e[k] = 2.0 + 0.8 * std::sin(2 * pi * f1 * t + p1) + 0.5 * std::sin(2 * pi * f2 * t + p2);
        }
        const TimeSeries env(e, 5000, Unit::acceleration_m_s2);
        const auto rec = synth::recover_envelope(synth::modulate(env), fc);
        const auto ref = env.slice(1000, 9000);
        const auto est = rec.slice(1000, 9000);
        const double err = synth::nrmse(ref.samples(), est.samples());
        c.expect(err <= 0.10, "envelope recovery NRMSE " + std::to_string(err) + " with tones " + std::to_string(f1) +
                                  ", " + std::to_string(f2) + " Hz");
    }
}

void activation_ordering(Check& c) {
    std::array<double, 3> forces{};
    forces[index_of(ButtonType::Toggle)] = 1.0;
    forces[index_of(ButtonType::Push)] = 2.0;
    forces[index_of(ButtonType::Latch)] = 3.0;
    const auto th = activation::thresholds_from_forces({50.0, 150.0, "P01"}, forces);
    c.near(th.at(ButtonType::Toggle), 50.0, 1e-12, "Toggle threshold");
    c.near(th.at(ButtonType::Push), 100.0, 1e-12, "Push threshold");
    c.near(th.at(ButtonType::Latch), 150.0, 1e-12, "Latch threshold");

    // 1 mm2 per sample: the sample index equals the area.
    std::vector<double> ramp(201);
    for (std::size_t k = 0; k < ramp.size(); ++k) ramp[k] = static_cast<double>(k);
    const TimeSeries stream(ramp, 60.0, Unit::area_mm2);
    std::vector<std::pair<std::size_t, ButtonType>> fired;
    for (auto b : all_buttons) {
        const auto ev = activation::run_stream(b, stream, th);
        c.expect(ev.size() == 1, std::string(to_string(b)) + " fires exactly once on the ramp");
        if (ev.empty()) continue;
        const double want = th.at(b);
        c.near(static_cast<double>(ev.front().sample_index), want, 1.0, std::string(to_string(b)) + " firing area");
        fired.emplace_back(ev.front().sample_index, b);
    }
    std::sort(fired.begin(), fired.end());
    c.expect(fired.size() == 3 && fired[0].second == ButtonType::Toggle && fired[1].second == ButtonType::Push &&
                 fired[2].second == ButtonType::Latch,
             "firing order Toggle, Push, Latch");

    // A noisy trace that crosses the Push threshold once.
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> noise(-4.0, 4.0);
    std::vector<double> trace;
    for (int k = 0; k < 60; ++k) trace.push_back(40.0 + 70.0 * k / 59.0 + noise(rng));
    for (int k = 0; k < 240; ++k) trace.push_back(110.0 + noise(rng));
    const auto ev = activation::run_stream(ButtonType::Push, TimeSeries(trace, 60.0, Unit::area_mm2), th,
                                           {.hysteresis = 0.8});
    c.expect(ev.size() == 1, "noisy single crossing yields one event, got " + std::to_string(ev.size()));
}

void rating_normalization(Check& c) {
    // Two participants, ratings {2, 8} and {1, 4}: GGM = 2 sqrt 2, own GMs 4 and 2.
    const evaluation::RatingTable two{{"P1", "P2"}, {"a", "b"}, {{2, 8}, {1, 4}}};
    const auto n = evaluation::normalize_ratings(two);
    const double ggm = std::pow(2.0 * 8.0 * 1.0 * 4.0, 0.25);
    const std::array<double, 2> brute{ggm / std::sqrt(2.0 * 8.0), ggm / std::sqrt(1.0 * 4.0)};
    c.near(brute[0], 0.7071, 1e-4, "P1 factor (brute force)");
    c.near(brute[1], 1.4142, 1e-4, "P2 factor (brute force)");
    for (std::size_t p = 0; p < 2; ++p) {
        for (std::size_t i = 0; i < 2; ++i) {
            c.near(n.ratings[p][i] / two.ratings[p][i], brute[p], 1e-12, "worked example factor");
        }
    }
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(1.0, 100.0);
    for (int trial = 0; trial < 50; ++trial) {
        evaluation::RatingTable t;
        const std::size_t np = 2 + trial % 7, ni = 1 + trial % 11;
        for (std::size_t i = 0; i < ni; ++i) t.items.push_back("item" + std::to_string(i));
        std::vector<double> all;
        for (std::size_t p = 0; p < np; ++p) {
            t.participants.push_back("P" + std::to_string(p));
            std::vector<double> row;
            for (std::size_t i = 0; i < ni; ++i) row.push_back(u(rng));
            all.insert(all.end(), row.begin(), row.end());
            t.ratings.push_back(std::move(row));
        }
        double log_sum = 0.0;
        for (double v : all) log_sum += std::log(v);
        const double grand = std::exp(log_sum / static_cast<double>(all.size()));
        const auto out = evaluation::normalize_ratings(t);
        for (const auto& row : out.ratings) {
            double s = 0.0;
            for (double v : row) s += std::log(v);
            const double gm = std::exp(s / static_cast<double>(row.size()));
            c.expect(std::abs(gm - grand) <= 1e-9 * grand, "participant GM equals GGM");
        }
    }
}

void determinism(Check& c) {
    test::TempDir tmp;
    const auto cfg = pipeline::load_config(pipeline::make_fixture(tmp.path()));
    pipeline::cmd_pipeline(cfg);
    const auto first = test::snapshot(cfg.resolve(cfg.out_dir));
    pipeline::cmd_pipeline(cfg);
    const auto second = test::snapshot(cfg.resolve(cfg.out_dir));
    c.expect(!first.empty(), "pipeline wrote outputs");
    c.expect(first.size() == second.size(), "same file set");
    for (const auto& [name, bytes] : first) {
        const auto it = second.find(name);
        c.expect(it != second.end() && it->second == bytes, "identical bytes in " + name);
    }
}

struct Criterion {
    int id;
    const char* title;
    double limit_s;  // <= 0 means no runtime bound
    std::function<void(Check&)> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "identification metrics, Group-I Day-I table", 1.0, metrics_day_one},
        {2, "identification metrics, Group-II Day-II and improvements", 1.0, metrics_day_two},
        {3, "chance level near one third", 1.0, chance_level},
        {4, "DTW equals exhaustive path enumeration", 60.0, dtw_oracle},
        {5, "plate resonance recovery and order selection", 10.0, sysid_recovery},
        {6, "closed-loop reconstruction", 10.0, closed_loop},
        {7, "amplitude modulation properties", 0.0, modulation_properties},
        {8, "activation ordering and hysteresis", 0.0, activation_ordering},
        {9, "rating normalization", 0.0, rating_normalization},
        {10, "pipeline determinism", 0.0, determinism},
    };
    int failed = 0;
    for (const auto& cr : criteria) {
        Check check;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            cr.run(check);
        } catch (const std::exception& e) {
            check.expect(false, std::string("exception: ") + e.what());
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (cr.limit_s > 0.0 && s > cr.limit_s) {
            check.expect(false, "runtime " + std::to_string(s) + " s exceeds " + std::to_string(cr.limit_s) + " s");
        }
        std::printf("criterion %2d: %s (%.3f s) %s\n", cr.id, check.failed() ? "FAIL" : "PASS", s, cr.title);
        for (const auto& why : check.failures()) std::printf("    %s\n", why.c_str());
        if (check.failed()) ++failed;
    }
    std::fflush(stdout);
    return failed == 0 ? 0 : 1;
}
