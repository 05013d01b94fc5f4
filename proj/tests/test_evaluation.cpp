#include <doctest.h>

#include "hapbutton/error.hpp"
#include "hapbutton/evaluation.hpp"

#include "support/table_reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace hapbutton;
using namespace hapbutton::evaluation;

namespace {

// Reference per-button metrics, Latch / Toggle / Push.
const test::ReferenceMetrics group1_day1{{75, 67, 68}, {73.53, 63.81, 73.12}};
const test::ReferenceMetrics group1_day2{{92, 83, 79}, {90.20, 83.0, 80.61}};
const test::ReferenceMetrics group2_day1{{95, 83, 81}, {95.96, 79.81, 83.51}};
const test::ReferenceMetrics group2_day2{{100, 87, 90}, {100, 89.69, 87.38}};

MetricsReport reference_report(const test::ReferenceMetrics& pub) {
    const auto counts = test::reconstruct_counts(pub, 100);
    const auto cm = test::matrix_from_counts(counts);
    REQUIRE(cm.has_value());
    for (std::size_t b = 0; b < 3; ++b) REQUIRE(cm->row_sum(b) == 100);
    return metrics(*cm);
}

double pct(double v) { return std::round(v * 10000.0) / 100.0; }

ConfusionMatrix matrix(std::array<std::array<std::int64_t, 3>, 3> c) {
    ConfusionMatrix m;
    m.counts = c;
    return m;
}

}  // namespace

TEST_CASE("perfect classifier") {
    for (std::int64_t n : {1, 7, 100}) {
        const auto r = metrics(matrix({{{n, 0, 0}, {0, n, 0}, {0, 0, n}}}));
        for (const auto& m : r.per_button) {
            CHECK(m.accuracy == 1.0);
            CHECK(m.precision.value() == 1.0);
            CHECK(m.sensitivity.value() == 1.0);
        }
    }
}

TEST_CASE("group I day I latch counts") {
    const auto counts = test::reconstruct_counts(group1_day1, 100);
    CHECK(counts.tp[0] == 75);
    CHECK(counts.fn[0] == 25);
    CHECK(counts.fp[0] == 27);
    const auto r = reference_report(group1_day1);
    const auto& latch = r.at(ButtonType::Latch);
    CHECK(latch.tn == 173);
    CHECK(pct(latch.accuracy) == doctest::Approx(82.67));
    CHECK(pct(*latch.precision) == doctest::Approx(73.53));
    CHECK(pct(*latch.sensitivity) == doctest::Approx(75.0));
}

TEST_CASE("reconstructed matrices reproduce every reference accuracy") {
    const std::array<std::pair<const test::ReferenceMetrics*, std::array<double, 3>>, 4> tables{{
        {&group1_day1, {82.67, 76.33, 81.00}},
        {&group1_day2, {94.00, 88.67, 86.67}},
        {&group2_day1, {97.00, 87.33, 88.33}},
        {&group2_day2, {100.0, 92.33, 92.33}},
    }};
    for (const auto& [pub, acc] : tables) {
        const auto r = reference_report(*pub);
        for (std::size_t b = 0; b < 3; ++b) {
            CHECK(pct(r.per_button[b].accuracy) == doctest::Approx(acc[b]));
            CHECK(pct(*r.per_button[b].precision) == doctest::Approx(pub->prec_percent[b]));
            CHECK(pct(*r.per_button[b].sensitivity) == doctest::Approx(pub->sn_percent[b]));
        }
    }
}

TEST_CASE("accuracy improvements between days") {
    const auto g1 = improvement(reference_report(group1_day1), reference_report(group1_day2));
    CHECK(g1.accuracy[index_of(ButtonType::Latch)] == doctest::Approx(11.33).epsilon(1e-3));
    CHECK(g1.accuracy[index_of(ButtonType::Toggle)] == doctest::Approx(12.34).epsilon(1e-3));
    CHECK(g1.accuracy[index_of(ButtonType::Push)] == doctest::Approx(5.67).epsilon(1e-3));

    const auto g2 = improvement(reference_report(group2_day1), reference_report(group2_day2));
    CHECK(g2.accuracy[index_of(ButtonType::Latch)] == doctest::Approx(3.00));
    CHECK(g2.accuracy[index_of(ButtonType::Toggle)] == doctest::Approx(5.00));
    CHECK(g2.accuracy[index_of(ButtonType::Push)] == doctest::Approx(4.00));
    CHECK(g2.sensitivity[index_of(ButtonType::Push)].value() == doctest::Approx(9.0));

    const auto same = reference_report(group2_day1);
    const auto zero = improvement(same, same);
    for (double d : zero.accuracy) CHECK(d == 0.0);
}

TEST_CASE("unchosen button has no precision") {
    const auto r = metrics(matrix({{{5, 5, 0}, {3, 7, 0}, {4, 6, 0}}}));
    CHECK_FALSE(r.at(ButtonType::Push).precision.has_value());
    CHECK(r.at(ButtonType::Push).sensitivity.value() == 0.0);
    CHECK(r.at(ButtonType::Latch).precision.value() == doctest::Approx(5.0 / 12.0));
    CHECK(r.at(ButtonType::Toggle).precision.value() == doctest::Approx(7.0 / 18.0));

    CHECK_THROWS_AS(metrics(ConfusionMatrix{}), InvalidInput);
    CHECK_THROWS_AS(metrics(matrix({{{1, -1, 0}, {0, 1, 0}, {0, 0, 1}}})), InvalidInput);
}

TEST_CASE("count identities hold for random matrices") {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<std::int64_t> cell(0, 40);
    for (int trial = 0; trial < 300; ++trial) {
        ConfusionMatrix cm;
        for (auto& row : cm.counts) {
            for (auto& v : row) v = cell(rng);
        }
        if (cm.total() == 0) continue;
        const auto r = metrics(cm);
        double sn_sum = 0.0;
        bool balanced = true;
        for (std::size_t b = 0; b < 3; ++b) {
            const auto& m = r.per_button[b];
            CHECK(m.tp + m.fn == cm.row_sum(b));
            CHECK(m.tp + m.fp == cm.column_sum(b));
            CHECK(m.tp + m.fp + m.fn + m.tn == cm.total());
            CHECK(m.accuracy >= 0.0);
            CHECK(m.accuracy <= 1.0);
            if (m.sensitivity) sn_sum += *m.sensitivity;
            balanced = balanced && cm.row_sum(b) == cm.row_sum(0);
        }
        if (balanced && cm.row_sum(0) > 0) {
            const double trace = static_cast<double>(cm.counts[0][0] + cm.counts[1][1] + cm.counts[2][2]);
            CHECK(sn_sum / 3.0 == doctest::Approx(trace / static_cast<double>(cm.total())));
        }
    }
}

TEST_CASE("chance simulation") {
    const auto big = simulate_chance(10000, 2024);
    const auto r = metrics(big);
    for (const auto& m : r.per_button) {
        CHECK(*m.sensitivity >= 0.318);
        CHECK(*m.sensitivity <= 0.348);
    }
    for (std::uint64_t seed : {1ULL, 99ULL, 123456789ULL}) {
        const auto one = simulate_chance(1, seed);
        for (std::size_t b = 0; b < 3; ++b) CHECK(one.row_sum(b) == 1);
        CHECK(simulate_chance(50, seed) == simulate_chance(50, seed));
    }
    CHECK_FALSE(simulate_chance(50, 1) == simulate_chance(50, 2));
    CHECK_THROWS_AS(simulate_chance(0, 1), InvalidParameter);
}

TEST_CASE("rating normalization examples") {
    RatingTable two{{"P1", "P2"}, {"a", "b"}, {{2, 8}, {1, 4}}};
    const auto n = normalize_ratings(two);
    const double ggm = 2.0 * std::sqrt(2.0);
    CHECK(geometric_mean({2, 8, 1, 4}) == doctest::Approx(ggm));
    CHECK(n.ratings[0][0] / 2.0 == doctest::Approx(0.7071).epsilon(1e-4));
    CHECK(n.ratings[1][0] / 1.0 == doctest::Approx(1.4142).epsilon(1e-4));

    RatingTable same{{"P1", "P2", "P3"}, {"a", "b", "c"}, {{3, 9, 27}, {3, 9, 27}, {3, 9, 27}}};
    const auto s = normalize_ratings(same);
    for (std::size_t p = 0; p < 3; ++p) {
        for (std::size_t i = 0; i < 3; ++i) CHECK(s.ratings[p][i] == doctest::Approx(same.ratings[p][i]));
    }

    RatingTable single{{"P1"}, {"a"}, {{42.5}}};
    CHECK(normalize_ratings(single).ratings[0][0] == doctest::Approx(42.5));

    RatingTable bad{{"P1", "P2"}, {"a", "b"}, {{2, 8}, {0, 4}}};
    try {
        normalize_ratings(bad);
        FAIL("expected InvalidInput");
    } catch (const InvalidInput& e) {
        CHECK(std::string(e.what()).find("P2") != std::string::npos);
        CHECK(std::string(e.what()).find("item a") != std::string::npos);
    }
}

TEST_CASE("normalized participants share the grand geometric mean") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(1, 100);
    for (int trial = 0; trial < 30; ++trial) {
        RatingTable t;
        const std::size_t np = 2 + trial % 6, ni = 1 + trial % 9;
        for (std::size_t p = 0; p < np; ++p) {
            t.participants.push_back("P" + std::to_string(p));
            std::vector<double> row;
            for (std::size_t i = 0; i < ni; ++i) row.push_back(u(rng));
            t.ratings.push_back(row);
        }
        for (std::size_t i = 0; i < ni; ++i) t.items.push_back("item" + std::to_string(i));
        std::vector<double> all;
        for (const auto& row : t.ratings) all.insert(all.end(), row.begin(), row.end());
        const double ggm = geometric_mean(all);

        const auto n = normalize_ratings(t);
        for (const auto& row : n.ratings) CHECK(geometric_mean(row) == doctest::Approx(ggm).epsilon(1e-12));

        // Permuting participants permutes the output rows the same way.
        RatingTable perm = t;
        std::reverse(perm.participants.begin(), perm.participants.end());
        std::reverse(perm.ratings.begin(), perm.ratings.end());
        const auto np_out = normalize_ratings(perm);
        for (std::size_t p = 0; p < np; ++p) {
            for (std::size_t i = 0; i < ni; ++i) {
                CHECK(np_out.ratings[np - 1 - p][i] == doctest::Approx(n.ratings[p][i]).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("confusion and rating CSV round trips") {
    const auto cm = matrix({{{75, 10, 15}, {23, 67, 10}, {4, 28, 68}}});
    const auto text = format_confusion_csv(cm);
    CHECK(text == "presented,Latch,Toggle,Push\nLatch,75,10,15\nToggle,23,67,10\nPush,4,28,68\n");
    CHECK(parse_confusion_csv(text, "mem") == cm);
    // Column and row order may differ on input.
    const auto shuffled = parse_confusion_csv("presented,Push,Latch,Toggle\nPush,68,4,28\nLatch,15,75,10\nToggle,10,23,67\n", "s");
    CHECK(shuffled == cm);
    CHECK_THROWS_AS(parse_confusion_csv("presented,Latch,Toggle,Push\nLatch,1,2,3\n", "m"), InvalidInput);
    CHECK_THROWS_AS(parse_confusion_csv("presented,Latch,Toggle,Push\nLatch,1,2.5,3\nToggle,1,1,1\nPush,1,1,1\n", "m"),
                    InvalidInput);

    const auto rt = parse_ratings_csv("participant,soft-hard,light-heavy\nP1,20,35.5\nP2,80,12\n", "r");
    CHECK(rt.items == std::vector<std::string>{"soft-hard", "light-heavy"});
    CHECK(format_ratings_csv(rt) == "participant,soft-hard,light-heavy\nP1,20,35.5\nP2,80,12\n");
    CHECK_THROWS_AS(parse_ratings_csv("participant,a\nP1,-3\n", "r"), InvalidInput);
}

TEST_CASE("text table and json report") {
    const auto d1 = reference_report(group1_day1);
    const auto table = format_metrics_table({{"Day-I", d1}});
    CHECK(table.find("82.67") != std::string::npos);
    CHECK(table.find("63.81") != std::string::npos);
    CHECK(table.find("68.00") != std::string::npos);
    const auto json = report_json({{"Day-I", d1}});
    CHECK(json.find("\"Latch\"") != std::string::npos);
    CHECK(json.find("\"tn\": 173") != std::string::npos);
}
