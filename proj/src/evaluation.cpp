#include "hapbutton/evaluation.hpp"

#include "hapbutton/error.hpp"
#include "hapbutton/io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

namespace hapbutton::evaluation {

std::int64_t ConfusionMatrix::total() const {
    std::int64_t t = 0;
    for (const auto& row : counts) {
        for (auto v : row) t += v;
    }
    return t;
}

std::int64_t ConfusionMatrix::row_sum(std::size_t presented) const {
    std::int64_t t = 0;
    for (auto v : counts.at(presented)) t += v;
    return t;
}

std::int64_t ConfusionMatrix::column_sum(std::size_t response) const {
    std::int64_t t = 0;
    for (const auto& row : counts) t += row.at(response);
    return t;
}

void ConfusionMatrix::validate() const {
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            if (counts[i][j] < 0) {
                throw InvalidInput("confusion cell (" + std::string(to_string(all_buttons[i])) + ", " +
                                   std::string(to_string(all_buttons[j])) + ") is negative");
            }
        }
    }
}

MetricsReport metrics(const ConfusionMatrix& cm) {
    cm.validate();
    const auto total = cm.total();
    if (total == 0) throw InvalidInput("confusion matrix is empty");
    MetricsReport out{};
    for (std::size_t b = 0; b < 3; ++b) {
        ButtonMetrics& m = out.per_button[b];
        m.tp = cm.counts[b][b];
        m.fn = cm.row_sum(b) - m.tp;
        m.fp = cm.column_sum(b) - m.tp;
        m.tn = total - m.tp - m.fn - m.fp;
        m.accuracy = static_cast<double>(m.tp + m.tn) / static_cast<double>(total);
        if (m.tp + m.fp > 0) m.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
        if (m.tp + m.fn > 0) m.sensitivity = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
    }
    return out;
}

ConfusionMatrix simulate_chance(std::int64_t trials_per_button, std::uint64_t seed) {
    if (trials_per_button <= 0) throw InvalidParameter("trials per button must be positive");
    std::mt19937_64 rng(seed);
    // Rejection keeps the three responses exactly equiprobable.
    constexpr std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % 3;
    ConfusionMatrix cm;
    for (std::size_t b = 0; b < 3; ++b) {
        for (std::int64_t t = 0; t < trials_per_button; ++t) {
            std::uint64_t r;
            do {
                r = rng();
            } while (r >= limit);
            ++cm.counts[b][r % 3];
        }
    }
    return cm;
}

MetricDeltas improvement(const MetricsReport& before, const MetricsReport& after) {
    MetricDeltas d{};
    for (std::size_t b = 0; b < 3; ++b) {
        const auto& x = before.per_button[b];
        const auto& y = after.per_button[b];
        d.accuracy[b] = 100.0 * (y.accuracy - x.accuracy);
        if (x.precision && y.precision) d.precision[b] = 100.0 * (*y.precision - *x.precision);
        if (x.sensitivity && y.sensitivity) d.sensitivity[b] = 100.0 * (*y.sensitivity - *x.sensitivity);
    }
    return d;
}

void RatingTable::validate() const {
    if (participants.empty() || items.empty()) throw InvalidInput("rating table is empty");
    if (ratings.size() != participants.size()) throw InvalidInput("rating rows do not match participants");
    for (std::size_t p = 0; p < ratings.size(); ++p) {
        if (ratings[p].size() != items.size()) {
            throw InvalidInput("participant " + participants[p] + " has " + std::to_string(ratings[p].size()) +
                               " ratings, expected " + std::to_string(items.size()));
        }
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (!(ratings[p][i] > 0.0) || !std::isfinite(ratings[p][i])) {
                throw InvalidInput("rating for participant " + participants[p] + ", item " + items[i] +
                                   " must be positive");
            }
        }
    }
}

double geometric_mean(const std::vector<double>& values) {
    if (values.empty()) throw InvalidInput("geometric mean of nothing");
    double acc = 0.0;
    for (double v : values) {
        if (!(v > 0.0)) throw InvalidInput("geometric mean needs positive values");
        acc += std::log(v);
    }
    return std::exp(acc / static_cast<double>(values.size()));
}

RatingTable normalize_ratings(const RatingTable& table) {
    table.validate();
    std::vector<double> all;
    for (const auto& row : table.ratings) all.insert(all.end(), row.begin(), row.end());
    const double ggm = geometric_mean(all);
    RatingTable out = table;
    for (auto& row : out.ratings) {
        const double factor = ggm / geometric_mean(row);
        for (double& v : row) v *= factor;
    }
    return out;
}

namespace {

struct TextTable {
    std::vector<std::string> header;
    std::vector<std::pair<std::string, std::vector<double>>> rows;  // label + numeric cells
};

TextTable parse_labeled_csv(std::string_view text, std::string_view source) {
    TextTable t;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (io::trim(line).empty() || line.front() == '#') {
            if (end == text.size()) break;
            continue;
        }
        const auto fields = io::split(line, ',');
        if (t.header.empty()) {
            for (auto f : fields) t.header.emplace_back(io::trim(f));
        } else {
            if (fields.size() != t.header.size()) {
                throw InvalidInput(std::string(source) + ": row " + std::to_string(line_no) + " has " +
                                   std::to_string(fields.size()) + " fields, expected " +
                                   std::to_string(t.header.size()));
            }
            std::vector<double> cells;
            const std::string where = std::string(source) + " row " + std::to_string(line_no);
            for (std::size_t k = 1; k < fields.size(); ++k) cells.push_back(io::parse_double(io::trim(fields[k]), where));
            t.rows.emplace_back(std::string(io::trim(fields[0])), std::move(cells));
        }
        if (end == text.size()) break;
    }
    if (t.header.empty()) throw InvalidInput(std::string(source) + ": missing header");
    return t;
}

std::string percent(const std::optional<double>& v) {
    if (!v) return "-";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", 100.0 * *v);
    return buf;
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.insert(0, width - s.size(), ' ');
    return s;
}

}  // namespace

ConfusionMatrix parse_confusion_csv(std::string_view text, std::string_view source) {
    const auto t = parse_labeled_csv(text, source);
    if (t.header.size() != 4) throw InvalidInput(std::string(source) + ": expected presented + 3 response columns");
    std::array<std::size_t, 3> column_of{};
    for (std::size_t k = 1; k < 4; ++k) column_of[index_of(button_from_string(t.header[k]))] = k - 1;
    ConfusionMatrix cm;
    std::array<bool, 3> seen{};
    for (const auto& [label, cells] : t.rows) {
        const auto row = index_of(button_from_string(label));
        if (seen[row]) throw InvalidInput(std::string(source) + ": duplicate row for " + label);
        seen[row] = true;
        for (std::size_t j = 0; j < 3; ++j) {
            const double v = cells[column_of[j]];
            if (v < 0.0 || v != std::floor(v)) {
                throw InvalidInput(std::string(source) + ": count in row " + label + " is not a non-negative integer");
            }
            cm.counts[row][j] = static_cast<std::int64_t>(v);
        }
    }
    for (std::size_t b = 0; b < 3; ++b) {
        if (!seen[b]) throw InvalidInput(std::string(source) + ": missing row for " + std::string(to_string(all_buttons[b])));
    }
    return cm;
}

ConfusionMatrix read_confusion_csv(const std::filesystem::path& path) {
    return parse_confusion_csv(io::read_text(path), path.string());
}

std::string format_confusion_csv(const ConfusionMatrix& cm) {
    std::string out = "presented";
    for (auto b : all_buttons) out += "," + std::string(to_string(b));
    out += '\n';
    for (auto b : all_buttons) {
        out += to_string(b);
        for (std::size_t j = 0; j < 3; ++j) out += "," + std::to_string(cm.counts[index_of(b)][j]);
        out += '\n';
    }
    return out;
}

RatingTable parse_ratings_csv(std::string_view text, std::string_view source) {
    auto t = parse_labeled_csv(text, source);
    RatingTable r;
    r.items.assign(t.header.begin() + 1, t.header.end());
    for (auto& [label, cells] : t.rows) {
        r.participants.push_back(label);
        r.ratings.push_back(std::move(cells));
    }
    r.validate();
    return r;
}

RatingTable read_ratings_csv(const std::filesystem::path& path) {
    return parse_ratings_csv(io::read_text(path), path.string());
}

std::string format_ratings_csv(const RatingTable& table) {
    std::string out = "participant";
    for (const auto& item : table.items) out += "," + item;
    out += '\n';
    for (std::size_t p = 0; p < table.participants.size(); ++p) {
        out += table.participants[p];
        for (double v : table.ratings[p]) out += "," + io::format_double(v);
        out += '\n';
    }
    return out;
}

std::string report_json(const std::vector<std::pair<std::string, MetricsReport>>& conditions) {
    nlohmann::ordered_json root = nlohmann::ordered_json::object();
    for (const auto& [name, report] : conditions) {
        nlohmann::ordered_json cond = nlohmann::ordered_json::object();
        for (auto b : all_buttons) {
            const auto& m = report.at(b);
            nlohmann::ordered_json j;
            j["tp"] = m.tp;
            j["fp"] = m.fp;
            j["fn"] = m.fn;
            j["tn"] = m.tn;
            j["accuracy"] = m.accuracy;
            j["precision"] = m.precision ? nlohmann::ordered_json(*m.precision) : nlohmann::ordered_json(nullptr);
            j["sensitivity"] = m.sensitivity ? nlohmann::ordered_json(*m.sensitivity) : nlohmann::ordered_json(nullptr);
            cond[std::string(to_string(b))] = std::move(j);
        }
        root[name] = std::move(cond);
    }
    return root.dump(2) + "\n";
}

std::string format_metrics_table(const std::vector<std::pair<std::string, MetricsReport>>& conditions) {
    constexpr std::size_t label_w = 10, cell_w = 8, block_w = 3 * cell_w;
    std::vector<std::string> lines(5, pad("", label_w));
    const std::array<std::string, 3> labels{"ACC (%)", "PREC (%)", "SN (%)"};
    for (std::size_t r = 0; r < 3; ++r) lines[r + 2] = pad(labels[r], label_w);
    for (const auto& [name, report] : conditions) {
        std::string title = " " + name;
        if (title.size() < block_w) title.append(block_w - title.size(), ' ');
        lines[0] += " |" + title;
        lines[1] += " |";
        for (auto b : all_buttons) lines[1] += pad(std::string(to_string(b)), cell_w);
        for (std::size_t r = 0; r < 3; ++r) {
            lines[r + 2] += " |";
            for (auto b : all_buttons) {
                const auto& m = report.at(b);
                const auto v = r == 0 ? std::optional<double>(m.accuracy) : r == 1 ? m.precision : m.sensitivity;
                lines[r + 2] += pad(percent(v), cell_w);
            }
        }
    }
    std::string out;
    for (auto& line : lines) {
        line.erase(line.find_last_not_of(' ') + 1);
        out += line + '\n';
    }
    return out;
}

}  // namespace hapbutton::evaluation
