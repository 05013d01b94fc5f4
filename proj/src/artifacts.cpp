#include "hapbutton/artifacts.hpp"

#include "hapbutton/error.hpp"
#include "hapbutton/io.hpp"

#include <json.hpp>

#include <cmath>
#include <map>

namespace hapbutton::artifacts {

namespace {

using json = nlohmann::ordered_json;

// "key: value" comment lines as a map; other comments are ignored.
std::map<std::string, std::string, std::less<>> comment_fields(const std::vector<std::string>& comments) {
    std::map<std::string, std::string, std::less<>> out;
    for (const auto& c : comments) {
        const auto colon = c.find(':');
        if (colon == std::string::npos) continue;
        out.emplace(std::string(io::trim(std::string_view(c).substr(0, colon))),
                    std::string(io::trim(std::string_view(c).substr(colon + 1))));
    }
    return out;
}

const std::string& required_field(const std::map<std::string, std::string, std::less<>>& fields,
                                  std::string_view key, std::string_view source) {
    const auto it = fields.find(key);
    if (it == fields.end()) throw InvalidInput(std::string(source) + ": missing '# " + std::string(key) + ":' header");
    return it->second;
}

json provenance_json(const Provenance& prov) {
    json j;
    j["tool"] = "hapbutton";
    j["version"] = prov.version;
    j["config_hash"] = prov.config_hash;
    return j;
}

json parse_json(std::string_view text, std::string_view source) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw InvalidInput(std::string(source) + ": " + e.what());
    }
}

template <typename T>
T get_field(const json& j, const char* key, std::string_view source) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw InvalidInput(std::string(source) + ": missing or malformed field '" + key + "'");
    }
}

}  // namespace

std::string Provenance::comment_line() const { return "# hapbutton " + version + " config " + config_hash; }

std::string format_timeseries_csv(const TimeSeries& x, const Provenance& prov) {
    std::string out = prov.comment_line() + "\n";
    out += "# unit: " + std::string(to_string(x.unit())) + "\n";
    out += "# rate_hz: " + io::format_double(x.sample_rate_hz()) + "\n";
    out += "t,value\n";
    for (std::size_t k = 0; k < x.size(); ++k) {
        out += io::format_double(x.time_at(k));
        out += ',';
        out += io::format_double(x[k]);
        out += '\n';
    }
    return out;
}

TimeSeries parse_timeseries_csv(std::string_view text, std::string_view source) {
    const auto table = io::parse_csv(text, source);
    const auto fields = comment_fields(table.comments);
    const Unit unit = unit_from_string(required_field(fields, "unit", source));
    const double rate = io::parse_double(required_field(fields, "rate_hz", source), source);
    if (table.rows.empty()) throw InvalidInput(std::string(source) + ": no samples");
    const auto t_col = table.column("t");
    const auto v_col = table.column("value");
    std::vector<double> v;
    v.reserve(table.rows.size());
    for (const auto& row : table.rows) v.push_back(row[v_col]);
    return TimeSeries(std::move(v), rate, unit, table.rows.front()[t_col]);
}

TimeSeries read_timeseries_csv(const std::filesystem::path& path) {
    return parse_timeseries_csv(io::read_text(path), path.string());
}

std::string format_frf_csv(const FrequencyResponse& h, const Provenance* prov) {
    h.validate();
    std::string out;
    if (prov) out += prov->comment_line() + "\n";
    out += "# quantity: " + std::string(to_string(h.quantity)) + "\n";
    out += "f_hz,re,im\n";
    for (std::size_t k = 0; k < h.size(); ++k) {
        out += io::format_double(h.frequencies_hz[k]) + "," + io::format_double(h.values[k].real()) + "," +
               io::format_double(h.values[k].imag()) + "\n";
    }
    return out;
}

FrequencyResponse parse_frf_csv(std::string_view text, std::string_view source) {
    const auto table = io::parse_csv(text, source);
    const auto fields = comment_fields(table.comments);
    FrequencyResponse h;
    h.quantity = frf_quantity_from_string(required_field(fields, "quantity", source));
    const auto f = table.column("f_hz"), re = table.column("re"), im = table.column("im");
    for (const auto& row : table.rows) {
        h.frequencies_hz.push_back(row[f]);
        h.values.emplace_back(row[re], row[im]);
    }
    h.validate();
    return h;
}

FrequencyResponse read_frf_csv(const std::filesystem::path& path) {
    return parse_frf_csv(io::read_text(path), path.string());
}

std::filesystem::path profile_json_path(const std::filesystem::path& dir, ButtonType button) {
    return dir / ("profile_" + std::string(to_string(button)) + ".json");
}

std::filesystem::path write_profile(const std::filesystem::path& dir, const representative::ButtonProfile& profile,
                                    const Provenance& prov) {
    const std::string stem = "profile_" + std::string(to_string(profile.button_type));
    json j;
    j["provenance"] = provenance_json(prov);
    j["button"] = std::string(to_string(profile.button_type));
    j["mean_activation_force_N"] = profile.mean_activation_force_N;
    j["contributing_participants"] = profile.contributing_participants;
    j["sample_rate_hz"] = profile.representative_acceleration.sample_rate_hz();
    j["samples"] = profile.representative_acceleration.size();
    j["waveform"] = stem + ".csv";
    io::write_text(dir / (stem + ".csv"), format_timeseries_csv(profile.representative_acceleration, prov));
    const auto path = dir / (stem + ".json");
    io::write_text(path, j.dump(2) + "\n");
    return path;
}

representative::ButtonProfile read_profile(const std::filesystem::path& json_path) {
    const std::string source = json_path.string();
    const auto j = parse_json(io::read_text(json_path), source);
    const auto button = button_from_string(get_field<std::string>(j, "button", source));
    const double force = get_field<double>(j, "mean_activation_force_N", source);
    if (!(force >= 0.0)) throw InvalidInput(source + ": activation force must be non-negative");
    auto wave = read_timeseries_csv(json_path.parent_path() / get_field<std::string>(j, "waveform", source));
    if (wave.size() != get_field<std::size_t>(j, "samples", source)) {
        throw InvalidInput(source + ": waveform length disagrees with metadata");
    }
    return {button, std::move(wave), force, get_field<std::vector<std::string>>(j, "contributing_participants", source)};
}

std::string model_to_json(const sysid::RationalTransferFunction& g, std::optional<double> rate_hz,
                          const Provenance& prov) {
    json j;
    j["provenance"] = provenance_json(prov);
    j["quantity"] = g.quantity ? json(std::string(to_string(*g.quantity))) : json(nullptr);
    j["numerator"] = g.numerator;
    j["denominator"] = g.denominator;
    j["dc_normalized"] = g.dc_normalized;
    j["sample_rate_hz"] = rate_hz ? json(*rate_hz) : json(nullptr);
    json fit;
    fit["relative_error"] = g.fit.relative_error;
    fit["weighted_sse"] = g.fit.weighted_sse;
    fit["iterations"] = g.fit.iterations;
    fit["converged"] = g.fit.converged;
    fit["rank_deficient"] = g.fit.rank_deficient;
    fit["poles_reflected"] = g.fit.poles_reflected;
    fit["points"] = g.fit.points;
    j["fit"] = std::move(fit);
    json poles = json::array();
    for (const auto& p : g.poles()) {
        const auto m = sysid::modal_parameters(p);
        poles.push_back({{"re", p.real()}, {"im", p.imag()}, {"natural_hz", m.natural_hz}, {"damping", m.damping}});
    }
    j["poles"] = std::move(poles);
    return j.dump(2) + "\n";
}

sysid::RationalTransferFunction model_from_json(std::string_view text, std::string_view source) {
    const auto j = parse_json(text, source);
    sysid::RationalTransferFunction g;
    g.numerator = get_field<std::vector<double>>(j, "numerator", source);
    g.denominator = get_field<std::vector<double>>(j, "denominator", source);
    g.dc_normalized = get_field<bool>(j, "dc_normalized", source);
    if (j.contains("quantity") && !j["quantity"].is_null()) {
        g.quantity = frf_quantity_from_string(get_field<std::string>(j, "quantity", source));
    }
    if (g.denominator.empty() || g.denominator.front() == 0.0) {
        throw InvalidInput(std::string(source) + ": denominator leading coefficient must be nonzero");
    }
    if (j.contains("fit")) {
        const auto& f = j["fit"];
        g.fit.relative_error = get_field<double>(f, "relative_error", source);
        g.fit.weighted_sse = get_field<double>(f, "weighted_sse", source);
        g.fit.iterations = get_field<int>(f, "iterations", source);
        g.fit.converged = get_field<bool>(f, "converged", source);
        g.fit.rank_deficient = get_field<bool>(f, "rank_deficient", source);
        g.fit.poles_reflected = get_field<int>(f, "poles_reflected", source);
        g.fit.points = get_field<std::size_t>(f, "points", source);
    }
    return g;
}

sysid::RationalTransferFunction read_model(const std::filesystem::path& path) {
    return model_from_json(io::read_text(path), path.string());
}

}  // namespace hapbutton::artifacts
