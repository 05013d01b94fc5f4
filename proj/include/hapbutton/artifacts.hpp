#pragma once

// On-disk forms of the intermediate products. Every writer is deterministic
// and every reader accepts exactly what the writer produced.

#include "hapbutton/representative.hpp"
#include "hapbutton/signal.hpp"
#include "hapbutton/sysid.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace hapbutton::artifacts {

struct Provenance {
    std::string version = HAPBUTTON_VERSION;
    std::string config_hash;

    /// "# hapbutton <version> config <hash>" without the newline.
    [[nodiscard]] std::string comment_line() const;
};

/// `t,value` with `# unit:` and `# rate_hz:` comments.
std::string format_timeseries_csv(const TimeSeries& x, const Provenance& prov);
TimeSeries parse_timeseries_csv(std::string_view text, std::string_view source);
TimeSeries read_timeseries_csv(const std::filesystem::path& path);

/// `f_hz,re,im` preceded by `# quantity: <name>`.
std::string format_frf_csv(const FrequencyResponse& h, const Provenance* prov = nullptr);
FrequencyResponse parse_frf_csv(std::string_view text, std::string_view source);
FrequencyResponse read_frf_csv(const std::filesystem::path& path);

/// profile_<Button>.json (metadata) next to profile_<Button>.csv (waveform).
std::filesystem::path write_profile(const std::filesystem::path& dir, const representative::ButtonProfile& profile,
                                    const Provenance& prov);
representative::ButtonProfile read_profile(const std::filesystem::path& json_path);
std::filesystem::path profile_json_path(const std::filesystem::path& dir, ButtonType button);

std::string model_to_json(const sysid::RationalTransferFunction& g, std::optional<double> rate_hz,
                          const Provenance& prov);
sysid::RationalTransferFunction model_from_json(std::string_view text, std::string_view source);
sysid::RationalTransferFunction read_model(const std::filesystem::path& path);

}  // namespace hapbutton::artifacts
