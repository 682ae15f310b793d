// Run orchestration: presets, sweeps, thresholds, baselines and FSS reports,
// with a metadata JSON written beside every output.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "fss.hpp"
#include "montecarlo.hpp"
#include "threshold.hpp"

namespace bbq {

inline constexpr std::uint64_t kDefaultBaseSeed = 12345;

struct RunConfig {
    std::string command;  ///< sweep | threshold | baseline | fss
    std::string preset = "full";
    std::vector<std::string> codes;
    std::vector<DecoderKind> decoders;
    BpOsdConfig bposd;
    std::vector<double> p_values;
    std::size_t shots = 0;
    std::uint64_t base_seed = kDefaultBaseSeed;
    std::string output_dir = ".";
    unsigned threads = 1;
    ThresholdOptions threshold;
    FssOptions fss;
    std::vector<double> windows{0.04, 0.06, 0.08};
    std::string fss_input;       ///< sweep CSV
    std::string fss_thresholds;  ///< threshold JSON with per-size p*
    bool quiet = false;
};

/// Builds a config for `command` from preset defaults plus the overrides in
/// `j` (keys as produced by config_to_json). Throws Error(Config).
RunConfig resolve_config(const std::string& command, const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& cfg);

/// Inclusive grid start, start+step, ..., stop with values rounded to 1e-9.
std::vector<double> p_grid(double start, double stop, double step);

/// Shortest round-trip decimal, '.' separator, independent of locale.
std::string format_double(double v);

std::string wer_csv_header();
std::string wer_csv_row(const WerPoint& w);

struct SweepRow {
    WerPoint point;
    std::size_t line = 0;
};
/// Parses a sweep CSV; malformed rows throw Error(Config) naming the line.
std::vector<SweepRow> read_wer_csv(const std::string& path);

/// Metadata common to every output. `extra` is merged in at top level.
nlohmann::json run_metadata(const RunConfig& cfg, const nlohmann::json& extra);

/// Executes cfg.command. Returns Ok, or NoCrossing when some threshold had no
/// crossing (the others still complete). Other failures throw Error.
ErrorCode run_command(const RunConfig& cfg, nlohmann::json* report, std::ostream* log);

}  // namespace bbq
