#include "runner.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <sys/utsname.h>

#include <Eigen/Core>
#include <boost/version.hpp>

#include "codes.hpp"
#include "rng.hpp"

#ifndef BBQ_VERSION
#define BBQ_VERSION "0.0.0"
#endif

namespace bbq {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::string> kBbFull{"bb-12x6", "bb-18x9", "bb-24x12", "bb-30x15", "bb-36x18"};
const std::vector<std::string> kBbDesk{"bb-12x6", "bb-18x9", "bb-24x12"};
const std::vector<std::string> kToricFull{"toric-12", "toric-24", "toric-30", "toric-36"};
const std::vector<std::string> kToricDesk{"toric-12", "toric-24"};

[[noreturn]] void config_error(const std::string& msg)
{
    throw Error(ErrorCode::Config, msg);
}

template <class T>
T get_or(const json& j, const char* key, T fallback)
{
    if (!j.contains(key) || j.at(key).is_null())
        return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        config_error(std::string("config key '") + key + "' has the wrong type");
    }
}

std::string utc_timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    out.flush();
    if (!out)
        throw Error(ErrorCode::Io, "cannot write " + path.string());
}

void ensure_output_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw Error(ErrorCode::Io, "cannot create output directory " + dir.string() + ": " + ec.message());
    const fs::path probe = dir / ".bbq-write-probe";
    {
        std::ofstream out(probe, std::ios::trunc);
        out << "probe";
        out.flush();
        if (!out)
            throw Error(ErrorCode::Io, "output directory " + dir.string() + " is not writable");
    }
    fs::remove(probe, ec);
}

json point_json(const WerPoint& w)
{
    return {{"code", w.code_name}, {"decoder", w.decoder},      {"p", w.p},
            {"shots", w.shots},    {"failures", w.failures},    {"wer", w.wer},
            {"wilson_lo", w.wilson_lo}, {"wilson_hi", w.wilson_hi}, {"point_seed", w.point_seed}};
}

json point_seed_json(const WerPoint& w)
{
    return {{"code", w.code_name}, {"decoder", w.decoder}, {"p", w.p}, {"shots", w.shots}, {"point_seed", w.point_seed}};
}

DecoderSpec spec_for(DecoderKind kind, const RunConfig& cfg)
{
    return DecoderSpec{kind, cfg.bposd};
}

void log_line(std::ostream* log, const RunConfig& cfg, const std::string& line)
{
    if (log != nullptr && !cfg.quiet)
        *log << line << '\n' << std::flush;
}

std::string describe(const WerPoint& w)
{
    return w.code_name + " " + w.decoder + " p=" + format_double(w.p) + " wer=" + format_double(w.wer) + " (" +
           std::to_string(w.failures) + "/" + std::to_string(w.shots) + ")";
}

}  // namespace

std::vector<double> p_grid(double start, double stop, double step)
{
    if (!(step > 0.0) || !(stop >= start))
        config_error("p grid needs step > 0 and stop >= start");
    const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i)
        out.push_back(dequantize_p(quantize_p(start + static_cast<double>(i) * step)));
    return out;
}

std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string wer_csv_header()
{
    return "code,family,n,k,l_param,m_param,decoder,p,shots,failures,wer,wilson_lo,wilson_hi,point_seed";
}

std::string wer_csv_row(const WerPoint& w)
{
    std::string s;
    s += w.code_name + ',' + w.family + ',' + std::to_string(w.n) + ',' + std::to_string(w.k) + ',';
    s += std::to_string(w.l_param) + ',' + std::to_string(w.m_param) + ',' + w.decoder + ',';
    s += format_double(w.p) + ',' + std::to_string(w.shots) + ',' + std::to_string(w.failures) + ',';
    s += format_double(w.wer) + ',' + format_double(w.wilson_lo) + ',' + format_double(w.wilson_hi) + ',';
    s += std::to_string(w.point_seed);
    return s;
}

namespace {

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

template <class T>
bool parse_number(const std::string& s, T& out)
{
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

}  // namespace

std::vector<SweepRow> read_wer_csv(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::Io, "cannot read " + path);
    std::string line;
    if (!std::getline(in, line))
        config_error(path + ": empty file");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != wer_csv_header())
        config_error(path + ": unexpected header; expected " + wer_csv_header());

    std::vector<SweepRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r")
            continue;
        const auto f = split_csv(line);
        auto bad = [&](const std::string& why) {
            config_error(path + ": malformed row at line " + std::to_string(lineno) + ": " + why);
        };
        if (f.size() != 14)
            bad("expected 14 fields, got " + std::to_string(f.size()));
        WerPoint w;
        w.code_name = f[0];
        w.family = f[1];
        w.decoder = f[6];
        if (!parse_number(f[2], w.n) || !parse_number(f[3], w.k) || !parse_number(f[4], w.l_param) ||
            !parse_number(f[5], w.m_param))
            bad("non-integer size field");
        if (!parse_number(f[7], w.p) || !parse_number(f[10], w.wer) || !parse_number(f[11], w.wilson_lo) ||
            !parse_number(f[12], w.wilson_hi))
            bad("non-numeric rate field");
        if (!parse_number(f[8], w.shots) || !parse_number(f[9], w.failures) || !parse_number(f[13], w.point_seed))
            bad("non-integer count field");
        if (w.shots == 0 || w.failures > w.shots)
            bad("need 0 <= failures <= shots and shots >= 1");
        if (!(w.p >= 0.0 && w.p <= 1.0) || w.n == 0)
            bad("p outside [0, 1] or zero n");
        if (std::abs(w.wer - static_cast<double>(w.failures) / static_cast<double>(w.shots)) > 1e-12)
            bad("wer does not equal failures/shots");
        rows.push_back({std::move(w), lineno});
    }
    return rows;
}

RunConfig resolve_config(const std::string& command, const json& j)
{
    static const std::set<std::string> commands{"sweep", "threshold", "baseline", "fss"};
    if (!commands.count(command))
        config_error("unknown command '" + command + "' (known: sweep, threshold, baseline, fss)");
    if (!j.is_object() && !j.is_null())
        config_error("run configuration must be a JSON object");

    RunConfig cfg;
    cfg.command = command;
    cfg.preset = get_or<std::string>(j, "preset", "full");
    if (cfg.preset != "full" && cfg.preset != "desk")
        config_error("unknown preset '" + cfg.preset + "' (known: full, desk)");
    const bool desk = cfg.preset == "desk";

    if (command == "baseline") {
        cfg.codes = desk ? kToricDesk : kToricFull;
        cfg.decoders = {DecoderKind::MwpmUninformed, DecoderKind::MwpmErasure};
        cfg.p_values = p_grid(0.30, 0.60, 0.01);
        cfg.shots = desk ? 5000 : 50000;
    } else {
        cfg.codes = desk ? kBbDesk : kBbFull;
        cfg.decoders = {DecoderKind::BpOsd};
        cfg.p_values = p_grid(0.30, 0.55, 0.01);
        cfg.shots = desk ? 20000 : 200000;
    }

    if (j.is_null())
        return cfg;

    if (j.contains("codes"))
        cfg.codes = get_or<std::vector<std::string>>(j, "codes", {});
    if (j.contains("decoder")) {
        const json& d = j.at("decoder");
        std::vector<std::string> names;
        if (d.is_string())
            names.push_back(d.get<std::string>());
        else
            names = get_or<std::vector<std::string>>(j, "decoder", {});
        cfg.decoders.clear();
        for (const auto& name : names)
            cfg.decoders.push_back(decoder_from_name(name));
    }
    if (j.contains("p")) {
        cfg.p_values = get_or<std::vector<double>>(j, "p", {});
        for (auto& p : cfg.p_values)
            p = dequantize_p(quantize_p(p));
    } else if (j.contains("p_start") || j.contains("p_stop") || j.contains("p_step")) {
        const double start = get_or<double>(j, "p_start", 0.30);
        const double stop = get_or<double>(j, "p_stop", start);
        const double step = get_or<double>(j, "p_step", 0.01);
        cfg.p_values = p_grid(start, stop, step);
    }
    cfg.shots = get_or<std::size_t>(j, "shots", cfg.shots);
    cfg.base_seed = get_or<std::uint64_t>(j, "seed", cfg.base_seed);
    cfg.output_dir = get_or<std::string>(j, "out", cfg.output_dir);
    cfg.threads = get_or<unsigned>(j, "threads", cfg.threads);
    cfg.quiet = get_or<bool>(j, "quiet", cfg.quiet);

    if (j.contains("bposd")) {
        const json& b = j.at("bposd");
        cfg.bposd.max_iterations = get_or<std::size_t>(b, "max_iterations", cfg.bposd.max_iterations);
        cfg.bposd.osd_order = get_or<std::size_t>(b, "osd_order", cfg.bposd.osd_order);
        cfg.bposd.erased_prior = get_or<double>(b, "erased_prior", cfg.bposd.erased_prior);
        cfg.bposd.unerased_prior = get_or<double>(b, "unerased_prior", cfg.bposd.unerased_prior);
        cfg.bposd.min_sum_scale = get_or<double>(b, "min_sum_scale", cfg.bposd.min_sum_scale);
        cfg.bposd.llr_clip = get_or<double>(b, "llr_clip", cfg.bposd.llr_clip);
    }
    if (j.contains("threshold")) {
        const json& t = j.at("threshold");
        auto& o = cfg.threshold;
        o.target_wer = get_or<double>(t, "target_wer", o.target_wer);
        o.start = get_or<double>(t, "start", o.start);
        o.step = get_or<double>(t, "step", o.step);
        o.tol = get_or<double>(t, "tol", o.tol);
        o.max_evals = get_or<std::size_t>(t, "max_evals", o.max_evals);
        o.bootstrap_iters = get_or<std::size_t>(t, "bootstrap_iters", o.bootstrap_iters);
        o.confidence = get_or<double>(t, "confidence", o.confidence);
    }
    if (j.contains("fss")) {
        const json& f = j.at("fss");
        cfg.fss_input = get_or<std::string>(f, "input", cfg.fss_input);
        cfg.fss_thresholds = get_or<std::string>(f, "thresholds", cfg.fss_thresholds);
        cfg.windows = get_or<std::vector<double>>(f, "windows", cfg.windows);
        cfg.fss.window = get_or<double>(f, "window", cfg.fss.window);
        cfg.fss.bootstrap_iters = get_or<std::size_t>(f, "bootstrap_iters", cfg.fss.bootstrap_iters);
        cfg.fss.confidence = get_or<double>(f, "confidence", cfg.fss.confidence);
    }
    cfg.fss.threads = cfg.threads;

    // Validation.
    cfg.bposd.validate();
    cfg.threshold.validate();
    if (cfg.shots < 1)
        config_error("shots must be at least 1");
    if (cfg.output_dir.empty())
        config_error("output directory must not be empty");
    if (command != "fss") {
        if (cfg.codes.empty())
            config_error("no codes selected");
        if (cfg.decoders.empty())
            config_error("no decoder selected");
        for (const auto& name : cfg.codes) {
            const CssCode code = code_from_registry(name);
            for (auto d : cfg.decoders)
                if (d != DecoderKind::BpOsd && code.family != CodeFamily::Toric)
                    config_error("decoder " + std::string(decoder_name(d)) + " needs a toric code, got " + name);
        }
    }
    if (command == "sweep" || command == "baseline") {
        if (cfg.p_values.empty())
            config_error("empty p grid");
        for (double p : cfg.p_values)
            if (!(p >= 0.0 && p <= 1.0))
                config_error("p values must lie in [0, 1]");
    }
    if (command == "fss") {
        if (cfg.fss_input.empty() || cfg.fss_thresholds.empty())
            config_error("fss needs a sweep CSV (input) and a threshold JSON (thresholds)");
        if (cfg.windows.empty())
            config_error("fss needs at least one window");
        if (cfg.fss.bootstrap_iters < 1)
            config_error("fss bootstrap iterations must be at least 1");
        if (j.contains("decoder") && cfg.decoders.size() != 1)
            config_error("fss takes a single decoder filter");
        if (!j.contains("decoder"))
            cfg.decoders.clear();
    }
    return cfg;
}

json config_to_json(const RunConfig& cfg)
{
    json decoders = json::array();
    for (auto d : cfg.decoders)
        decoders.push_back(std::string(decoder_name(d)));
    return {
        {"command", cfg.command},
        {"preset", cfg.preset},
        {"codes", cfg.codes},
        {"decoder", decoders},
        {"p", cfg.p_values},
        {"shots", cfg.shots},
        {"seed", cfg.base_seed},
        {"out", cfg.output_dir},
        {"threads", cfg.threads},
        {"bposd",
         {{"max_iterations", cfg.bposd.max_iterations},
          {"osd_order", cfg.bposd.osd_order},
          {"erased_prior", cfg.bposd.erased_prior},
          {"unerased_prior", cfg.bposd.unerased_prior},
          {"min_sum_scale", cfg.bposd.min_sum_scale},
          {"llr_clip", cfg.bposd.llr_clip}}},
        {"threshold",
         {{"target_wer", cfg.threshold.target_wer},
          {"start", cfg.threshold.start},
          {"step", cfg.threshold.step},
          {"tol", cfg.threshold.tol},
          {"max_evals", cfg.threshold.max_evals},
          {"bootstrap_iters", cfg.threshold.bootstrap_iters},
          {"confidence", cfg.threshold.confidence}}},
        {"fss",
         {{"input", cfg.fss_input},
          {"thresholds", cfg.fss_thresholds},
          {"window", cfg.fss.window},
          {"windows", cfg.windows},
          {"bootstrap_iters", cfg.fss.bootstrap_iters},
          {"confidence", cfg.fss.confidence}}},
        {"quiet", cfg.quiet},
    };
}

json run_metadata(const RunConfig& cfg, const json& extra)
{
    utsname uts{};
    json platform = {{"hardware_threads", std::thread::hardware_concurrency()}};
    if (uname(&uts) == 0) {
        platform["os"] = uts.sysname;
        platform["release"] = uts.release;
        platform["machine"] = uts.machine;
    }
    json meta = {
        {"schema_version", 1},
        {"artifact", {{"name", "bbq"}, {"version", BBQ_VERSION}}},
        {"command", cfg.command},
        {"base_seed", cfg.base_seed},
        {"timestamp", utc_timestamp()},
        {"platform", platform},
        {"dependencies",
         {{"compiler", __VERSION__},
          {"cxx_standard", __cplusplus},
          {"boost", BOOST_LIB_VERSION},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}},
        {"seed_derivation",
         {{"rng", "std::mt19937_64"},
          {"mix64", "SplitMix64 finalizer"},
          {"point_id", "fnv1a64(code|decoder|llround(p*1e9)|shots)"},
          {"point_seed", "mix64(mix64(base_seed) ^ point_id)"},
          {"shot_seed", "mix64(point_seed ^ mix64(shot_index))"},
          {"stage_seed", "mix64(mix64(base_seed ^ fnv1a64(tag)) ^ fnv1a64(key))"},
          {"stage_tags", {"pstar-boot", "fss-boot"}}}},
        {"config", config_to_json(cfg)},
    };
    for (const auto& [key, value] : extra.items())
        meta[key] = value;
    return meta;
}

namespace {

ErrorCode run_sweep(const RunConfig& cfg, json* report, std::ostream* log)
{
    const fs::path dir(cfg.output_dir);
    ensure_output_dir(dir);
    const std::string stem = cfg.command;  // sweep or baseline
    const fs::path csv_path = dir / (stem + ".csv");
    std::ofstream csv(csv_path, std::ios::binary | std::ios::trunc);
    if (!csv)
        throw Error(ErrorCode::Io, "cannot write " + csv_path.string());
    csv << wer_csv_header() << '\n';

    json points = json::array();
    json rows = json::array();
    const std::size_t total = cfg.codes.size() * cfg.decoders.size() * cfg.p_values.size();
    std::size_t done = 0;
    for (const auto& name : cfg.codes) {
        const CssCode code = code_from_registry(name);
        for (auto kind : cfg.decoders) {
            for (double p : cfg.p_values) {
                const WerPoint w = estimate_wer(code, spec_for(kind, cfg), p, cfg.shots, cfg.base_seed, cfg.threads);
                csv << wer_csv_row(w) << '\n' << std::flush;
                if (!csv)
                    throw Error(ErrorCode::Io, "write failed on " + csv_path.string());
                points.push_back(point_seed_json(w));
                rows.push_back(point_json(w));
                log_line(log, cfg, "[" + std::to_string(++done) + "/" + std::to_string(total) + "] " + describe(w));
            }
        }
    }
    csv.close();

    const fs::path meta_path = dir / (stem + ".meta.json");
    write_text(meta_path, run_metadata(cfg, {{"outputs", {csv_path.filename().string()}},
                                             {"points", points},
                                             {"counters", json::object()}})
                              .dump(2) +
                              "\n");
    if (report != nullptr)
        *report = {{"csv", csv_path.string()}, {"metadata", meta_path.string()}, {"points", rows}};
    return ErrorCode::Ok;
}

ErrorCode run_threshold(const RunConfig& cfg, json* report, std::ostream* log)
{
    const fs::path dir(cfg.output_dir);
    ensure_output_dir(dir);
    const fs::path csv_path = dir / "threshold_evaluations.csv";
    const fs::path json_path = dir / "threshold.json";
    const fs::path meta_path = dir / "threshold.meta.json";

    std::string csv_body = wer_csv_header() + "\n";
    json results = json::array();
    json points = json::array();
    json clamps = json::object();
    bool any_missing = false;

    for (const auto& name : cfg.codes) {
        const CssCode code = code_from_registry(name);
        for (auto kind : cfg.decoders) {
            const DecoderSpec spec = spec_for(kind, cfg);
            const std::string key = name + "|" + std::string(decoder_name(kind));
            std::vector<WerPoint> trace;
            auto evaluator = [&](double p) {
                WerPoint w = estimate_wer(code, spec, p, cfg.shots, cfg.base_seed, cfg.threads);
                log_line(log, cfg, "  eval " + std::to_string(trace.size() + 1) + ": " + describe(w));
                trace.push_back(w);
                return w;
            };
            json entry = {{"code", name},
                          {"family", std::string(family_name(code.family))},
                          {"n", code.n},
                          {"k", code.k},
                          {"decoder", std::string(decoder_name(kind))},
                          {"shots", cfg.shots},
                          {"target_wer", cfg.threshold.target_wer}};
            log_line(log, cfg, "threshold " + key);
            try {
                const std::uint64_t seed = derive_stage_seed(cfg.base_seed, "pstar-boot", key);
                const ThresholdResult r = find_threshold(evaluator, cfg.threshold, seed);
                entry["status"] = "ok";
                entry["p_star"] = r.p_star;
                entry["ci"] = {r.ci_lo, r.ci_hi};
                entry["bracket"] = {{"p_lo", r.bracket.lo.p},
                                    {"p_hi", r.bracket.hi.p},
                                    {"wer_lo", r.bracket.lo.wer},
                                    {"wer_hi", r.bracket.hi.wer}};
                entry["reached_tol"] = r.reached_tol;
                entry["degenerate"] = r.degenerate;
                entry["bootstrap_seed"] = seed;
                entry["bootstrap_clamps"] = r.bootstrap_clamps;
                clamps[key] = r.bootstrap_clamps;
                log_line(log, cfg,
                         "  p* = " + format_double(r.p_star) + " [" + format_double(r.ci_lo) + ", " +
                             format_double(r.ci_hi) + "]");
            } catch (const Error& e) {
                if (e.code() != ErrorCode::NoCrossing)
                    throw;
                any_missing = true;
                entry["status"] = "no-crossing";
                entry["message"] = e.what();
                log_line(log, cfg, std::string("  no crossing: ") + e.what());
            }
            json evals = json::array();
            for (const auto& w : trace) {
                evals.push_back(point_json(w));
                points.push_back(point_seed_json(w));
                csv_body += wer_csv_row(w) + "\n";
            }
            entry["evaluations"] = evals;
            results.push_back(entry);
        }
    }

    write_text(csv_path, csv_body);
    const json doc = {{"thresholds", results}};
    write_text(json_path, doc.dump(2) + "\n");
    write_text(meta_path, run_metadata(cfg, {{"outputs", {csv_path.filename().string(), json_path.filename().string()}},
                                             {"points", points},
                                             {"counters", {{"pstar_bootstrap_clamps", clamps}}}})
                              .dump(2) +
                              "\n");
    if (report != nullptr)
        *report = {{"json", json_path.string()}, {"csv", csv_path.string()}, {"metadata", meta_path.string()},
                   {"thresholds", results}};
    return any_missing ? ErrorCode::NoCrossing : ErrorCode::Ok;
}

json fit_json(const FssResult& r)
{
    return {{"p_inf", r.p_inf},
            {"nu", r.nu},
            {"ci_p_inf", {r.ci_p_inf.lo, r.ci_p_inf.hi}},
            {"ci_nu", {r.ci_nu.lo, r.ci_nu.hi}},
            {"window", r.window},
            {"rss", r.rss},
            {"grid_rss", r.grid_rss},
            {"coeffs", r.coeffs},
            {"points", r.points},
            {"sizes", r.sizes},
            {"flagged", r.flagged},
            {"flag_reason", r.flag_reason}};
}

ErrorCode run_fss(const RunConfig& cfg, json* report, std::ostream* log)
{
    const fs::path dir(cfg.output_dir);
    ensure_output_dir(dir);

    const auto rows = read_wer_csv(cfg.fss_input);
    std::set<std::string> decoders;
    FssDataset data;
    for (const auto& r : rows) {
        if (!cfg.decoders.empty() && r.point.decoder != decoder_name(cfg.decoders.front()))
            continue;
        decoders.insert(r.point.decoder);
        data.push_back({r.point.n, r.point.p, r.point.wer, r.point.shots, r.point.failures});
    }
    if (decoders.size() > 1)
        config_error(cfg.fss_input + ": rows mix several decoders; select one with the decoder filter");
    if (data.empty())
        config_error(cfg.fss_input + ": no rows to fit");

    std::ifstream tin(cfg.fss_thresholds, std::ios::binary);
    if (!tin)
        throw Error(ErrorCode::Io, "cannot read " + cfg.fss_thresholds);
    json tdoc;
    try {
        tin >> tdoc;
    } catch (const json::exception& e) {
        config_error(cfg.fss_thresholds + ": invalid JSON: " + e.what());
    }
    SizePstar pstar;
    std::map<std::size_t, SizeThreshold> sized;
    try {
        for (const auto& t : tdoc.at("thresholds")) {
            if (t.at("status") != "ok")
                continue;
            if (!decoders.empty() && t.at("decoder").get<std::string>() != *decoders.begin())
                continue;
            const auto n = t.at("n").get<std::size_t>();
            const double p = t.at("p_star").get<double>();
            if (pstar.count(n) && pstar[n] != p)
                config_error(cfg.fss_thresholds + ": conflicting p* for n=" + std::to_string(n));
            pstar[n] = p;
            sized[n] = {p, t.at("ci").at(0).get<double>(), t.at("ci").at(1).get<double>()};
        }
    } catch (const json::exception& e) {
        config_error(cfg.fss_thresholds + ": unexpected structure: " + e.what());
    }

    log_line(log, cfg, "fss: " + std::to_string(data.size()) + " rows, " + std::to_string(pstar.size()) + " sizes");
    FssOptions opts = cfg.fss;
    FssResult fit = fit_collapse(data, pstar, opts);
    const std::uint64_t seed = derive_stage_seed(cfg.base_seed, "fss-boot", "collapse");
    bootstrap_fss(fit, data, pstar, opts, seed);
    log_line(log, cfg, "  p_inf = " + format_double(fit.p_inf) + ", nu = " + format_double(fit.nu));

    json doc = fit_json(fit);
    doc["bootstrap"] = {{"iterations", opts.bootstrap_iters},
                        {"done", fit.bootstrap_done},
                        {"skipped", fit.bootstrap_skipped},
                        {"seed", seed}};

    const WindowSensitivity ws = window_sensitivity(data, pstar, cfg.windows, opts);
    json wjs = json::array();
    for (const auto& wf : ws.fits) {
        if (wf.fit)
            wjs.push_back({{"window", wf.window}, {"p_inf", wf.fit->p_inf}, {"nu", wf.fit->nu}, {"rss", wf.fit->rss}});
        else
            wjs.push_back({{"window", wf.window}, {"error", wf.error}});
    }
    doc["window_sensitivity"] = {{"fits", wjs}, {"spread", ws.spread}};

    try {
        const LinearFit lf = fit_linearized(sized, fit.nu, opts.confidence);
        doc["linearized"] = {{"p_inf", lf.p_inf},
                             {"c", lf.c},
                             {"ci", {lf.ci_p_inf.lo, lf.ci_p_inf.hi}},
                             {"se_p_inf", lf.se_p_inf},
                             {"weighted", lf.weighted},
                             {"nu", fit.nu}};
    } catch (const Error& e) {
        doc["linearized"] = {{"error", e.what()}};
    }

    const fs::path json_path = dir / "fss.json";
    const fs::path meta_path = dir / "fss.meta.json";
    write_text(json_path, doc.dump(2) + "\n");
    write_text(meta_path, run_metadata(cfg, {{"outputs", {json_path.filename().string()}},
                                             {"points", json::array()},
                                             {"counters", {{"fss_bootstrap_skipped", fit.bootstrap_skipped}}}})
                              .dump(2) +
                              "\n");
    if (report != nullptr)
        *report = {{"json", json_path.string()}, {"metadata", meta_path.string()}, {"fit", doc}};
    return ErrorCode::Ok;
}

}  // namespace

ErrorCode run_command(const RunConfig& cfg, json* report, std::ostream* log)
{
    if (cfg.command == "sweep" || cfg.command == "baseline")
        return run_sweep(cfg, report, log);
    if (cfg.command == "threshold")
        return run_threshold(cfg, report, log);
    if (cfg.command == "fss")
        return run_fss(cfg, report, log);
    config_error("unknown command '" + cfg.command + "'");
}

}  // namespace bbq
