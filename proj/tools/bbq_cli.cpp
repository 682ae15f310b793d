// Command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bbq/bbq.h"

namespace {

struct CommonFlags {
    std::vector<std::string> codes;
    std::vector<std::string> decoder;
    std::vector<double> p;
    double p_start = 0.0;
    double p_stop = 0.0;
    double p_step = 0.0;
    std::size_t shots = 0;
    std::uint64_t seed = 12345;
    unsigned threads = 1;
    std::string out = ".";
    std::string preset = "full";
    bool quiet = false;

    std::size_t max_iter = 0;
    std::size_t osd_order = 0;
    double unerased_prior = 0.0;
    double min_sum_scale = 0.0;

    double target_wer = 0.0;
    double tol = 0.0;
    std::size_t max_evals = 0;
    std::size_t bootstrap_iters = 0;

    std::string input;
    std::string thresholds;
    std::vector<double> windows;
    double window = 0.0;
};

void add_run_flags(CLI::App* app, CommonFlags& f, bool grid, bool bposd)
{
    app->add_option("--codes", f.codes, "Registry names, e.g. bb-12x6 toric-24")->delimiter(',');
    app->add_option("--decoder", f.decoder, "bposd | mwpm-uninformed | mwpm-erasure")->delimiter(',');
    if (grid) {
        app->add_option("--p", f.p, "Explicit erasure rates")->delimiter(',');
        app->add_option("--p-start", f.p_start, "Grid start");
        app->add_option("--p-stop", f.p_stop, "Grid stop (inclusive)");
        app->add_option("--p-step", f.p_step, "Grid step");
    }
    app->add_option("--shots", f.shots, "Shots per evaluation")->check(CLI::PositiveNumber);
    if (bposd) {
        app->add_option("--max-iter", f.max_iter, "BP iterations (default 50)")->check(CLI::PositiveNumber);
        app->add_option("--osd-order", f.osd_order, "OSD-CS order (default 10)");
        app->add_option("--unerased-prior", f.unerased_prior, "Prior on unerased qubits (default 1e-10)");
        app->add_option("--min-sum-scale", f.min_sum_scale, "Min-sum scaling factor in (0, 1] (default 1)");
    }
}

void add_common_flags(CLI::App* app, CommonFlags& f)
{
    app->add_option("--seed", f.seed, "Base seed")->capture_default_str();
    app->add_option("--threads", f.threads, "Worker threads (0 = all); results do not depend on it")
        ->capture_default_str();
    app->add_option("--out", f.out, "Output directory")->capture_default_str();
    app->add_option("--preset", f.preset, "full | desk")->check(CLI::IsMember({"full", "desk"}))->capture_default_str();
    app->add_flag("--quiet", f.quiet, "No progress output");
}

nlohmann::json to_config(const CLI::App* app, const CommonFlags& f)
{
    using nlohmann::json;
    json j = json::object();
    auto given = [&](const char* name) {
        const auto* opt = app->get_option_no_throw(name);
        return opt != nullptr && opt->count() > 0;
    };
    j["preset"] = f.preset;
    j["seed"] = f.seed;
    j["threads"] = f.threads;
    j["out"] = f.out;
    j["quiet"] = f.quiet;
    if (given("--codes"))
        j["codes"] = f.codes;
    if (given("--decoder"))
        j["decoder"] = f.decoder;
    if (given("--p"))
        j["p"] = f.p;
    if (given("--p-start"))
        j["p_start"] = f.p_start;
    if (given("--p-stop"))
        j["p_stop"] = f.p_stop;
    if (given("--p-step"))
        j["p_step"] = f.p_step;
    if (given("--shots"))
        j["shots"] = f.shots;

    json bposd = json::object();
    if (given("--max-iter"))
        bposd["max_iterations"] = f.max_iter;
    if (given("--osd-order"))
        bposd["osd_order"] = f.osd_order;
    if (given("--unerased-prior"))
        bposd["unerased_prior"] = f.unerased_prior;
    if (given("--min-sum-scale"))
        bposd["min_sum_scale"] = f.min_sum_scale;
    if (!bposd.empty())
        j["bposd"] = bposd;

    json thr = json::object();
    if (given("--target-wer"))
        thr["target_wer"] = f.target_wer;
    if (given("--tol"))
        thr["tol"] = f.tol;
    if (given("--max-evals"))
        thr["max_evals"] = f.max_evals;
    if (given("--bootstrap-iters") && app->get_name() == "threshold")
        thr["bootstrap_iters"] = f.bootstrap_iters;
    if (!thr.empty())
        j["threshold"] = thr;

    if (app->get_name() == "fss") {
        json fss = {{"input", f.input}, {"thresholds", f.thresholds}};
        if (given("--windows"))
            fss["windows"] = f.windows;
        if (given("--window"))
            fss["window"] = f.window;
        if (given("--bootstrap-iters"))
            fss["bootstrap_iters"] = f.bootstrap_iters;
        j["fss"] = fss;
    }
    return j;
}

int run(const std::string& command, const nlohmann::json& cfg)
{
    char* report = nullptr;
    const bbq_status st = bbq_run(command.c_str(), cfg.dump().c_str(), &report);
    if (report != nullptr) {
        const auto rep = nlohmann::json::parse(report, nullptr, false);
        bbq_string_free(report);
        if (!rep.is_discarded()) {
            for (const char* key : {"csv", "json", "metadata"})
                if (rep.contains(key))
                    std::printf("wrote %s\n", rep.at(key).get<std::string>().c_str());
        }
    }
    if (st != BBQ_OK)
        std::fprintf(stderr, "bbq: %s: %s\n", bbq_status_name(st), bbq_last_error());
    return static_cast<int>(st);
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Erasure-threshold Monte Carlo for bivariate bicycle and toric codes"};
    app.set_version_flag("--version", bbq_version());
    app.require_subcommand(1);

    CommonFlags f;

    auto* codes = app.add_subcommand("codes", "List the code registry");
    bool with_k = false;
    codes->add_flag("--details", with_k, "Also build each code and print n and k");

    auto* sweep = app.add_subcommand("sweep", "WER over a p grid");
    add_run_flags(sweep, f, true, true);
    add_common_flags(sweep, f);

    auto* baseline = app.add_subcommand("baseline", "Toric MWPM sweep (uninformed and erasure-aware)");
    add_run_flags(baseline, f, true, false);
    add_common_flags(baseline, f);

    auto* threshold = app.add_subcommand("threshold", "WER = target crossing per code");
    add_run_flags(threshold, f, false, true);
    add_common_flags(threshold, f);
    threshold->add_option("--target-wer", f.target_wer, "Target WER (default 0.10)");
    threshold->add_option("--tol", f.tol, "Bracket width goal (default 5e-4)");
    threshold->add_option("--max-evals", f.max_evals, "Evaluation budget per code (default 10)");
    threshold->add_option("--bootstrap-iters", f.bootstrap_iters, "Bootstrap iterations (default 5000)");

    auto* fss = app.add_subcommand("fss", "Finite-size-scaling fit of a sweep");
    fss->add_option("--input", f.input, "Sweep CSV")->required()->check(CLI::ExistingFile);
    fss->add_option("--thresholds", f.thresholds, "threshold.json with per-size p*")->required()->check(CLI::ExistingFile);
    fss->add_option("--decoder", f.decoder, "Only use rows of this decoder");
    fss->add_option("--window", f.window, "Main fit window (default 0.06)");
    fss->add_option("--windows", f.windows, "Sensitivity windows (default 0.04,0.06,0.08)")->delimiter(',');
    fss->add_option("--bootstrap-iters", f.bootstrap_iters, "Bootstrap iterations (default 500)");
    add_common_flags(fss, f);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : BBQ_ERR_CONFIG;
    }

    if (codes->parsed()) {
        for (std::size_t i = 0; i < bbq_registry_size(); ++i) {
            const char* name = bbq_registry_name(i);
            if (!with_k) {
                std::printf("%s\n", name);
                continue;
            }
            bbq_code* c = nullptr;
            if (bbq_code_from_registry(name, &c) != BBQ_OK) {
                std::fprintf(stderr, "bbq: %s\n", bbq_last_error());
                return BBQ_ERR_INTERNAL;
            }
            bbq_code_info info{};
            bbq_code_get_info(c, &info);
            std::printf("%-10s n=%-5zu k=%zu\n", name, info.n, info.k);
            bbq_code_free(c);
        }
        return 0;
    }
    for (auto* sub : {sweep, baseline, threshold, fss})
        if (sub->parsed())
            return run(sub->get_name(), to_config(sub, f));
    return BBQ_ERR_CONFIG;
}
