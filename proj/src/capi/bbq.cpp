#include "bbq/bbq.h"

#include <cmath>
#include <cstring>
#include <iostream>
#include <map>
#include <new>
#include <string>

#include <json.hpp>

#include "codes.hpp"
#include "error.hpp"
#include "fss.hpp"
#include "montecarlo.hpp"
#include "runner.hpp"
#include "threshold.hpp"

#ifndef BBQ_VERSION
#define BBQ_VERSION "0.0.0"
#endif

struct bbq_code {
    bbq::CssCode code;
};

struct bbq_threshold {
    bbq::ThresholdResult result;
};

struct bbq_fss_dataset {
    bbq::FssDataset rows;
    std::map<std::size_t, bbq::SizeThreshold> pstar;
};

namespace {

thread_local std::string g_last_error;

bbq_status fail(bbq_status status, const std::string& msg)
{
    g_last_error = msg;
    return status;
}

// Converts any escaping exception into a status code.
template <class F>
bbq_status guard(F&& fn)
{
    try {
        g_last_error.clear();
        return fn();
    } catch (const bbq::Error& e) {
        return fail(static_cast<bbq_status>(e.code()), e.what());
    } catch (const std::bad_alloc&) {
        return fail(BBQ_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(BBQ_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(BBQ_ERR_INTERNAL, "unknown exception");
    }
}

#define BBQ_REQUIRE(cond, what)                                    \
    do {                                                           \
        if (!(cond))                                               \
            return fail(BBQ_ERR_CONFIG, std::string(what));        \
    } while (0)

bbq::DecoderSpec to_spec(const bbq_decoder_config& c)
{
    bbq::DecoderSpec spec;
    switch (c.kind) {
    case BBQ_DECODER_BPOSD:
        spec.kind = bbq::DecoderKind::BpOsd;
        break;
    case BBQ_DECODER_MWPM_UNINFORMED:
        spec.kind = bbq::DecoderKind::MwpmUninformed;
        break;
    case BBQ_DECODER_MWPM_ERASURE:
        spec.kind = bbq::DecoderKind::MwpmErasure;
        break;
    default:
        throw bbq::Error(bbq::ErrorCode::Config, "unknown decoder kind");
    }
    spec.bposd.max_iterations = c.max_iterations;
    spec.bposd.osd_order = c.osd_order;
    spec.bposd.erased_prior = c.erased_prior;
    spec.bposd.unerased_prior = c.unerased_prior;
    spec.bposd.min_sum_scale = c.min_sum_scale;
    spec.bposd.llr_clip = c.llr_clip;
    spec.bposd.validate();
    return spec;
}

bbq::ThresholdOptions to_options(const bbq_threshold_options& o)
{
    bbq::ThresholdOptions t;
    t.target_wer = o.target_wer;
    t.start = o.start;
    t.step = o.step;
    t.tol = o.tol;
    t.max_evals = o.max_evals;
    t.p_min = o.p_min;
    t.p_max = o.p_max;
    t.bootstrap_iters = o.bootstrap_iters;
    t.confidence = o.confidence;
    t.validate();
    return t;
}

void fill_point(const bbq::WerPoint& w, bbq_wer_point* out)
{
    out->p = w.p;
    out->shots = w.shots;
    out->failures = w.failures;
    out->wer = w.wer;
    out->wilson_lo = w.wilson_lo;
    out->wilson_hi = w.wilson_hi;
    out->point_seed = w.point_seed;
}

bbq_status make_code(bbq::CssCode code, bbq_code** out)
{
    *out = new bbq_code{std::move(code)};
    return BBQ_OK;
}

char* dup_string(const std::string& s)
{
    char* p = new char[s.size() + 1];
    std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

nlohmann::json parse_config(const char* config_json)
{
    if (config_json == nullptr || *config_json == '\0')
        return nlohmann::json::object();
    try {
        return nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::exception& e) {
        throw bbq::Error(bbq::ErrorCode::Config, std::string("invalid JSON configuration: ") + e.what());
    }
}

}  // namespace

extern "C" {

const char* bbq_version(void)
{
    return BBQ_VERSION;
}

const char* bbq_last_error(void)
{
    return g_last_error.c_str();
}

const char* bbq_status_name(bbq_status status)
{
    switch (status) {
    case BBQ_OK:
        return "ok";
    case BBQ_ERR_INTERNAL:
        return "internal error";
    case BBQ_ERR_CONFIG:
        return "configuration error";
    case BBQ_ERR_NO_CROSSING:
        return "no crossing";
    case BBQ_ERR_IO:
        return "I/O error";
    }
    return "unknown status";
}

size_t bbq_registry_size(void)
{
    return bbq::registry_names().size();
}

const char* bbq_registry_name(size_t index)
{
    static const std::vector<std::string> names = bbq::registry_names();
    return index < names.size() ? names[index].c_str() : nullptr;
}

bbq_status bbq_code_from_registry(const char* name, bbq_code** out)
{
    return guard([&] {
        BBQ_REQUIRE(name != nullptr && out != nullptr, "bbq_code_from_registry: null argument");
        return make_code(bbq::code_from_registry(name), out);
    });
}

bbq_status bbq_code_new_bb(size_t l, size_t m, bbq_code** out)
{
    return guard([&] {
        BBQ_REQUIRE(out != nullptr, "bbq_code_new_bb: null argument");
        return make_code(bbq::build_bb_code(l, m, bbq::default_poly_a(), bbq::default_poly_b()), out);
    });
}

bbq_status bbq_code_new_toric(size_t l, bbq_code** out)
{
    return guard([&] {
        BBQ_REQUIRE(out != nullptr, "bbq_code_new_toric: null argument");
        BBQ_REQUIRE(l >= 2, "bbq_code_new_toric: L must be at least 2");
        return make_code(bbq::build_toric_code(l), out);
    });
}

void bbq_code_free(bbq_code* code)
{
    delete code;
}

bbq_status bbq_code_get_info(const bbq_code* code, bbq_code_info* out)
{
    return guard([&] {
        BBQ_REQUIRE(code != nullptr && out != nullptr, "bbq_code_get_info: null argument");
        const auto& c = code->code;
        out->family = c.family == bbq::CodeFamily::BB ? BBQ_FAMILY_BB : BBQ_FAMILY_TORIC;
        out->n = c.n;
        out->k = c.k;
        out->l_param = c.l_param;
        out->m_param = c.m_param;
        out->hx_rows = c.hx.rows();
        out->hz_rows = c.hz.rows();
        return BBQ_OK;
    });
}

size_t bbq_code_name(const bbq_code* code, char* buf, size_t buf_len)
{
    if (code == nullptr)
        return 0;
    const std::string& name = code->code.name;
    if (buf != nullptr && buf_len > 0) {
        const std::size_t n = std::min(name.size(), buf_len - 1);
        std::memcpy(buf, name.data(), n);
        buf[n] = '\0';
    }
    return name.size();
}

int bbq_code_hx_entry(const bbq_code* code, size_t row, size_t col)
{
    if (code == nullptr || row >= code->code.hx.rows() || col >= code->code.hx.cols())
        return -1;
    return code->code.hx.get(row, col) ? 1 : 0;
}

int bbq_code_hz_entry(const bbq_code* code, size_t row, size_t col)
{
    if (code == nullptr || row >= code->code.hz.rows() || col >= code->code.hz.cols())
        return -1;
    return code->code.hz.get(row, col) ? 1 : 0;
}

int bbq_code_is_css(const bbq_code* code)
{
    if (code == nullptr)
        return 0;
    return (code->code.hx * code->code.hz.transpose()).is_zero() ? 1 : 0;
}

void bbq_decoder_config_default(bbq_decoder_config* cfg)
{
    if (cfg == nullptr)
        return;
    const bbq::BpOsdConfig d;
    cfg->kind = BBQ_DECODER_BPOSD;
    cfg->max_iterations = d.max_iterations;
    cfg->osd_order = d.osd_order;
    cfg->erased_prior = d.erased_prior;
    cfg->unerased_prior = d.unerased_prior;
    cfg->min_sum_scale = d.min_sum_scale;
    cfg->llr_clip = d.llr_clip;
}

bbq_status bbq_decoder_from_name(const char* name, bbq_decoder_kind* out)
{
    return guard([&] {
        BBQ_REQUIRE(name != nullptr && out != nullptr, "bbq_decoder_from_name: null argument");
        switch (bbq::decoder_from_name(name)) {
        case bbq::DecoderKind::BpOsd:
            *out = BBQ_DECODER_BPOSD;
            break;
        case bbq::DecoderKind::MwpmUninformed:
            *out = BBQ_DECODER_MWPM_UNINFORMED;
            break;
        case bbq::DecoderKind::MwpmErasure:
            *out = BBQ_DECODER_MWPM_ERASURE;
            break;
        }
        return BBQ_OK;
    });
}

bbq_status bbq_estimate_wer(const bbq_code* code, const bbq_decoder_config* cfg, double p, size_t shots,
                            uint64_t base_seed, unsigned threads, bbq_wer_point* out)
{
    return guard([&] {
        BBQ_REQUIRE(code != nullptr && cfg != nullptr && out != nullptr, "bbq_estimate_wer: null argument");
        const auto w = bbq::estimate_wer(code->code, to_spec(*cfg), p, shots, base_seed, threads);
        fill_point(w, out);
        return BBQ_OK;
    });
}

bbq_status bbq_wilson_interval(size_t failures, size_t shots, double confidence, double* lo, double* hi)
{
    return guard([&] {
        BBQ_REQUIRE(lo != nullptr && hi != nullptr, "bbq_wilson_interval: null argument");
        const auto ci = bbq::wilson_interval(failures, shots, confidence);
        *lo = ci.lo;
        *hi = ci.hi;
        return BBQ_OK;
    });
}

void bbq_threshold_options_default(bbq_threshold_options* opts)
{
    if (opts == nullptr)
        return;
    const bbq::ThresholdOptions d;
    opts->target_wer = d.target_wer;
    opts->start = d.start;
    opts->step = d.step;
    opts->tol = d.tol;
    opts->max_evals = d.max_evals;
    opts->p_min = d.p_min;
    opts->p_max = d.p_max;
    opts->bootstrap_iters = d.bootstrap_iters;
    opts->confidence = d.confidence;
}

bbq_status bbq_find_threshold(const bbq_code* code, const bbq_decoder_config* cfg, const bbq_threshold_options* opts,
                              size_t shots, uint64_t base_seed, unsigned threads, bbq_threshold** out)
{
    return guard([&] {
        BBQ_REQUIRE(code != nullptr && cfg != nullptr && opts != nullptr && out != nullptr,
                    "bbq_find_threshold: null argument");
        const auto spec = to_spec(*cfg);
        const auto options = to_options(*opts);
        auto eval = [&](double p) { return bbq::estimate_wer(code->code, spec, p, shots, base_seed, threads); };
        const std::string key = code->code.name + "|" + std::string(bbq::decoder_name(spec.kind));
        auto result = bbq::find_threshold(eval, options, bbq::derive_stage_seed(base_seed, "pstar-boot", key));
        *out = new bbq_threshold{std::move(result)};
        return BBQ_OK;
    });
}

bbq_status bbq_find_threshold_fn(bbq_wer_fn fn, void* user, size_t shots, const bbq_threshold_options* opts,
                                 uint64_t bootstrap_seed, bbq_threshold** out)
{
    return guard([&] {
        BBQ_REQUIRE(fn != nullptr && opts != nullptr && out != nullptr, "bbq_find_threshold_fn: null argument");
        BBQ_REQUIRE(shots >= 1, "bbq_find_threshold_fn: shots must be at least 1");
        const auto options = to_options(*opts);
        auto eval = [&](double p) {
            const double rate = fn(p, user);
            if (!(rate >= 0.0 && rate <= 1.0))
                throw bbq::Error(bbq::ErrorCode::Config, "WER callback returned a value outside [0, 1]");
            bbq::WerPoint w;
            w.code_name = "synthetic";
            w.decoder = "callback";
            w.p = p;
            w.shots = shots;
            w.failures = static_cast<std::size_t>(std::llround(rate * static_cast<double>(shots)));
            w.wer = rate;
            const auto ci = bbq::wilson_interval(w.failures, shots);
            w.wilson_lo = ci.lo;
            w.wilson_hi = ci.hi;
            return w;
        };
        *out = new bbq_threshold{bbq::find_threshold(eval, options, bootstrap_seed)};
        return BBQ_OK;
    });
}

bbq_status bbq_threshold_get_summary(const bbq_threshold* t, bbq_threshold_summary* out)
{
    return guard([&] {
        BBQ_REQUIRE(t != nullptr && out != nullptr, "bbq_threshold_get_summary: null argument");
        const auto& r = t->result;
        out->p_star = r.p_star;
        out->ci_lo = r.ci_lo;
        out->ci_hi = r.ci_hi;
        out->p_lo = r.bracket.lo.p;
        out->p_hi = r.bracket.hi.p;
        out->wer_lo = r.bracket.lo.wer;
        out->wer_hi = r.bracket.hi.wer;
        out->evaluations = r.evaluations.size();
        out->bootstrap_clamps = r.bootstrap_clamps;
        out->reached_tol = r.reached_tol ? 1 : 0;
        out->degenerate = r.degenerate ? 1 : 0;
        return BBQ_OK;
    });
}

bbq_status bbq_threshold_get_evaluation(const bbq_threshold* t, size_t index, bbq_wer_point* out)
{
    return guard([&] {
        BBQ_REQUIRE(t != nullptr && out != nullptr, "bbq_threshold_get_evaluation: null argument");
        BBQ_REQUIRE(index < t->result.evaluations.size(), "bbq_threshold_get_evaluation: index out of range");
        fill_point(t->result.evaluations[index], out);
        return BBQ_OK;
    });
}

void bbq_threshold_free(bbq_threshold* t)
{
    delete t;
}

bbq_status bbq_fss_dataset_new(bbq_fss_dataset** out)
{
    return guard([&] {
        BBQ_REQUIRE(out != nullptr, "bbq_fss_dataset_new: null argument");
        *out = new bbq_fss_dataset{};
        return BBQ_OK;
    });
}

void bbq_fss_dataset_free(bbq_fss_dataset* data)
{
    delete data;
}

bbq_status bbq_fss_dataset_add(bbq_fss_dataset* data, size_t n, double p, size_t shots, size_t failures)
{
    return guard([&] {
        BBQ_REQUIRE(data != nullptr, "bbq_fss_dataset_add: null argument");
        BBQ_REQUIRE(shots >= 1 && failures <= shots, "bbq_fss_dataset_add: need 0 <= failures <= shots, shots >= 1");
        BBQ_REQUIRE(n >= 1 && p >= 0.0 && p <= 1.0, "bbq_fss_dataset_add: need n >= 1 and p in [0, 1]");
        data->rows.push_back({n, p, static_cast<double>(failures) / static_cast<double>(shots), shots, failures});
        return BBQ_OK;
    });
}

bbq_status bbq_fss_dataset_set_pstar(bbq_fss_dataset* data, size_t n, double p_star, double ci_lo, double ci_hi)
{
    return guard([&] {
        BBQ_REQUIRE(data != nullptr, "bbq_fss_dataset_set_pstar: null argument");
        BBQ_REQUIRE(ci_lo <= p_star && p_star <= ci_hi, "bbq_fss_dataset_set_pstar: need ci_lo <= p_star <= ci_hi");
        data->pstar[n] = {p_star, ci_lo, ci_hi};
        return BBQ_OK;
    });
}

void bbq_fss_options_default(bbq_fss_options* opts)
{
    if (opts == nullptr)
        return;
    const bbq::FssOptions d;
    opts->window = d.window;
    opts->bootstrap_iters = d.bootstrap_iters;
    opts->confidence = d.confidence;
    opts->threads = d.threads;
}

bbq_status bbq_fss_fit(const bbq_fss_dataset* data, const bbq_fss_options* opts, uint64_t bootstrap_seed,
                       bbq_fss_result* out)
{
    return guard([&] {
        BBQ_REQUIRE(data != nullptr && opts != nullptr && out != nullptr, "bbq_fss_fit: null argument");
        bbq::FssOptions o;
        o.window = opts->window;
        o.bootstrap_iters = opts->bootstrap_iters;
        o.confidence = opts->confidence;
        o.threads = opts->threads;
        bbq::SizePstar pstar;
        for (const auto& [n, t] : data->pstar)
            pstar[n] = t.p_star;
        bbq::FssResult r = bbq::fit_collapse(data->rows, pstar, o);
        if (o.bootstrap_iters > 0)
            bbq::bootstrap_fss(r, data->rows, pstar, o, bootstrap_seed);
        out->p_inf = r.p_inf;
        out->nu = r.nu;
        for (int i = 0; i < 4; ++i)
            out->coeffs[i] = r.coeffs[i];
        out->rss = r.rss;
        out->ci_p_inf_lo = r.ci_p_inf.lo;
        out->ci_p_inf_hi = r.ci_p_inf.hi;
        out->ci_nu_lo = r.ci_nu.lo;
        out->ci_nu_hi = r.ci_nu.hi;
        out->window = r.window;
        out->points = r.points;
        out->sizes = r.sizes;
        out->bootstrap_skipped = r.bootstrap_skipped;
        out->flagged = r.flagged ? 1 : 0;
        return BBQ_OK;
    });
}

bbq_status bbq_fss_linearized(const bbq_fss_dataset* data, double nu, double confidence, bbq_linear_fit* out)
{
    return guard([&] {
        BBQ_REQUIRE(data != nullptr && out != nullptr, "bbq_fss_linearized: null argument");
        const auto lf = bbq::fit_linearized(data->pstar, nu, confidence);
        out->p_inf = lf.p_inf;
        out->c = lf.c;
        out->ci_lo = lf.ci_p_inf.lo;
        out->ci_hi = lf.ci_p_inf.hi;
        out->weighted = lf.weighted ? 1 : 0;
        return BBQ_OK;
    });
}

bbq_status bbq_run(const char* command, const char* config_json, char** report)
{
    return guard([&] {
        BBQ_REQUIRE(command != nullptr, "bbq_run: null command");
        const auto cfg = bbq::resolve_config(command, parse_config(config_json));
        nlohmann::json rep;
        const auto code = bbq::run_command(cfg, &rep, &std::cerr);
        if (report != nullptr)
            *report = dup_string(rep.dump(2));
        if (code != bbq::ErrorCode::Ok)
            return fail(static_cast<bbq_status>(code), "one or more thresholds had no WER crossing in range");
        return BBQ_OK;
    });
}

bbq_status bbq_resolve_config(const char* command, const char* config_json, char** out)
{
    return guard([&] {
        BBQ_REQUIRE(command != nullptr && out != nullptr, "bbq_resolve_config: null argument");
        const auto cfg = bbq::resolve_config(command, parse_config(config_json));
        *out = dup_string(bbq::config_to_json(cfg).dump(2));
        return BBQ_OK;
    });
}

void bbq_string_free(char* s)
{
    delete[] s;
}

}  // extern "C"
