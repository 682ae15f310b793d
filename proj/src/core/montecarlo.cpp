#include "montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "erasure.hpp"
#include "error.hpp"
#include "mwpm.hpp"

namespace bbq {

std::string_view decoder_name(DecoderKind kind)
{
    switch (kind) {
    case DecoderKind::BpOsd:
        return "bposd";
    case DecoderKind::MwpmUninformed:
        return "mwpm-uninformed";
    case DecoderKind::MwpmErasure:
        return "mwpm-erasure";
    }
    return "unknown";
}

DecoderKind decoder_from_name(std::string_view name)
{
    for (auto kind : {DecoderKind::BpOsd, DecoderKind::MwpmUninformed, DecoderKind::MwpmErasure})
        if (decoder_name(kind) == name)
            return kind;
    throw Error(ErrorCode::Config,
                "unknown decoder '" + std::string(name) + "' (known: bposd, mwpm-uninformed, mwpm-erasure)");
}

Interval wilson_interval(std::size_t failures, std::size_t shots, double confidence)
{
    if (shots == 0 || failures > shots)
        throw Error(ErrorCode::Config, "wilson_interval: need 0 <= failures <= shots and shots >= 1");
    if (!(confidence > 0.0 && confidence < 1.0))
        throw Error(ErrorCode::Config, "wilson_interval: confidence must lie in (0, 1)");
    const double z = boost::math::quantile(boost::math::normal(), 0.5 + confidence / 2.0);
    const double nn = static_cast<double>(shots);
    const double phat = static_cast<double>(failures) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (phat + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(phat * (1.0 - phat) / nn + z2 / (4.0 * nn * nn)) / denom;
    Interval out{std::max(0.0, center - half), std::min(1.0, center + half)};
    // Exact endpoints at the boundaries; rounding can otherwise leave 1e-17 crumbs.
    if (failures == 0)
        out.lo = 0.0;
    if (failures == shots)
        out.hi = 1.0;
    out.lo = std::min(out.lo, phat);
    out.hi = std::max(out.hi, phat);
    return out;
}

std::int64_t quantize_p(double p)
{
    return std::llround(p * 1e9);
}

double dequantize_p(std::int64_t k)
{
    return static_cast<double>(k) / 1e9;
}

std::uint64_t point_id(std::string_view code_name, std::string_view decoder, double p, std::size_t shots)
{
    std::string key;
    key.append(code_name).append("|").append(decoder).append("|");
    key.append(std::to_string(quantize_p(p))).append("|").append(std::to_string(shots));
    return fnv1a64(key);
}

struct ShotSimulator::Impl {
    const CssCode* code;
    DecoderSpec spec;
    LogicalChecker checker;
    std::optional<BpOsdDecoder> bp_x;
    std::optional<BpOsdDecoder> bp_z;
    MatchingGraph graph_x;
    MatchingGraph graph_z;

    Impl(const CssCode& c, const DecoderSpec& s) : code(&c), spec(s), checker(c)
    {
        if (spec.kind == DecoderKind::BpOsd) {
            bp_x.emplace(c.hz, spec.bposd);
            bp_z.emplace(c.hx, spec.bposd);
        } else {
            graph_x = build_matching_graph(c, Sector::X);
            graph_z = build_matching_graph(c, Sector::Z);
            if (spec.kind == DecoderKind::MwpmUninformed) {
                graph_x = weights_uninformed(std::move(graph_x), 0.0);
                graph_z = weights_uninformed(std::move(graph_z), 0.0);
            }
        }
    }
};

ShotSimulator::ShotSimulator(const CssCode& code, const DecoderSpec& spec) : impl_(std::make_unique<Impl>(code, spec)) {}
ShotSimulator::~ShotSimulator() = default;
ShotSimulator::ShotSimulator(ShotSimulator&&) noexcept = default;
ShotSimulator& ShotSimulator::operator=(ShotSimulator&&) noexcept = default;

bool ShotSimulator::run_shot(double p, Rng& rng)
{
    Impl& s = *impl_;
    const ErasureSample sample = sample_erasure(s.code->n, p, rng);
    const Syndromes syn = syndromes(*s.code, sample);
    BitVec cx;
    BitVec cz;
    switch (s.spec.kind) {
    case DecoderKind::BpOsd:
        cx = s.bp_x->decode(syn.syn_x, sample.erased);
        cz = s.bp_z->decode(syn.syn_z, sample.erased);
        break;
    case DecoderKind::MwpmUninformed:
        cx = mwpm_decode(s.graph_x, syn.syn_x);
        cz = mwpm_decode(s.graph_z, syn.syn_z);
        break;
    case DecoderKind::MwpmErasure:
        cx = mwpm_decode(weights_erasure_aware(s.graph_x, sample.erased), syn.syn_x);
        cz = mwpm_decode(weights_erasure_aware(s.graph_z, sample.erased), syn.syn_z);
        break;
    }
    cx ^= sample.e_x;
    cz ^= sample.e_z;
    // Both sectors are always decoded and checked, so per-shot cost does not
    // depend on which one fails first.
    const bool fx = s.checker.x_sector_failed(cx);
    const bool fz = s.checker.z_sector_failed(cz);
    return fx || fz;
}

namespace {

struct WorkerResult {
    std::size_t failures = 0;
    std::size_t failed_shot = std::numeric_limits<std::size_t>::max();
    std::exception_ptr error;
};

}  // namespace

WerPoint estimate_wer(const CssCode& code, const DecoderSpec& spec, double p, std::size_t shots,
                      std::uint64_t base_seed, unsigned threads)
{
    if (shots == 0)
        throw Error(ErrorCode::Config, "estimate_wer: shots must be at least 1");
    if (!(p >= 0.0 && p <= 1.0))
        throw Error(ErrorCode::Config, "estimate_wer: p must lie in [0, 1]");
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, shots));

    const std::string_view dname = decoder_name(spec.kind);
    const std::uint64_t id = point_id(code.name, dname, p, shots);

    std::vector<WorkerResult> results(threads);
    auto work = [&](unsigned w) {
        const std::size_t begin = shots * w / threads;
        const std::size_t end = shots * (w + 1) / threads;
        WorkerResult& r = results[w];
        std::size_t shot = begin;
        try {
            ShotSimulator sim(code, spec);
            for (; shot < end; ++shot) {
                Rng rng(derive_shot_seed(base_seed, id, shot));
                if (sim.run_shot(p, rng))
                    ++r.failures;
            }
        } catch (...) {
            r.failed_shot = shot;
            r.error = std::current_exception();
        }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned w = 0; w < threads; ++w)
            pool.emplace_back(work, w);
        for (auto& t : pool)
            t.join();
    }

    // Report the lowest failing shot so the diagnostic is scheduling-independent.
    const WorkerResult* first = nullptr;
    for (const auto& r : results)
        if (r.error && (first == nullptr || r.failed_shot < first->failed_shot))
            first = &r;
    if (first != nullptr) {
        const std::string where = code.name + " " + std::string(dname) + " p=" + std::to_string(p) + " shot " +
                                  std::to_string(first->failed_shot) + ": ";
        try {
            std::rethrow_exception(first->error);
        } catch (const Error& e) {
            throw Error(e.code(), where + e.what());
        } catch (const std::exception& e) {
            throw Error(ErrorCode::Internal, where + e.what());
        }
    }

    WerPoint out;
    out.code_name = code.name;
    out.family = std::string(family_name(code.family));
    out.n = code.n;
    out.k = code.k;
    out.l_param = code.l_param;
    out.m_param = code.m_param;
    out.decoder = std::string(dname);
    out.p = p;
    out.shots = shots;
    for (const auto& r : results)
        out.failures += r.failures;
    out.wer = static_cast<double>(out.failures) / static_cast<double>(shots);
    const Interval ci = wilson_interval(out.failures, shots);
    out.wilson_lo = ci.lo;
    out.wilson_hi = ci.hi;
    out.point_seed = derive_point_seed(base_seed, id);
    return out;
}

}  // namespace bbq
