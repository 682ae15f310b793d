#include "bposd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "error.hpp"

namespace bbq {

void BpOsdConfig::validate() const
{
    if (max_iterations < 1)
        throw Error(ErrorCode::Config, "BP-OSD: max_iterations must be at least 1");
    if (!(unerased_prior > 0.0 && unerased_prior < erased_prior && erased_prior <= 0.5))
        throw Error(ErrorCode::Config, "BP-OSD: priors must satisfy 0 < unerased_prior < erased_prior <= 0.5");
    if (!(min_sum_scale > 0.0 && min_sum_scale <= 1.0))
        throw Error(ErrorCode::Config, "BP-OSD: min_sum_scale must lie in (0, 1]");
    if (!(llr_clip > 0.0))
        throw Error(ErrorCode::Config, "BP-OSD: llr_clip must be positive");
}

std::vector<double> priors_from_erasure(const BitVec& erased, const BpOsdConfig& cfg)
{
    const auto llr = [&](double q) { return std::clamp(std::log((1.0 - q) / q), -cfg.llr_clip, cfg.llr_clip); };
    const double erased_llr = llr(cfg.erased_prior);
    const double clean_llr = llr(cfg.unerased_prior);
    std::vector<double> out(erased.size());
    for (std::size_t j = 0; j < out.size(); ++j)
        out[j] = erased.get(j) ? erased_llr : clean_llr;
    return out;
}

double soft_cost(const BitVec& e, std::span<const double> priors)
{
    double cost = 0.0;
    for (auto j : e.support())
        cost += std::abs(priors[j]);
    return cost;
}

BpOsdDecoder::BpOsdDecoder(BinaryMatrix h, BpOsdConfig cfg) : h_(std::move(h)), cfg_(cfg)
{
    cfg_.validate();
    rank_ = rank(h_);

    check_ptr_.assign(h_.rows() + 1, 0);
    for (std::size_t c = 0; c < h_.rows(); ++c) {
        for (auto v : h_.row_support(c))
            edge_var_.push_back(static_cast<std::uint32_t>(v));
        check_ptr_[c + 1] = static_cast<std::uint32_t>(edge_var_.size());
    }

    std::vector<std::uint32_t> degree(h_.cols(), 0);
    for (auto v : edge_var_)
        ++degree[v];
    var_ptr_.assign(h_.cols() + 1, 0);
    for (std::size_t v = 0; v < h_.cols(); ++v)
        var_ptr_[v + 1] = var_ptr_[v] + degree[v];
    var_edges_.resize(edge_var_.size());
    std::vector<std::uint32_t> fill(var_ptr_.begin(), var_ptr_.end() - 1);
    for (std::uint32_t e = 0; e < edge_var_.size(); ++e)
        var_edges_[fill[edge_var_[e]]++] = e;

    v2c_.resize(edge_var_.size());
    c2v_.resize(edge_var_.size());
}

SoftDecision BpOsdDecoder::bp_min_sum(const BitVec& syndrome, std::span<const double> priors)
{
    if (syndrome.size() != h_.rows() || priors.size() != h_.cols())
        throw std::invalid_argument("bp_min_sum: dimension mismatch");

    const std::size_t checks = h_.rows();
    const std::size_t vars = h_.cols();
    const double clip = cfg_.llr_clip;

    SoftDecision out;
    out.hard = BitVec(vars);
    out.posterior_llr.assign(priors.begin(), priors.end());

    for (std::size_t e = 0; e < edge_var_.size(); ++e)
        v2c_[e] = std::clamp(priors[edge_var_[e]], -clip, clip);

    for (std::size_t it = 1; it <= cfg_.max_iterations; ++it) {
        for (std::size_t c = 0; c < checks; ++c) {
            const std::uint32_t begin = check_ptr_[c];
            const std::uint32_t end = check_ptr_[c + 1];
            bool negative = syndrome.get(c);
            double min1 = std::numeric_limits<double>::infinity();
            double min2 = min1;
            std::uint32_t argmin = end;
            for (std::uint32_t e = begin; e < end; ++e) {
                const double m = v2c_[e];
                negative ^= (m < 0.0);
                const double a = std::abs(m);
                if (a < min1) {
                    min2 = min1;
                    min1 = a;
                    argmin = e;
                } else if (a < min2) {
                    min2 = a;
                }
            }
            for (std::uint32_t e = begin; e < end; ++e) {
                const bool sign = negative ^ (v2c_[e] < 0.0);
                const double mag = (e == argmin ? min2 : min1) * cfg_.min_sum_scale;
                c2v_[e] = sign ? -mag : mag;
            }
        }

        for (std::size_t v = 0; v < vars; ++v) {
            double post = priors[v];
            for (std::uint32_t i = var_ptr_[v]; i < var_ptr_[v + 1]; ++i)
                post += c2v_[var_edges_[i]];
            out.posterior_llr[v] = post;
            out.hard.set(v, post < 0.0);
            for (std::uint32_t i = var_ptr_[v]; i < var_ptr_[v + 1]; ++i) {
                const std::uint32_t e = var_edges_[i];
                v2c_[e] = std::clamp(post - c2v_[e], -clip, clip);
            }
        }

        out.iterations_used = it;
        bool satisfied = true;
        for (std::size_t c = 0; c < checks && satisfied; ++c) {
            bool parity = false;
            for (std::uint32_t e = check_ptr_[c]; e < check_ptr_[c + 1]; ++e)
                parity ^= out.hard.get(edge_var_[e]);
            satisfied = (parity == syndrome.get(c));
        }
        if (satisfied) {
            out.converged = true;
            break;
        }
    }
    return out;
}

namespace {

struct Candidate {
    BitVec e;
    double cost = 0.0;
    std::size_t weight = 0;
};

bool better(const Candidate& a, const Candidate& b)
{
    const double scale = std::max({1.0, std::abs(a.cost), std::abs(b.cost)});
    if (std::abs(a.cost - b.cost) > 1e-12 * scale)
        return a.cost < b.cost;
    if (a.weight != b.weight)
        return a.weight < b.weight;
    return a.e.lex_less(b.e);
}

}  // namespace

BitVec BpOsdDecoder::osd_cs(const BitVec& syndrome, const SoftDecision& soft, std::span<const double> priors)
{
    const std::size_t n = h_.cols();
    if (syndrome.size() != h_.rows() || priors.size() != n || soft.posterior_llr.size() != n || soft.hard.size() != n)
        throw std::invalid_argument("osd_cs: dimension mismatch");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double ra = std::abs(soft.posterior_llr[a]);
        const double rb = std::abs(soft.posterior_llr[b]);
        if (ra != rb)
            return ra < rb;
        return soft.hard.get(a) && !soft.hard.get(b);
    });

    const RowReduction red = row_reduce(h_, order, rank_);
    const auto& pivots = red.pivots;
    const BitVec reduced_syndrome = red.row_transform * syndrome;
    for (std::size_t r = pivots.size(); r < h_.rows(); ++r)
        if (reduced_syndrome.get(r))
            throw std::logic_error("osd_cs: syndrome is not in the column space of the check matrix");

    std::vector<bool> is_pivot(n, false);
    for (auto p : pivots)
        is_pivot[p] = true;
    std::vector<std::size_t> free_positions;
    free_positions.reserve(n - pivots.size());
    for (auto j : order)
        if (!is_pivot[j])
            free_positions.push_back(j);

    // OSD-0: free bits follow the hard decision; pivot bits are solved.
    Candidate base;
    base.e = BitVec(n);
    for (auto q : free_positions)
        if (soft.hard.get(q))
            base.e.set(q);
    {
        const BitVec free_part = base.e;
        for (std::size_t r = 0; r < pivots.size(); ++r) {
            Word acc = 0;
            auto row = red.reduced.row_words(r);
            auto fw = free_part.words();
            for (std::size_t w = 0; w < row.size(); ++w)
                acc ^= row[w] & fw[w];
            const bool bit = reduced_syndrome.get(r) ^ (std::popcount(acc) & 1);
            base.e.set(pivots[r], bit);
        }
    }

    const std::size_t lambda = std::min(cfg_.osd_order, free_positions.size());
    std::vector<BitVec> flips;
    flips.reserve(lambda);
    for (std::size_t i = 0; i < lambda; ++i) {
        const std::size_t q = free_positions[i];
        BitVec f(n);
        f.set(q);
        for (std::size_t r = 0; r < pivots.size(); ++r)
            if (red.reduced.get(r, q))
                f.flip(pivots[r]);
        flips.push_back(std::move(f));
    }

    auto score = [&](Candidate& c) {
        c.cost = soft_cost(c.e, priors);
        c.weight = c.e.count();
    };
    score(base);
    Candidate best = base;
    std::size_t count = 1;
    auto consider = [&](BitVec e) {
        Candidate c{std::move(e)};
        score(c);
        ++count;
        if (better(c, best))
            best = std::move(c);
    };
    for (std::size_t i = 0; i < lambda; ++i)
        consider(base.e ^ flips[i]);
    for (std::size_t i = 0; i < lambda; ++i) {
        const BitVec single = base.e ^ flips[i];
        for (std::size_t j = i + 1; j < lambda; ++j)
            consider(single ^ flips[j]);
    }
    last_candidates_ = count;
    return std::move(best.e);
}

BitVec BpOsdDecoder::decode(const BitVec& syndrome, const BitVec& erased)
{
    if (erased.size() != h_.cols())
        throw std::invalid_argument("decode: erasure mask length mismatch");
    const auto priors = priors_from_erasure(erased, cfg_);
    if (syndrome.none()) {
        last_candidates_ = 0;
        return BitVec(h_.cols());
    }
    const SoftDecision soft = bp_min_sum(syndrome, priors);
    BitVec correction = osd_cs(syndrome, soft, priors);
    if (!(h_ * correction == syndrome))
        throw std::logic_error("decode: correction does not reproduce the syndrome");
    return correction;
}

SoftDecision bp_min_sum(const BinaryMatrix& h, const BitVec& syndrome, std::span<const double> priors,
                        const BpOsdConfig& cfg)
{
    return BpOsdDecoder(h, cfg).bp_min_sum(syndrome, priors);
}

BitVec osd_cs(const BinaryMatrix& h, const BitVec& syndrome, const SoftDecision& soft, std::span<const double> priors,
              const BpOsdConfig& cfg)
{
    return BpOsdDecoder(h, cfg).osd_cs(syndrome, soft, priors);
}

BitVec decode_sector(const BinaryMatrix& h, const BitVec& syndrome, const BitVec& erased, const BpOsdConfig& cfg)
{
    return BpOsdDecoder(h, cfg).decode(syndrome, erased);
}

}  // namespace bbq
