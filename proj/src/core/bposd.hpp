// Min-sum belief propagation with ordered-statistics post-processing
// (combination sweep), decoding one CSS sector at a time.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gf2.hpp"

namespace bbq {

struct BpOsdConfig {
    std::size_t max_iterations = 50;
    std::size_t osd_order = 10;
    double erased_prior = 0.5;
    double unerased_prior = 1e-10;
    double min_sum_scale = 1.0;
    double llr_clip = 50.0;

    /// Throws Error(Config) on out-of-range fields.
    void validate() const;
};

struct SoftDecision {
    BitVec hard;                       ///< hard[j] = 1 iff posterior_llr[j] < 0
    std::vector<double> posterior_llr;
    bool converged = false;
    std::size_t iterations_used = 0;
};

/// ln((1 - q)/q) per bit, q taken from the config by erasure status, clipped to +-llr_clip.
std::vector<double> priors_from_erasure(const BitVec& erased, const BpOsdConfig& cfg);

/// Sum of priors[j] over the support of e. Priors are non-negative here, so
/// bits inside the erasure (LLR 0) are free.
double soft_cost(const BitVec& e, std::span<const double> priors);

/// Decoder for a fixed check matrix. Holds message and elimination scratch, so
/// one instance per thread.
class BpOsdDecoder {
public:
    BpOsdDecoder(BinaryMatrix h, BpOsdConfig cfg);

    const BinaryMatrix& check_matrix() const { return h_; }
    const BpOsdConfig& config() const { return cfg_; }

    /// Flooding-schedule min-sum. Check c enforces parity syndrome[c].
    SoftDecision bp_min_sum(const BitVec& syndrome, std::span<const double> priors);

    /// OSD-CS over the reliability order of `soft`. Candidates: the OSD-0
    /// solution, every single flip and every pair of flips among the
    /// osd_order least reliable non-pivot positions. Winner minimises
    /// (soft_cost, Hamming weight, lexicographic order).
    BitVec osd_cs(const BitVec& syndrome, const SoftDecision& soft, std::span<const double> priors);

    /// priors -> BP -> OSD-CS. The returned correction always reproduces the syndrome.
    BitVec decode(const BitVec& syndrome, const BitVec& erased);

    std::size_t last_candidate_count() const { return last_candidates_; }

private:
    BinaryMatrix h_;
    BpOsdConfig cfg_;
    std::size_t rank_ = 0;

    // Tanner graph: edges grouped by check; var_edges_ lists edge ids per variable.
    std::vector<std::uint32_t> check_ptr_;
    std::vector<std::uint32_t> edge_var_;
    std::vector<std::uint32_t> var_ptr_;
    std::vector<std::uint32_t> var_edges_;

    std::vector<double> v2c_;
    std::vector<double> c2v_;
    std::size_t last_candidates_ = 0;
};

SoftDecision bp_min_sum(const BinaryMatrix& h, const BitVec& syndrome, std::span<const double> priors,
                        const BpOsdConfig& cfg);
BitVec osd_cs(const BinaryMatrix& h, const BitVec& syndrome, const SoftDecision& soft, std::span<const double> priors,
              const BpOsdConfig& cfg);
BitVec decode_sector(const BinaryMatrix& h, const BitVec& syndrome, const BitVec& erased, const BpOsdConfig& cfg);

}  // namespace bbq
