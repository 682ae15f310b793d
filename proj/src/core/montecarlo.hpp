// WER estimation at one (code, decoder, p) point.

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "bposd.hpp"
#include "codes.hpp"
#include "rng.hpp"

namespace bbq {

enum class DecoderKind { BpOsd, MwpmUninformed, MwpmErasure };

std::string_view decoder_name(DecoderKind kind);
/// "bposd", "mwpm-uninformed" or "mwpm-erasure"; anything else throws Error(Config).
DecoderKind decoder_from_name(std::string_view name);

struct DecoderSpec {
    DecoderKind kind = DecoderKind::BpOsd;
    BpOsdConfig bposd;
};

struct WerPoint {
    std::string code_name;
    std::string family;
    std::size_t n = 0;
    std::size_t k = 0;
    std::size_t l_param = 0;
    std::size_t m_param = 0;
    std::string decoder;
    double p = 0.0;
    std::size_t shots = 0;
    std::size_t failures = 0;
    double wer = 0.0;
    double wilson_lo = 0.0;
    double wilson_hi = 0.0;
    std::uint64_t point_seed = 0;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

Interval wilson_interval(std::size_t failures, std::size_t shots, double confidence = 0.95);

/// p rounded to the nearest 1e-9, the resolution used for point identity and caching.
std::int64_t quantize_p(double p);
/// Nearest double to k * 1e-9.
double dequantize_p(std::int64_t k);

/// Stable hash of (code, decoder, quantized p, shots).
std::uint64_t point_id(std::string_view code_name, std::string_view decoder, double p, std::size_t shots);

/// One worker's decoding state for a code. Not thread-safe; make one per thread.
class ShotSimulator {
public:
    ShotSimulator(const CssCode& code, const DecoderSpec& spec);
    ~ShotSimulator();
    ShotSimulator(ShotSimulator&&) noexcept;
    ShotSimulator& operator=(ShotSimulator&&) noexcept;

    /// Samples one erasure from rng, decodes both sectors, reports logical failure.
    bool run_shot(double p, Rng& rng);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Shot s draws from Rng(derive_shot_seed(base_seed, point_id, s)), so the
/// result does not depend on `threads`. threads = 0 means hardware concurrency.
/// Decoder faults are rethrown with the failing shot index in the message.
WerPoint estimate_wer(const CssCode& code, const DecoderSpec& spec, double p, std::size_t shots,
                      std::uint64_t base_seed, unsigned threads = 1);

}  // namespace bbq
