#include "erasure.hpp"

#include "error.hpp"

namespace bbq {

ErasureSample sample_erasure(std::size_t n, double p, Rng& rng)
{
    if (!(p >= 0.0 && p <= 1.0))
        throw Error(ErrorCode::Config, "sample_erasure: p must lie in [0, 1]");

    ErasureSample s{BitVec(n), BitVec(n), BitVec(n)};
    for (std::size_t i = 0; i < n; ++i)
        if (uniform01(rng) < p)
            s.erased.set(i);

    const auto erased = s.erased.support();
    for (auto i : erased)
        if (rng() >> 63)
            s.e_x.set(i);
    for (auto i : erased)
        if (rng() >> 63)
            s.e_z.set(i);
    return s;
}

Syndromes syndromes(const CssCode& code, const ErasureSample& sample)
{
    if (sample.e_x.size() != code.n || sample.e_z.size() != code.n)
        throw Error(ErrorCode::Config, "syndromes: sample length does not match the code");
    return {code.hz * sample.e_x, code.hx * sample.e_z};
}

}  // namespace bbq
