#include "codes.hpp"

#include <charconv>
#include <stdexcept>

#include "error.hpp"

namespace bbq {

namespace {

std::size_t wrap(long long value, std::size_t modulus)
{
    const auto mod = static_cast<long long>(modulus);
    return static_cast<std::size_t>(((value % mod) + mod) % mod);
}

std::size_t computed_k(const CssCode& code)
{
    const std::size_t rx = rank(code.hx);
    const std::size_t rz = rank(code.hz);
    if (rx + rz > code.n)
        throw std::logic_error("computed_k: rank exceeds qubit count");
    return code.n - rx - rz;
}

bool parse_size(std::string_view text, std::size_t& out)
{
    if (text.empty())
        return false;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace

std::string_view family_name(CodeFamily family)
{
    switch (family) {
    case CodeFamily::BB:
        return "bb";
    case CodeFamily::Toric:
        return "toric";
    }
    return "unknown";
}

std::vector<Monomial> default_poly_a() { return {{3, 0}, {0, 1}, {0, 2}}; }
std::vector<Monomial> default_poly_b() { return {{0, 3}, {1, 0}, {2, 0}}; }

BinaryMatrix polynomial_matrix(std::size_t l, std::size_t m, const std::vector<Monomial>& poly)
{
    BinaryMatrix out(l * m, l * m);
    for (const auto& term : poly) {
        for (std::size_t a = 0; a < l; ++a) {
            for (std::size_t b = 0; b < m; ++b) {
                const std::size_t row = a * m + b;
                const std::size_t col = wrap(static_cast<long long>(a) + term.x_power, l) * m +
                                        wrap(static_cast<long long>(b) + term.y_power, m);
                out.flip(row, col);
            }
        }
    }
    return out;
}

CssCode build_bb_code(std::size_t l, std::size_t m, const std::vector<Monomial>& poly_a,
                      const std::vector<Monomial>& poly_b, std::string name)
{
    if (l < 2 || m < 2)
        throw Error(ErrorCode::Config, "build_bb_code: L and M must be at least 2");
    if (poly_a.empty() || poly_b.empty())
        throw Error(ErrorCode::Config, "build_bb_code: polynomials must be non-empty");

    const BinaryMatrix a = polynomial_matrix(l, m, poly_a);
    const BinaryMatrix b = polynomial_matrix(l, m, poly_b);

    CssCode code;
    code.name = name.empty() ? "bb-" + std::to_string(l) + "x" + std::to_string(m) : std::move(name);
    code.family = CodeFamily::BB;
    code.n = 2 * l * m;
    code.l_param = l;
    code.m_param = m;
    code.hx = BinaryMatrix::hstack(a, b);
    code.hz = BinaryMatrix::hstack(b.transpose(), a.transpose());
    code.k = computed_k(code);
    return code;
}

CssCode build_toric_code(std::size_t l)
{
    if (l < 2)
        throw Error(ErrorCode::Config, "build_toric_code: L must be at least 2");

    const std::size_t vertices = l * l;
    auto vertex = [l](std::size_t r, std::size_t c) { return (r % l) * l + (c % l); };
    auto horizontal = [&](std::size_t r, std::size_t c) { return 2 * vertex(r, c); };
    auto vertical = [&](std::size_t r, std::size_t c) { return 2 * vertex(r, c) + 1; };

    CssCode code;
    code.name = "toric-" + std::to_string(l);
    code.family = CodeFamily::Toric;
    code.n = 2 * vertices;
    code.l_param = l;
    code.m_param = l;
    code.hx = BinaryMatrix(vertices, code.n);
    code.hz = BinaryMatrix(vertices, code.n);

    for (std::size_t r = 0; r < l; ++r) {
        for (std::size_t c = 0; c < l; ++c) {
            const std::size_t v = vertex(r, c);
            code.hx.set(v, horizontal(r, c));
            code.hx.set(v, horizontal(r, c + l - 1));
            code.hx.set(v, vertical(r, c));
            code.hx.set(v, vertical(r + l - 1, c));

            code.hz.set(v, horizontal(r, c));
            code.hz.set(v, horizontal(r + 1, c));
            code.hz.set(v, vertical(r, c));
            code.hz.set(v, vertical(r, c + 1));
        }
    }
    code.k = computed_k(code);
    return code;
}

CssCode code_from_registry(std::string_view name)
{
    auto fail = [&]() -> CssCode {
        std::string msg = "unknown code '" + std::string(name) + "'; known codes:";
        for (const auto& n : registry_names())
            msg += " " + n;
        msg += " (and toric-L for any L >= 2)";
        throw Error(ErrorCode::Config, msg);
    };

    if (name.starts_with("toric-")) {
        std::size_t l = 0;
        if (!parse_size(name.substr(6), l) || l < 2)
            return fail();
        return build_toric_code(l);
    }
    if (name.starts_with("bb-")) {
        const auto rest = name.substr(3);
        const auto x = rest.find('x');
        std::size_t l = 0;
        std::size_t m = 0;
        if (x == std::string_view::npos || !parse_size(rest.substr(0, x), l) || !parse_size(rest.substr(x + 1), m) ||
            l < 2 || m < 2)
            return fail();
        return build_bb_code(l, m, default_poly_a(), default_poly_b());
    }
    return fail();
}

std::vector<std::string> registry_names()
{
    return {"bb-12x6",  "bb-18x9",  "bb-24x12", "bb-30x15", "bb-36x18",
            "toric-12", "toric-24", "toric-30", "toric-36"};
}

LogicalChecker::LogicalChecker(const CssCode& code)
    : hx_(code.hx), hz_(code.hz), hx_basis_(code.hx), hz_basis_(code.hz)
{
}

bool LogicalChecker::x_sector_failed(const BitVec& residual_x) const
{
    if ((hz_ * residual_x).any())
        throw std::logic_error("logical_failure: X residual has a nonzero syndrome");
    return !hx_basis_.contains(residual_x);
}

bool LogicalChecker::z_sector_failed(const BitVec& residual_z) const
{
    if ((hx_ * residual_z).any())
        throw std::logic_error("logical_failure: Z residual has a nonzero syndrome");
    return !hz_basis_.contains(residual_z);
}

bool LogicalChecker::failed(const BitVec& residual_x, const BitVec& residual_z) const
{
    const bool x_failed = x_sector_failed(residual_x);
    const bool z_failed = z_sector_failed(residual_z);
    return x_failed || z_failed;
}

bool logical_failure(const CssCode& code, const BitVec& residual_x, const BitVec& residual_z)
{
    return LogicalChecker(code).failed(residual_x, residual_z);
}

}  // namespace bbq
