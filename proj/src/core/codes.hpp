// CSS code constructions: bivariate bicycle codes and the toric code.

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "gf2.hpp"

namespace bbq {

enum class CodeFamily { BB, Toric };

std::string_view family_name(CodeFamily family);

/// x^x_power * y^y_power in F2[x, y] / (x^L - 1, y^M - 1).
struct Monomial {
    int x_power = 0;
    int y_power = 0;
};

struct CssCode {
    std::string name;
    CodeFamily family = CodeFamily::BB;
    std::size_t n = 0;
    std::size_t k = 0;
    std::size_t l_param = 0;
    std::size_t m_param = 0;
    BinaryMatrix hx;  ///< X-type checks; detect Z errors
    BinaryMatrix hz;  ///< Z-type checks; detect X errors
};

/// A = x^3 + y + y^2
std::vector<Monomial> default_poly_a();
/// B = y^3 + x + x^2
std::vector<Monomial> default_poly_b();

/// The LM x LM matrix of sum of monomials. Row index a*M + b maps to column
/// ((a + x_power) mod L)*M + (b + y_power) mod M for each term.
BinaryMatrix polynomial_matrix(std::size_t l, std::size_t m, const std::vector<Monomial>& poly);

/// Hx = [A | B], Hz = [B^T | A^T]; k is computed from ranks.
CssCode build_bb_code(std::size_t l, std::size_t m, const std::vector<Monomial>& poly_a,
                      const std::vector<Monomial>& poly_b, std::string name = {});

/// Toric code on an L x L torus.
///
/// Vertex (r, c) has index r*L + c. Qubit 2*(r*L + c) + 0 is the horizontal
/// edge (r, c)-(r, c+1); qubit 2*(r*L + c) + 1 is the vertical edge
/// (r, c)-(r+1, c). Row r*L + c of hx is the vertex check at (r, c); row
/// r*L + c of hz is the plaquette whose top-left corner is (r, c).
CssCode build_toric_code(std::size_t l);

/// bb-LxM (polynomials fixed to default_poly_a/b) or toric-L.
CssCode code_from_registry(std::string_view name);
std::vector<std::string> registry_names();

/// Residuals are logically trivial iff they lie in the stabilizer row spaces.
/// Holds reduced bases of hx and hz; immutable after construction.
class LogicalChecker {
public:
    explicit LogicalChecker(const CssCode& code);

    /// residual_x must satisfy hz*residual_x = 0 and residual_z must satisfy
    /// hx*residual_z = 0; violations throw std::logic_error.
    bool failed(const BitVec& residual_x, const BitVec& residual_z) const;
    bool x_sector_failed(const BitVec& residual_x) const;
    bool z_sector_failed(const BitVec& residual_z) const;

private:
    BinaryMatrix hx_;
    BinaryMatrix hz_;
    RowspaceBasis hx_basis_;
    RowspaceBasis hz_basis_;
};

bool logical_failure(const CssCode& code, const BitVec& residual_x, const BitVec& residual_z);

}  // namespace bbq
