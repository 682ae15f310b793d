// Minimum-weight perfect matching decoder for the toric code, with
// uninformed (constant) and erasure-aware (0 / n) edge weights.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "codes.hpp"
#include "gf2.hpp"

namespace bbq {

/// Sector names the error type being corrected: X errors are seen by hz,
/// Z errors by hx.
enum class Sector { X, Z };

const BinaryMatrix& sector_checks(const CssCode& code, Sector sector);

struct MatchingGraph {
    std::size_t num_nodes = 0;
    std::vector<std::array<std::uint32_t, 2>> endpoints;  ///< per qubit (edge)
    std::vector<std::int64_t> weight;                     ///< per edge, >= 0
    std::vector<std::int64_t> tie_rank;                   ///< per edge secondary key
    // CSR adjacency: for node v, adj_edge[adj_ptr[v] .. adj_ptr[v+1]) in edge-index order.
    std::vector<std::uint32_t> adj_ptr;
    std::vector<std::uint32_t> adj_edge;

    std::size_t num_edges() const { return endpoints.size(); }
    std::uint32_t other_end(std::uint32_t edge, std::uint32_t node) const
    {
        return endpoints[edge][0] == node ? endpoints[edge][1] : endpoints[edge][0];
    }
    std::size_t degree(std::size_t node) const { return adj_ptr[node + 1] - adj_ptr[node]; }
};

/// One node per check of the sector, one edge per qubit. Rejects non-toric codes.
MatchingGraph build_matching_graph(const CssCode& code, Sector sector);

/// Every edge gets `constant`; p only feeds run metadata (q = p/2), it cannot
/// change a constant-weight matching.
MatchingGraph weights_uninformed(MatchingGraph g, double p, std::int64_t constant = 1);

/// Weight 0 on erased qubits, n (the qubit count) elsewhere. tie_rank = 1 on
/// every edge so that fewer-edge paths win among equal weights.
MatchingGraph weights_erasure_aware(MatchingGraph g, const BitVec& erased);

/// Exact MWPM of the syndrome defects under the graph's shortest-path metric,
/// ordered lexicographically by (weight, tie_rank). Returns the XOR of the
/// matched paths. Throws std::logic_error on an odd-weight syndrome.
BitVec mwpm_decode(const MatchingGraph& g, const BitVec& syndrome);

/// Total (weight, tie_rank) cost of the last perfect matching found; exposed for
/// brute-force comparisons.
struct MatchingCost {
    std::int64_t weight = 0;
    std::int64_t tie = 0;
    bool operator==(const MatchingCost&) const = default;
};

struct MatchingDetail {
    BitVec correction;
    MatchingCost cost;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  ///< matched defect node ids
};

MatchingDetail mwpm_decode_detailed(const MatchingGraph& g, const BitVec& syndrome);

/// Lexicographic (weight, tie) shortest-path costs from `source` to every node.
std::vector<MatchingCost> shortest_path_costs(const MatchingGraph& g, std::size_t source);

}  // namespace bbq
