// Exact maximum-weight matching on general graphs (Edmonds' blossom
// algorithm with primal-dual updates, O(V^3)). Integer weights keep every
// dual update exact.

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace bbq {

struct WeightedEdge {
    std::size_t u = 0;
    std::size_t v = 0;
    std::int64_t weight = 0;
};

/// mate[v] is the partner of v or -1. With max_cardinality the result is a
/// maximum-cardinality matching of maximum weight among those.
std::vector<long> max_weight_matching(std::size_t vertex_count, const std::vector<WeightedEdge>& edges,
                                      bool max_cardinality);

/// Minimum total cost perfect matching of a complete graph given as a
/// symmetric cost matrix (row-major, size n*n, n even). Returns mate indices.
std::vector<std::size_t> min_cost_perfect_matching(std::size_t n, const std::vector<std::int64_t>& cost);

}  // namespace bbq
