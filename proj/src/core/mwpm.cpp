#include "mwpm.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>

#include "blossom.hpp"
#include "error.hpp"

namespace bbq {

namespace {

constexpr std::uint32_t kNoEdge = std::numeric_limits<std::uint32_t>::max();
constexpr std::int64_t kUnreached = std::numeric_limits<std::int64_t>::max();

struct PathTree {
    std::vector<std::int64_t> key;
    std::vector<std::uint32_t> pred_edge;
};

// Uniform edge keys: breadth-first layers, each visited in node order, pop in
// exactly the (key, node) order Dijkstra would use and give the same tree.
PathTree layered_bfs(const MatchingGraph& g, std::size_t source, std::int64_t step, bool zero_weight_only)
{
    PathTree t{std::vector<std::int64_t>(g.num_nodes, kUnreached), std::vector<std::uint32_t>(g.num_nodes, kNoEdge)};
    std::vector<std::uint32_t> layer{static_cast<std::uint32_t>(source)};
    std::vector<std::uint32_t> next;
    t.key[source] = 0;
    while (!layer.empty()) {
        std::sort(layer.begin(), layer.end());
        next.clear();
        for (const std::uint32_t v : layer) {
            const std::int64_t nd = t.key[v] + step;
            for (std::uint32_t i = g.adj_ptr[v]; i < g.adj_ptr[v + 1]; ++i) {
                const std::uint32_t e = g.adj_edge[i];
                if (zero_weight_only && g.weight[e] != 0)
                    continue;
                const std::uint32_t u = g.other_end(e, v);
                if (t.key[u] == kUnreached) {
                    t.key[u] = nd;
                    t.pred_edge[u] = e;
                    next.push_back(u);
                }
            }
        }
        layer.swap(next);
    }
    return t;
}

// Dijkstra on key = weight * scale + tie. Ties in the queue pop the lower node
// index first and only strict improvements relax, so trees are deterministic.
// Common key increment of the usable edges, or 0 when they differ.
std::int64_t uniform_step(const MatchingGraph& g, std::int64_t scale, bool zero_weight_only)
{
    std::int64_t step = 0;
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
        if (zero_weight_only && g.weight[e] != 0)
            continue;
        const std::int64_t k = g.weight[e] * scale + g.tie_rank[e];
        if (step == 0)
            step = k;
        else if (k != step)
            return 0;
    }
    return step;
}

PathTree dijkstra(const MatchingGraph& g, std::size_t source, std::int64_t scale, bool zero_weight_only,
                  std::int64_t step)
{
    if (step > 0)
        return layered_bfs(g, source, step, zero_weight_only);

    PathTree t{std::vector<std::int64_t>(g.num_nodes, kUnreached), std::vector<std::uint32_t>(g.num_nodes, kNoEdge)};
    using Item = std::pair<std::int64_t, std::uint32_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    t.key[source] = 0;
    heap.emplace(0, static_cast<std::uint32_t>(source));
    while (!heap.empty()) {
        const auto [d, v] = heap.top();
        heap.pop();
        if (d != t.key[v])
            continue;
        for (std::uint32_t i = g.adj_ptr[v]; i < g.adj_ptr[v + 1]; ++i) {
            const std::uint32_t e = g.adj_edge[i];
            if (zero_weight_only && g.weight[e] != 0)
                continue;
            const std::uint32_t u = g.other_end(e, v);
            const std::int64_t nd = d + g.weight[e] * scale + g.tie_rank[e];
            if (nd < t.key[u]) {
                t.key[u] = nd;
                t.pred_edge[u] = e;
                heap.emplace(nd, u);
            }
        }
    }
    return t;
}

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x)
{
    while (parent[x] != x) {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    return x;
}

}  // namespace

const BinaryMatrix& sector_checks(const CssCode& code, Sector sector)
{
    return sector == Sector::X ? code.hz : code.hx;
}

MatchingGraph build_matching_graph(const CssCode& code, Sector sector)
{
    if (code.family != CodeFamily::Toric)
        throw Error(ErrorCode::Config, "build_matching_graph: MWPM decoding requires a toric code");

    const BinaryMatrix h = sector_checks(code, sector).transpose();  // qubit-major
    MatchingGraph g;
    g.num_nodes = sector_checks(code, sector).rows();
    g.endpoints.resize(code.n);
    for (std::size_t q = 0; q < code.n; ++q) {
        const auto checks = h.row_support(q);
        if (checks.size() != 2)
            throw std::logic_error("build_matching_graph: every qubit must touch exactly two checks");
        g.endpoints[q] = {static_cast<std::uint32_t>(checks[0]), static_cast<std::uint32_t>(checks[1])};
    }
    g.weight.assign(code.n, 1);
    g.tie_rank.assign(code.n, 1);

    std::vector<std::uint32_t> degree(g.num_nodes, 0);
    for (const auto& ep : g.endpoints) {
        ++degree[ep[0]];
        ++degree[ep[1]];
    }
    g.adj_ptr.assign(g.num_nodes + 1, 0);
    for (std::size_t v = 0; v < g.num_nodes; ++v)
        g.adj_ptr[v + 1] = g.adj_ptr[v] + degree[v];
    g.adj_edge.resize(g.adj_ptr.back());
    std::vector<std::uint32_t> fill(g.adj_ptr.begin(), g.adj_ptr.end() - 1);
    for (std::uint32_t e = 0; e < g.endpoints.size(); ++e) {
        g.adj_edge[fill[g.endpoints[e][0]]++] = e;
        g.adj_edge[fill[g.endpoints[e][1]]++] = e;
    }
    return g;
}

MatchingGraph weights_uninformed(MatchingGraph g, double p, std::int64_t constant)
{
    if (!(p >= 0.0 && p <= 1.0))
        throw Error(ErrorCode::Config, "weights_uninformed: p must lie in [0, 1]");
    if (constant < 0)
        throw Error(ErrorCode::Config, "weights_uninformed: weights must be non-negative");
    std::fill(g.weight.begin(), g.weight.end(), constant);
    std::fill(g.tie_rank.begin(), g.tie_rank.end(), 1);
    return g;
}

MatchingGraph weights_erasure_aware(MatchingGraph g, const BitVec& erased)
{
    if (erased.size() != g.num_edges())
        throw Error(ErrorCode::Config, "weights_erasure_aware: erasure mask length must equal the qubit count");
    const auto large = static_cast<std::int64_t>(g.num_edges());
    for (std::size_t e = 0; e < g.num_edges(); ++e)
        g.weight[e] = erased.get(e) ? 0 : large;
    std::fill(g.tie_rank.begin(), g.tie_rank.end(), 1);
    return g;
}

std::vector<MatchingCost> shortest_path_costs(const MatchingGraph& g, std::size_t source)
{
    const std::int64_t tie_total = std::accumulate(g.tie_rank.begin(), g.tie_rank.end(), std::int64_t{0});
    const std::int64_t scale = tie_total + 1;
    const PathTree t = dijkstra(g, source, scale, false, uniform_step(g, scale, false));
    std::vector<MatchingCost> out(g.num_nodes);
    for (std::size_t v = 0; v < g.num_nodes; ++v) {
        if (t.key[v] == kUnreached)
            out[v] = {kUnreached, kUnreached};
        else
            out[v] = {t.key[v] / scale, t.key[v] % scale};
    }
    return out;
}

MatchingDetail mwpm_decode_detailed(const MatchingGraph& g, const BitVec& syndrome)
{
    if (syndrome.size() != g.num_nodes)
        throw std::invalid_argument("mwpm_decode: syndrome length must equal the node count");

    MatchingDetail out{BitVec(g.num_edges()), {}, {}};
    const auto defects = syndrome.support();
    if (defects.size() % 2 != 0)
        throw std::logic_error("mwpm_decode: odd-weight syndrome violates torus parity");
    if (defects.empty())
        return out;

    // Lexicographic (weight, tie) totals fit in one int64 key as weight*scale + tie
    // as long as scale exceeds any matching's total tie.
    const std::int64_t tie_total = std::accumulate(g.tie_rank.begin(), g.tie_rank.end(), std::int64_t{0});
    const std::int64_t scale = (static_cast<std::int64_t>(defects.size()) / 2 + 1) * tie_total + 1;

    // Zero-weight clusters. When every cluster holds an even number of defects
    // the optimum pairs defects inside clusters along zero-weight paths, so the
    // problem splits exactly into independent per-cluster matchings.
    std::vector<std::size_t> parent(g.num_nodes);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
        if (g.weight[e] == 0) {
            const auto a = find_root(parent, g.endpoints[e][0]);
            const auto b = find_root(parent, g.endpoints[e][1]);
            if (a != b)
                parent[std::max(a, b)] = std::min(a, b);
        }
    }
    std::vector<std::vector<std::size_t>> groups;
    {
        std::vector<std::size_t> group_of(g.num_nodes, static_cast<std::size_t>(-1));
        for (auto d : defects) {
            const auto root = find_root(parent, d);
            if (group_of[root] == static_cast<std::size_t>(-1)) {
                group_of[root] = groups.size();
                groups.emplace_back();
            }
            groups[group_of[root]].push_back(d);
        }
    }
    const bool split = std::all_of(groups.begin(), groups.end(), [](const auto& grp) { return grp.size() % 2 == 0; });
    if (!split)
        groups = {defects};

    const std::int64_t step = uniform_step(g, scale, split);
    std::int64_t total_key = 0;
    for (const auto& group : groups) {
        const std::size_t m = group.size();
        std::vector<PathTree> trees;
        trees.reserve(m);
        for (auto d : group)
            trees.push_back(dijkstra(g, d, scale, split, step));

        std::vector<std::int64_t> cost(m * m, 0);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                if (i == j)
                    continue;
                const std::int64_t k = trees[i].key[group[j]];
                if (k == kUnreached)
                    throw std::logic_error("mwpm_decode: defect unreachable in matching graph");
                cost[i * m + j] = k;
            }
        }
        const auto mate = min_cost_perfect_matching(m, cost);

        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t j = mate[i];
            if (j < i)
                continue;
            out.pairs.emplace_back(group[i], group[j]);
            total_key += cost[i * m + j];
            std::size_t node = group[j];
            while (node != group[i]) {
                const std::uint32_t e = trees[i].pred_edge[node];
                out.correction.flip(e);
                node = g.other_end(e, static_cast<std::uint32_t>(node));
            }
        }
    }
    out.cost = {total_key / scale, total_key % scale};
    return out;
}

BitVec mwpm_decode(const MatchingGraph& g, const BitVec& syndrome)
{
    return std::move(mwpm_decode_detailed(g, syndrome).correction);
}

}  // namespace bbq
