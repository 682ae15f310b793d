#include "blossom.hpp"

#include <algorithm>
#include <stdexcept>

namespace bbq {

namespace {

// Primal-dual blossom solver. Vertices are 0..n-1, blossoms n..2n-1. Edge k
// has endpoints 2k (its u side) and 2k+1 (its v side); endpoint p belongs to
// vertex endpoint_[p], and p^1 is the opposite end.
class BlossomSolver {
public:
    BlossomSolver(std::size_t n, const std::vector<WeightedEdge>& edges, bool max_cardinality)
        : n_(static_cast<long>(n)), edges_(edges), max_cardinality_(max_cardinality)
    {
    }

    std::vector<long> solve();

    // Reduced cost of a (possibly absent) edge i-j of weight w under the final
    // duals. Non-negative for every pair certifies optimality on the full graph.
    std::int64_t certificate_slack(long i, long j, std::int64_t w) const
    {
        std::int64_t s = dualvar_[i] + dualvar_[j] - 2 * w;
        path_i_.clear();
        path_j_.clear();
        for (long b = i; b != -1; b = blossomparent_[b])
            path_i_.push_back(b);
        for (long b = j; b != -1; b = blossomparent_[b])
            path_j_.push_back(b);
        auto a = path_i_.rbegin();
        auto c = path_j_.rbegin();
        for (; a != path_i_.rend() && c != path_j_.rend() && *a == *c; ++a, ++c)
            s += 2 * dualvar_[*a];
        return s;
    }

private:
    using i64 = std::int64_t;

    long n_;
    const std::vector<WeightedEdge>& edges_;
    bool max_cardinality_;

    std::vector<long> endpoint_;
    std::vector<std::vector<long>> neighbend_;
    std::vector<long> mate_;
    std::vector<int> label_;
    std::vector<long> labelend_;
    std::vector<long> inblossom_;
    std::vector<long> blossomparent_;
    std::vector<std::vector<long>> blossomchilds_;
    std::vector<long> blossombase_;
    std::vector<std::vector<long>> blossomendps_;
    std::vector<long> bestedge_;
    std::vector<std::vector<long>> blossombestedges_;
    std::vector<char> has_blossombestedges_;
    std::vector<long> unusedblossoms_;
    std::vector<i64> dualvar_;
    std::vector<char> allowedge_;
    std::vector<long> queue_;
    mutable std::vector<long> path_i_;
    mutable std::vector<long> path_j_;

    long eu(long k) const { return static_cast<long>(edges_[k].u); }
    long ev(long k) const { return static_cast<long>(edges_[k].v); }
    i64 slack(long k) const { return dualvar_[eu(k)] + dualvar_[ev(k)] - 2 * edges_[k].weight; }

    template <class F>
    void for_each_leaf(long b, F&& fn) const
    {
        if (b < n_) {
            fn(b);
            return;
        }
        for (long t : blossomchilds_[b])
            for_each_leaf(t, fn);
    }

    void assign_label(long w, int t, long p);
    long scan_blossom(long v, long w);
    void add_blossom(long base, long k);
    void expand_blossom(long b, bool endstage);
    void augment_blossom(long b, long v);
    void augment_matching(long k);
};

void BlossomSolver::assign_label(long w, int t, long p)
{
    const long b = inblossom_[w];
    label_[w] = label_[b] = t;
    labelend_[w] = labelend_[b] = p;
    bestedge_[w] = bestedge_[b] = -1;
    if (t == 1) {
        for_each_leaf(b, [&](long leaf) { queue_.push_back(leaf); });
    } else if (t == 2) {
        const long base = blossombase_[b];
        assign_label(endpoint_[mate_[base]], 1, mate_[base] ^ 1);
    }
}

long BlossomSolver::scan_blossom(long v, long w)
{
    std::vector<long> path;
    long base = -1;
    while (v != -1 || w != -1) {
        long b = inblossom_[v];
        if (label_[b] & 4) {
            base = blossombase_[b];
            break;
        }
        path.push_back(b);
        label_[b] = 5;
        if (labelend_[b] == -1) {
            v = -1;
        } else {
            v = endpoint_[labelend_[b]];
            b = inblossom_[v];
            v = endpoint_[labelend_[b]];
        }
        if (w != -1)
            std::swap(v, w);
    }
    for (long b : path)
        label_[b] = 1;
    return base;
}

void BlossomSolver::add_blossom(long base, long k)
{
    long v = eu(k);
    long w = ev(k);
    const long bb = inblossom_[base];
    long bv = inblossom_[v];
    long bw = inblossom_[w];
    const long b = unusedblossoms_.back();
    unusedblossoms_.pop_back();
    blossombase_[b] = base;
    blossomparent_[b] = -1;
    blossomparent_[bb] = b;
    std::vector<long> path;
    std::vector<long> endps;
    while (bv != bb) {
        blossomparent_[bv] = b;
        path.push_back(bv);
        endps.push_back(labelend_[bv]);
        v = endpoint_[labelend_[bv]];
        bv = inblossom_[v];
    }
    path.push_back(bb);
    std::reverse(path.begin(), path.end());
    std::reverse(endps.begin(), endps.end());
    endps.push_back(2 * k);
    while (bw != bb) {
        blossomparent_[bw] = b;
        path.push_back(bw);
        endps.push_back(labelend_[bw] ^ 1);
        w = endpoint_[labelend_[bw]];
        bw = inblossom_[w];
    }
    blossomchilds_[b] = path;
    blossomendps_[b] = endps;
    label_[b] = 1;
    labelend_[b] = labelend_[bb];
    dualvar_[b] = 0;
    for_each_leaf(b, [&](long leaf) {
        if (label_[inblossom_[leaf]] == 2)
            queue_.push_back(leaf);
        inblossom_[leaf] = b;
    });

    std::vector<long> bestedgeto(2 * n_, -1);
    auto consider = [&](long kk) {
        long i = eu(kk);
        long j = ev(kk);
        if (inblossom_[j] == b)
            std::swap(i, j);
        const long bj = inblossom_[j];
        if (bj != b && label_[bj] == 1 && (bestedgeto[bj] == -1 || slack(kk) < slack(bestedgeto[bj])))
            bestedgeto[bj] = kk;
    };
    for (long sub : path) {
        if (!has_blossombestedges_[sub]) {
            for_each_leaf(sub, [&](long leaf) {
                for (long p : neighbend_[leaf])
                    consider(p / 2);
            });
        } else {
            for (long kk : blossombestedges_[sub])
                consider(kk);
        }
        blossombestedges_[sub].clear();
        has_blossombestedges_[sub] = false;
        bestedge_[sub] = -1;
    }
    blossombestedges_[b].clear();
    for (long kk : bestedgeto)
        if (kk != -1)
            blossombestedges_[b].push_back(kk);
    has_blossombestedges_[b] = true;
    bestedge_[b] = -1;
    for (long kk : blossombestedges_[b])
        if (bestedge_[b] == -1 || slack(kk) < slack(bestedge_[b]))
            bestedge_[b] = kk;
}

void BlossomSolver::expand_blossom(long b, bool endstage)
{
    const std::vector<long> childs = blossomchilds_[b];
    for (long s : childs) {
        blossomparent_[s] = -1;
        if (s < n_) {
            inblossom_[s] = s;
        } else if (endstage && dualvar_[s] == 0) {
            expand_blossom(s, endstage);
        } else {
            for_each_leaf(s, [&](long leaf) { inblossom_[leaf] = s; });
        }
    }

    if (!endstage && label_[b] == 2) {
        const auto& ch = blossomchilds_[b];
        const auto& ep = blossomendps_[b];
        const long len = static_cast<long>(ch.size());
        auto at = [len](const std::vector<long>& vec, long idx) { return vec[((idx % len) + len) % len]; };

        const long entrychild = inblossom_[endpoint_[labelend_[b] ^ 1]];
        long j = static_cast<long>(std::find(ch.begin(), ch.end(), entrychild) - ch.begin());
        long jstep;
        long endptrick;
        if (j & 1) {
            j -= len;
            jstep = 1;
            endptrick = 0;
        } else {
            jstep = -1;
            endptrick = 1;
        }
        long p = labelend_[b];
        while (j != 0) {
            label_[endpoint_[p ^ 1]] = 0;
            label_[endpoint_[at(ep, j - endptrick) ^ endptrick ^ 1]] = 0;
            assign_label(endpoint_[p ^ 1], 2, p);
            allowedge_[at(ep, j - endptrick) / 2] = true;
            j += jstep;
            p = at(ep, j - endptrick) ^ endptrick;
            allowedge_[p / 2] = true;
            j += jstep;
        }
        long bv = at(ch, j);
        label_[endpoint_[p ^ 1]] = label_[bv] = 2;
        labelend_[endpoint_[p ^ 1]] = labelend_[bv] = p;
        bestedge_[bv] = -1;
        j += jstep;
        while (at(ch, j) != entrychild) {
            bv = at(ch, j);
            if (label_[bv] == 1) {
                j += jstep;
                continue;
            }
            long found = -1;
            for_each_leaf(bv, [&](long leaf) {
                if (found == -1 && label_[leaf] != 0)
                    found = leaf;
            });
            if (found != -1) {
                label_[found] = 0;
                label_[endpoint_[mate_[blossombase_[bv]]]] = 0;
                assign_label(found, 2, labelend_[found]);
            }
            j += jstep;
        }
    }

    label_[b] = -1;
    labelend_[b] = -1;
    blossomchilds_[b].clear();
    blossomendps_[b].clear();
    blossombase_[b] = -1;
    blossombestedges_[b].clear();
    has_blossombestedges_[b] = false;
    bestedge_[b] = -1;
    unusedblossoms_.push_back(b);
}

void BlossomSolver::augment_blossom(long b, long v)
{
    long t = v;
    while (blossomparent_[t] != b)
        t = blossomparent_[t];
    if (t >= n_)
        augment_blossom(t, v);

    auto& ch = blossomchilds_[b];
    auto& ep = blossomendps_[b];
    const long len = static_cast<long>(ch.size());
    auto idx = [len](long i) { return ((i % len) + len) % len; };

    const long i = static_cast<long>(std::find(ch.begin(), ch.end(), t) - ch.begin());
    long j = i;
    long jstep;
    long endptrick;
    if (i & 1) {
        j -= len;
        jstep = 1;
        endptrick = 0;
    } else {
        jstep = -1;
        endptrick = 1;
    }
    while (j != 0) {
        j += jstep;
        t = ch[idx(j)];
        const long p = ep[idx(j - endptrick)] ^ endptrick;
        if (t >= n_)
            augment_blossom(t, endpoint_[p]);
        j += jstep;
        t = ch[idx(j)];
        if (t >= n_)
            augment_blossom(t, endpoint_[p ^ 1]);
        mate_[endpoint_[p]] = p ^ 1;
        mate_[endpoint_[p ^ 1]] = p;
    }
    std::rotate(ch.begin(), ch.begin() + i, ch.end());
    std::rotate(ep.begin(), ep.begin() + i, ep.end());
    blossombase_[b] = blossombase_[ch[0]];
}

void BlossomSolver::augment_matching(long k)
{
    const long starts[2][2] = {{eu(k), 2 * k + 1}, {ev(k), 2 * k}};
    for (const auto& start : starts) {
        long s = start[0];
        long p = start[1];
        while (true) {
            const long bs = inblossom_[s];
            if (bs >= n_)
                augment_blossom(bs, s);
            mate_[s] = p;
            if (labelend_[bs] == -1)
                break;
            const long t = endpoint_[labelend_[bs]];
            const long bt = inblossom_[t];
            s = endpoint_[labelend_[bt]];
            const long j = endpoint_[labelend_[bt] ^ 1];
            if (bt >= n_)
                augment_blossom(bt, j);
            mate_[j] = labelend_[bt];
            p = labelend_[bt] ^ 1;
        }
    }
}

std::vector<long> BlossomSolver::solve()
{
    const long n = n_;
    const long nedge = static_cast<long>(edges_.size());
    if (nedge == 0)
        return std::vector<long>(static_cast<std::size_t>(n), -1);

    i64 maxweight = 0;
    for (const auto& e : edges_) {
        if (e.u >= static_cast<std::size_t>(n) || e.v >= static_cast<std::size_t>(n) || e.u == e.v)
            throw std::invalid_argument("max_weight_matching: bad edge");
        maxweight = std::max(maxweight, e.weight);
    }

    endpoint_.resize(2 * nedge);
    for (long p = 0; p < 2 * nedge; ++p)
        endpoint_[p] = (p % 2 == 0) ? eu(p / 2) : ev(p / 2);
    neighbend_.assign(n, {});
    for (long k = 0; k < nedge; ++k) {
        neighbend_[eu(k)].push_back(2 * k + 1);
        neighbend_[ev(k)].push_back(2 * k);
    }
    mate_.assign(n, -1);
    label_.assign(2 * n, 0);
    labelend_.assign(2 * n, -1);
    inblossom_.resize(n);
    for (long i = 0; i < n; ++i)
        inblossom_[i] = i;
    blossomparent_.assign(2 * n, -1);
    blossomchilds_.assign(2 * n, {});
    blossombase_.assign(2 * n, -1);
    for (long i = 0; i < n; ++i)
        blossombase_[i] = i;
    blossomendps_.assign(2 * n, {});
    bestedge_.assign(2 * n, -1);
    blossombestedges_.assign(2 * n, {});
    has_blossombestedges_.assign(2 * n, false);
    unusedblossoms_.clear();
    for (long b = n; b < 2 * n; ++b)
        unusedblossoms_.push_back(b);
    dualvar_.assign(2 * n, 0);
    for (long i = 0; i < n; ++i)
        dualvar_[i] = maxweight;
    allowedge_.assign(nedge, false);

    for (long stage = 0; stage < n; ++stage) {
        std::fill(label_.begin(), label_.end(), 0);
        std::fill(bestedge_.begin(), bestedge_.end(), -1);
        for (long b = n; b < 2 * n; ++b) {
            blossombestedges_[b].clear();
            has_blossombestedges_[b] = false;
        }
        std::fill(allowedge_.begin(), allowedge_.end(), false);
        queue_.clear();

        for (long v = 0; v < n; ++v)
            if (mate_[v] == -1 && label_[inblossom_[v]] == 0)
                assign_label(v, 1, -1);

        bool augmented = false;
        while (true) {
            while (!queue_.empty() && !augmented) {
                const long v = queue_.back();
                queue_.pop_back();
                for (long p : neighbend_[v]) {
                    const long k = p / 2;
                    const long w = endpoint_[p];
                    if (inblossom_[v] == inblossom_[w])
                        continue;
                    i64 kslack = 0;
                    if (!allowedge_[k]) {
                        kslack = slack(k);
                        if (kslack <= 0)
                            allowedge_[k] = true;
                    }
                    if (allowedge_[k]) {
                        if (label_[inblossom_[w]] == 0) {
                            assign_label(w, 2, p ^ 1);
                        } else if (label_[inblossom_[w]] == 1) {
                            const long base = scan_blossom(v, w);
                            if (base >= 0) {
                                add_blossom(base, k);
                            } else {
                                augment_matching(k);
                                augmented = true;
                                break;
                            }
                        } else if (label_[w] == 0) {
                            label_[w] = 2;
                            labelend_[w] = p ^ 1;
                        }
                    } else if (label_[inblossom_[w]] == 1) {
                        const long b = inblossom_[v];
                        if (bestedge_[b] == -1 || kslack < slack(bestedge_[b]))
                            bestedge_[b] = k;
                    } else if (label_[w] == 0) {
                        if (bestedge_[w] == -1 || kslack < slack(bestedge_[w]))
                            bestedge_[w] = k;
                    }
                }
            }
            if (augmented)
                break;

            int deltatype = -1;
            i64 delta = 0;
            long deltaedge = -1;
            long deltablossom = -1;

            if (!max_cardinality_) {
                deltatype = 1;
                delta = *std::min_element(dualvar_.begin(), dualvar_.begin() + n);
            }
            for (long v = 0; v < n; ++v) {
                if (label_[inblossom_[v]] == 0 && bestedge_[v] != -1) {
                    const i64 d = slack(bestedge_[v]);
                    if (deltatype == -1 || d < delta) {
                        delta = d;
                        deltatype = 2;
                        deltaedge = bestedge_[v];
                    }
                }
            }
            for (long b = 0; b < 2 * n; ++b) {
                if (blossomparent_[b] == -1 && label_[b] == 1 && bestedge_[b] != -1) {
                    const i64 kslack = slack(bestedge_[b]);
                    if (kslack % 2 != 0)
                        throw std::logic_error("max_weight_matching: odd slack with integer weights");
                    const i64 d = kslack / 2;
                    if (deltatype == -1 || d < delta) {
                        delta = d;
                        deltatype = 3;
                        deltaedge = bestedge_[b];
                    }
                }
            }
            for (long b = n; b < 2 * n; ++b) {
                if (blossombase_[b] >= 0 && blossomparent_[b] == -1 && label_[b] == 2 &&
                    (deltatype == -1 || dualvar_[b] < delta)) {
                    delta = dualvar_[b];
                    deltatype = 4;
                    deltablossom = b;
                }
            }
            if (deltatype == -1) {
                deltatype = 1;
                delta = std::max<i64>(0, *std::min_element(dualvar_.begin(), dualvar_.begin() + n));
            }

            for (long v = 0; v < n; ++v) {
                if (label_[inblossom_[v]] == 1)
                    dualvar_[v] -= delta;
                else if (label_[inblossom_[v]] == 2)
                    dualvar_[v] += delta;
            }
            for (long b = n; b < 2 * n; ++b) {
                if (blossombase_[b] >= 0 && blossomparent_[b] == -1) {
                    if (label_[b] == 1)
                        dualvar_[b] += delta;
                    else if (label_[b] == 2)
                        dualvar_[b] -= delta;
                }
            }

            if (deltatype == 1) {
                break;
            } else if (deltatype == 2) {
                allowedge_[deltaedge] = true;
                long i = eu(deltaedge);
                long j = ev(deltaedge);
                if (label_[inblossom_[i]] == 0)
                    std::swap(i, j);
                queue_.push_back(i);
            } else if (deltatype == 3) {
                allowedge_[deltaedge] = true;
                queue_.push_back(eu(deltaedge));
            } else {
                expand_blossom(deltablossom, false);
            }
        }
        if (!augmented)
            break;

        for (long b = n; b < 2 * n; ++b)
            if (blossomparent_[b] == -1 && blossombase_[b] >= 0 && label_[b] == 1 && dualvar_[b] == 0)
                expand_blossom(b, true);
    }

    std::vector<long> out(n, -1);
    for (long v = 0; v < n; ++v)
        if (mate_[v] >= 0)
            out[v] = endpoint_[mate_[v]];
    return out;
}

}  // namespace

std::vector<long> max_weight_matching(std::size_t vertex_count, const std::vector<WeightedEdge>& edges,
                                      bool max_cardinality)
{
    return BlossomSolver(vertex_count, edges, max_cardinality).solve();
}

std::vector<std::size_t> min_cost_perfect_matching(std::size_t n, const std::vector<std::int64_t>& cost)
{
    if (n % 2 != 0)
        throw std::invalid_argument("min_cost_perfect_matching: odd vertex count");
    if (cost.size() != n * n)
        throw std::invalid_argument("min_cost_perfect_matching: cost matrix size mismatch");
    if (n == 0)
        return {};
    if (n == 2)
        return {1, 0};

    std::int64_t max_cost = 0;
    for (auto c : cost) {
        if (c < 0)
            throw std::invalid_argument("min_cost_perfect_matching: negative cost");
        max_cost = std::max(max_cost, c);
    }
    // Maximising (max_cost + 1 - c) over maximum-cardinality matchings
    // minimises total cost over perfect matchings. The solve starts on each
    // vertex's nearest neighbours; dual feasibility on every absent pair then
    // certifies the optimum for the complete graph, and violating pairs are
    // added back until it does.
    const auto weight_of = [&](std::size_t i, std::size_t j) { return max_cost + 1 - cost[i * n + j]; };
    constexpr std::size_t kNeighbours = 10;
    std::vector<char> present(n * n, 0);
    std::vector<WeightedEdge> edges;
    auto add_edge = [&](std::size_t i, std::size_t j) {
        if (i > j)
            std::swap(i, j);
        if (!present[i * n + j]) {
            present[i * n + j] = 1;
            edges.push_back({i, j, weight_of(i, j)});
        }
    };
    if (n <= kNeighbours + 1) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                add_edge(i, j);
    } else {
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t m = 0;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i)
                    order[m++] = j;
            std::partial_sort(order.begin(), order.begin() + kNeighbours, order.begin() + m,
                              [&](std::size_t a, std::size_t b) {
                                  return cost[i * n + a] != cost[i * n + b] ? cost[i * n + a] < cost[i * n + b] : a < b;
                              });
            for (std::size_t t = 0; t < kNeighbours; ++t)
                add_edge(i, order[t]);
        }
    }

    while (true) {
        BlossomSolver solver(n, edges, true);
        const auto mate = solver.solve();
        const bool perfect = std::none_of(mate.begin(), mate.end(), [](long m) { return m < 0; });
        std::size_t added = 0;
        if (!perfect) {
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j)
                    if (!present[i * n + j]) {
                        add_edge(i, j);
                        ++added;
                    }
        } else {
            std::vector<std::pair<std::size_t, std::size_t>> violated;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j)
                    if (!present[i * n + j] &&
                        solver.certificate_slack(static_cast<long>(i), static_cast<long>(j), weight_of(i, j)) < 0)
                        violated.emplace_back(i, j);
            for (const auto& [i, j] : violated)
                add_edge(i, j);
            added = violated.size();
        }
        if (added == 0) {
            if (!perfect)
                throw std::logic_error("min_cost_perfect_matching: matching is not perfect");
            std::vector<std::size_t> out(n);
            for (std::size_t v = 0; v < n; ++v)
                out[v] = static_cast<std::size_t>(mate[v]);
            return out;
        }
    }
}

}  // namespace bbq
