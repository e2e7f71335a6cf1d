#pragma once

// Finite topological graphs with free edge-ends: the spectra of the diagonals.

#include "nccw/iso.hpp"
#include "nccw/model.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace nccw {

enum class VertexKind { X, ZCell, Anonymous };

struct TGVertex {
    VertexKind kind = VertexKind::X;
    std::string label;
    int ref = -1;  // index into X for X-class and Z-cell vertices
};

struct TGEdge {
    int u = -1;  // -1: free end at t = 0
    int v = -1;  // -1: free end at t = 1
    std::string label;
    int block = -1;
};

struct TopGraph {
    std::vector<TGVertex> vertices;
    std::vector<TGEdge> edges;

    int nv() const { return static_cast<int>(vertices.size()); }
    int ne() const { return static_cast<int>(edges.size()); }
    int free_ends() const {
        int f = 0;
        for (auto& e : edges) f += (e.u < 0) + (e.v < 0);
        return f;
    }
};

// Vertices are the points of X; slot y is an edge from b_0(y) to b_1(sigma(y)).
inline TopGraph spec_b(const DualData& d, const TwistPerm& sigma) {
    TopGraph g;
    for (int i = 0; i < d.ni(); ++i)
        for (int x = d.x_off[i]; x < d.x_off[i + 1]; ++x)
            g.vertices.push_back({VertexKind::X, d.i_labels[i] + ":" + std::to_string(x - d.x_off[i] + 1), x});
    for (int p = 0; p < d.np(); ++p)
        for (int y = d.y_off[p]; y < d.y_off[p + 1]; ++y)
            g.edges.push_back({d.b[0][y], d.b[1][sigma(y)],
                               d.p_labels[p] + ":" + std::to_string(y - d.y_off[p] + 1), p});
    return g;
}

inline TopGraph spec_b(const DualData& d) { return spec_b(d, TwistPerm::identity(d.ny())); }

struct Analysis {
    int pi0 = 0;
    std::vector<int> cut_vertices;
    int free_ends = 0;
    int vertices = 0;
    int edges = 0;
    int closed_edges = 0;  // both ends attached
    int betti1 = 0;        // rank of H_1
};

inline Analysis analyze(const TopGraph& g) {
    Analysis a;
    a.vertices = g.nv();
    a.edges = g.ne();
    a.free_ends = g.free_ends();
    std::vector<int> parent(g.nv());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    int open_intervals = 0;
    for (auto& e : g.edges) {
        if (e.u >= 0 && e.v >= 0) {
            a.closed_edges++;
            parent[find(e.u)] = find(e.v);
        } else if (e.u < 0 && e.v < 0) {
            open_intervals++;
        }
    }
    int comps = 0;
    for (int v = 0; v < g.nv(); ++v)
        if (find(v) == v) comps++;
    a.pi0 = comps + open_intervals;
    a.betti1 = a.closed_edges - g.nv() + comps;

    // Subdivide every edge twice so the multigraph becomes simple, hang a
    // pendant vertex on each free end, then run the low-link search.
    int n = g.nv();
    std::vector<std::vector<int>> adj(n);
    auto fresh = [&]() {
        adj.emplace_back();
        return static_cast<int>(adj.size()) - 1;
    };
    auto link = [&](int x, int y) {
        adj[x].push_back(y);
        adj[y].push_back(x);
    };
    for (auto& e : g.edges) {
        if (e.u < 0 && e.v < 0) continue;
        int m1 = fresh(), m2 = fresh();
        link(m1, m2);
        link(e.u >= 0 ? e.u : fresh(), m1);
        link(m2, e.v >= 0 ? e.v : fresh());
    }
    int N = static_cast<int>(adj.size());
    std::vector<int> disc(N, -1), low(N, 0), it(N, 0), par(N, -1);
    std::vector<bool> cut(N, false);
    int timer = 0;
    for (int s = 0; s < n; ++s) {
        if (disc[s] >= 0) continue;
        std::vector<int> stack{s};
        disc[s] = low[s] = timer++;
        int root_children = 0;
        while (!stack.empty()) {
            int v = stack.back();
            if (it[v] < static_cast<int>(adj[v].size())) {
                int w = adj[v][it[v]++];
                if (disc[w] < 0) {
                    par[w] = v;
                    disc[w] = low[w] = timer++;
                    if (v == s) root_children++;
                    stack.push_back(w);
                } else if (w != par[v]) {
                    low[v] = std::min(low[v], disc[w]);
                }
            } else {
                stack.pop_back();
                int p = par[v];
                if (p >= 0) {
                    low[p] = std::min(low[p], low[v]);
                    if (p != s && low[v] >= disc[p]) cut[p] = true;
                }
            }
        }
        if (root_children > 1) cut[s] = true;
    }
    for (int v = 0; v < n; ++v)
        if (cut[v]) a.cut_vertices.push_back(v);
    return a;
}

// Topological normal form: degree-2 vertices smoothed away, free ends as
// coloured leaves, circles and open intervals counted separately.
struct Smoothed {
    ColGraph graph;
    int circles = 0;
    int open_intervals = 0;
    std::vector<int> original;  // graph vertex -> source vertex (-1 for free-end markers)
};

inline Smoothed smooth(const TopGraph& g) {
    enum { kPlain = 0, kFree = 1, kZ = 2 };
    int n = g.nv();
    std::vector<int> color(n, kPlain);
    for (int v = 0; v < n; ++v)
        if (g.vertices[v].kind == VertexKind::ZCell) color[v] = kZ;
    std::vector<std::array<int, 2>> edges;
    Smoothed out;
    for (auto& e : g.edges) {
        if (e.u < 0 && e.v < 0) {
            out.open_intervals++;
            continue;
        }
        int u = e.u, v = e.v;
        if (u < 0) {
            u = n++;
            color.push_back(kFree);
        }
        if (v < 0) {
            v = n++;
            color.push_back(kFree);
        }
        edges.push_back({u, v});
    }
    std::vector<std::vector<int>> inc(n);  // incident edge ids, loops twice
    for (int k = 0; k < static_cast<int>(edges.size()); ++k) {
        inc[edges[k][0]].push_back(k);
        inc[edges[k][1]].push_back(k);
    }
    std::vector<bool> dead_edge(edges.size(), false), dead_vertex(n, false);
    auto live = [&](int v) {
        std::vector<int> r;
        for (int k : inc[v])
            if (!dead_edge[k]) r.push_back(k);
        return r;
    };
    std::vector<int> work(n);
    std::iota(work.begin(), work.end(), 0);
    while (!work.empty()) {
        int v = work.back();
        work.pop_back();
        if (dead_vertex[v] || color[v] != kPlain) continue;
        auto l = live(v);
        if (l.size() != 2) continue;
        if (l[0] == l[1]) {
            // lone loop: an isolated circle
            dead_edge[l[0]] = true;
            dead_vertex[v] = true;
            out.circles++;
            continue;
        }
        auto other = [&](int k) { return edges[k][0] == v ? edges[k][1] : edges[k][0]; };
        int a = other(l[0]), b = other(l[1]);
        dead_edge[l[0]] = dead_edge[l[1]] = true;
        dead_vertex[v] = true;
        int k = static_cast<int>(edges.size());
        edges.push_back({a, b});
        dead_edge.push_back(false);
        inc[a].push_back(k);
        inc[b].push_back(k);
        work.push_back(a);
        work.push_back(b);
    }
    // An edge between two free-end markers is an open interval.
    for (int k = 0; k < static_cast<int>(edges.size()); ++k) {
        if (dead_edge[k]) continue;
        auto [a, b] = edges[k];
        if (color[a] == kFree && color[b] == kFree) {
            dead_edge[k] = true;
            dead_vertex[a] = dead_vertex[b] = true;
            out.open_intervals++;
        }
    }
    std::vector<int> idx(n, -1);
    for (int v = 0; v < n; ++v) {
        if (dead_vertex[v]) continue;
        idx[v] = out.graph.add_vertex(color[v]);
        out.original.push_back(v < g.nv() ? v : -1);
    }
    for (int k = 0; k < static_cast<int>(edges.size()); ++k)
        if (!dead_edge[k]) out.graph.add_edge(idx[edges[k][0]], idx[edges[k][1]]);
    return out;
}

struct HomeoResult {
    bool homeomorphic = false;
    std::vector<std::pair<int, int>> vertex_map;  // branch vertex of g1 -> vertex of g2
    std::string reason;
};

inline HomeoResult graph_homeomorphic(const TopGraph& g1, const TopGraph& g2) {
    HomeoResult res;
    Smoothed a = smooth(g1), b = smooth(g2);
    if (a.circles != b.circles) {
        res.reason = "isolated circle counts differ";
        return res;
    }
    if (a.open_intervals != b.open_intervals) {
        res.reason = "open interval counts differ";
        return res;
    }
    auto iso = find_isomorphism(a.graph, b.graph);
    if (iso.status != SearchStatus::Found) {
        res.reason = iso.status == SearchStatus::Budget ? "search budget exhausted" : "smoothed graphs not isomorphic";
        return res;
    }
    res.homeomorphic = true;
    for (int v = 0; v < a.graph.n(); ++v)
        if (a.original[v] >= 0) res.vertex_map.push_back({a.original[v], b.original[iso.map[v]]});
    return res;
}

// Subdivision of K_{3,3}: branch vertices a[0..2], c[0..2] and nine internally
// disjoint paths; paths[i][j] lists edge ids from a[i] to c[j], verts[i][j] the
// vertex sequence including both ends.
struct K33Witness {
    std::array<int, 3> a{};
    std::array<int, 3> c{};
    std::array<std::array<std::vector<int>, 3>, 3> paths;
    std::array<std::array<std::vector<int>, 3>, 3> verts;
};

enum class K33Status { Found, Absent, Inconclusive };

struct K33Result {
    K33Status status = K33Status::Absent;
    std::optional<K33Witness> witness;
    long nodes = 0;
};

inline bool verify_k33(const TopGraph& g, const K33Witness& w, std::string* why = nullptr) {
    auto bad = [&](const std::string& m) {
        if (why) *why = m;
        return false;
    };
    std::set<int> branch;
    for (int k = 0; k < 3; ++k) {
        branch.insert(w.a[k]);
        branch.insert(w.c[k]);
    }
    if (branch.size() != 6) return bad("branch vertices are not distinct");
    std::set<int> interior;
    std::set<int> used_edges;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const auto& vs = w.verts[i][j];
            const auto& es = w.paths[i][j];
            if (vs.size() != es.size() + 1 || es.empty()) return bad("malformed path");
            if (vs.front() != w.a[i] || vs.back() != w.c[j]) return bad("path endpoints do not match branch vertices");
            for (std::size_t k = 0; k < es.size(); ++k) {
                int e = es[k];
                if (e < 0 || e >= g.ne()) return bad("edge id out of range");
                const auto& ed = g.edges[e];
                bool fwd = ed.u == vs[k] && ed.v == vs[k + 1];
                bool rev = ed.v == vs[k] && ed.u == vs[k + 1];
                if (!fwd && !rev) return bad("edge does not join consecutive path vertices");
                if (!used_edges.insert(e).second) return bad("edge used twice");
            }
            for (std::size_t k = 1; k + 1 < vs.size(); ++k) {
                if (branch.count(vs[k])) return bad("path passes through a branch vertex");
                if (!interior.insert(vs[k]).second) return bad("paths share an interior vertex");
            }
        }
    return true;
}

namespace detail {

class K33Search {
public:
    K33Search(const TopGraph& g, long budget) : g_(g), budget_(budget) {
        int n = g.nv();
        adj_.resize(n);
        std::map<std::pair<int, int>, int> seen;
        for (int e = 0; e < g.ne(); ++e) {
            auto& ed = g.edges[e];
            if (ed.u < 0 || ed.v < 0 || ed.u == ed.v) continue;
            auto key = std::minmax(ed.u, ed.v);
            if (!seen.emplace(key, e).second) continue;
            adj_[ed.u].push_back({ed.v, e});
            adj_[ed.v].push_back({ed.u, e});
        }
        // Peel vertices of degree < 2: they lie on no subdivision.
        alive_.assign(n, true);
        std::vector<int> deg(n);
        std::vector<int> q;
        for (int v = 0; v < n; ++v) {
            deg[v] = static_cast<int>(adj_[v].size());
            if (deg[v] < 2) q.push_back(v);
        }
        while (!q.empty()) {
            int v = q.back();
            q.pop_back();
            if (!alive_[v]) continue;
            alive_[v] = false;
            for (auto [w, e] : adj_[v])
                if (alive_[w] && --deg[w] < 2) q.push_back(w);
        }
        for (int v = 0; v < n; ++v)
            if (alive_[v] && deg[v] >= 3) cands_.push_back(v);
    }

    K33Result run() {
        K33Result res;
        std::vector<int> pick;
        bool found = choose(0, pick, res);
        res.nodes = nodes_;
        if (found)
            res.status = K33Status::Found;
        else
            res.status = out_ ? K33Status::Inconclusive : K33Status::Absent;
        return res;
    }

private:
    bool tick() {
        if (budget_ >= 0 && ++nodes_ > budget_) out_ = true;
        return !out_;
    }

    bool choose(std::size_t from, std::vector<int>& pick, K33Result& res) {
        if (pick.size() == 6) {
            // the side containing pick[0] is fixed to break the swap symmetry
            for (int m1 = 1; m1 < 6; ++m1)
                for (int m2 = m1 + 1; m2 < 6; ++m2) {
                    K33Witness w;
                    w.a = {pick[0], pick[m1], pick[m2]};
                    int k = 0;
                    for (int t = 1; t < 6; ++t)
                        if (t != m1 && t != m2) w.c[k++] = pick[t];
                    if (route(w)) {
                        res.witness = w;
                        return true;
                    }
                    if (out_) return false;
                }
            return false;
        }
        for (std::size_t k = from; k < cands_.size(); ++k) {
            pick.push_back(cands_[k]);
            if (choose(k + 1, pick, res)) return true;
            pick.pop_back();
            if (out_) return false;
        }
        return false;
    }

    bool route(K33Witness& w) {
        blocked_.assign(g_.nv(), false);
        for (int k = 0; k < 3; ++k) blocked_[w.a[k]] = blocked_[w.c[k]] = true;
        return route_pair(0, w);
    }

    bool route_pair(int idx, K33Witness& w) {
        if (idx == 9) return true;
        int i = idx / 3;
        std::vector<int> vs{w.a[i]}, es;
        return extend(idx, w, vs, es);
    }

    // Depth-first enumeration of simple paths from the current end to c[j].
    bool extend(int idx, K33Witness& w, std::vector<int>& vs, std::vector<int>& es) {
        if (!tick()) return false;
        int i = idx / 3, j = idx % 3;
        int v = vs.back();
        for (auto [x, e] : adj_[v]) {
            if (!alive_[x]) continue;
            if (x == w.c[j]) {
                vs.push_back(x);
                es.push_back(e);
                w.verts[i][j] = vs;
                w.paths[i][j] = es;
                if (route_pair(idx + 1, w)) return true;
                vs.pop_back();
                es.pop_back();
                if (out_) return false;
                continue;
            }
            if (blocked_[x]) continue;
            blocked_[x] = true;
            vs.push_back(x);
            es.push_back(e);
            if (extend(idx, w, vs, es)) return true;
            vs.pop_back();
            es.pop_back();
            blocked_[x] = false;
            if (out_) return false;
        }
        return false;
    }

    const TopGraph& g_;
    long budget_;
    long nodes_ = 0;
    bool out_ = false;
    std::vector<std::vector<std::pair<int, int>>> adj_;
    std::vector<bool> alive_;
    std::vector<bool> blocked_;
    std::vector<int> cands_;
};

}  // namespace detail

// Exact search with a node budget; exceeding it yields Inconclusive.
inline K33Result find_k33(const TopGraph& g, long budget = 5'000'000) {
    return detail::K33Search(g, budget).run();
}

// Graph-description export with vertex kinds and free-end markers.
inline std::string to_dot(const TopGraph& g, const std::string& name = "spectrum") {
    std::string s = "digraph " + name + " {\n";
    for (int v = 0; v < g.nv(); ++v) {
        const char* kind = g.vertices[v].kind == VertexKind::ZCell ? "zcell"
                           : g.vertices[v].kind == VertexKind::X   ? "x"
                                                                   : "anon";
        s += "  v" + std::to_string(v) + " [label=\"" + g.vertices[v].label + "\", kind=" + kind + "];\n";
    }
    int f = 0;
    for (int e = 0; e < g.ne(); ++e) {
        auto& ed = g.edges[e];
        std::string u = ed.u >= 0 ? "v" + std::to_string(ed.u) : "free" + std::to_string(f++);
        std::string v = ed.v >= 0 ? "v" + std::to_string(ed.v) : "free" + std::to_string(f++);
        if (ed.u < 0) s += "  " + u + " [shape=point, kind=free_end];\n";
        if (ed.v < 0) s += "  " + v + " [shape=point, kind=free_end];\n";
        s += "  " + u + " -> " + v + " [label=\"" + ed.label + "\", block=" + std::to_string(ed.block) + "];\n";
    }
    s += "}\n";
    return s;
}

}  // namespace nccw
