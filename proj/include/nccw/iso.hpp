#pragma once

// Isomorphism of vertex- and edge-coloured undirected multigraphs by colour
// refinement, individualization and leaf verification.

#include <algorithm>
#include <array>
#include <numeric>
#include <vector>

namespace nccw {

struct ColGraph {
    std::vector<int> color;
    std::vector<std::array<int, 3>> edges;  // (u, v, colour); loops allowed

    int n() const { return static_cast<int>(color.size()); }
    int add_vertex(int c) {
        color.push_back(c);
        return n() - 1;
    }
    void add_edge(int u, int v, int c = 0) { edges.push_back({u, v, c}); }
};

enum class SearchStatus { Found, Absent, Budget };

struct IsoResult {
    SearchStatus status = SearchStatus::Absent;
    std::vector<int> map;  // vertex of a -> vertex of b
    long nodes = 0;
};

namespace detail {

class IsoSearch {
public:
    IsoSearch(const ColGraph& a, const ColGraph& b, long budget) : a_(a), b_(b), budget_(budget) {
        n_ = a.n();
        adj_.resize(2 * n_);
        add_adj(a, 0);
        add_adj(b, n_);
        for (auto& l : adj_) std::sort(l.begin(), l.end());
    }

    IsoResult run() {
        IsoResult res;
        if (a_.n() != b_.n() || a_.edges.size() != b_.edges.size()) return res;
        std::vector<int> col(2 * n_);
        for (int v = 0; v < n_; ++v) {
            col[v] = a_.color[v];
            col[n_ + v] = b_.color[v];
        }
        normalize(col);
        bool found = search(col, res.map);
        res.nodes = nodes_;
        if (found)
            res.status = SearchStatus::Found;
        else
            res.status = out_of_budget_ ? SearchStatus::Budget : SearchStatus::Absent;
        return res;
    }

private:
    void add_adj(const ColGraph& g, int off) {
        for (auto [u, v, c] : g.edges) {
            if (u == v) {
                adj_[off + u].push_back({2 * c + 1, off + u});
            } else {
                adj_[off + u].push_back({2 * c, off + v});
                adj_[off + v].push_back({2 * c, off + u});
            }
        }
    }

    static void normalize(std::vector<int>& col) {
        std::vector<int> vals(col);
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        for (int& c : col) c = static_cast<int>(std::lower_bound(vals.begin(), vals.end(), c) - vals.begin());
    }

    static int classes(const std::vector<int>& col) {
        return col.empty() ? 0 : *std::max_element(col.begin(), col.end()) + 1;
    }

    // Refines to the coarsest equitable partition; ids are canonical because
    // they are the ranks of the sorted signatures over both graphs.
    void refine(std::vector<int>& col) const {
        int k = classes(col);
        const std::size_t V = col.size();
        std::vector<int> start(V + 1), buf, order(V);
        std::vector<std::pair<int, int>> nb;
        auto less = [&](int u, int v) {
            return std::lexicographical_compare(buf.begin() + start[u], buf.begin() + start[u + 1],
                                                buf.begin() + start[v], buf.begin() + start[v + 1]);
        };
        auto same = [&](int u, int v) {
            return std::equal(buf.begin() + start[u], buf.begin() + start[u + 1], buf.begin() + start[v],
                              buf.begin() + start[v + 1]);
        };
        while (true) {
            buf.clear();
            for (std::size_t v = 0; v < V; ++v) {
                start[v] = static_cast<int>(buf.size());
                buf.push_back(col[v]);
                nb.clear();
                for (auto [tag, w] : adj_[v]) nb.push_back({tag, col[w]});
                std::sort(nb.begin(), nb.end());
                for (auto [t, c] : nb) {
                    buf.push_back(t);
                    buf.push_back(c);
                }
            }
            start[V] = static_cast<int>(buf.size());
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(), less);
            int next = 0;
            for (std::size_t r = 0; r < V; ++r) {
                if (r > 0 && !same(order[r - 1], order[r])) ++next;
                col[order[r]] = next;
            }
            if (V) ++next;
            if (next == k) return;
            k = next;
        }
    }

    bool balanced(const std::vector<int>& col) const {
        int k = classes(col);
        std::vector<int> h(k, 0);
        for (int v = 0; v < n_; ++v) h[col[v]]++;
        for (int v = n_; v < 2 * n_; ++v) h[col[v]]--;
        return std::all_of(h.begin(), h.end(), [](int x) { return x == 0; });
    }

    bool verify(const std::vector<int>& f) const {
        auto key = [](int u, int v, int c) { return std::array<int, 3>{std::min(u, v), std::max(u, v), c}; };
        std::vector<std::array<int, 3>> ea, eb;
        for (auto [u, v, c] : a_.edges) ea.push_back(key(f[u], f[v], c));
        for (auto [u, v, c] : b_.edges) eb.push_back(key(u, v, c));
        std::sort(ea.begin(), ea.end());
        std::sort(eb.begin(), eb.end());
        if (ea != eb) return false;
        for (int v = 0; v < n_; ++v)
            if (a_.color[v] != b_.color[f[v]]) return false;
        return true;
    }

    bool search(std::vector<int> col, std::vector<int>& out) {
        if (budget_ >= 0 && nodes_ >= budget_) {
            out_of_budget_ = true;
            return false;
        }
        ++nodes_;
        refine(col);
        if (!balanced(col)) return false;
        int k = classes(col);
        std::vector<int> size(k, 0);
        for (int v = 0; v < n_; ++v) size[col[v]]++;
        int target = -1;
        for (int c = 0; c < k; ++c)
            if (size[c] > 1 && (target < 0 || size[c] < size[target])) target = c;
        if (target < 0) {
            std::vector<int> where(k, -1), f(n_);
            for (int v = n_; v < 2 * n_; ++v) where[col[v]] = v - n_;
            for (int v = 0; v < n_; ++v) f[v] = where[col[v]];
            if (verify(f)) {
                out = std::move(f);
                return true;
            }
            return false;
        }
        int a = -1;
        for (int v = 0; v < n_ && a < 0; ++v)
            if (col[v] == target) a = v;
        for (int v = n_; v < 2 * n_; ++v) {
            if (col[v] != target) continue;
            std::vector<int> next(col);
            next[a] = k;
            next[v] = k;
            if (search(std::move(next), out)) return true;
            if (out_of_budget_) return false;
        }
        return false;
    }

    const ColGraph& a_;
    const ColGraph& b_;
    long budget_;
    long nodes_ = 0;
    bool out_of_budget_ = false;
    int n_ = 0;
    std::vector<std::vector<std::pair<int, int>>> adj_;
};

}  // namespace detail

inline IsoResult find_isomorphism(const ColGraph& a, const ColGraph& b, long budget = 2'000'000) {
    return detail::IsoSearch(a, b, budget).run();
}

}  // namespace nccw
