#include "iafmc/assoc.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

#include "iafmc/errors.hpp"

namespace iafmc {

AssociationGraph::AssociationGraph(std::vector<std::vector<std::pair<int, std::int64_t>>> adj)
    : adj_(std::move(adj)), degree_(adj_.size(), 0) {
    const int m = item_count();
    for (int i = 0; i < m; ++i) {
        int prev = -1;
        for (const auto& [j, w] : adj_[i]) {
            if (j < 0 || j >= m) throw std::invalid_argument("neighbor index out of range");
            if (j == i) throw std::invalid_argument("self loop on item " + std::to_string(i));
            if (j <= prev) throw std::invalid_argument("neighbor list not strictly ascending");
            if (w < 1) throw std::invalid_argument("non-positive edge weight");
            prev = j;
            degree_[i] += w;
        }
    }
    // Symmetry: the mirrored entry must exist with the same weight.
    for (int i = 0; i < m; ++i) {
        for (const auto& [j, w] : adj_[i]) {
            const auto& back = adj_[j];
            auto it = std::lower_bound(back.begin(), back.end(), i,
                                       [](const auto& e, int v) { return e.first < v; });
            if (it == back.end() || it->first != i || it->second != w)
                throw std::invalid_argument("asymmetric edge between items " + std::to_string(i) +
                                            " and " + std::to_string(j));
        }
    }
}

std::span<const std::pair<int, std::int64_t>> AssociationGraph::neighbors(int item) const {
    if (item < 0 || item >= item_count())
        throw std::out_of_range("item index " + std::to_string(item) + " out of range");
    return adj_[item];
}

std::int64_t AssociationGraph::degree_weight(int item) const {
    if (item < 0 || item >= item_count())
        throw std::out_of_range("item index " + std::to_string(item) + " out of range");
    return degree_[item];
}

std::int64_t AssociationGraph::total_degree_weight() const {
    std::int64_t total = 0;
    for (auto d : degree_) total += d;
    return total;
}

AssociationGraph build_association_graph(const std::vector<std::span<const int>>& train_sequences,
                                         int item_count, int window) {
    if (item_count < 0) throw std::invalid_argument("negative item count");
    if (window < 1) throw ConfigError("association window must be at least 1");

    std::vector<std::unordered_map<int, std::int64_t>> counts(item_count);
    for (const auto& seq : train_sequences) {
        const int len = static_cast<int>(seq.size());
        for (int t = 0; t < len; ++t) {
            int a = seq[t];
            if (a < 0 || a >= item_count) throw std::out_of_range("item index out of range in sequence");
            for (int w = 1; w <= window && t + w < len; ++w) {
                int b = seq[t + w];
                if (b < 0 || b >= item_count) throw std::out_of_range("item index out of range in sequence");
                if (a == b) continue;
                ++counts[a][b];
                ++counts[b][a];
            }
        }
    }

    std::vector<std::vector<std::pair<int, std::int64_t>>> adj(item_count);
    for (int i = 0; i < item_count; ++i) {
        adj[i].assign(counts[i].begin(), counts[i].end());
        std::sort(adj[i].begin(), adj[i].end());
    }
    return AssociationGraph(std::move(adj));
}

AssociationGraph build_association_graph(const Dataset& ds, int window) {
    std::vector<std::span<const int>> prefixes;
    prefixes.reserve(ds.user_count());
    for (int u = 0; u < ds.user_count(); ++u) prefixes.push_back(ds.train_prefix(u));
    return build_association_graph(prefixes, ds.item_count(), window);
}

void export_edge_list(const AssociationGraph& g, std::ostream& out) {
    for (int i = 0; i < g.item_count(); ++i)
        for (const auto& [j, w] : g.neighbors(i))
            if (i < j) out << i << ',' << j << ',' << w << '\n';
}

}  // namespace iafmc
