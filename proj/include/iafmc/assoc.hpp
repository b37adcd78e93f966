#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "iafmc/dataset.hpp"

namespace iafmc {

// Undirected item adjacency built from consecutive pairs in train prefixes.
// neighbors(i) lists (item, weight) with weight = number of times the pair
// appeared adjacently; no self loops. Immutable once built.
class AssociationGraph {
public:
    AssociationGraph() = default;
    explicit AssociationGraph(int item_count) : adj_(item_count), degree_(item_count, 0) {}
    // Takes per-item neighbor lists; validates sorting, positive weights,
    // absence of self loops and symmetry.
    explicit AssociationGraph(std::vector<std::vector<std::pair<int, std::int64_t>>> adj);

    int item_count() const { return static_cast<int>(adj_.size()); }
    std::span<const std::pair<int, std::int64_t>> neighbors(int item) const;
    std::int64_t degree_weight(int item) const;
    std::int64_t total_degree_weight() const;

private:
    std::vector<std::vector<std::pair<int, std::int64_t>>> adj_;
    std::vector<std::int64_t> degree_;
};

// Counts unordered pairs (s[t], s[t+w]) for w in [1, window] within each
// sequence, skipping pairs of equal items. Pass train prefixes only.
AssociationGraph build_association_graph(const std::vector<std::span<const int>>& train_sequences,
                                         int item_count, int window = 1);
AssociationGraph build_association_graph(const Dataset& ds, int window = 1);

// Text edge list `i,i',weight` with i < i', ascending by i then i'.
void export_edge_list(const AssociationGraph& g, std::ostream& out);

}  // namespace iafmc
