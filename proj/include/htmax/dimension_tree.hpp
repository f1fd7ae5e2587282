#pragma once

#include <vector>

namespace htmax {

/// Binary tree over the mode set {1,...,d}. The root holds all modes, every
/// non-leaf splits its mode subset into two disjoint halves, leaves are
/// singletons. Node ids are assigned in preorder, so the root is node 0 and
/// every child id is larger than its parent id.
class DimensionTree {
public:
    struct Node {
        std::vector<int> modes; // sorted, 1-based
        int left = -1;
        int right = -1;
        int parent = -1;
    };

    /// Canonical balanced tree: each node keeps the first ceil(|t|/2) modes
    /// on the left.
    static DimensionTree balanced(int d);

    /// Degenerate tree: each node splits off its first mode, {mu} vs rest.
    static DimensionTree linear(int d);

    int order() const { return d_; }
    int node_count() const { return static_cast<int>(nodes_.size()); }
    const Node& node(int t) const { return nodes_[t]; }
    bool is_leaf(int t) const { return nodes_[t].left < 0; }
    bool is_root(int t) const { return t == 0; }

    /// Node id of the leaf {mu} (mu is 1-based).
    int leaf_of(int mu) const { return leaf_of_[mu - 1]; }
    /// Mode index of a leaf node.
    int mode_of(int t) const { return nodes_[t].modes.front(); }

    bool same_structure(const DimensionTree& other) const;

    /// Checks all structural invariants; throws ValidationError on failure.
    void validate() const;

    /// Builds a tree from explicit node records (used by deserialization).
    static DimensionTree from_nodes(std::vector<Node> nodes);

private:
    int d_ = 0;
    std::vector<Node> nodes_;
    std::vector<int> leaf_of_;

    void index_leaves();
};

} // namespace htmax
