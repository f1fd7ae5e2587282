#include "htmax/dimension_tree.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include "htmax/errors.hpp"

namespace htmax {

/// Builds a tree by recursively splitting the mode list; `split` returns the
/// number of modes kept on the left.
static std::vector<DimensionTree::Node>
build_nodes(int d, const std::function<int(int)>& split) {
    std::vector<DimensionTree::Node> nodes;
    std::function<int(std::vector<int>, int)> rec =
        [&](std::vector<int> modes, int parent) -> int {
        const int id = static_cast<int>(nodes.size());
        nodes.push_back({});
        nodes[id].modes = modes;
        nodes[id].parent = parent;
        if (modes.size() > 1) {
            const int h = split(static_cast<int>(modes.size()));
            std::vector<int> left(modes.begin(), modes.begin() + h);
            std::vector<int> right(modes.begin() + h, modes.end());
            const int l = rec(std::move(left), id);
            const int r = rec(std::move(right), id);
            nodes[id].left = l;
            nodes[id].right = r;
        }
        return id;
    };
    std::vector<int> all(d);
    std::iota(all.begin(), all.end(), 1);
    rec(std::move(all), -1);
    return nodes;
}

DimensionTree DimensionTree::balanced(int d) {
    if (d < 1) throw ValidationError("dimension tree requires d >= 1");
    DimensionTree t;
    t.d_ = d;
    t.nodes_ = build_nodes(d, [](int m) { return (m + 1) / 2; });
    t.index_leaves();
    return t;
}

DimensionTree DimensionTree::linear(int d) {
    if (d < 1) throw ValidationError("dimension tree requires d >= 1");
    DimensionTree t;
    t.d_ = d;
    t.nodes_ = build_nodes(d, [](int) { return 1; });
    t.index_leaves();
    return t;
}

DimensionTree DimensionTree::from_nodes(std::vector<Node> nodes) {
    if (nodes.empty()) throw ValidationError("empty dimension tree");
    DimensionTree t;
    t.d_ = static_cast<int>(nodes.front().modes.size());
    t.nodes_ = std::move(nodes);
    // Recompute parent links from the children.
    for (auto& n : t.nodes_) n.parent = -1;
    for (int i = 0; i < t.node_count(); ++i) {
        const Node& n = t.nodes_[i];
        if (n.left >= 0) {
            if (n.left >= t.node_count() || n.right < 0 || n.right >= t.node_count())
                throw ValidationError("dimension tree child id out of range");
            t.nodes_[n.left].parent = i;
            t.nodes_[n.right].parent = i;
        }
    }
    t.validate();
    t.index_leaves();
    return t;
}

void DimensionTree::index_leaves() {
    leaf_of_.assign(d_, -1);
    for (int i = 0; i < node_count(); ++i)
        if (is_leaf(i)) leaf_of_[nodes_[i].modes.front() - 1] = i;
}

bool DimensionTree::same_structure(const DimensionTree& other) const {
    if (d_ != other.d_ || nodes_.size() != other.nodes_.size()) return false;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].modes != other.nodes_[i].modes) return false;
        if (nodes_[i].left != other.nodes_[i].left) return false;
        if (nodes_[i].right != other.nodes_[i].right) return false;
    }
    return true;
}

void DimensionTree::validate() const {
    const int d = d_;
    if (d < 1) throw ValidationError("dimension tree requires d >= 1");
    std::vector<int> all(d);
    std::iota(all.begin(), all.end(), 1);
    if (nodes_.empty() || nodes_.front().modes != all)
        throw ValidationError("root subset must equal {1,...,d}");
    if (node_count() != 2 * d - 1)
        throw ValidationError("dimension tree must have 2d-1 nodes");

    int leaves = 0;
    for (int i = 0; i < node_count(); ++i) {
        const Node& n = nodes_[i];
        if (n.modes.empty()) throw ValidationError("empty node subset");
        if (!std::is_sorted(n.modes.begin(), n.modes.end()))
            throw ValidationError("node subset must be sorted");
        if ((n.left < 0) != (n.right < 0))
            throw ValidationError("node must have zero or two children");
        if (n.left < 0) {
            if (n.modes.size() != 1) throw ValidationError("leaf subset must be a singleton");
            ++leaves;
        } else {
            const Node& l = nodes_[n.left];
            const Node& r = nodes_[n.right];
            std::vector<int> merged;
            std::merge(l.modes.begin(), l.modes.end(), r.modes.begin(), r.modes.end(),
                       std::back_inserter(merged));
            if (merged != n.modes)
                throw ValidationError("children must partition the parent subset");
            if (nodes_[n.left].parent != i || nodes_[n.right].parent != i)
                throw ValidationError("inconsistent parent links");
        }
    }
    if (leaves != d) throw ValidationError("dimension tree must have d leaves");
}

} // namespace htmax
