#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "htmax/dense_kernels.hpp"
#include "htmax/dimension_tree.hpp"

namespace htmax {

/// d-tuple of 1-based mode indices addressing a single tensor entry.
using MultiIndex = std::vector<int>;

/// Tensor in Hierarchical Tucker representation: a dimension tree with a
/// frame matrix (n_mu x r) at every leaf and a transfer tensor
/// (r_t x r_left x r_right) at every non-leaf node. The root rank is
/// always 1. Values are immutable after construction by convention; all
/// operations return new tensors.
struct HtTensor {
    DimensionTree tree;
    std::vector<int> mode_sizes;                 // d entries
    std::vector<int> ranks;                      // one per tree node
    std::vector<Matrix> leaf_frames;             // per node; empty for non-leaves
    std::vector<std::vector<double>> transfer;   // per node; empty for leaves,
                                                 // layout [k][k1][k2] row-major

    int order() const { return static_cast<int>(mode_sizes.size()); }

    double transfer_at(int t, int k, int k1, int k2) const {
        const int r1 = ranks[tree.node(t).left];
        const int r2 = ranks[tree.node(t).right];
        return transfer[t][(static_cast<std::size_t>(k) * r1 + k1) * r2 + k2];
    }

    /// Entry evaluation by the bottom-up rank-vector recursion; O(d r^3).
    double entry(const MultiIndex& i) const;

    /// Number of stored real values (frames plus transfer tensors).
    std::size_t storage_count() const;

    bool all_ranks_one() const;

    /// Checks shape consistency against tree and ranks; throws on failure.
    void validate() const;
};

/// Rank-1 tensor from d factor vectors: entry(i) = prod_mu u_mu[i_mu].
HtTensor from_elementary(const std::vector<std::vector<double>>& vectors);

/// Random HT tensor on the balanced tree: all non-root ranks r, transfer
/// entries uniform in [-1.5, 1.5]; each leaf frame repeats two random row
/// vectors, so at most 2^d distinct entries occur and a pattern enumeration
/// argmax is exact.
HtTensor random_ht(int d, int n, int r, std::uint64_t seed);

/// Discretization of the degree-4 Chebyshev polynomial T4 on n^d equidistant
/// points of [-1, 1], assembled exactly with all non-root ranks 5.
HtTensor cheb_tensor(int d, int n);

/// Order-2 tensor M = (sigma1/(n-1)) * v v^T + sigma2 * e1 e1^T with
/// v = (0,1,...,1): the matrix whose rank-1 best approximation has an
/// arbitrarily bad maximum-norm error.
HtTensor counterexample_matrix(int n, double sigma1, double sigma2);

/// Elementary tensor with factors in [0.91, 1.0] (first entry pinned to 1)
/// and the (1,...,1) entry overwritten to 1.9; rank components become 2.
/// For large n the spike carries a vanishing share of the norm and defeats
/// estimators whose iteration budget cannot amplify it above round-off.
HtTensor adversarial_tensor(int d, int n, std::uint64_t seed);

} // namespace htmax
