#pragma once

#include <utility>
#include <vector>

#include "htmax/ht_tensor.hpp"

namespace htmax {

/// Inner product sum_i x[i]*y[i], contracted leaves-to-root through per-node
/// Gram blocks; O(d(nr^2 + r^4)), never materializes entries.
double dot(const HtTensor& x, const HtTensor& y);

/// Euclidean norm sqrt(max(dot(x,x), 0)).
double norm(const HtTensor& x);

/// Entrywise product; every output rank is the product of the input ranks.
HtTensor hadamard(const HtTensor& x, const HtTensor& y);

/// Entrywise sum via the block-diagonal construction; non-root output ranks
/// are r_x + r_y, the root stays rank 1.
HtTensor add(const HtTensor& x, const HtTensor& y);

/// Scalar multiple (absorbed into the root).
HtTensor scale(const HtTensor& x, double c);

/// Restriction of mode mu (1-based) to the contiguous 1-based range
/// [lo, hi]; only the leaf frame of that mode changes.
HtTensor slice(const HtTensor& x, int mu, int lo, int hi);

/// Restriction of mode mu to an arbitrary 1-based row subset, in the given
/// order. Generalizes slice; used to mirror row removals across tensors.
HtTensor restrict_rows(const HtTensor& x, int mu, const std::vector<int>& rows);

/// Drops leaf-frame rows whose sup-norm is <= tol * (frame max abs).
/// kept[mu-1][i_new-1] = original 1-based index of row i_new in mode mu.
/// Throws ZeroTensorError if a mode would lose all rows.
std::pair<HtTensor, std::vector<std::vector<int>>>
remove_zero_rows(const HtTensor& x, double tol);

/// Re-represents x with orthonormal leaf frames and orthonormal transfer
/// matricizations at every non-root node (the tensor itself is unchanged).
/// Non-root ranks may shrink to the matricization row count.
HtTensor orthogonalize(const HtTensor& x);

/// Joint orthonormal basis of k tensors: all q_tensors share leaf frames and
/// interior transfer tensors and differ only at the root; inputs are
/// recovered as a_i = sum_j r_factor(j,i) * q_j.
struct HtQrResult {
    std::vector<HtTensor> q_tensors;
    Matrix r_factor;            // k x k upper triangular, nonneg diagonal
    bool rank_deficient = false; // some |R(i,i)| fell below 1e-12 * scale
};
HtQrResult ht_qr(const std::vector<HtTensor>& tensors);

struct TruncationReport {
    std::vector<int> achieved_ranks;      // one per tree node
    std::vector<double> discarded_energy; // per node, sum of cut eigenvalues
    double rel_error = 0.0;               // sqrt(sum energy) / norm(x)
};

/// Projects x onto lower hierarchical ranks by the hierarchical SVD:
/// orthogonalize, then per-node Gram eigendecompositions root-to-leaves,
/// keeping the leading target_ranks[t] basis vectors at node t.
std::pair<HtTensor, TruncationReport>
truncate(const HtTensor& x, const std::vector<int>& target_ranks);

/// truncate with one uniform non-root rank bound.
std::pair<HtTensor, TruncationReport> truncate(const HtTensor& x, int max_rank);

/// Rank-adaptive truncation: per node, cuts the smallest trailing eigenvalue
/// group whose energy stays within (eps * norm(x))^2.
std::pair<HtTensor, TruncationReport> truncate_eps(const HtTensor& x, double eps);

} // namespace htmax
