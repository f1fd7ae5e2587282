#pragma once

#include <vector>

#include "htmax/ht_tensor.hpp"
#include "htmax/maxnorm.hpp"

namespace htmax {

struct ArgmaxResult {
    MultiIndex index;               // 1-based, original coordinates
    double value = 0.0;             // a[index], re-evaluated on the input
    double estimated_maxnorm = 0.0;
    int iterations_used = 0;        // binary-search descents
    bool rank1_shortcut = false;
    bool zero_rows_removed = false;
};

/// Closed-form argmax for rank-1 tensors: maximize |u| per factor
/// (smallest index on ties); O(dn).
ArgmaxResult elementary_argmax(const HtTensor& a);

/// Binary search for a maximizing multi-index, guided by the final iterate
/// of the adaptive estimator: modes are halved and halves are scored by
/// ||a_half o iterate_half|| / ||iterate_half||; near-ties defer the mode
/// until only forced choices remain.
ArgmaxResult binary_search_argmax(const HtTensor& a, const IterationConfig& cfg);

/// Worst-case descent count: sum over modes of ceil(log2 n_mu).
int search_iteration_bound(int d, const std::vector<int>& mode_sizes);

} // namespace htmax
