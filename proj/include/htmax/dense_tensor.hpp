#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "htmax/ht_tensor.hpp"

namespace htmax {

/// Fully materialized tensor, row-major with mode 1 slowest. Brute-force
/// reference for the structured arithmetic; valid only at small sizes.
struct DenseTensor {
    std::vector<int> mode_sizes;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    std::size_t flat_index(const MultiIndex& i) const;
    MultiIndex unflatten(std::size_t flat) const;
    double at(const MultiIndex& i) const { return values[flat_index(i)]; }
};

/// Default densification cap (entries); override with env HTMAX_DENSE_CAP.
std::size_t dense_cap();

/// Entrywise materialization; throws DenseCapError above the cap.
DenseTensor densify(const HtTensor& a);

/// Exhaustive max-abs scan with smallest-flat-index tie-break.
std::pair<double, MultiIndex> dense_maxnorm_argmax(const DenseTensor& x);

/// (sum_i |x_i|^p)^(1/p), scaled by the max entry to avoid overflow.
double dense_pnorm(const DenseTensor& x, double p);

DenseTensor dense_hadamard(const DenseTensor& x, const DenseTensor& y);
double dense_dot(const DenseTensor& x, const DenseTensor& y);

/// Exact argmax for tensors whose leaf frames contain at most two distinct
/// rows per mode (the seeded random family): enumerates every row-choice
/// pattern and returns the best matching multi-index (value, index).
std::pair<double, MultiIndex> pattern_enumeration_argmax(const HtTensor& a);

} // namespace htmax
