#include "htmax/dense_tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>

#include "htmax/errors.hpp"

namespace htmax {

std::size_t DenseTensor::flat_index(const MultiIndex& i) const {
    std::size_t flat = 0;
    for (std::size_t mu = 0; mu < mode_sizes.size(); ++mu) {
        if (i[mu] < 1 || i[mu] > mode_sizes[mu])
            throw ValidationError("dense index out of range");
        flat = flat * mode_sizes[mu] + (i[mu] - 1);
    }
    return flat;
}

MultiIndex DenseTensor::unflatten(std::size_t flat) const {
    MultiIndex i(mode_sizes.size());
    for (std::size_t mu = mode_sizes.size(); mu-- > 0;) {
        i[mu] = static_cast<int>(flat % mode_sizes[mu]) + 1;
        flat /= mode_sizes[mu];
    }
    return i;
}

std::size_t dense_cap() {
    if (const char* env = std::getenv("HTMAX_DENSE_CAP")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && v > 0) return static_cast<std::size_t>(v);
    }
    return 1000000;
}

namespace {

/// True when the subsets of the tree are contiguous integer ranges, so node
/// matricizations line up with row-major (mode-1 slowest) flattening.
bool contiguous_subsets(const DimensionTree& tree) {
    for (int t = 0; t < tree.node_count(); ++t) {
        const auto& m = tree.node(t).modes;
        if (m.back() - m.front() + 1 != static_cast<int>(m.size())) return false;
    }
    return true;
}

} // namespace

DenseTensor densify(const HtTensor& a) {
    const std::size_t cap = dense_cap();
    std::size_t total = 1;
    for (int n : a.mode_sizes) {
        if (total > cap / static_cast<std::size_t>(n))
            throw DenseCapError("densify: entry count exceeds cap");
        total *= static_cast<std::size_t>(n);
    }
    if (total > cap) throw DenseCapError("densify: entry count exceeds cap");

    DenseTensor out;
    out.mode_sizes = a.mode_sizes;

    if (!contiguous_subsets(a.tree)) {
        out.values.resize(total);
        for (std::size_t f = 0; f < total; ++f) out.values[f] = a.entry(out.unflatten(f));
        return out;
    }

    // Bottom-up: dense matricization D_t ((prod of node mode sizes) x r_t),
    // with the node's modes flattened mode-major.
    std::function<Matrix(int)> build = [&](int t) -> Matrix {
        if (a.tree.is_leaf(t)) return a.leaf_frames[t];
        const auto& nd = a.tree.node(t);
        const Matrix d1 = build(nd.left);
        const Matrix d2 = build(nd.right);
        const int r = a.ranks[t];
        const int r1 = a.ranks[nd.left], r2 = a.ranks[nd.right];
        Matrix dt(d1.rows() * d2.rows(), r);
        for (std::size_t i1 = 0; i1 < d1.rows(); ++i1)
            for (std::size_t i2 = 0; i2 < d2.rows(); ++i2) {
                const std::size_t row = i1 * d2.rows() + i2;
                for (int k = 0; k < r; ++k) {
                    double acc = 0.0;
                    for (int k1 = 0; k1 < r1; ++k1) {
                        const double f = d1(i1, k1);
                        if (f == 0.0) continue;
                        const std::size_t base = (static_cast<std::size_t>(k) * r1 + k1) * r2;
                        for (int k2 = 0; k2 < r2; ++k2)
                            acc += a.transfer[t][base + k2] * f * d2(i2, k2);
                    }
                    dt(row, k) = acc;
                }
            }
        return dt;
    };
    Matrix root = build(0);
    out.values.assign(root.data().begin(), root.data().end());
    return out;
}

std::pair<double, MultiIndex> dense_maxnorm_argmax(const DenseTensor& x) {
    if (x.values.empty()) throw ValidationError("dense_maxnorm_argmax: empty tensor");
    std::size_t best = 0;
    double bestabs = -1.0;
    for (std::size_t f = 0; f < x.values.size(); ++f) {
        const double v = std::abs(x.values[f]);
        if (v > bestabs) {
            bestabs = v;
            best = f;
        }
    }
    return {bestabs, x.unflatten(best)};
}

double dense_pnorm(const DenseTensor& x, double p) {
    if (!(p > 0.0)) throw ValidationError("dense_pnorm: p must be positive");
    double m = 0.0;
    for (double v : x.values) m = std::max(m, std::abs(v));
    if (m == 0.0) return 0.0;
    double s = 0.0;
    for (double v : x.values) s += std::pow(std::abs(v) / m, p);
    return m * std::pow(s, 1.0 / p);
}

DenseTensor dense_hadamard(const DenseTensor& x, const DenseTensor& y) {
    if (x.mode_sizes != y.mode_sizes)
        throw ValidationError("dense_hadamard: shape mismatch");
    DenseTensor z = x;
    for (std::size_t i = 0; i < z.values.size(); ++i) z.values[i] *= y.values[i];
    return z;
}

double dense_dot(const DenseTensor& x, const DenseTensor& y) {
    if (x.mode_sizes != y.mode_sizes) throw ValidationError("dense_dot: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < x.values.size(); ++i) s += x.values[i] * y.values[i];
    return s;
}

std::pair<double, MultiIndex> pattern_enumeration_argmax(const HtTensor& a) {
    const int d = a.order();
    // Distinct leaf rows per mode, each with its first-occurrence index.
    std::vector<std::vector<std::vector<double>>> rows(d);
    std::vector<std::vector<int>> first(d);
    std::size_t patterns = 1;
    for (int mu = 1; mu <= d; ++mu) {
        const Matrix& u = a.leaf_frames[a.tree.leaf_of(mu)];
        for (std::size_t i = 0; i < u.rows(); ++i) {
            std::vector<double> row(u.cols());
            for (std::size_t k = 0; k < u.cols(); ++k) row[k] = u(i, k);
            bool seen = false;
            for (const auto& r : rows[mu - 1])
                if (r == row) {
                    seen = true;
                    break;
                }
            if (!seen) {
                rows[mu - 1].push_back(std::move(row));
                first[mu - 1].push_back(static_cast<int>(i) + 1);
            }
        }
        if (patterns > (std::size_t{1} << 24) / rows[mu - 1].size())
            throw DenseCapError("pattern_enumeration_argmax: too many row patterns");
        patterns *= rows[mu - 1].size();
    }

    std::vector<std::size_t> choice(d, 0);
    auto eval = [&]() {
        std::function<std::vector<double>(int)> rec = [&](int t) -> std::vector<double> {
            if (a.tree.is_leaf(t)) return rows[a.tree.mode_of(t) - 1][choice[a.tree.mode_of(t) - 1]];
            const auto& nd = a.tree.node(t);
            const std::vector<double> v1 = rec(nd.left);
            const std::vector<double> v2 = rec(nd.right);
            const int r1 = a.ranks[nd.left], r2 = a.ranks[nd.right];
            std::vector<double> v(a.ranks[t], 0.0);
            for (int k = 0; k < a.ranks[t]; ++k) {
                double acc = 0.0;
                for (int k1 = 0; k1 < r1; ++k1) {
                    const double f = v1[k1];
                    if (f == 0.0) continue;
                    const std::size_t base = (static_cast<std::size_t>(k) * r1 + k1) * r2;
                    for (int k2 = 0; k2 < r2; ++k2) acc += a.transfer[t][base + k2] * f * v2[k2];
                }
                v[k] = acc;
            }
            return v;
        };
        return rec(0)[0];
    };

    double bestabs = -1.0, bestval = 0.0;
    std::vector<std::size_t> bestchoice(d, 0);
    // Patterns enumerated with mode 1 slowest, matching the dense oracle's
    // smallest-index tie-break on the first-occurrence representatives.
    for (std::size_t p = 0; p < patterns; ++p) {
        std::size_t rem = p;
        for (int mu = d; mu-- > 0;) {
            choice[mu] = rem % rows[mu].size();
            rem /= rows[mu].size();
        }
        const double v = eval();
        if (std::abs(v) > bestabs) {
            bestabs = std::abs(v);
            bestval = v;
            bestchoice = choice;
        }
    }
    MultiIndex idx(d);
    for (int mu = 0; mu < d; ++mu) idx[mu] = first[mu][bestchoice[mu]];
    return {bestval, idx};
}

} // namespace htmax
