#include "htmax/ht_tensor.hpp"

#include <cmath>
#include <functional>

#include "htmax/errors.hpp"
#include "htmax/rng.hpp"

namespace htmax {

double HtTensor::entry(const MultiIndex& i) const {
    const int d = order();
    if (static_cast<int>(i.size()) != d)
        throw ValidationError("multi-index order mismatch");
    for (int mu = 1; mu <= d; ++mu)
        if (i[mu - 1] < 1 || i[mu - 1] > mode_sizes[mu - 1])
            throw ValidationError("multi-index out of range");

    std::function<std::vector<double>(int)> eval = [&](int t) -> std::vector<double> {
        if (tree.is_leaf(t)) {
            const int mu = tree.mode_of(t);
            const Matrix& u = leaf_frames[t];
            const std::size_t row = static_cast<std::size_t>(i[mu - 1] - 1);
            std::vector<double> v(u.cols());
            for (std::size_t k = 0; k < u.cols(); ++k) v[k] = u(row, k);
            return v;
        }
        const auto& nd = tree.node(t);
        const std::vector<double> v1 = eval(nd.left);
        const std::vector<double> v2 = eval(nd.right);
        const int r1 = ranks[nd.left], r2 = ranks[nd.right];
        std::vector<double> v(ranks[t], 0.0);
        const std::vector<double>& b = transfer[t];
        for (int k = 0; k < ranks[t]; ++k) {
            double acc = 0.0;
            for (int k1 = 0; k1 < r1; ++k1) {
                const double f = v1[k1];
                if (f == 0.0) continue;
                const std::size_t base = (static_cast<std::size_t>(k) * r1 + k1) * r2;
                for (int k2 = 0; k2 < r2; ++k2) acc += b[base + k2] * f * v2[k2];
            }
            v[k] = acc;
        }
        return v;
    };
    return eval(0)[0];
}

std::size_t HtTensor::storage_count() const {
    std::size_t s = 0;
    for (int t = 0; t < tree.node_count(); ++t) {
        if (tree.is_leaf(t))
            s += leaf_frames[t].rows() * leaf_frames[t].cols();
        else
            s += transfer[t].size();
    }
    return s;
}

bool HtTensor::all_ranks_one() const {
    for (int r : ranks)
        if (r != 1) return false;
    return true;
}

void HtTensor::validate() const {
    tree.validate();
    const int d = order();
    if (tree.order() != d) throw ValidationError("tree order does not match mode_sizes");
    for (int n : mode_sizes)
        if (n < 1) throw ValidationError("mode sizes must be positive");
    if (static_cast<int>(ranks.size()) != tree.node_count())
        throw ValidationError("rank vector size mismatch");
    for (int r : ranks)
        if (r < 1) throw ValidationError("all ranks must be >= 1");
    if (ranks[0] != 1) throw ValidationError("root rank must be 1");
    if (static_cast<int>(leaf_frames.size()) != tree.node_count() ||
        static_cast<int>(transfer.size()) != tree.node_count())
        throw ValidationError("per-node storage size mismatch");
    for (int t = 0; t < tree.node_count(); ++t) {
        if (tree.is_leaf(t)) {
            const int mu = tree.mode_of(t);
            if (leaf_frames[t].rows() != static_cast<std::size_t>(mode_sizes[mu - 1]) ||
                leaf_frames[t].cols() != static_cast<std::size_t>(ranks[t]))
                throw ValidationError("leaf frame shape mismatch");
            if (!transfer[t].empty()) throw ValidationError("leaf must not carry a transfer tensor");
        } else {
            const auto& nd = tree.node(t);
            const std::size_t want = static_cast<std::size_t>(ranks[t]) * ranks[nd.left] * ranks[nd.right];
            if (transfer[t].size() != want) throw ValidationError("transfer tensor shape mismatch");
            if (!leaf_frames[t].empty()) throw ValidationError("non-leaf must not carry a frame");
        }
    }
}

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

static HtTensor make_shell(DimensionTree tree, std::vector<int> mode_sizes,
                           std::vector<int> ranks) {
    HtTensor a;
    a.tree = std::move(tree);
    a.mode_sizes = std::move(mode_sizes);
    a.ranks = std::move(ranks);
    a.leaf_frames.resize(a.tree.node_count());
    a.transfer.resize(a.tree.node_count());
    return a;
}

HtTensor from_elementary(const std::vector<std::vector<double>>& vectors) {
    if (vectors.empty()) throw ValidationError("from_elementary: empty vector list");
    const int d = static_cast<int>(vectors.size());
    std::vector<int> sizes(d);
    for (int mu = 0; mu < d; ++mu) {
        if (vectors[mu].empty()) throw ValidationError("from_elementary: empty factor vector");
        sizes[mu] = static_cast<int>(vectors[mu].size());
    }
    DimensionTree tree = DimensionTree::balanced(d);
    HtTensor a = make_shell(tree, sizes, std::vector<int>(tree.node_count(), 1));
    for (int t = 0; t < a.tree.node_count(); ++t) {
        if (a.tree.is_leaf(t)) {
            const int mu = a.tree.mode_of(t);
            Matrix u(vectors[mu - 1].size(), 1);
            for (std::size_t i = 0; i < u.rows(); ++i) u(i, 0) = vectors[mu - 1][i];
            a.leaf_frames[t] = std::move(u);
        } else {
            a.transfer[t] = {1.0};
        }
    }
    a.validate();
    return a;
}

HtTensor random_ht(int d, int n, int r, std::uint64_t seed) {
    if (d < 1 || n < 1 || r < 1) throw ValidationError("random_ht: d, n, r must be >= 1");
    DimensionTree tree = DimensionTree::balanced(d);
    std::vector<int> ranks(tree.node_count(), r);
    ranks[0] = 1;
    if (d == 1) ranks[0] = 1; // single node is both root and leaf
    HtTensor a = make_shell(tree, std::vector<int>(d, n), ranks);

    Rng rng(seed);
    for (int t = 0; t < a.tree.node_count(); ++t) {
        if (!a.tree.is_leaf(t)) {
            const auto& nd = a.tree.node(t);
            const std::size_t sz =
                static_cast<std::size_t>(a.ranks[t]) * a.ranks[nd.left] * a.ranks[nd.right];
            std::vector<double> b(sz);
            for (double& x : b) x = rng.uniform(-1.5, 1.5);
            a.transfer[t] = std::move(b);
        } else {
            const int rl = a.ranks[t];
            std::vector<double> rowA(rl), rowB(rl);
            for (double& x : rowA) x = rng.uniform(-1.5, 1.5);
            for (double& x : rowB) x = rng.uniform(-1.5, 1.5);
            Matrix u(n, rl);
            for (int i = 0; i < n; ++i) {
                const std::vector<double>& row = rng.flip() ? rowB : rowA;
                for (int k = 0; k < rl; ++k) u(i, k) = row[k];
            }
            a.leaf_frames[t] = std::move(u);
        }
    }
    a.validate();
    return a;
}

HtTensor cheb_tensor(int d, int n) {
    if (d < 2 || n < 2) throw ValidationError("cheb_tensor: requires d >= 2 and n >= 2");
    const double nn = static_cast<double>(n);
    const double total = std::pow(nn, static_cast<double>(d));
    if (!std::isfinite(total)) throw ValidationError("cheb_tensor: n^d overflows double range");

    // Grid point of linearized index L (1-based): x = c0 + sum_mu c_mu (i_mu - 1)
    // with c0 = -1 and c_mu = 2 n^(d-mu) / (n^d - 1).
    std::vector<double> c(d);
    for (int mu = 1; mu <= d; ++mu)
        c[mu - 1] = 2.0 * std::pow(nn, static_cast<double>(d - mu)) / (total - 1.0);
    const double c0 = -1.0;

    static const double binom[5][5] = {{1, 0, 0, 0, 0},
                                       {1, 1, 0, 0, 0},
                                       {1, 2, 1, 0, 0},
                                       {1, 3, 3, 1, 0},
                                       {1, 4, 6, 4, 1}};
    // T4(x) = 8x^4 - 8x^2 + 1 shifted to a polynomial in s = x - c0.
    static const double t4[5] = {1.0, 0.0, -8.0, 0.0, 8.0};
    double shifted[5] = {0, 0, 0, 0, 0};
    for (int p = 0; p <= 4; ++p)
        for (int m = p; m <= 4; ++m)
            shifted[p] += t4[m] * binom[m][p] * std::pow(c0, static_cast<double>(m - p));

    DimensionTree tree = DimensionTree::balanced(d);
    std::vector<int> ranks(tree.node_count(), 5);
    ranks[0] = 1;
    HtTensor a = make_shell(tree, std::vector<int>(d, n), ranks);

    for (int t = 0; t < a.tree.node_count(); ++t) {
        if (a.tree.is_leaf(t)) {
            // Columns span {1, s, s^2, s^3, s^4} of the local term s = c_mu (i-1).
            const int mu = a.tree.mode_of(t);
            Matrix u(n, 5);
            for (int i = 0; i < n; ++i) {
                const double s = c[mu - 1] * i;
                double pw = 1.0;
                for (int p = 0; p <= 4; ++p) {
                    u(i, p) = pw;
                    pw *= s;
                }
            }
            a.leaf_frames[t] = std::move(u);
        } else if (!a.tree.is_root(t)) {
            // Binomial recombination of the children's partial sums.
            std::vector<double> b(5 * 5 * 5, 0.0);
            for (int p = 0; p <= 4; ++p)
                for (int q = 0; q <= p; ++q)
                    b[(static_cast<std::size_t>(p) * 5 + q) * 5 + (p - q)] = binom[p][q];
            a.transfer[t] = std::move(b);
        } else {
            // Root combines the full sum with the shifted T4 coefficients.
            std::vector<double> b(5 * 5, 0.0);
            for (int q1 = 0; q1 <= 4; ++q1)
                for (int q2 = 0; q2 + q1 <= 4; ++q2)
                    b[static_cast<std::size_t>(q1) * 5 + q2] = shifted[q1 + q2] * binom[q1 + q2][q1];
            a.transfer[t] = std::move(b);
        }
    }
    a.validate();
    return a;
}

HtTensor counterexample_matrix(int n, double sigma1, double sigma2) {
    if (n < 2) throw ValidationError("counterexample_matrix: n >= 2 required");
    if (!(sigma1 > sigma2) || sigma2 < 0.0)
        throw ValidationError("counterexample_matrix: requires sigma1 > sigma2 >= 0");
    const double block = sigma1 / (n - 1);
    DimensionTree tree = DimensionTree::balanced(2);
    const int r = (sigma2 > 0.0) ? 2 : 1;
    std::vector<int> ranks = {1, r, r};
    HtTensor a = make_shell(tree, {n, n}, ranks);
    for (int t = 1; t <= 2; ++t) {
        Matrix u(n, r);
        for (int i = 1; i < n; ++i) u(i, 0) = 1.0; // v = (0,1,...,1)
        if (r == 2) u(0, 1) = 1.0;                 // e1
        a.leaf_frames[t] = std::move(u);
    }
    std::vector<double> b(static_cast<std::size_t>(r) * r, 0.0);
    b[0] = block;
    if (r == 2) b[3] = sigma2;
    a.transfer[0] = std::move(b);
    a.validate();
    return a;
}

HtTensor adversarial_tensor(int d, int n, std::uint64_t seed) {
    if (d < 2 || n < 1) throw ValidationError("adversarial_tensor: d >= 2, n >= 1 required");
    Rng rng(seed);
    DimensionTree tree = DimensionTree::balanced(d);
    std::vector<int> ranks(tree.node_count(), 2);
    ranks[0] = 1;
    HtTensor a = make_shell(tree, std::vector<int>(d, n), ranks);
    for (int t = 0; t < a.tree.node_count(); ++t) {
        if (a.tree.is_leaf(t)) {
            Matrix u(n, 2);
            u(0, 0) = 1.0; // keeps the (1,...,1) product exactly 1
            for (int i = 1; i < n; ++i) u(i, 0) = rng.uniform(0.91, 1.0);
            u(0, 1) = 1.0;
            a.leaf_frames[t] = std::move(u);
        } else if (!a.tree.is_root(t)) {
            std::vector<double> b(8, 0.0);
            b[0] = 1.0; // [0][0][0]
            b[7] = 1.0; // [1][1][1]
            a.transfer[t] = std::move(b);
        } else {
            // Spike weight 1.9 - 1 is exact in double precision (Sterbenz),
            // so entry(1,...,1) evaluates to exactly 1.9.
            std::vector<double> b(4, 0.0);
            b[0] = 1.0;
            b[3] = 1.9 - 1.0;
            a.transfer[0] = std::move(b);
        }
    }
    a.validate();
    return a;
}

} // namespace htmax
