#include "htmax/arith.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "htmax/errors.hpp"

namespace htmax {

namespace {

void require_compatible(const HtTensor& x, const HtTensor& y, const char* op) {
    if (x.mode_sizes != y.mode_sizes)
        throw ValidationError(std::string(op) + ": mode sizes differ");
    if (!x.tree.same_structure(y.tree))
        throw ValidationError(std::string(op) + ": dimension trees differ");
}

/// Contracts the transfer tensor of node t over one child slot with the
/// matrix m (new_child_rank x old_child_rank): replaces the child index.
/// The old dimension of the contracted slot is taken from m itself, since
/// callers may have already rebound the child's rank entry.
void contract_child_slot(HtTensor& x, int t, bool left_slot, const Matrix& m) {
    const auto& nd = x.tree.node(t);
    const int r = x.ranks[t];
    const int r1 = left_slot ? static_cast<int>(m.cols()) : x.ranks[nd.left];
    const int r2 = left_slot ? x.ranks[nd.right] : static_cast<int>(m.cols());
    const std::vector<double>& b = x.transfer[t];
    if (left_slot) {
        const int r1n = static_cast<int>(m.rows());
        std::vector<double> out(static_cast<std::size_t>(r) * r1n * r2, 0.0);
        for (int k = 0; k < r; ++k)
            for (int k1n = 0; k1n < r1n; ++k1n)
                for (int k1 = 0; k1 < r1; ++k1) {
                    const double f = m(k1n, k1);
                    if (f == 0.0) continue;
                    const std::size_t src = (static_cast<std::size_t>(k) * r1 + k1) * r2;
                    const std::size_t dst = (static_cast<std::size_t>(k) * r1n + k1n) * r2;
                    for (int k2 = 0; k2 < r2; ++k2) out[dst + k2] += f * b[src + k2];
                }
        x.transfer[t] = std::move(out);
    } else {
        const int r2n = static_cast<int>(m.rows());
        std::vector<double> out(static_cast<std::size_t>(r) * r1 * r2n, 0.0);
        for (int k = 0; k < r; ++k)
            for (int k1 = 0; k1 < r1; ++k1) {
                const std::size_t src = (static_cast<std::size_t>(k) * r1 + k1) * r2;
                const std::size_t dst = (static_cast<std::size_t>(k) * r1 + k1) * r2n;
                for (int k2n = 0; k2n < r2n; ++k2n) {
                    double acc = 0.0;
                    for (int k2 = 0; k2 < r2; ++k2) acc += m(k2n, k2) * b[src + k2];
                    out[dst + k2n] = acc;
                }
            }
        x.transfer[t] = std::move(out);
    }
}

/// Pushes the factor r_push (k' x r_old) of child node c into its parent and
/// installs the new child rank.
void push_to_parent(HtTensor& x, int c, const Matrix& r_push) {
    const int p = x.tree.node(c).parent;
    contract_child_slot(x, p, x.tree.node(p).left == c, r_push);
    x.ranks[c] = static_cast<int>(r_push.rows());
}

Matrix matricize_transfer(const HtTensor& x, int t) {
    const auto& nd = x.tree.node(t);
    const int r = x.ranks[t];
    const int r1 = x.ranks[nd.left];
    const int r2 = x.ranks[nd.right];
    Matrix m(static_cast<std::size_t>(r1) * r2, r);
    for (int k = 0; k < r; ++k)
        for (int k1 = 0; k1 < r1; ++k1)
            for (int k2 = 0; k2 < r2; ++k2)
                m(static_cast<std::size_t>(k1) * r2 + k2, k) =
                    x.transfer[t][(static_cast<std::size_t>(k) * r1 + k1) * r2 + k2];
    return m;
}

void install_transfer_from_columns(HtTensor& x, int t, const Matrix& q) {
    const auto& nd = x.tree.node(t);
    const int r = static_cast<int>(q.cols());
    const int r1 = x.ranks[nd.left];
    const int r2 = x.ranks[nd.right];
    std::vector<double> b(static_cast<std::size_t>(r) * r1 * r2);
    for (int k = 0; k < r; ++k)
        for (int k1 = 0; k1 < r1; ++k1)
            for (int k2 = 0; k2 < r2; ++k2)
                b[(static_cast<std::size_t>(k) * r1 + k1) * r2 + k2] =
                    q(static_cast<std::size_t>(k1) * r2 + k2, k);
    x.transfer[t] = std::move(b);
    x.ranks[t] = r;
}

/// Flips signs so the diagonal of R is nonnegative (deterministic QR output).
void normalize_qr_signs(Matrix& q, Matrix& r) {
    const std::size_t k = std::min(q.cols(), r.rows());
    for (std::size_t i = 0; i < k; ++i) {
        if (r(i, i) >= 0.0) continue;
        for (std::size_t j = 0; j < r.cols(); ++j) r(i, j) = -r(i, j);
        for (std::size_t row = 0; row < q.rows(); ++row) q(row, i) = -q(row, i);
    }
}

} // namespace

double dot(const HtTensor& x, const HtTensor& y) {
    require_compatible(x, y, "dot");
    const int nc = x.tree.node_count();
    std::vector<Matrix> g(nc);
    for (int t = nc - 1; t >= 0; --t) {
        if (x.tree.is_leaf(t)) {
            g[t] = matmul(transpose(x.leaf_frames[t]), y.leaf_frames[t]);
            continue;
        }
        const auto& nd = x.tree.node(t);
        const int rx = x.ranks[t], ry = y.ranks[t];
        const int rx1 = x.ranks[nd.left], rx2 = x.ranks[nd.right];
        const int ry1 = y.ranks[nd.left], ry2 = y.ranks[nd.right];
        const Matrix& gl = g[nd.left];
        const Matrix& gr = g[nd.right];
        const std::vector<double>& bx = x.transfer[t];
        const std::vector<double>& by = y.transfer[t];

        // t1[k][k1][l2] = sum_k2 bx[k][k1][k2] gr[k2][l2]
        std::vector<double> t1(static_cast<std::size_t>(rx) * rx1 * ry2, 0.0);
        for (int k = 0; k < rx; ++k)
            for (int k1 = 0; k1 < rx1; ++k1) {
                const std::size_t src = (static_cast<std::size_t>(k) * rx1 + k1) * rx2;
                const std::size_t dst = (static_cast<std::size_t>(k) * rx1 + k1) * ry2;
                for (int k2 = 0; k2 < rx2; ++k2) {
                    const double f = bx[src + k2];
                    if (f == 0.0) continue;
                    for (int l2 = 0; l2 < ry2; ++l2) t1[dst + l2] += f * gr(k2, l2);
                }
            }
        // t2[k][l1][l2] = sum_k1 gl[k1][l1] t1[k][k1][l2]
        std::vector<double> t2(static_cast<std::size_t>(rx) * ry1 * ry2, 0.0);
        for (int k = 0; k < rx; ++k)
            for (int k1 = 0; k1 < rx1; ++k1) {
                const std::size_t src = (static_cast<std::size_t>(k) * rx1 + k1) * ry2;
                for (int l1 = 0; l1 < ry1; ++l1) {
                    const double f = gl(k1, l1);
                    if (f == 0.0) continue;
                    const std::size_t dst = (static_cast<std::size_t>(k) * ry1 + l1) * ry2;
                    for (int l2 = 0; l2 < ry2; ++l2) t2[dst + l2] += f * t1[src + l2];
                }
            }
        // g[k][l] = sum_{l1,l2} by[l][l1][l2] t2[k][l1][l2]
        Matrix gt(rx, ry);
        for (int k = 0; k < rx; ++k)
            for (int l = 0; l < ry; ++l) {
                double acc = 0.0;
                const std::size_t bb = static_cast<std::size_t>(l) * ry1 * ry2;
                const std::size_t tt = static_cast<std::size_t>(k) * ry1 * ry2;
                for (std::size_t i = 0; i < static_cast<std::size_t>(ry1) * ry2; ++i)
                    acc += by[bb + i] * t2[tt + i];
                gt(k, l) = acc;
            }
        g[t] = std::move(gt);
        g[nd.left] = Matrix();
        g[nd.right] = Matrix();
    }
    return g[0](0, 0);
}

double norm(const HtTensor& x) { return std::sqrt(std::max(dot(x, x), 0.0)); }

HtTensor hadamard(const HtTensor& x, const HtTensor& y) {
    require_compatible(x, y, "hadamard");
    HtTensor z;
    z.tree = x.tree;
    z.mode_sizes = x.mode_sizes;
    const int nc = x.tree.node_count();
    z.ranks.resize(nc);
    for (int t = 0; t < nc; ++t) z.ranks[t] = x.ranks[t] * y.ranks[t];
    z.leaf_frames.resize(nc);
    z.transfer.resize(nc);
    for (int t = 0; t < nc; ++t) {
        if (x.tree.is_leaf(t)) {
            const Matrix& ux = x.leaf_frames[t];
            const Matrix& uy = y.leaf_frames[t];
            Matrix uz(ux.rows(), ux.cols() * uy.cols());
            for (std::size_t i = 0; i < ux.rows(); ++i)
                for (std::size_t kx = 0; kx < ux.cols(); ++kx)
                    for (std::size_t ky = 0; ky < uy.cols(); ++ky)
                        uz(i, kx * uy.cols() + ky) = ux(i, kx) * uy(i, ky);
            z.leaf_frames[t] = std::move(uz);
        } else {
            const auto& nd = x.tree.node(t);
            const int rx = x.ranks[t], ry = y.ranks[t];
            const int rx1 = x.ranks[nd.left], ry1 = y.ranks[nd.left];
            const int rx2 = x.ranks[nd.right], ry2 = y.ranks[nd.right];
            const int rz1 = rx1 * ry1, rz2 = rx2 * ry2;
            std::vector<double> bz(static_cast<std::size_t>(rx) * ry * rz1 * rz2);
            for (int kx = 0; kx < rx; ++kx)
                for (int ky = 0; ky < ry; ++ky) {
                    const int kz = kx * ry + ky;
                    for (int k1x = 0; k1x < rx1; ++k1x)
                        for (int k1y = 0; k1y < ry1; ++k1y) {
                            const int k1z = k1x * ry1 + k1y;
                            const std::size_t dst =
                                (static_cast<std::size_t>(kz) * rz1 + k1z) * rz2;
                            for (int k2x = 0; k2x < rx2; ++k2x) {
                                const double fx =
                                    x.transfer[t][(static_cast<std::size_t>(kx) * rx1 + k1x) * rx2 + k2x];
                                if (fx == 0.0) continue;
                                for (int k2y = 0; k2y < ry2; ++k2y)
                                    bz[dst + k2x * ry2 + k2y] =
                                        fx * y.transfer[t][(static_cast<std::size_t>(ky) * ry1 + k1y) * ry2 + k2y];
                            }
                        }
                }
            z.transfer[t] = std::move(bz);
        }
    }
    return z;
}

HtTensor add(const HtTensor& x, const HtTensor& y) {
    require_compatible(x, y, "add");
    HtTensor z;
    z.tree = x.tree;
    z.mode_sizes = x.mode_sizes;
    const int nc = x.tree.node_count();
    z.leaf_frames.resize(nc);
    z.transfer.resize(nc);
    z.ranks.resize(nc);

    if (x.order() == 1) { // single node: frames add directly
        z.ranks[0] = 1;
        Matrix u = x.leaf_frames[0];
        for (std::size_t i = 0; i < u.rows(); ++i) u(i, 0) += y.leaf_frames[0](i, 0);
        z.leaf_frames[0] = std::move(u);
        return z;
    }

    for (int t = 0; t < nc; ++t)
        z.ranks[t] = (t == 0) ? 1 : x.ranks[t] + y.ranks[t];
    for (int t = 0; t < nc; ++t) {
        if (x.tree.is_leaf(t)) {
            const Matrix& ux = x.leaf_frames[t];
            const Matrix& uy = y.leaf_frames[t];
            Matrix uz(ux.rows(), ux.cols() + uy.cols());
            for (std::size_t i = 0; i < ux.rows(); ++i) {
                for (std::size_t k = 0; k < ux.cols(); ++k) uz(i, k) = ux(i, k);
                for (std::size_t k = 0; k < uy.cols(); ++k) uz(i, ux.cols() + k) = uy(i, k);
            }
            z.leaf_frames[t] = std::move(uz);
        } else {
            const auto& nd = x.tree.node(t);
            const int rx1 = x.ranks[nd.left], rx2 = x.ranks[nd.right];
            const int ry1 = y.ranks[nd.left], ry2 = y.ranks[nd.right];
            const int rz1 = rx1 + ry1, rz2 = rx2 + ry2;
            const int rz = z.ranks[t];
            std::vector<double> bz(static_cast<std::size_t>(rz) * rz1 * rz2, 0.0);
            auto put = [&](int k, int k1, int k2, double v) {
                bz[(static_cast<std::size_t>(k) * rz1 + k1) * rz2 + k2] = v;
            };
            if (t == 0) { // root slices of both summands land in the single slice
                for (int k1 = 0; k1 < rx1; ++k1)
                    for (int k2 = 0; k2 < rx2; ++k2)
                        put(0, k1, k2, x.transfer_at(t, 0, k1, k2));
                for (int k1 = 0; k1 < ry1; ++k1)
                    for (int k2 = 0; k2 < ry2; ++k2)
                        put(0, rx1 + k1, rx2 + k2, y.transfer_at(t, 0, k1, k2));
            } else {
                for (int k = 0; k < x.ranks[t]; ++k)
                    for (int k1 = 0; k1 < rx1; ++k1)
                        for (int k2 = 0; k2 < rx2; ++k2)
                            put(k, k1, k2, x.transfer_at(t, k, k1, k2));
                for (int k = 0; k < y.ranks[t]; ++k)
                    for (int k1 = 0; k1 < ry1; ++k1)
                        for (int k2 = 0; k2 < ry2; ++k2)
                            put(x.ranks[t] + k, rx1 + k1, rx2 + k2, y.transfer_at(t, k, k1, k2));
            }
            z.transfer[t] = std::move(bz);
        }
    }
    return z;
}

HtTensor scale(const HtTensor& x, double c) {
    HtTensor z = x;
    if (z.order() == 1) {
        for (double& v : z.leaf_frames[0].data()) v *= c;
    } else {
        for (double& v : z.transfer[0]) v *= c;
    }
    return z;
}

HtTensor restrict_rows(const HtTensor& x, int mu, const std::vector<int>& rows) {
    if (mu < 1 || mu > x.order()) throw ValidationError("restrict_rows: bad mode");
    if (rows.empty()) throw ValidationError("restrict_rows: empty row set");
    for (int i : rows)
        if (i < 1 || i > x.mode_sizes[mu - 1])
            throw ValidationError("restrict_rows: row index out of range");
    HtTensor z = x;
    const int t = x.tree.leaf_of(mu);
    const Matrix& u = x.leaf_frames[t];
    Matrix v(rows.size(), u.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t k = 0; k < u.cols(); ++k) v(i, k) = u(rows[i] - 1, k);
    z.leaf_frames[t] = std::move(v);
    z.mode_sizes[mu - 1] = static_cast<int>(rows.size());
    return z;
}

HtTensor slice(const HtTensor& x, int mu, int lo, int hi) {
    if (mu < 1 || mu > x.order()) throw ValidationError("slice: bad mode");
    if (lo < 1 || hi > x.mode_sizes[mu - 1] || lo > hi)
        throw ValidationError("slice: empty or out-of-range interval");
    std::vector<int> rows(hi - lo + 1);
    std::iota(rows.begin(), rows.end(), lo);
    return restrict_rows(x, mu, rows);
}

std::pair<HtTensor, std::vector<std::vector<int>>>
remove_zero_rows(const HtTensor& x, double tol) {
    if (tol < 0.0) throw ValidationError("remove_zero_rows: tol must be >= 0");
    HtTensor z = x;
    std::vector<std::vector<int>> kept(x.order());
    for (int mu = 1; mu <= x.order(); ++mu) {
        const Matrix& u = x.leaf_frames[x.tree.leaf_of(mu)];
        double maxabs = 0.0;
        for (double v : u.data()) maxabs = std::max(maxabs, std::abs(v));
        std::vector<int>& rows = kept[mu - 1];
        for (std::size_t i = 0; i < u.rows(); ++i) {
            double sup = 0.0;
            for (std::size_t k = 0; k < u.cols(); ++k) sup = std::max(sup, std::abs(u(i, k)));
            if (sup > tol * maxabs) rows.push_back(static_cast<int>(i) + 1);
        }
        if (rows.empty())
            throw ZeroTensorError("remove_zero_rows: all rows of a mode are numerically zero");
        if (static_cast<int>(rows.size()) < x.mode_sizes[mu - 1])
            z = restrict_rows(z, mu, rows);
    }
    return {std::move(z), std::move(kept)};
}

HtTensor orthogonalize(const HtTensor& x) {
    HtTensor y = x;
    // Children carry larger preorder ids than parents, so a descending pass
    // visits every node after both of its children.
    for (int t = y.tree.node_count() - 1; t >= 1; --t) {
        QrResult qr = y.tree.is_leaf(t) ? householder_qr(y.leaf_frames[t])
                                        : householder_qr(matricize_transfer(y, t));
        if (y.tree.is_leaf(t))
            y.leaf_frames[t] = qr.q;
        else
            install_transfer_from_columns(y, t, qr.q);
        push_to_parent(y, t, qr.r);
    }
    return y;
}

HtQrResult ht_qr(const std::vector<HtTensor>& tensors) {
    if (tensors.empty()) throw ValidationError("ht_qr: empty tensor list");
    const int k = static_cast<int>(tensors.size());
    for (int i = 1; i < k; ++i) require_compatible(tensors[0], tensors[i], "ht_qr");

    std::vector<HtTensor> ys = tensors;
    const int nc = ys[0].tree.node_count();

    for (int t = nc - 1; t >= 1; --t) {
        // Stack the per-tensor node matrices side by side and factor jointly.
        std::vector<Matrix> parts(k);
        std::size_t total_cols = 0;
        for (int i = 0; i < k; ++i) {
            parts[i] = ys[i].tree.is_leaf(t) ? ys[i].leaf_frames[t]
                                             : matricize_transfer(ys[i], t);
            total_cols += parts[i].cols();
        }
        Matrix stacked(parts[0].rows(), total_cols);
        std::size_t off = 0;
        for (int i = 0; i < k; ++i) {
            for (std::size_t r = 0; r < parts[i].rows(); ++r)
                for (std::size_t c = 0; c < parts[i].cols(); ++c)
                    stacked(r, off + c) = parts[i](r, c);
            off += parts[i].cols();
        }
        QrResult qr = householder_qr(stacked);
        normalize_qr_signs(qr.q, qr.r);
        off = 0;
        for (int i = 0; i < k; ++i) {
            Matrix ri(qr.r.rows(), parts[i].cols());
            for (std::size_t rr = 0; rr < ri.rows(); ++rr)
                for (std::size_t c = 0; c < ri.cols(); ++c) ri(rr, c) = qr.r(rr, off + c);
            off += parts[i].cols();
            if (ys[i].tree.is_leaf(t))
                ys[i].leaf_frames[t] = qr.q;
            else
                install_transfer_from_columns(ys[i], t, qr.q);
            if (!ys[i].tree.is_leaf(t)) ys[i].ranks[t] = static_cast<int>(qr.q.cols());
            push_to_parent(ys[i], t, ri);
        }
    }

    // Root: factor the flattened root data of all tensors jointly.
    Matrix stacked;
    if (ys[0].order() == 1) {
        stacked = Matrix(ys[0].leaf_frames[0].rows(), k);
        for (int i = 0; i < k; ++i)
            for (std::size_t r = 0; r < stacked.rows(); ++r)
                stacked(r, i) = ys[i].leaf_frames[0](r, 0);
    } else {
        stacked = Matrix(ys[0].transfer[0].size(), k);
        for (int i = 0; i < k; ++i)
            for (std::size_t r = 0; r < stacked.rows(); ++r)
                stacked(r, i) = ys[i].transfer[0][r];
    }
    QrResult qr = householder_qr(stacked);
    normalize_qr_signs(qr.q, qr.r);

    HtQrResult res;
    res.r_factor = qr.r;
    double diag_scale = 0.0;
    for (std::size_t i = 0; i < std::min(qr.r.rows(), qr.r.cols()); ++i)
        diag_scale = std::max(diag_scale, std::abs(qr.r(i, i)));
    for (std::size_t i = 0; i < std::min(qr.r.rows(), qr.r.cols()); ++i)
        if (std::abs(qr.r(i, i)) <= 1e-12 * (diag_scale > 0.0 ? diag_scale : 1.0))
            res.rank_deficient = true;

    for (std::size_t j = 0; j < qr.q.cols(); ++j) {
        HtTensor q = ys[0];
        if (q.order() == 1) {
            for (std::size_t r = 0; r < q.leaf_frames[0].rows(); ++r)
                q.leaf_frames[0](r, 0) = qr.q(r, j);
        } else {
            for (std::size_t r = 0; r < q.transfer[0].size(); ++r)
                q.transfer[0][r] = qr.q(r, j);
        }
        res.q_tensors.push_back(std::move(q));
    }
    return res;
}

namespace {

std::pair<HtTensor, TruncationReport>
truncate_impl(const HtTensor& x, const std::vector<int>* targets, double eps) {
    const int nc = x.tree.node_count();
    TruncationReport rep;
    rep.discarded_energy.assign(nc, 0.0);
    if (x.order() == 1) { // only the root exists; nothing to cut
        rep.achieved_ranks = x.ranks;
        return {x, rep};
    }

    HtTensor y = orthogonalize(x);
    double norm2 = 0.0;
    for (double v : y.transfer[0]) norm2 += v * v;
    const double normx = std::sqrt(norm2);
    const double budget = (targets == nullptr) ? (eps * normx) * (eps * normx) : 0.0;

    // Sequential root-to-leaves pass (preorder ids put parents first): the
    // reduced Gram matrix of each node is computed against the already
    // projected ancestors, so discarded energies do not double-count.
    std::vector<Matrix> s(nc);
    s[0] = Matrix(1, 1);
    s[0](0, 0) = 1.0;
    bool any_cut = false;
    for (int t = 1; t < nc; ++t) {
        const int p = y.tree.node(t).parent;
        const auto& pn = y.tree.node(p);
        const bool is_left = pn.left == t;
        const int rp = y.ranks[p], r1 = y.ranks[pn.left], r2 = y.ranks[pn.right];
        const std::vector<double>& bp = y.transfer[p];

        // w[k'][k1][k2] = sum_k s[p](k,k') bp[k][k1][k2]
        std::vector<double> w(static_cast<std::size_t>(rp) * r1 * r2, 0.0);
        for (int kp = 0; kp < rp; ++kp)
            for (int kk = 0; kk < rp; ++kk) {
                const double f = s[p](kk, kp);
                if (f == 0.0) continue;
                const std::size_t dst = static_cast<std::size_t>(kp) * r1 * r2;
                const std::size_t src = static_cast<std::size_t>(kk) * r1 * r2;
                for (std::size_t i = 0; i < static_cast<std::size_t>(r1) * r2; ++i)
                    w[dst + i] += f * bp[src + i];
            }
        const int r = y.ranks[t];
        Matrix st(r, r);
        for (int kp = 0; kp < rp; ++kp) {
            const std::size_t wb = static_cast<std::size_t>(kp) * r1 * r2;
            if (is_left) {
                for (int k1 = 0; k1 < r1; ++k1)
                    for (int j1 = 0; j1 < r1; ++j1) {
                        double acc = 0.0;
                        for (int k2 = 0; k2 < r2; ++k2)
                            acc += w[wb + static_cast<std::size_t>(k1) * r2 + k2] *
                                   bp[wb + static_cast<std::size_t>(j1) * r2 + k2];
                        st(k1, j1) += acc;
                    }
            } else {
                for (int k2 = 0; k2 < r2; ++k2)
                    for (int j2 = 0; j2 < r2; ++j2) {
                        double acc = 0.0;
                        for (int k1 = 0; k1 < r1; ++k1)
                            acc += w[wb + static_cast<std::size_t>(k1) * r2 + k2] *
                                   bp[wb + static_cast<std::size_t>(k1) * r2 + j2];
                        st(k2, j2) += acc;
                    }
            }
        }
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < i; ++j) {
                const double m = 0.5 * (st(i, j) + st(j, i));
                st(i, j) = st(j, i) = m;
            }

        EighResult e = jacobi_eigh(st);
        int m = r;
        double dropped = 0.0;
        if (targets != nullptr) {
            m = std::min(r, std::max(1, (*targets)[t]));
            for (int i = m; i < r; ++i) dropped += std::max(e.values[i], 0.0);
        } else {
            while (m > 1 && dropped + std::max(e.values[m - 1], 0.0) <= budget) {
                dropped += std::max(e.values[m - 1], 0.0);
                --m;
            }
        }
        rep.discarded_energy[t] = dropped;
        if (m == r) {
            s[t] = std::move(st);
            continue;
        }

        any_cut = true;
        Matrix v(r, m);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < m; ++j) v(i, j) = e.vectors(i, j);
        // Basis change at the node plus the matching coefficient change in
        // the parent's child slot.
        if (y.tree.is_leaf(t)) {
            y.leaf_frames[t] = matmul(y.leaf_frames[t], v);
        } else {
            const auto& nd = y.tree.node(t);
            const int c1 = y.ranks[nd.left], c2 = y.ranks[nd.right];
            std::vector<double> b(static_cast<std::size_t>(m) * c1 * c2, 0.0);
            for (int kn = 0; kn < m; ++kn)
                for (int kk = 0; kk < r; ++kk) {
                    const double f = v(kk, kn);
                    if (f == 0.0) continue;
                    const std::size_t dst = static_cast<std::size_t>(kn) * c1 * c2;
                    const std::size_t src = static_cast<std::size_t>(kk) * c1 * c2;
                    for (std::size_t i = 0; i < static_cast<std::size_t>(c1) * c2; ++i)
                        b[dst + i] += f * y.transfer[t][src + i];
                }
            y.transfer[t] = std::move(b);
        }
        contract_child_slot(y, p, is_left, transpose(v));
        y.ranks[t] = m;
        // In the rotated basis the node's Gram matrix is the kept spectrum.
        s[t] = Matrix(m, m);
        for (int i = 0; i < m; ++i) s[t](i, i) = std::max(e.values[i], 0.0);
    }

    if (!any_cut && y.ranks == x.ranks) {
        rep.achieved_ranks = x.ranks;
        return {x, rep};
    }

    double total = 0.0;
    for (double v : rep.discarded_energy) total += v;
    rep.rel_error = (normx > 0.0) ? std::sqrt(total) / normx : 0.0;
    rep.achieved_ranks = y.ranks;
    return {std::move(y), std::move(rep)};
}

} // namespace

std::pair<HtTensor, TruncationReport>
truncate(const HtTensor& x, const std::vector<int>& target_ranks) {
    if (static_cast<int>(target_ranks.size()) != x.tree.node_count())
        throw ValidationError("truncate: target rank vector size mismatch");
    for (int r : target_ranks)
        if (r < 1) throw ValidationError("truncate: target ranks must be >= 1");
    return truncate_impl(x, &target_ranks, 0.0);
}

std::pair<HtTensor, TruncationReport> truncate(const HtTensor& x, int max_rank) {
    if (max_rank < 1) throw ValidationError("truncate: rank bound must be >= 1");
    std::vector<int> targets(x.tree.node_count(), max_rank);
    targets[0] = 1;
    return truncate_impl(x, &targets, 0.0);
}

std::pair<HtTensor, TruncationReport> truncate_eps(const HtTensor& x, double eps) {
    if (!(eps > 0.0)) throw ValidationError("truncate_eps: eps must be > 0");
    return truncate_impl(x, nullptr, eps);
}

} // namespace htmax
