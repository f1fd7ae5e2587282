#include "htmax/argmax.hpp"

#include <cmath>

#include "htmax/arith.hpp"
#include "htmax/errors.hpp"

namespace htmax {

ArgmaxResult elementary_argmax(const HtTensor& a) {
    if (!a.all_ranks_one())
        throw ValidationError("elementary_argmax: tensor must have all ranks 1");
    const int d = a.order();
    ArgmaxResult res;
    res.index.resize(d);
    for (int mu = 1; mu <= d; ++mu) {
        const Matrix& u = a.leaf_frames[a.tree.leaf_of(mu)];
        std::size_t best = 0;
        for (std::size_t i = 1; i < u.rows(); ++i)
            if (std::abs(u(i, 0)) > std::abs(u(best, 0))) best = i;
        res.index[mu - 1] = static_cast<int>(best) + 1;
    }
    res.value = a.entry(res.index);
    res.estimated_maxnorm = std::abs(res.value);
    res.rank1_shortcut = true;
    return res;
}

int search_iteration_bound(int d, const std::vector<int>& mode_sizes) {
    if (static_cast<int>(mode_sizes.size()) != d)
        throw ValidationError("search_iteration_bound: size mismatch");
    int total = 0;
    for (int n : mode_sizes) {
        if (n < 1) throw ValidationError("search_iteration_bound: bad mode size");
        int bits = 0;
        for (int v = n - 1; v > 0; v >>= 1) ++bits; // ceil(log2 n)
        total += bits;
    }
    return total;
}

namespace {

constexpr double kTieTol = 1e-6;
constexpr double kIterateCollapseEps = 1e-10;
constexpr double kZeroRowTol = 1e-12;

} // namespace

ArgmaxResult binary_search_argmax(const HtTensor& a, const IterationConfig& cfg) {
    if (a.all_ranks_one()) return elementary_argmax(a);

    MaxNormEstimate est = adaptive_maxnorm(a, cfg);

    // Collapse the numerical rank of the final iterate, then drop its
    // (numerically) zero rows from both the iterate and the search tensor.
    HtTensor guide = truncate_eps(est.final_iterate, kIterateCollapseEps).first;
    auto [reduced_guide, kept] = remove_zero_rows(guide, kZeroRowTol);

    const int d = a.order();
    HtTensor reduced_a = a;
    bool removed = false;
    for (int mu = 1; mu <= d; ++mu) {
        if (static_cast<int>(kept[mu - 1].size()) < a.mode_sizes[mu - 1]) {
            reduced_a = restrict_rows(reduced_a, mu, kept[mu - 1]);
            removed = true;
        }
    }

    auto translate = [&](const MultiIndex& ri) {
        MultiIndex orig(d);
        for (int mu = 0; mu < d; ++mu) orig[mu] = kept[mu][ri[mu] - 1];
        return orig;
    };

    if (reduced_guide.all_ranks_one()) {
        ArgmaxResult res = elementary_argmax(reduced_guide);
        res.index = translate(res.index);
        res.value = a.entry(res.index);
        res.estimated_maxnorm = est.value;
        res.zero_rows_removed = removed;
        return res;
    }

    HtTensor acur = reduced_a;
    HtTensor lcur = reduced_guide;
    std::vector<int> off(d, 0); // 0-based offset of the interval per mode
    std::vector<int> len(d);
    for (int mu = 0; mu < d; ++mu) len[mu] = acur.mode_sizes[mu];
    int iterations = 0;

    // Score a half by the estimator line of the squaring iteration applied
    // to the slices; the denominator restores the unit-norm premise.
    auto score = [&](int mu, int lo, int hi) {
        const HtTensor lh = slice(lcur, mu, lo, hi);
        const double nl = norm(lh);
        if (nl == 0.0) return 0.0;
        return norm(hadamard(slice(acur, mu, lo, hi), lh)) / nl;
    };
    auto descend = [&](int mu, bool first_half) {
        const int h = (len[mu - 1] + 1) / 2;
        const int lo = first_half ? 1 : h + 1;
        const int hi = first_half ? h : len[mu - 1];
        acur = slice(acur, mu, lo, hi);
        lcur = slice(lcur, mu, lo, hi);
        off[mu - 1] += lo - 1;
        len[mu - 1] = hi - lo + 1;
        ++iterations;
    };

    auto active = [&]() {
        for (int mu = 0; mu < d; ++mu)
            if (len[mu] > 1) return true;
        return false;
    };

    while (active()) {
        bool descended = false;
        int forced_mode = 0;
        bool forced_first = true;
        for (int mu = 1; mu <= d; ++mu) {
            if (len[mu - 1] <= 1) continue;
            const int h = (len[mu - 1] + 1) / 2;
            const double a1 = score(mu, 1, h);
            const double a2 = score(mu, h + 1, len[mu - 1]);
            const double hi = std::max(a1, a2);
            if (hi > 0.0 && std::abs(a1 - a2) / hi < kTieTol) {
                if (forced_mode == 0) { // remember for a possible forced pass
                    forced_mode = mu;
                    forced_first = a1 >= a2;
                }
                continue;
            }
            descend(mu, a1 >= a2);
            descended = true;
        }
        if (!descended) {
            if (forced_mode == 0) break; // defensive; cannot happen while active
            descend(forced_mode, forced_first);
        }
    }

    ArgmaxResult res;
    MultiIndex ri(d);
    for (int mu = 0; mu < d; ++mu) ri[mu] = off[mu] + 1;
    res.index = translate(ri);
    res.value = a.entry(res.index);
    res.estimated_maxnorm = est.value;
    res.iterations_used = iterations;
    res.zero_rows_removed = removed;
    return res;
}

} // namespace htmax
