#include <doctest.h>

#include <cmath>

#include "htmax/arith.hpp"
#include "htmax/dense_tensor.hpp"
#include "htmax/errors.hpp"
#include "htmax/ht_tensor.hpp"

using namespace htmax;

namespace {

double dense_rel_err(const HtTensor& got, const DenseTensor& want) {
    const DenseTensor g = densify(got);
    double scale = 0.0, err = 0.0;
    for (double v : want.values) scale = std::max(scale, std::abs(v));
    scale = std::max(scale, 1e-300);
    REQUIRE(g.values.size() == want.values.size());
    for (std::size_t i = 0; i < g.values.size(); ++i)
        err = std::max(err, std::abs(g.values[i] - want.values[i]));
    return err / scale;
}

} // namespace

TEST_CASE("dot of elementary tensors separates into factor products") {
    const HtTensor x = from_elementary({{1, 2}, {1, 1}});
    const HtTensor y = from_elementary({{3, 4}, {2, 2}});
    CHECK(dot(x, y) == doctest::Approx(44.0)); // (1*3+2*4) * (1*2+1*2)
}

TEST_CASE("dot(a,a) equals the squared norm") {
    const HtTensor a = random_ht(4, 5, 3, 31);
    CHECK(dot(a, a) == doctest::Approx(norm(a) * norm(a)));
}

TEST_CASE("dot matches the dense oracle") {
    const HtTensor x = random_ht(3, 4, 2, 41);
    const HtTensor y = random_ht(3, 4, 2, 42);
    CHECK(dot(x, y) ==
          doctest::Approx(dense_dot(densify(x), densify(y))).epsilon(1e-12));
}

TEST_CASE("dot rejects mismatched shapes") {
    const HtTensor x = random_ht(3, 4, 2, 1);
    const HtTensor y = random_ht(3, 5, 2, 1);
    CHECK_THROWS_AS(dot(x, y), ValidationError);
}

TEST_CASE("norm of the all-ones tensor is sqrt(N)") {
    const HtTensor a = from_elementary({{1, 1}, {1, 1}, {1, 1}});
    CHECK(norm(a) == doctest::Approx(std::sqrt(8.0)));
}

TEST_CASE("norm scales with the scalar magnitude") {
    const HtTensor a = random_ht(3, 4, 2, 51);
    CHECK(norm(scale(a, -2.5)) == doctest::Approx(2.5 * norm(a)));
    CHECK(norm(scale(a, 0.0)) == 0.0);
}

TEST_CASE("hadamard of elementary tensors multiplies factors") {
    const HtTensor x = from_elementary({{1, 2}, {3, 4}});
    const HtTensor y = from_elementary({{5, 6}, {7, 8}});
    const HtTensor z = hadamard(x, y);
    CHECK(z.entry({2, 1}) == doctest::Approx(2 * 6 * 3 * 7));
}

TEST_CASE("hadamard output ranks are products of input ranks") {
    const HtTensor x = random_ht(3, 4, 2, 61);
    const HtTensor y = random_ht(3, 4, 3, 62);
    const HtTensor z = hadamard(x, y);
    for (int t = 1; t < z.tree.node_count(); ++t) CHECK(z.ranks[t] == 6);
    CHECK(z.ranks[0] == 1);
}

TEST_CASE("hadamard matches the dense oracle") {
    const HtTensor x = random_ht(3, 4, 2, 71);
    const HtTensor y = cheb_tensor(3, 4);
    CHECK(dense_rel_err(hadamard(x, y), dense_hadamard(densify(x), densify(y))) < 1e-12);
}

TEST_CASE("add cancels against the negated tensor") {
    const HtTensor x = random_ht(3, 3, 2, 81);
    CHECK(norm(add(x, scale(x, -1.0))) <= 1e-10 * norm(x));
}

TEST_CASE("add matches the dense oracle and sums non-root ranks") {
    const HtTensor x = random_ht(3, 3, 2, 91);
    const HtTensor y = random_ht(3, 3, 2, 92);
    DenseTensor want = densify(x);
    const DenseTensor dy = densify(y);
    for (std::size_t i = 0; i < want.values.size(); ++i) want.values[i] += dy.values[i];
    const HtTensor z = add(x, y);
    CHECK(dense_rel_err(z, want) < 1e-12);
    for (int t = 1; t < z.tree.node_count(); ++t) CHECK(z.ranks[t] == 4);
    CHECK(z.ranks[0] == 1);
}

TEST_CASE("slice restricts one mode and keeps ranks") {
    const HtTensor x = random_ht(3, 6, 2, 101);
    const HtTensor s = slice(x, 2, 1, 3);
    CHECK(s.mode_sizes == std::vector<int>{6, 3, 6});
    CHECK(s.ranks == x.ranks);
    const DenseTensor dx = densify(x);
    const DenseTensor ds = densify(s);
    for (std::size_t f = 0; f < ds.values.size(); ++f) {
        MultiIndex i = ds.unflatten(f);
        CHECK(ds.values[f] == doctest::Approx(dx.values[dx.flat_index(i)]).epsilon(1e-13));
    }
}

TEST_CASE("slicing the full range is the identity") {
    const HtTensor x = random_ht(3, 4, 2, 111);
    const HtTensor s = slice(x, 1, 1, 4);
    CHECK(norm(add(s, scale(x, -1.0))) <= 1e-12 * norm(x));
}

TEST_CASE("slicing an elementary tensor slices the factor") {
    const HtTensor x = from_elementary({{1, 2, 3}, {4, 5}});
    const HtTensor s = slice(x, 1, 2, 3);
    CHECK(s.all_ranks_one());
    CHECK(s.entry({1, 2}) == doctest::Approx(10.0));
}

TEST_CASE("slice rejects empty ranges") {
    const HtTensor x = random_ht(3, 4, 2, 1);
    CHECK_THROWS_AS(slice(x, 1, 3, 2), ValidationError);
    CHECK_THROWS_AS(slice(x, 1, 0, 2), ValidationError);
}

TEST_CASE("remove_zero_rows keeps everything when no row is zero") {
    const HtTensor x = from_elementary({{1, 2}, {3, 4}});
    const auto [y, kept] = remove_zero_rows(x, 1e-12);
    CHECK(y.mode_sizes == x.mode_sizes);
    CHECK(kept[0] == std::vector<int>{1, 2});
    CHECK(kept[1] == std::vector<int>{1, 2});
}

TEST_CASE("remove_zero_rows shrinks modes and reports the index map") {
    const HtTensor x = from_elementary({{0, 3, 0}, {1, 2}});
    const auto [y, kept] = remove_zero_rows(x, 1e-12);
    CHECK(y.mode_sizes == std::vector<int>{1, 2});
    CHECK(kept[0] == std::vector<int>{2});
    CHECK(y.entry({1, 2}) == doctest::Approx(6.0));
}

TEST_CASE("remove_zero_rows signals an all-zero mode") {
    const HtTensor x = from_elementary({{0, 0}, {1, 2}});
    CHECK_THROWS_AS(remove_zero_rows(x, 1e-12), ZeroTensorError);
}

TEST_CASE("restrict_rows mirrors arbitrary row subsets") {
    const HtTensor x = random_ht(3, 5, 2, 121);
    const HtTensor y = restrict_rows(x, 2, {4, 1});
    CHECK(y.mode_sizes == std::vector<int>{5, 2, 5});
    CHECK(y.entry({2, 1, 3}) == doctest::Approx(x.entry({2, 4, 3})));
    CHECK(y.entry({2, 2, 3}) == doctest::Approx(x.entry({2, 1, 3})));
}

TEST_CASE("orthogonalize preserves the tensor") {
    const HtTensor x = random_ht(4, 4, 3, 131);
    const HtTensor y = orthogonalize(x);
    CHECK(dense_rel_err(y, densify(x)) < 1e-12);
}

TEST_CASE("joint orthonormalization of one tensor normalizes it") {
    const HtTensor x = random_ht(3, 4, 2, 141);
    const HtQrResult qr = ht_qr({x});
    REQUIRE(qr.q_tensors.size() == 1);
    CHECK(qr.r_factor(0, 0) == doctest::Approx(norm(x)));
    CHECK(norm(qr.q_tensors[0]) == doctest::Approx(1.0));
    CHECK_FALSE(qr.rank_deficient);
    // q * R reproduces x
    const HtTensor back = scale(qr.q_tensors[0], qr.r_factor(0, 0));
    CHECK(norm(add(back, scale(x, -1.0))) <= 1e-9 * norm(x));
}

TEST_CASE("joint orthonormalization flags linearly dependent inputs") {
    const HtTensor x = random_ht(3, 4, 2, 151);
    const HtTensor y = scale(x, 2.0);
    const HtQrResult qr = ht_qr({x, y});
    CHECK(qr.rank_deficient);
    CHECK(std::abs(qr.r_factor(1, 1)) <= 1e-10 * std::abs(qr.r_factor(0, 0)));
}

TEST_CASE("joint orthonormalization produces an orthonormal set that spans the inputs") {
    std::vector<HtTensor> xs = {random_ht(3, 4, 2, 161), random_ht(3, 4, 2, 162),
                                random_ht(3, 4, 2, 163)};
    const HtQrResult qr = ht_qr(xs);
    REQUIRE(qr.q_tensors.size() == 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(dot(qr.q_tensors[i], qr.q_tensors[j]) ==
                  doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-10).scale(1.0));
    // x_i = sum_j R(j,i) q_j. The dense check is exact to round-off; the
    // HT-side norm of a near-zero difference additionally carries the
    // ~sqrt(machine eps) cancellation floor of evaluating it via dot
    // products of large canceling blocks.
    for (int i = 0; i < 3; ++i) {
        HtTensor back = scale(qr.q_tensors[0], qr.r_factor(0, i));
        for (int j = 1; j <= i; ++j) back = add(back, scale(qr.q_tensors[j], qr.r_factor(j, i)));
        CHECK(norm(add(back, scale(xs[i], -1.0))) <= 5e-7 * norm(xs[i]));
        const DenseTensor want = densify(xs[i]);
        CHECK(dense_rel_err(back, want) < 1e-12);
    }
    // upper triangular
    for (int i = 1; i < 3; ++i)
        for (int j = 0; j < i; ++j) CHECK(qr.r_factor(i, j) == 0.0);
}

TEST_CASE("rank-1 truncation of the two-block matrix keeps the spread block") {
    // best rank-1 approximation keeps the (n-1)x(n-1) block of sigma1/(n-1)
    struct Case { int n; double s1, s2; };
    for (const Case c : {Case{3, 2, 1}, Case{5, 4, 1}, Case{10, 9, 2}}) {
        const HtTensor m = counterexample_matrix(c.n, c.s1, c.s2);
        const auto [t, rep] = truncate(m, 1);
        const auto [mx, idx] = dense_maxnorm_argmax(densify(t));
        CHECK(mx == doctest::Approx(c.s1 / (c.n - 1)).epsilon(1e-10));
        const double want_err = std::sqrt(c.s2 * c.s2 / (c.s1 * c.s1 + c.s2 * c.s2));
        CHECK(rep.rel_error == doctest::Approx(want_err).epsilon(1e-10));
    }
}

TEST_CASE("truncating below the actual rank is the identity") {
    const HtTensor x = from_elementary({{1, 2}, {3, 4}, {5, 6}});
    const auto [t, rep] = truncate(x, 1);
    CHECK(rep.rel_error == 0.0);
    CHECK(norm(add(t, scale(x, -1.0))) <= 1e-12 * norm(x));
    const HtTensor y = random_ht(3, 4, 2, 171);
    const auto [t2, rep2] = truncate(y, 5); // targets above current ranks
    CHECK(rep2.rel_error == 0.0);
    CHECK(t2.ranks == y.ranks);
}

TEST_CASE("truncation never raises ranks and its error is monotone in the target") {
    const HtTensor x = random_ht(4, 6, 4, 181);
    double prev = 1e300;
    for (int target = 1; target <= 4; ++target) {
        const auto [t, rep] = truncate(x, target);
        for (int nd = 1; nd < x.tree.node_count(); ++nd) {
            CHECK(t.ranks[nd] <= x.ranks[nd]);
            CHECK(t.ranks[nd] <= target);
        }
        CHECK(rep.rel_error <= prev + 1e-14);
        prev = rep.rel_error;
    }
}

TEST_CASE("truncation error reports match the true projection error") {
    // a sum of two random tensors has genuine rank 4, so the rank-2 cut
    // discards real mass (not just round-off noise)
    const HtTensor x = add(random_ht(3, 5, 2, 191), random_ht(3, 5, 2, 192));
    const auto [t, rep] = truncate(x, 2);
    const DenseTensor dx = densify(x);
    const DenseTensor dt = densify(t);
    double err2 = 0.0;
    for (std::size_t i = 0; i < dx.values.size(); ++i) {
        const double d = dx.values[i] - dt.values[i];
        err2 += d * d;
    }
    const double true_rel = std::sqrt(err2) / dense_pnorm(dx, 2.0);
    CHECK(true_rel > 1e-6); // the cut is substantive for this instance
    // the stacked per-node estimate bounds the realized error and is tight
    // within a factor sqrt(#non-root nodes)
    CHECK(true_rel <= rep.rel_error * 1.001 + 1e-13);
    CHECK(rep.rel_error <= true_rel * std::sqrt(5.0) + 1e-13);
}

TEST_CASE("tolerance-based truncation hits the closed-form cut") {
    const HtTensor m = counterexample_matrix(3, 2, 1);
    const auto [t, rep] = truncate_eps(m, 0.5); // 0.5 > 1/sqrt(5)
    for (int nd = 1; nd < t.tree.node_count(); ++nd) CHECK(t.ranks[nd] == 1);
    const auto [t2, rep2] = truncate_eps(m, 0.1); // 0.1 < 1/sqrt(5): keep rank 2
    CHECK(rep2.rel_error <= 0.1);
    CHECK(dense_rel_err(t2, densify(m)) < 1e-12);
}

TEST_CASE("tiny tolerance leaves exact-rank tensors unchanged") {
    // counterexample_matrix has exact rank 2 at every non-root node, so no
    // eigenvalue is pure round-off noise and nothing should be cut
    const HtTensor x = counterexample_matrix(5, 4.0, 1.0);
    const auto [t, rep] = truncate_eps(x, 1e-16);
    CHECK(t.ranks == x.ranks);
    CHECK(rep.rel_error <= 1e-12);
}
