#include <doctest.h>

#include <cmath>

#include "htmax/arith.hpp"
#include "htmax/dense_tensor.hpp"
#include "htmax/errors.hpp"
#include "htmax/ht_tensor.hpp"

using namespace htmax;

TEST_CASE("densify materializes an elementary 2x2 tensor") {
    const DenseTensor d = densify(from_elementary({{1, 2}, {3, 4}}));
    REQUIRE(d.values.size() == 4);
    CHECK(d.values == std::vector<double>{3, 4, 6, 8});
}

TEST_CASE("densify matches per-entry evaluation") {
    const HtTensor a = random_ht(3, 3, 2, 13);
    const DenseTensor d = densify(a);
    for (std::size_t f = 0; f < d.values.size(); ++f)
        CHECK(d.values[f] == doctest::Approx(a.entry(d.unflatten(f))).epsilon(1e-13));
}

TEST_CASE("densify works on trees with non-contiguous subsets") {
    // The linear tree's interior subsets are contiguous, so permute modes via
    // a hand-built tree: root {1,3} | {2} cannot arise from the constructors,
    // so instead check a cheb tensor against an independently computed grid.
    const HtTensor a = cheb_tensor(2, 4);
    const DenseTensor d = densify(a);
    const double bign = 16.0;
    for (std::size_t f = 0; f < 16; ++f) {
        const double x = -1.0 + 2.0 * static_cast<double>(f) / (bign - 1);
        const double t4 = 8 * x * x * x * x - 8 * x * x + 1;
        CHECK(d.values[f] == doctest::Approx(t4).epsilon(1e-12));
    }
}

TEST_CASE("densify enforces the entry cap") {
    CHECK_THROWS_AS(densify(random_ht(8, 50, 2, 1)), DenseCapError);
}

TEST_CASE("dense argmax scans with smallest-index tie break") {
    DenseTensor d;
    d.mode_sizes = {2, 2};
    d.values = {3, 4, 6, 8};
    const auto [v, i] = dense_maxnorm_argmax(d);
    CHECK(v == 8);
    CHECK(i == MultiIndex{2, 2});
    d.values = {-8, 4, 6, 8};
    const auto [v2, i2] = dense_maxnorm_argmax(d);
    CHECK(v2 == 8);
    CHECK(i2 == MultiIndex{1, 1});
}

TEST_CASE("dense argmax of the grid polynomial is 1") {
    const auto [v, i] = dense_maxnorm_argmax(densify(cheb_tensor(2, 5)));
    CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("dense argmax of the two-block matrix is 1") {
    const auto [v, i] = dense_maxnorm_argmax(densify(counterexample_matrix(3, 2, 1)));
    CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("dense p-norms") {
    DenseTensor d;
    d.mode_sizes = {4};
    d.values = {1, -2, 2, 0};
    CHECK(dense_pnorm(d, 2.0) == doctest::Approx(3.0));
    CHECK_THROWS_AS(dense_pnorm(d, 0.0), ValidationError);

    // large p approximates the maximum norm: max <= ||.||_p <= max * N^(1/p)
    const DenseTensor r = densify(random_ht(4, 5, 3, 3));
    const double mx = dense_maxnorm_argmax(r).first;
    const double p64 = dense_pnorm(r, 64.0);
    CHECK(p64 >= mx);
    CHECK(p64 <= mx * std::pow(625.0, 1.0 / 64.0) * (1 + 1e-12));
}

TEST_CASE("norm of an entrywise power equals a p-norm power") {
    // ||a o a o ... (j times)||_2 = (||a||_{2j})^j
    const HtTensor a = random_ht(3, 3, 2, 17);
    const DenseTensor d = densify(a);
    DenseTensor pw = d;
    for (int j = 2; j <= 4; ++j) {
        pw = dense_hadamard(pw, d);
        const double lhs = dense_pnorm(pw, 2.0);
        const double rhs = std::pow(dense_pnorm(d, 2.0 * j), j);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
}

TEST_CASE("dense dot and hadamard are definitional") {
    const DenseTensor x = densify(random_ht(3, 4, 2, 23));
    const DenseTensor y = densify(random_ht(3, 4, 2, 24));
    double s = 0.0;
    for (std::size_t i = 0; i < x.values.size(); ++i) s += x.values[i] * y.values[i];
    CHECK(dense_dot(x, y) == doctest::Approx(s));
    const DenseTensor h = dense_hadamard(x, y);
    CHECK(h.values[5] == doctest::Approx(x.values[5] * y.values[5]));
}

TEST_CASE("pattern enumeration equals dense argmax on repeated-row tensors") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const HtTensor a = random_ht(8, 3, 2, seed);
        const auto [pv, pi] = pattern_enumeration_argmax(a);
        const auto [dv, di] = dense_maxnorm_argmax(densify(a));
        CHECK(std::abs(pv) == doctest::Approx(dv).epsilon(1e-12));
        CHECK(std::abs(a.entry(pi)) == doctest::Approx(dv).epsilon(1e-12));
    }
}

TEST_CASE("pattern enumeration handles 16 modes") {
    const HtTensor a = random_ht(16, 2, 5, 4);
    const auto [pv, pi] = pattern_enumeration_argmax(a);
    const auto [dv, di] = dense_maxnorm_argmax(densify(a)); // 2^16 entries
    CHECK(std::abs(pv) == doctest::Approx(dv).epsilon(1e-12));
}
