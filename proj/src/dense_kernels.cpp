#include "htmax/dense_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace htmax {

Matrix matmul(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

QrResult householder_qr(const Matrix& a) {
    const std::size_t m = a.rows(), n = a.cols();
    const std::size_t k = std::min(m, n);
    Matrix r = a;
    // Householder vectors, one per factored column.
    std::vector<std::vector<double>> vs(k);

    for (std::size_t j = 0; j < k; ++j) {
        double normx = 0.0;
        for (std::size_t i = j; i < m; ++i) normx = std::hypot(normx, r(i, j));
        std::vector<double>& v = vs[j];
        v.assign(m - j, 0.0);
        if (normx == 0.0) continue; // zero column, reflector = identity
        const double alpha = (r(j, j) >= 0.0) ? -normx : normx;
        v[0] = r(j, j) - alpha;
        for (std::size_t i = j + 1; i < m; ++i) v[i - j] = r(i, j);
        double vnorm2 = 0.0;
        for (double x : v) vnorm2 += x * x;
        if (vnorm2 == 0.0) { v.clear(); continue; }
        // Apply I - 2 v v^T / (v^T v) to the trailing block of R.
        for (std::size_t c = j; c < n; ++c) {
            double dot = 0.0;
            for (std::size_t i = j; i < m; ++i) dot += v[i - j] * r(i, c);
            const double f = 2.0 * dot / vnorm2;
            for (std::size_t i = j; i < m; ++i) r(i, c) -= f * v[i - j];
        }
        r(j, j) = alpha;
        for (std::size_t i = j + 1; i < m; ++i) r(i, j) = 0.0;
    }

    // Accumulate the thin Q by applying the reflectors in reverse order to
    // the first k columns of the identity.
    Matrix q(m, k);
    for (std::size_t j = 0; j < k; ++j) q(j, j) = 1.0;
    for (std::size_t jj = k; jj-- > 0;) {
        const std::vector<double>& v = vs[jj];
        if (v.empty()) continue;
        double vnorm2 = 0.0;
        for (double x : v) vnorm2 += x * x;
        if (vnorm2 == 0.0) continue;
        for (std::size_t c = 0; c < k; ++c) {
            double dot = 0.0;
            for (std::size_t i = jj; i < m; ++i) dot += v[i - jj] * q(i, c);
            const double f = 2.0 * dot / vnorm2;
            for (std::size_t i = jj; i < m; ++i) q(i, c) -= f * v[i - jj];
        }
    }

    Matrix rtop(k, n);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < n; ++j) rtop(i, j) = r(i, j);
    return {std::move(q), std::move(rtop)};
}

EighResult jacobi_eigh(const Matrix& s) {
    const std::size_t n = s.rows();
    Matrix a = s;
    Matrix v = Matrix::identity(n);

    auto offdiag = [&]() {
        double o = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) o = std::max(o, std::abs(a(p, q)));
        return o;
    };
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(a(i, j)));
    const double tol = (scale > 0.0 ? scale : 1.0) * 1e-15;

    for (int sweep = 0; sweep < 100 && offdiag() > tol; ++sweep) {
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= tol * 1e-2) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0)
                                     ? 1.0 / (theta + std::sqrt(1.0 + theta * theta))
                                     : 1.0 / (theta - std::sqrt(1.0 + theta * theta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = t * c;
                for (std::size_t i = 0; i < n; ++i) {
                    const double aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip - sn * aiq;
                    a(i, q) = sn * aip + c * aiq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double api = a(p, i), aqi = a(q, i);
                    a(p, i) = c * api - sn * aqi;
                    a(q, i) = sn * api + c * aqi;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = v(i, p), viq = v(i, q);
                    v(i, p) = c * vip - sn * viq;
                    v(i, q) = sn * vip + c * viq;
                }
            }
        }
    }

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::stable_sort(perm.begin(), perm.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    EighResult res;
    res.values.resize(n);
    res.vectors = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        res.values[j] = a(perm[j], perm[j]);
        for (std::size_t i = 0; i < n; ++i) res.vectors(i, j) = v(i, perm[j]);
    }
    return res;
}

std::vector<double> gram_singular_values(const Matrix& a) {
    const bool tall = a.rows() >= a.cols();
    const Matrix g = tall ? matmul(transpose(a), a) : matmul(a, transpose(a));
    EighResult e = jacobi_eigh(g);
    const double floor = (e.values.empty() ? 0.0 : std::max(e.values.front(), 0.0)) * 1e-14;
    std::vector<double> sv(e.values.size());
    for (std::size_t i = 0; i < sv.size(); ++i)
        sv[i] = std::sqrt(std::max(e.values[i], floor));
    return sv;
}

} // namespace htmax
