#include "htmax/maxnorm.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <ostream>
#include <tuple>

#include "htmax/errors.hpp"

namespace htmax {

void IterationConfig::validate() const {
    if (max_iters < 1) throw ValidationError("config: max_iters must be >= 1");
    if (subspace_k < 1) throw ValidationError("config: subspace size must be >= 1");
    if (!(squaring_tol > 0.0)) throw ValidationError("config: squaring tolerance must be > 0");
    if (!(trunc_error_cap > 0.0)) throw ValidationError("config: truncation cap must be > 0");
    if (ritz_steps < 1) throw ValidationError("config: ritz_steps must be >= 1");
    if (max_cycles < 1) throw ValidationError("config: max_cycles must be >= 1");
    if (working_rank < 0 || trunc_tol < 0.0)
        throw ValidationError("config: truncation settings must be nonnegative");
    for (int r : working_ranks)
        if (r < 1) throw ValidationError("config: working ranks must be >= 1");
    const int modes = (working_rank > 0 ? 1 : 0) + (working_ranks.empty() ? 0 : 1) +
                      (trunc_tol > 0.0 ? 1 : 0);
    if (modes > 1) throw ValidationError("config: at most one truncation mode may be set");
}

bool ConvergenceTrace::any_trunc_err_at_least(double cap) const {
    for (const Record& r : records)
        if (r.rel_trunc_err >= cap) return true;
    return false;
}

void ConvergenceTrace::write_csv(std::ostream& os) const {
    os << "iter,estimate,rel_trunc_err,elapsed_s\n";
    os.precision(17);
    for (const Record& r : records)
        os << r.iter << ',' << r.estimate << ',' << r.rel_trunc_err << ',' << r.elapsed_s
           << '\n';
}

std::string to_string(ConvergenceTrace::Status s) {
    switch (s) {
        case ConvergenceTrace::Status::converged: return "converged";
        case ConvergenceTrace::Status::stagnated: return "stagnated";
        case ConvergenceTrace::Status::max_iters: return "max-iters";
        case ConvergenceTrace::Status::truncation_cap_exceeded:
            return "truncation-cap-exceeded";
    }
    return "unknown";
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Applies whichever truncation the config selects; returns the relative
/// HSVD error estimate of this step (0 when truncation is off).
std::pair<HtTensor, double> truncate_step(HtTensor y, const IterationConfig& cfg) {
    if (!cfg.working_ranks.empty()) {
        auto [z, rep] = truncate(y, cfg.working_ranks);
        return {std::move(z), rep.rel_error};
    }
    if (cfg.working_rank > 0) {
        auto [z, rep] = truncate(y, cfg.working_rank);
        return {std::move(z), rep.rel_error};
    }
    if (cfg.trunc_tol > 0.0) {
        auto [z, rep] = truncate_eps(y, cfg.trunc_tol);
        return {std::move(z), rep.rel_error};
    }
    return {std::move(y), 0.0};
}

HtTensor normalized_or_throw(const HtTensor& a) {
    const double na = norm(a);
    if (!(na > 0.0)) throw ZeroTensorError("estimator: input tensor has zero norm");
    if (!std::isfinite(na)) throw EstimatorError("estimator: input norm not finite");
    return scale(a, 1.0 / na);
}

/// Scales x by an exact power of two so its norm lands in [0.5, 2); returns
/// the scaled tensor and its norm. Power-of-two rescaling introduces no
/// rounding, so the iteration's estimates are free of normalization error.
std::pair<HtTensor, double> pow2_rescale(HtTensor x, double nx) {
    int e = 0;
    std::frexp(nx, &e); // nx = m * 2^e with m in [0.5, 1)
    if (e == 1) return {std::move(x), nx};
    return {scale(x, std::ldexp(1.0, 1 - e)), std::ldexp(nx, 1 - e)};
}

MaxNormEstimate power_iteration_plain(const HtTensor& a, const IterationConfig& cfg,
                                      bool improved) {
    cfg.validate();
    const double na = norm(a);
    if (!(na > 0.0)) throw ZeroTensorError("estimator: input tensor has zero norm");
    if (!std::isfinite(na)) throw EstimatorError("estimator: input norm not finite");
    // The iterate is kept as a representative with norm in [0.5, 2) and the
    // exact norm s alongside; the true (unit-norm) iterate is x/s.
    auto [x, s] = pow2_rescale(a, na);
    MaxNormEstimate out;
    const auto t0 = Clock::now();
    for (int j = 0; j < cfg.max_iters; ++j) {
        HtTensor y = hadamard(a, x);
        auto [yt, err] = truncate_step(std::move(y), cfg);
        const double lambda = improved ? 0.0 : dot(x, yt) / (s * s);
        const double ny = norm(yt);
        if (!std::isfinite(ny)) throw EstimatorError("power iteration: iterate blow-up");
        if (ny == 0.0)
            throw EstimatorError("power iteration: truncation destroyed the iterate");
        const double alpha = ny / s;
        std::tie(x, s) = pow2_rescale(std::move(yt), ny);
        ConvergenceTrace::Record rec;
        rec.iter = j + 1;
        rec.estimate = improved ? alpha : std::abs(lambda);
        rec.rel_trunc_err = err;
        rec.elapsed_s = seconds_since(t0);
        out.trace.records.push_back(rec);
    }
    out.trace.status = ConvergenceTrace::Status::max_iters;
    out.value = out.trace.records.empty() ? 0.0 : out.trace.records.back().estimate;
    out.final_iterate = scale(x, 1.0 / s);
    return out;
}

} // namespace

MaxNormEstimate power_iteration_rayleigh(const HtTensor& a, const IterationConfig& cfg) {
    return power_iteration_plain(a, cfg, false);
}

MaxNormEstimate power_iteration_improved(const HtTensor& a, const IterationConfig& cfg) {
    return power_iteration_plain(a, cfg, true);
}

namespace {

/// Ritz estimate with an optional rank cap on the orthonormal basis tensors
/// (the basis is re-truncated to the working ranks to keep the Hadamard
/// products in B affordable; exactness of B degrades gracefully).
std::pair<double, std::vector<double>>
ritz_estimate_impl(const HtTensor& a, const std::vector<HtTensor>& iterates,
                   const IterationConfig* cap_cfg) {
    if (iterates.empty()) throw ValidationError("ritz estimate: no iterates");
    HtQrResult qr = ht_qr(iterates);

    std::vector<int> kept;
    double diag_scale = 0.0;
    const std::size_t kk = std::min(qr.r_factor.rows(), qr.r_factor.cols());
    for (std::size_t i = 0; i < kk; ++i)
        diag_scale = std::max(diag_scale, std::abs(qr.r_factor(i, i)));
    for (std::size_t i = 0; i < kk && i < qr.q_tensors.size(); ++i)
        if (std::abs(qr.r_factor(i, i)) >
            1e-12 * (diag_scale > 0.0 ? diag_scale : 1.0))
            kept.push_back(static_cast<int>(i));
    if (kept.empty()) kept.push_back(0);

    std::vector<HtTensor> q;
    for (int i : kept) {
        HtTensor qi = qr.q_tensors[i];
        if (cap_cfg != nullptr && cap_cfg->truncation_enabled())
            qi = truncate_step(std::move(qi), *cap_cfg).first;
        q.push_back(std::move(qi));
    }

    const int m = static_cast<int>(q.size());
    Matrix b(m, m);
    for (int j = 0; j < m; ++j) {
        const HtTensor aq = hadamard(a, q[j]);
        for (int i = 0; i < m; ++i) b(i, j) = dot(q[i], aq);
    }
    Matrix sym(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) sym(i, j) = 0.5 * (b(i, j) + b(j, i));
    EighResult e = jacobi_eigh(sym);
    double alpha = 0.0;
    for (double v : e.values) alpha = std::max(alpha, std::abs(v));
    return {alpha, e.values};
}

} // namespace

std::pair<double, std::vector<double>>
rayleigh_ritz_estimate(const HtTensor& a, const std::vector<HtTensor>& iterates) {
    return ritz_estimate_impl(a, iterates, nullptr);
}

MaxNormEstimate power_iteration_ritz(const HtTensor& a, const IterationConfig& cfg,
                                     const HtTensor* x0) {
    cfg.validate();
    HtTensor x = (x0 != nullptr) ? normalized_or_throw(*x0) : normalized_or_throw(a);
    std::deque<HtTensor> window;
    window.push_back(x);
    MaxNormEstimate out;
    const auto t0 = Clock::now();
    double last_alpha = 0.0;
    for (int j = 0; j < cfg.max_iters; ++j) {
        HtTensor y = hadamard(a, x);
        auto [yt, err] = truncate_step(std::move(y), cfg);
        const double ny = norm(yt);
        if (!std::isfinite(ny)) throw EstimatorError("ritz iteration: iterate blow-up");
        if (ny == 0.0)
            throw EstimatorError("ritz iteration: truncation destroyed the iterate");
        x = scale(yt, 1.0 / ny);
        window.push_back(x);
        while (static_cast<int>(window.size()) > cfg.subspace_k) window.pop_front();

        double alpha = ny;
        if (cfg.ritz_every_step || j + 1 == cfg.max_iters) {
            std::vector<HtTensor> its(window.begin(), window.end());
            alpha = ritz_estimate_impl(a, its, &cfg).first;
        }
        last_alpha = alpha;
        ConvergenceTrace::Record rec;
        rec.iter = j + 1;
        rec.estimate = alpha;
        rec.rel_trunc_err = err;
        rec.elapsed_s = seconds_since(t0);
        out.trace.records.push_back(rec);
    }
    out.trace.status = ConvergenceTrace::Status::max_iters;
    out.value = last_alpha;
    out.final_iterate = std::move(x);
    return out;
}

MaxNormEstimate power_iteration_squaring(const HtTensor& a, const IterationConfig& cfg,
                                         const HtTensor* x0) {
    cfg.validate();
    HtTensor x = (x0 != nullptr) ? normalized_or_throw(*x0) : normalized_or_throw(a);
    MaxNormEstimate out;
    const auto t0 = Clock::now();
    bool converged = false;
    for (int j = 0; j < cfg.max_iters; ++j) {
        HtTensor y = hadamard(x, x);
        auto [yt, err] = truncate_step(std::move(y), cfg);
        const double ny = norm(yt);
        if (!std::isfinite(ny)) throw EstimatorError("squaring iteration: iterate blow-up");
        if (ny == 0.0)
            throw EstimatorError("squaring iteration: truncation destroyed the iterate");
        HtTensor xn = scale(yt, 1.0 / ny);
        const double alpha = norm(hadamard(a, xn));
        if (!std::isfinite(alpha))
            throw EstimatorError("squaring iteration: estimator blow-up");
        const double change = std::sqrt(std::max(2.0 - 2.0 * dot(xn, x), 0.0));
        x = std::move(xn);
        ConvergenceTrace::Record rec;
        rec.iter = j + 1;
        rec.estimate = alpha;
        rec.rel_trunc_err = err;
        rec.elapsed_s = seconds_since(t0);
        out.trace.records.push_back(rec);
        if (change < cfg.squaring_tol) {
            converged = true;
            break;
        }
    }
    if (out.trace.any_trunc_err_at_least(cfg.trunc_error_cap))
        out.trace.status = ConvergenceTrace::Status::truncation_cap_exceeded;
    else
        out.trace.status = converged ? ConvergenceTrace::Status::converged
                                     : ConvergenceTrace::Status::max_iters;
    out.value = out.trace.records.empty() ? 0.0 : out.trace.records.back().estimate;
    out.final_iterate = std::move(x);
    return out;
}

MaxNormEstimate adaptive_maxnorm(const HtTensor& a, const IterationConfig& cfg) {
    cfg.validate();
    HtTensor x = normalized_or_throw(a);
    MaxNormEstimate out;
    const auto t0 = Clock::now();
    double last_ritz_alpha = 0.0;
    int iter_base = 0;

    auto append = [&](const ConvergenceTrace& sub, double offset) {
        for (ConvergenceTrace::Record rec : sub.records) {
            rec.iter += iter_base;
            rec.elapsed_s += offset;
            out.trace.records.push_back(rec);
        }
        iter_base += static_cast<int>(sub.records.size());
    };

    // Estimate produced by the most recent (unaccepted) squaring run; it is
    // the approximation obtained from the last stored Ritz iterate and is
    // what the loop falls back to when no run stays under the error cap.
    bool have_fallback = false;
    double fallback_value = 0.0;
    double prev_value = -1.0;

    for (int cycle = 0; cycle < cfg.max_cycles; ++cycle) {
        IterationConfig rcfg = cfg;
        rcfg.max_iters = cfg.ritz_steps;
        rcfg.ritz_every_step = false; // estimate only at the window end
        const double off_r = seconds_since(t0);
        MaxNormEstimate r = power_iteration_ritz(a, rcfg, &x);
        append(r.trace, off_r);
        x = r.final_iterate;
        last_ritz_alpha = r.value;

        const double off_s = seconds_since(t0);
        try {
            MaxNormEstimate s = power_iteration_squaring(a, cfg, &x);
            append(s.trace, off_s);
            if (!s.trace.any_trunc_err_at_least(cfg.trunc_error_cap)) {
                out.value = s.value;
                out.final_iterate = std::move(s.final_iterate);
                out.trace.status = ConvergenceTrace::Status::converged;
                return out;
            }
            // Two consecutive cycles reproducing the same unaccepted value
            // means further stabilization steps change nothing; stop early.
            const bool stagnated =
                have_fallback &&
                std::abs(s.value - prev_value) <= 1e-9 * std::max(std::abs(s.value), 1e-300);
            prev_value = s.value;
            have_fallback = true;
            fallback_value = s.value;
            if (stagnated) {
                out.value = fallback_value;
                out.final_iterate = std::move(x);
                out.trace.status = ConvergenceTrace::Status::stagnated;
                return out;
            }
        } catch (const EstimatorError&) {
            // squaring blew up under truncation; retry from a fresh Ritz run
            prev_value = -1.0;
        }
    }
    out.value = have_fallback ? fallback_value : last_ritz_alpha;
    out.final_iterate = std::move(x);
    out.trace.status = ConvergenceTrace::Status::max_iters;
    return out;
}

} // namespace htmax
