#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "htmax/arith.hpp"
#include "htmax/ht_tensor.hpp"

namespace htmax {

/// Shared knob set for all estimators. A zero/empty truncation field means
/// "no truncation of that kind"; at most one of the three should be set.
struct IterationConfig {
    int max_iters = 40;              // steps for the plain/Ritz/squaring loops
    int working_rank = 0;            // uniform rank bound (0 = off)
    std::vector<int> working_ranks;  // per-node rank targets (empty = off)
    double trunc_tol = 0.0;          // relative truncation tolerance (0 = off)
    int subspace_k = 5;              // Ritz window size
    double squaring_tol = 1e-13;     // relative iterate-change stop
    double trunc_error_cap = 1e-8;   // adaptive acceptance threshold epsilon
    int ritz_steps = 10;             // Ritz steps per adaptive cycle (N3)
    int max_cycles = 50;             // adaptive outer-loop bound
    bool ritz_every_step = true;     // trace the Ritz estimate at every step

    bool truncation_enabled() const {
        return working_rank > 0 || !working_ranks.empty() || trunc_tol > 0.0;
    }
    void validate() const;
};

struct ConvergenceTrace {
    enum class Status { converged, stagnated, max_iters, truncation_cap_exceeded };
    struct Record {
        int iter = 0;
        double estimate = 0.0;      // alpha or |lambda|
        double rel_trunc_err = 0.0; // HSVD estimate for this step's truncation
        double elapsed_s = 0.0;
    };
    std::vector<Record> records;
    Status status = Status::max_iters;

    bool any_trunc_err_at_least(double cap) const;
    /// CSV with header `iter,estimate,rel_trunc_err,elapsed_s`.
    void write_csv(std::ostream& os) const;
};

std::string to_string(ConvergenceTrace::Status s);

struct MaxNormEstimate {
    double value = 0.0;       // nonnegative; without truncation a lower
                              // bound on the true maximum norm
    ConvergenceTrace trace;
    HtTensor final_iterate;   // last normalized iterate (argmax needs it)
};

/// Plain power iteration with the Rayleigh-quotient estimator
/// lambda^(j+1) = <a^(j), a o a^(j)>; reported values are |lambda|.
/// Known not to converge on sign-symmetric inputs; kept for comparison.
MaxNormEstimate power_iteration_rayleigh(const HtTensor& a, const IterationConfig& cfg);

/// Power iteration with the improved estimator alpha^(j+1) = ||a o a^(j)||
/// (taken after truncation, before normalization). Without truncation alpha
/// is non-decreasing and converges to the maximum norm from below.
MaxNormEstimate power_iteration_improved(const HtTensor& a, const IterationConfig& cfg);

/// Rayleigh-Ritz estimate over the span of the given normalized iterates:
/// joint orthonormalization, projected matrix B(i1,i2) = <q_i1, a o q_i2>
/// symmetrized, then alpha = max |ritz value|. Linearly dependent iterates
/// are dropped.
std::pair<double, std::vector<double>>
rayleigh_ritz_estimate(const HtTensor& a, const std::vector<HtTensor>& iterates);

/// Improved power iteration accelerated by the Rayleigh-Ritz estimate over a
/// sliding window of the last subspace_k iterates. Optional x0 overrides the
/// default start iterate a/||a||.
MaxNormEstimate power_iteration_ritz(const HtTensor& a, const IterationConfig& cfg,
                                     const HtTensor* x0 = nullptr);

/// Squaring iteration a^(j+1) = (a^(j) o a^(j))/||.|| with per-step
/// truncation; estimator alpha = ||a o a^(j+1)||; stops when the relative
/// iterate change drops below squaring_tol.
MaxNormEstimate power_iteration_squaring(const HtTensor& a, const IterationConfig& cfg,
                                         const HtTensor* x0 = nullptr);

/// Adaptive combination: cycles of ritz_steps Ritz-accelerated steps followed
/// by a squaring run; a squaring run whose truncation errors all stayed below
/// trunc_error_cap is accepted, otherwise the cycle repeats from the stored
/// Ritz iterate.
MaxNormEstimate adaptive_maxnorm(const HtTensor& a, const IterationConfig& cfg);

} // namespace htmax
