// Command-line surface for the HT max-norm library: tensor generation,
// estimator runs with CSV traces, argmax search, oracle verification, and
// runtime-scaling benchmarks.
//
// Exit codes: 0 ok, 2 validation error, 3 estimator failed, 4 oracle mismatch.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "htmax/argmax.hpp"
#include "htmax/arith.hpp"
#include "htmax/dense_tensor.hpp"
#include "htmax/errors.hpp"
#include "htmax/ht_tensor.hpp"
#include "htmax/maxnorm.hpp"
#include "htmax/serialize.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitEstimator = 3;
constexpr int kExitOracle = 4;

double now_seconds() {
    static const auto t0 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct TensorSource {
    std::string input_path;
    std::string family;
    int d = 0;
    int n = 0;
    int r = 2;
    std::uint64_t seed = 0;
    double sigma1 = 2.0;
    double sigma2 = 1.0;
    std::vector<std::vector<double>> factors; // for --family elementary

    void add_options(CLI::App* cmd, bool require_source) {
        cmd->add_option("--in", input_path, "Read the tensor from a JSON container file");
        cmd->add_option("--family", family,
                        "Generate a tensor: rand|cheb|counterexample|adversarial|elementary")
            ->check(CLI::IsMember({"rand", "cheb", "counterexample", "adversarial", "elementary"}));
        cmd->add_option("--d", d, "Tensor order for generated families");
        cmd->add_option("--n", n, "Mode size for generated families");
        cmd->add_option("--r", r, "Rank for --family rand (default 2)");
        cmd->add_option("--seed", seed, "RNG seed for rand/adversarial (default 0)");
        cmd->add_option("--sigma1", sigma1, "counterexample: weight of the spread block");
        cmd->add_option("--sigma2", sigma2, "counterexample: weight of the corner entry");
        cmd->add_option_function<std::vector<double>>(
               "--factor",
               [this](const std::vector<double>& v) { factors.push_back(v); },
               "elementary: one factor vector (repeatable, comma separated values)")
            ->delimiter(',')
            ->take_all();
        if (require_source) cmd->require_option();
    }

    htmax::HtTensor make() const {
        if (!input_path.empty() && !family.empty())
            throw htmax::ValidationError("give either --in or --family, not both");
        if (!input_path.empty()) return htmax::load_tensor(input_path);
        if (family.empty()) throw htmax::ValidationError("a tensor source (--in or --family) is required");
        if (family == "rand") {
            if (d < 2 || n < 1 || r < 1)
                throw htmax::ValidationError("rand needs --d >= 2, --n >= 1, --r >= 1");
            return htmax::random_ht(d, n, r, seed);
        }
        if (family == "cheb") {
            if (d < 2 || n < 2) throw htmax::ValidationError("cheb needs --d >= 2 and --n >= 2");
            return htmax::cheb_tensor(d, n);
        }
        if (family == "counterexample") {
            if (n < 2) throw htmax::ValidationError("counterexample needs --n >= 2");
            return htmax::counterexample_matrix(n, sigma1, sigma2);
        }
        if (family == "adversarial") {
            if (d < 2) throw htmax::ValidationError("adversarial needs --d >= 2");
            // Default mode size large enough that the spike carries a
            // negligible share of the norm, which is the documented
            // failure regime of the truncated estimators.
            return htmax::adversarial_tensor(d, n > 0 ? n : 5000, seed);
        }
        // elementary
        if (factors.empty())
            throw htmax::ValidationError("elementary needs at least one --factor list");
        return htmax::from_elementary(factors);
    }
};

struct ConfigOptions {
    htmax::IterationConfig cfg;

    void add_options(CLI::App* cmd) {
        cmd->add_option("--rank", cfg.working_rank, "Uniform working rank for truncation (0 = off)");
        cmd->add_option("--tol", cfg.trunc_tol, "Relative truncation tolerance (0 = off)");
        cmd->add_option("--max-iters", cfg.max_iters, "Iteration budget per estimator run");
        cmd->add_option("--subspace-k", cfg.subspace_k, "Ritz window size");
        cmd->add_option("--eps", cfg.trunc_error_cap,
                        "Adaptive acceptance cap on per-step truncation error");
        cmd->add_option("--ritz-steps", cfg.ritz_steps, "Ritz steps per adaptive cycle");
        cmd->add_option("--max-cycles", cfg.max_cycles, "Adaptive outer-loop bound");
    }
};

htmax::MaxNormEstimate run_estimator(const std::string& alg, const htmax::HtTensor& a,
                                     const htmax::IterationConfig& cfg) {
    if (alg == "rayleigh") return htmax::power_iteration_rayleigh(a, cfg);
    if (alg == "pi") return htmax::power_iteration_improved(a, cfg);
    if (alg == "ritz") return htmax::power_iteration_ritz(a, cfg);
    if (alg == "squaring") return htmax::power_iteration_squaring(a, cfg);
    return htmax::adaptive_maxnorm(a, cfg);
}

void write_trace(const htmax::ConvergenceTrace& trace, const std::string& path,
                 const std::optional<double>& truth) {
    std::ofstream os(path);
    if (!os) throw htmax::ValidationError("cannot open trace file: " + path);
    if (!truth) {
        trace.write_csv(os);
        return;
    }
    os << "iter,estimate,rel_trunc_err,elapsed_s,rel_err\n";
    for (const auto& r : trace.records) {
        const double rel = *truth > 0.0 ? std::abs(r.estimate - *truth) / *truth
                                        : std::abs(r.estimate);
        char buf[160];
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.6f,%.17g\n", r.iter, r.estimate,
                      r.rel_trunc_err, r.elapsed_s, rel);
        os << buf;
    }
}

/// Dense-oracle equivalence suite over the arithmetic layer; returns the
/// number of failed checks and prints one line per check.
int verify_tensor(const htmax::HtTensor& a) {
    using namespace htmax;
    int failures = 0;
    auto check = [&](const char* name, double err, double tol = 1e-10) {
        const bool ok = err <= tol;
        std::printf("  %-28s %s (err %.3g)\n", name, ok ? "ok" : "MISMATCH", err);
        if (!ok) ++failures;
    };
    auto rel = [](double got, double want) {
        const double scale = std::max(std::abs(want), 1.0);
        return std::abs(got - want) / scale;
    };
    auto dense_rel = [&](const DenseTensor& got, const DenseTensor& want) {
        double scale = 0.0, err = 0.0;
        for (double v : want.values) scale = std::max(scale, std::abs(v));
        scale = std::max(scale, 1.0);
        for (std::size_t i = 0; i < want.values.size(); ++i)
            err = std::max(err, std::abs(got.values[i] - want.values[i]));
        return err / scale;
    };

    const DenseTensor da = densify(a);

    // entry() against the densified values
    double entry_err = 0.0;
    for (std::size_t f = 0; f < da.values.size(); ++f)
        entry_err = std::max(entry_err, std::abs(a.entry(da.unflatten(f)) - da.values[f]));
    check("entry vs densify", entry_err / std::max(1.0, dense_pnorm(da, 2.0)));

    check("norm", rel(norm(a), dense_pnorm(da, 2.0)));
    check("dot", rel(dot(a, a), dense_dot(da, da)));
    check("hadamard", dense_rel(densify(hadamard(a, a)), dense_hadamard(da, da)));

    DenseTensor dsum = da;
    for (std::size_t i = 0; i < dsum.values.size(); ++i) dsum.values[i] += da.values[i];
    check("add", dense_rel(densify(add(a, a)), dsum));

    DenseTensor dscaled = da;
    for (double& v : dscaled.values) v *= -2.5;
    check("scale", dense_rel(densify(scale(a, -2.5)), dscaled));

    if (a.mode_sizes[0] > 1) {
        const int hi = (a.mode_sizes[0] + 1) / 2;
        DenseTensor dslice;
        dslice.mode_sizes = a.mode_sizes;
        dslice.mode_sizes[0] = hi;
        dslice.values.resize(da.values.size() / a.mode_sizes[0] * hi);
        for (std::size_t f = 0; f < dslice.values.size(); ++f)
            dslice.values[f] = da.values[da.flat_index(dslice.unflatten(f))];
        check("slice mode 1", dense_rel(densify(slice(a, 1, 1, hi)), dslice));
    }

    check("orthogonalize", dense_rel(densify(orthogonalize(a)), da));

    const double nrm = norm(a);
    if (nrm > 0.0) {
        auto [tr, rep] = truncate_eps(a, 1e-12);
        check("truncate_eps 1e-12", dense_rel(densify(tr), da));
    }
    return failures;
}

int dispatch(CLI::App& app, const std::function<int()>& body) {
    (void)app;
    try {
        return body();
    } catch (const htmax::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const htmax::DenseCapError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const htmax::ZeroTensorError& e) {
        std::cerr << "estimator failed: " << e.what() << "\n";
        return kExitEstimator;
    } catch (const htmax::EstimatorError& e) {
        std::cerr << "estimator failed: " << e.what() << "\n";
        return kExitEstimator;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"htmax: maximum-norm estimation for tensors in hierarchical low-rank format"};
    app.require_subcommand(1);

    // ---- gen ----
    auto* gen = app.add_subcommand("gen", "Generate a tensor and write its JSON container");
    TensorSource gen_src;
    gen_src.add_options(gen, false);
    std::string gen_out = "tensor.json";
    gen->add_option("-o,--out", gen_out, "Output path (default tensor.json)");

    // ---- maxnorm ----
    auto* mx = app.add_subcommand("maxnorm", "Estimate the maximum absolute entry");
    TensorSource mx_src;
    mx_src.add_options(mx, false);
    ConfigOptions mx_cfg;
    mx_cfg.add_options(mx);
    std::string mx_alg = "adaptive";
    mx->add_option("--alg", mx_alg, "rayleigh|pi|ritz|squaring|adaptive (default adaptive)")
        ->check(CLI::IsMember({"rayleigh", "pi", "ritz", "squaring", "adaptive"}));
    std::string mx_trace;
    mx->add_option("--trace", mx_trace, "Write the per-iteration CSV trace to this file");
    std::string mx_truth;
    mx->add_option("--truth", mx_truth, "`dense`: add oracle relative errors to the trace")
        ->check(CLI::IsMember({"dense"}));

    // ---- argmax ----
    auto* am = app.add_subcommand("argmax", "Locate a maximizing multi-index");
    TensorSource am_src;
    am_src.add_options(am, false);
    ConfigOptions am_cfg;
    am_cfg.add_options(am);

    // ---- verify ----
    auto* vf = app.add_subcommand("verify", "Run the dense-oracle equivalence suite");
    TensorSource vf_src;
    vf_src.add_options(vf, false);

    // ---- bench ----
    auto* bn = app.add_subcommand("bench", "Runtime scaling sweep on cheb tensors");
    std::string bn_sweep = "d";
    bn->add_option("--sweep", bn_sweep, "Sweep variable: d or n")->check(CLI::IsMember({"d", "n"}));
    std::vector<int> bn_list{4, 8, 16, 32};
    bn->add_option("--list", bn_list, "Sweep values (comma separated)")->delimiter(',');
    int bn_d = 8;
    bn->add_option("--d", bn_d, "Fixed order for --sweep n (default 8)");
    int bn_n = 50;
    bn->add_option("--n", bn_n, "Fixed mode size for --sweep d (default 50)");
    int bn_rank = 5;
    bn->add_option("--rank", bn_rank, "Working rank (default 5)");
    std::string bn_out;
    bn->add_option("-o,--out", bn_out, "CSV output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    if (gen->parsed()) {
        return dispatch(app, [&] {
            htmax::HtTensor a = gen_src.make();
            htmax::save_tensor(a, gen_out);
            std::printf("wrote %s (d=%d, storage %zu values)\n", gen_out.c_str(), a.order(),
                        a.storage_count());
            return kExitOk;
        });
    }

    if (mx->parsed()) {
        return dispatch(app, [&] {
            htmax::HtTensor a = mx_src.make();
            mx_cfg.cfg.validate();
            std::optional<double> truth;
            if (mx_truth == "dense") truth = htmax::dense_maxnorm_argmax(htmax::densify(a)).first;
            const htmax::MaxNormEstimate est = run_estimator(mx_alg, a, mx_cfg.cfg);
            std::printf("estimate %.12g\n", est.value);
            std::printf("status   %s\n", htmax::to_string(est.trace.status).c_str());
            std::printf("iters    %zu\n", est.trace.records.size());
            if (truth) {
                const double rel = *truth > 0.0 ? std::abs(est.value - *truth) / *truth
                                                : std::abs(est.value);
                std::printf("truth    %.12g (rel err %.3g)\n", *truth, rel);
            }
            if (!mx_trace.empty()) write_trace(est.trace, mx_trace, truth);
            const bool failed =
                est.trace.status == htmax::ConvergenceTrace::Status::truncation_cap_exceeded;
            return failed ? kExitEstimator : kExitOk;
        });
    }

    if (am->parsed()) {
        return dispatch(app, [&] {
            htmax::HtTensor a = am_src.make();
            am_cfg.cfg.validate();
            const htmax::ArgmaxResult res = htmax::binary_search_argmax(a, am_cfg.cfg);
            std::ostringstream idx;
            for (std::size_t i = 0; i < res.index.size(); ++i)
                idx << (i ? "," : "") << res.index[i];
            std::printf("index     (%s)\n", idx.str().c_str());
            std::printf("value     %.12g\n", res.value);
            std::printf("estimate  %.12g\n", res.estimated_maxnorm);
            std::printf("iters     %d (bound %d)\n", res.iterations_used,
                        htmax::search_iteration_bound(a.order(), a.mode_sizes));
            if (res.rank1_shortcut) std::printf("shortcut  rank-1 per-mode argmax\n");
            if (res.zero_rows_removed) std::printf("reduced   zero rows removed before search\n");
            return kExitOk;
        });
    }

    if (vf->parsed()) {
        return dispatch(app, [&] {
            htmax::HtTensor a = vf_src.make();
            a.validate();
            const int failures = verify_tensor(a);
            std::printf("%s\n", failures == 0 ? "verify: pass" : "verify: FAIL");
            return failures == 0 ? kExitOk : kExitOracle;
        });
    }

    // bench
    return dispatch(app, [&] {
        std::ostringstream csv;
        csv << "family,d,n,alg,seconds,rel_err\n";
        for (int v : bn_list) {
            const int d = bn_sweep == "d" ? v : bn_d;
            const int n = bn_sweep == "d" ? bn_n : v;
            const htmax::HtTensor a = htmax::cheb_tensor(d, n);
            htmax::IterationConfig cfg;
            cfg.working_rank = bn_rank;
            // cheb attains maximum norm 1 exactly, so relative errors are
            // available without an oracle at any scale.
            auto point = [&](const char* alg, auto&& run) {
                std::vector<double> times;
                double relerr = 0.0;
                for (int rep = 0; rep < 3; ++rep) {
                    const double t0 = now_seconds();
                    relerr = run();
                    times.push_back(now_seconds() - t0);
                }
                std::sort(times.begin(), times.end());
                char buf[160];
                std::snprintf(buf, sizeof buf, "cheb,%d,%d,%s,%.6f,%.6g\n", d, n, alg, times[1],
                              relerr);
                csv << buf;
                std::fprintf(stderr, "bench cheb d=%d n=%d %s: %.3fs\n", d, n, alg, times[1]);
            };
            point("adaptive", [&] {
                return std::abs(htmax::adaptive_maxnorm(a, cfg).value - 1.0);
            });
            point("argmax", [&] {
                return std::abs(std::abs(htmax::binary_search_argmax(a, cfg).value) - 1.0);
            });
        }
        if (bn_out.empty()) {
            std::cout << csv.str();
        } else {
            std::ofstream os(bn_out);
            if (!os) throw htmax::ValidationError("cannot open output file: " + bn_out);
            os << csv.str();
        }
        return kExitOk;
    });
}
