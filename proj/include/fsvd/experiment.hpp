#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "fsvd/attack.hpp"
#include "fsvd/costs.hpp"
#include "fsvd/errors.hpp"
#include "fsvd/federation.hpp"
#include "fsvd/io.hpp"
#include "fsvd/matrix.hpp"
#include "fsvd/metrics.hpp"
#include "fsvd/partition.hpp"
#include "fsvd/randomized.hpp"
#include "fsvd/reference_svd.hpp"
#include "fsvd/svd_result.hpp"
#include "fsvd/transport.hpp"

namespace fsvd {

struct ExperimentConfig {
    // Input: a file (csv or the binary matrix format) or a synthetic matrix.
    std::string input_path;
    std::string input_format;  // "csv" | "binary" | "" = decide by extension
    bool csv_header = false;
    bool synthetic = false;
    SyntheticSpec synthetic_spec;
    bool standardize = false;

    std::size_t sites = 1;
    std::vector<double> site_weights;  // overrides `sites` when non-empty

    Algorithm algorithm = Algorithm::RiFull;
    std::size_t k = 10;
    double epsilon = 1e-9;
    std::size_t max_iterations = 500;
    OrthoMode ortho = OrthoMode::FinalOnly;
    std::size_t c = 2;
    std::size_t i_prime = 10;
    std::uint64_t seed = 0;
    std::size_t repeats = 1;

    std::string out_dir;  // empty: no files written
};

struct RunReport {
    Algorithm algorithm = Algorithm::RiFull;
    std::size_t sites = 0;
    std::size_t m = 0;
    std::size_t n = 0;
    std::size_t k = 0;
    std::size_t iterations = 0;       // rows of the angle table
    std::size_t loop_iterations = 0;  // power-iteration passes (cost formula input)
    bool converged = false;
    std::vector<std::vector<double>> angles;  // iterations x k, degrees
    std::vector<double> sigma;
    TransmissionLedger ledger;
    std::uint64_t predicted_floats = 0;
    double matrix_seconds = 0.0;
    double total_seconds = 0.0;
    Matrix h;  // m x k, sign-normalized
    Matrix g;  // n x k (stacked site blocks), flipped jointly with h
};

inline void validate_config(const ExperimentConfig& cfg) {
    if (!cfg.synthetic && cfg.input_path.empty())
        throw ConfigError("no input: give a path or a synthetic spec");
    if (cfg.synthetic && !cfg.input_path.empty())
        throw ConfigError("give either an input path or a synthetic spec, not both");
    if (cfg.k == 0) throw ConfigError("k must be positive");
    if (cfg.max_iterations == 0) throw ConfigError("max-iter must be positive");
    if (cfg.epsilon < 0.0 || !std::isfinite(cfg.epsilon))
        throw ConfigError("epsilon must be finite and non-negative");
    if (cfg.c == 0) throw ConfigError("c must be positive");
    if (cfg.i_prime == 0) throw ConfigError("i-prime must be positive");
    if (cfg.repeats == 0) throw ConfigError("repeats must be positive");
    if (cfg.site_weights.empty() && cfg.sites == 0) throw ConfigError("sites must be positive");
}

inline Matrix load_input(const ExperimentConfig& cfg) {
    Matrix a;
    if (cfg.synthetic) {
        a = generate_synthetic(cfg.synthetic_spec);
    } else {
        std::string format = cfg.input_format;
        if (format.empty())
            format = cfg.input_path.ends_with(".csv") ? "csv" : "binary";
        if (format == "csv")
            a = load_csv(cfg.input_path, cfg.csv_header);
        else if (format == "binary")
            a = load_matrix(cfg.input_path);
        else
            throw ConfigError("unknown input format '" + format + "'");
        // the binary codec is bit-faithful and admits non-finite payloads;
        // experiment inputs must be finite numbers
        for (std::size_t i = 0; i < a.size(); ++i)
            if (!std::isfinite(a.data()[i]))
                throw ConfigError("input '" + cfg.input_path + "' contains non-finite values");
    }
    if (a.rows() == 0 || a.cols() == 0) throw ConfigError("input matrix is empty");
    return a;
}

// Column-wise standardization: zero mean, unit variance (population variance);
// constant columns are centered only.
inline void standardize_columns(Matrix& a) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < a.rows(); ++i) mean += a(i, j);
        mean /= static_cast<double>(a.rows());
        double var = 0.0;
        for (std::size_t i = 0; i < a.rows(); ++i) {
            a(i, j) -= mean;
            var += a(i, j) * a(i, j);
        }
        var /= static_cast<double>(a.rows());
        if (var > 0.0) {
            const double inv = 1.0 / std::sqrt(var);
            for (std::size_t i = 0; i < a.rows(); ++i) a(i, j) *= inv;
        }
    }
}

inline VerticalPartition make_partition(const Matrix& a, const ExperimentConfig& cfg) {
    return cfg.site_weights.empty() ? split_columns(a, cfg.sites)
                                    : split_columns(a, cfg.site_weights);
}

namespace detail {

inline ProtocolConfig protocol_config(const ExperimentConfig& cfg) {
    ProtocolConfig p;
    p.k = cfg.k;
    p.criterion.epsilon = cfg.epsilon;
    p.criterion.max_iterations = cfg.max_iterations;
    p.ortho = cfg.ortho;
    p.init = (cfg.algorithm == Algorithm::AiFull) ? InitMode::Approximate : InitMode::Random;
    p.c = cfg.c;
    p.i_prime = cfg.i_prime;
    p.seed = cfg.seed;
    return p;
}

inline std::vector<double> sigma_estimates(const Matrix& a, const Matrix& h, const Matrix& g) {
    const Matrix ag = multiply(a, g);
    std::vector<double> sigma(h.cols());
    for (std::size_t j = 0; j < h.cols(); ++j) {
        const double gn = column_norm(g, j);
        sigma[j] = gn > 0.0 ? column_dot(h, j, ag, j) / gn : 0.0;
    }
    return sigma;
}

}  // namespace detail

// One full simulated run: load, partition, execute the selected algorithm
// over a loopback transport, and evaluate against a fully converged
// reference decomposition of the unpartitioned matrix. The angle table has
// one row per global H update (loop iterations; 1 for AI-ONLY; I'+1 for
// RANDOMIZED). matrix_seconds times the protocol execution only, mirroring
// the "matrix operations" metric; evaluation and I/O are excluded. A
// non-null `wire` captures every message for offline inspection.
inline RunReport run_experiment_once(const ExperimentConfig& cfg, Transcript* wire = nullptr) {
    validate_config(cfg);
    const auto t_start = std::chrono::steady_clock::now();

    Matrix a = load_input(cfg);
    if (cfg.standardize) standardize_columns(a);
    const VerticalPartition part = make_partition(a, cfg);
    const ProtocolConfig pcfg = detail::protocol_config(cfg);

    LoopbackTransport transport(part.sites(), wire);
    FederatedTrace trace;
    FederatedResult result;

    const auto t_matrix = std::chrono::steady_clock::now();
    switch (cfg.algorithm) {
        case Algorithm::RiFull:
        case Algorithm::AiFull:
            result = federated_subspace_iteration(part, pcfg, transport, &trace, nullptr);
            break;
        case Algorithm::AiOnly: {
            ApproxInitResult init = approximate_init(part, cfg.k, cfg.c, &transport);
            transport.broadcast(make_message(MessageKind::Terminate, kAggregatorId, Matrix()));
            for (std::size_t s = 0; s < part.sites(); ++s)
                transport.receive_broadcast(static_cast<std::uint32_t>(s));
            trace.h.push_back(init.h);
            trace.g.push_back(stack_right_blocks(init.g_blocks));
            result.g_blocks = std::move(init.g_blocks);
            result.h = std::move(init.h);
            result.iterations = 0;
            result.converged = true;  // single-shot by construction
            break;
        }
        case Algorithm::Randomized:
            result = federated_randomized_svd(part, pcfg, transport, &trace, nullptr);
            break;
    }
    const auto t_done = std::chrono::steady_clock::now();

    RunReport report;
    report.algorithm = cfg.algorithm;
    report.sites = part.sites();
    report.m = a.rows();
    report.n = a.cols();
    report.k = cfg.k;
    report.iterations = trace.h.size();
    report.loop_iterations = result.iterations;
    report.converged = result.converged;
    report.ledger = transport.ledger();

    CostParams params;
    params.iterations = result.iterations;
    params.sites = part.sites();
    params.k = cfg.k;
    params.m = a.rows();
    params.c = cfg.c;
    params.i_prime = cfg.i_prime;
    report.predicted_floats = predicted_float_cost(cfg.algorithm, cfg.ortho, params);

    const SvdResult reference = reference_svd(a, cfg.k);
    report.angles.reserve(trace.h.size());
    for (const Matrix& h : trace.h) report.angles.push_back(principal_angles(h, reference.h));

    report.h = result.h;
    report.g = stack_right_blocks(result.g_blocks);
    report.sigma = detail::sigma_estimates(a, report.h, report.g);
    sign_normalize_pair(report.h, report.g);

    report.matrix_seconds = std::chrono::duration<double>(t_done - t_matrix).count();
    report.total_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return report;
}

inline void write_run_outputs(const RunReport& r, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    {
        std::ofstream out(fs::path(dir) / "angles.csv");
        if (!out) throw ConfigError("cannot write angles.csv in '" + dir + "'");
        out << "iteration";
        for (std::size_t j = 1; j <= r.k; ++j) out << ",angle_" << j;
        out << '\n';
        for (std::size_t i = 0; i < r.angles.size(); ++i) {
            out << (i + 1);
            for (const double angle : r.angles[i]) out << ',' << detail::format_double(angle);
            out << '\n';
        }
    }

    {
        std::ofstream out(fs::path(dir) / "summary.txt");
        if (!out) throw ConfigError("cannot write summary.txt in '" + dir + "'");
        out << "algorithm=" << algorithm_name(r.algorithm) << '\n';
        out << "sites=" << r.sites << '\n';
        out << "m=" << r.m << '\n';
        out << "n=" << r.n << '\n';
        out << "k=" << r.k << '\n';
        out << "iterations=" << r.iterations << '\n';
        out << "loop_iterations=" << r.loop_iterations << '\n';
        out << "converged=" << (r.converged ? "true" : "false") << '\n';
        out << "floats=" << r.ledger.floats_total() << '\n';
        out << "floats_client_to_aggregator=" << r.ledger.floats_client_to_agg << '\n';
        out << "floats_aggregator_to_clients=" << r.ledger.floats_agg_to_clients << '\n';
        out << "predicted_floats=" << r.predicted_floats << '\n';
        out << "bytes=" << r.ledger.bytes() << '\n';
        out << "bytes_on_wire=" << r.ledger.bytes_on_wire() << '\n';
        out << "messages=" << r.ledger.messages() << '\n';
        out << "messages_client_to_aggregator=" << r.ledger.messages_client_to_agg << '\n';
        out << "messages_aggregator_to_clients=" << r.ledger.messages_agg_to_clients << '\n';
        out << "rounds=" << r.ledger.rounds << '\n';
        out << "sigma=";
        for (std::size_t j = 0; j < r.sigma.size(); ++j) {
            if (j) out << ',';
            out << detail::format_double(r.sigma[j]);
        }
        out << '\n';
        // elapsed lines stay last: outputs are byte-identical across runs
        // except for these
        out << "matrix_elapsed_ms=" << detail::format_double(r.matrix_seconds * 1e3) << '\n';
        out << "elapsed_ms=" << detail::format_double(r.total_seconds * 1e3) << '\n';
    }

    save_matrix(r.h, (fs::path(dir) / "h.bin").string());
    save_matrix(r.g, (fs::path(dir) / "g.bin").string());
}

// Repeats run sequentially (runs share nothing; the report of the last one
// is returned and written — identical to the others except elapsed times).
inline RunReport run_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg);
    RunReport report;
    for (std::size_t i = 0; i < cfg.repeats; ++i) report = run_experiment_once(cfg);
    if (!cfg.out_dir.empty()) write_run_outputs(report, cfg.out_dir);
    return report;
}

struct AttackDemoReport {
    Algorithm algorithm = Algorithm::RiFull;
    std::size_t m = 0;
    std::size_t k = 0;
    std::size_t sites = 0;
    std::size_t pairs = 0;
    bool completed = false;
    std::size_t columns_used = 0;
    ReconstructionReport reconstruction;  // meaningful when completed
    std::string note;
};

// Aggregator-side covariance reconstruction demo. RI-FULL runs with the
// convergence check disabled (epsilon = 0) for ceil(m/k)+2 iterations and no
// interleaved orthonormalization of the right factors — the transcript then
// satisfies raw_i = (A A^T) broadcast_{i-1} and the linear system is
// solvable. RANDOMIZED demonstrates the mitigation: only i_prime usable
// pairs exist, so k*i_prime < m leaves the system rank-deficient.
// An InsufficientRank outcome is a reported result, not an error.
inline AttackDemoReport run_attack_demo(const ExperimentConfig& cfg) {
    validate_config(cfg);
    Matrix a = load_input(cfg);
    if (cfg.standardize) standardize_columns(a);
    if (a.rows() > 64)
        throw ConfigError("attack demo is limited to m <= 64 features (reconstruction is O(m^3))");
    const VerticalPartition part = make_partition(a, cfg);

    const std::size_t m = a.rows();
    const std::size_t k = cfg.k;
    AttackTranscript transcript;
    LoopbackTransport transport(part.sites());

    ProtocolConfig pcfg = detail::protocol_config(cfg);
    if (cfg.algorithm == Algorithm::Randomized) {
        federated_randomized_svd(part, pcfg, transport, nullptr, &transcript);
    } else {
        pcfg.init = InitMode::Random;
        pcfg.ortho = OrthoMode::None;
        pcfg.criterion.epsilon = 0.0;
        pcfg.criterion.max_iterations = (m + k - 1) / k + 2;
        federated_subspace_iteration(part, pcfg, transport, nullptr, &transcript);
    }

    AttackDemoReport report;
    report.algorithm = cfg.algorithm;
    report.m = m;
    report.k = k;
    report.sites = part.sites();
    report.pairs = transcript.pairs().size();

    const Matrix truth = multiply_a_bt(a, a);
    try {
        report.reconstruction = reconstruct_covariance(transcript, m, k, &truth);
        report.completed = true;
        report.columns_used = report.reconstruction.columns_used;
    } catch (const InsufficientRank& e) {
        report.columns_used = e.columns_used;
        report.note = cfg.algorithm == Algorithm::Randomized
                          ? "mitigated: the randomized variant exposes only k*i_prime = " +
                                std::to_string(k * cfg.i_prime) + " transcript columns for m = " +
                                std::to_string(m) + "; the system stays rank-deficient"
                          : "transcript exhausted before m independent columns (converged "
                            "updates add no new equations)";
    }

    if (!cfg.out_dir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(cfg.out_dir);
        export_attack_transcript(transcript, (fs::path(cfg.out_dir) / "transcript").string());
        std::ofstream out(fs::path(cfg.out_dir) / "attack_report.txt");
        if (!out) throw ConfigError("cannot write attack_report.txt in '" + cfg.out_dir + "'");
        out << "algorithm=" << algorithm_name(report.algorithm) << '\n';
        out << "m=" << report.m << '\n';
        out << "k=" << report.k << '\n';
        out << "sites=" << report.sites << '\n';
        out << "pairs=" << report.pairs << '\n';
        out << "outcome=" << (report.completed ? "reconstructed" : "insufficient_rank") << '\n';
        out << "columns_used=" << report.columns_used << '\n';
        if (report.completed) {
            out << "residual=" << detail::format_double(report.reconstruction.residual) << '\n';
            out << "pearson=" << detail::format_double(report.reconstruction.pearson) << '\n';
            out << "elapsed_seconds="
                << detail::format_double(report.reconstruction.elapsed_seconds) << '\n';
        }
        if (!report.note.empty()) out << "note=" << report.note << '\n';
        if (report.completed)
            save_matrix(report.reconstruction.k_hat,
                        (fs::path(cfg.out_dir) / "khat.bin").string());
    }
    return report;
}

namespace detail {

inline std::string input_signature(const ExperimentConfig& cfg) {
    std::string sig;
    if (cfg.synthetic) {
        sig = "synthetic:" + std::to_string(cfg.synthetic_spec.feature_count) + 'x' +
              std::to_string(cfg.synthetic_spec.sample_count) + ':' +
              std::to_string(cfg.synthetic_spec.seed);
        for (const double s : cfg.synthetic_spec.spectrum) sig += ',' + format_double(s);
    } else {
        sig = "file:" + cfg.input_path + ':' + cfg.input_format + ':' +
              (cfg.csv_header ? "1" : "0");
    }
    sig += cfg.standardize ? ":std" : ":raw";
    return sig;
}

}  // namespace detail

// Runs every config on the shared input and tabulates iteration counts and
// transmission totals side by side. Reporting only — nothing is asserted
// about the relative costs.
inline std::vector<RunReport> compare_algorithms(const std::vector<ExperimentConfig>& configs,
                                                 const std::string& out_path) {
    if (configs.empty()) throw ConfigError("compare: no configurations given");
    for (const ExperimentConfig& cfg : configs) validate_config(cfg);
    for (std::size_t i = 1; i < configs.size(); ++i) {
        if (configs[i].k != configs[0].k)
            throw ConfigError("compare: all configurations must share k");
        if (detail::input_signature(configs[i]) != detail::input_signature(configs[0]))
            throw ConfigError("compare: all configurations must share the input");
    }

    std::vector<RunReport> reports;
    reports.reserve(configs.size());
    for (const ExperimentConfig& cfg : configs) reports.push_back(run_experiment_once(cfg));

    if (!out_path.empty()) {
        std::filesystem::path path(out_path);
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
        std::ofstream out(path);
        if (!out) throw ConfigError("cannot write comparison table '" + out_path + "'");
        out << "algorithm,iterations,converged,floats,bytes,rounds,matrix_elapsed_ms\n";
        for (const RunReport& r : reports) {
            out << algorithm_name(r.algorithm) << ',' << r.loop_iterations << ','
                << (r.converged ? "true" : "false") << ',' << r.ledger.floats_total() << ','
                << r.ledger.bytes() << ',' << r.ledger.rounds << ','
                << detail::format_double(r.matrix_seconds * 1e3) << '\n';
        }
    }
    return reports;
}

}  // namespace fsvd
