#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <fsvd/fsvd.hpp>

namespace {

struct CliOptions {
    std::string config;
    std::string input;
    std::string format;
    bool csv_header = false;
    std::size_t synthetic_m = 0;
    std::size_t synthetic_n = 0;
    std::vector<double> spectrum;
    std::uint64_t data_seed = 1;
    bool standardize = false;

    std::size_t sites = 1;
    std::vector<double> weights;

    std::string algorithm = "RI-FULL";
    std::size_t k = 10;
    double epsilon = 1e-9;
    std::size_t max_iter = 500;
    std::string ortho = "final-only";
    std::size_t c = 2;
    std::size_t i_prime = 10;
    std::uint64_t seed = 0;
    std::size_t repeats = 1;

    std::string out;
    std::vector<std::string> algorithms;  // compare only
};

void add_input_options(CLI::App& cmd, CliOptions& o) {
    cmd.add_option("--input", o.input, "data matrix file (csv or fsvd binary)");
    cmd.add_option("--input-format", o.format, "input format: csv | binary (default: by extension)");
    cmd.add_flag("--csv-header", o.csv_header, "skip the first csv row");
    cmd.add_option("--synthetic-m", o.synthetic_m, "synthetic input: feature count");
    cmd.add_option("--synthetic-n", o.synthetic_n, "synthetic input: sample count");
    cmd.add_option("--spectrum", o.spectrum, "synthetic input: singular values, non-increasing")
        ->delimiter(',');
    cmd.add_option("--data-seed", o.data_seed, "synthetic input: generator seed");
    cmd.add_flag("--standardize", o.standardize, "center and scale columns before running");
    cmd.add_option("--sites", o.sites, "number of sites (equal column split)");
    cmd.add_option("--weights", o.weights, "relative column share per site (overrides --sites)")
        ->delimiter(',');
}

void add_protocol_options(CLI::App& cmd, CliOptions& o, bool with_algorithm) {
    if (with_algorithm)
        cmd.add_option("--algorithm", o.algorithm,
                       "RI-FULL | AI-FULL | AI-ONLY | RANDOMIZED");
    cmd.add_option("--k", o.k, "number of singular vectors");
    cmd.add_option("--epsilon", o.epsilon, "convergence threshold on consecutive eigenvectors");
    cmd.add_option("--max-iter", o.max_iter, "iteration cap");
    cmd.add_option("--ortho", o.ortho,
                   "right-factor orthonormalization: none | final-only | per-iteration");
    cmd.add_option("--c", o.c, "approximate-init oversampling factor");
    cmd.add_option("--i-prime", o.i_prime, "randomized variant warm-up iterations");
    cmd.add_option("--seed", o.seed, "protocol seed (initial G)");
    cmd.add_option("--repeats", o.repeats, "sequential repetitions of the run");
}

// Turns "--config file" into the equivalent --key=value arguments, skipping
// keys already present on the command line so explicit flags win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size())
            path = args[i + 1];
        else if (args[i].starts_with("--config="))
            path = args[i].substr(9);
    }
    if (path.empty()) return args;

    std::ifstream in(path);
    if (!in) throw fsvd::ConfigError("config file '" + path + "' is not readable");
    const auto trim = [](const std::string& s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    };
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string entry = trim(line);
        if (entry.empty() || entry.front() == '#') continue;
        const auto eq = entry.find('=');
        if (eq == std::string::npos || eq == 0)
            throw fsvd::ConfigError("config file '" + path + "' line " +
                                    std::to_string(line_no) + ": expected key=value");
        const std::string flag = "--" + trim(entry.substr(0, eq));
        const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
            return a == flag || a.starts_with(flag + "=");
        });
        if (!given) args.push_back(flag + "=" + trim(entry.substr(eq + 1)));
    }
    return args;
}

fsvd::ExperimentConfig build_config(const CliOptions& o) {
    fsvd::ExperimentConfig cfg;
    cfg.input_path = o.input;
    cfg.input_format = o.format;
    cfg.csv_header = o.csv_header;
    cfg.synthetic = o.input.empty() && (o.synthetic_m > 0 || !o.spectrum.empty());
    cfg.synthetic_spec.feature_count = o.synthetic_m;
    cfg.synthetic_spec.sample_count = o.synthetic_n;
    cfg.synthetic_spec.spectrum = o.spectrum;
    cfg.synthetic_spec.seed = o.data_seed;
    cfg.standardize = o.standardize;
    cfg.sites = o.sites;
    cfg.site_weights = o.weights;
    cfg.algorithm = fsvd::parse_algorithm(o.algorithm);
    cfg.k = o.k;
    cfg.epsilon = o.epsilon;
    cfg.max_iterations = o.max_iter;
    cfg.ortho = fsvd::parse_ortho_mode(o.ortho);
    cfg.c = o.c;
    cfg.i_prime = o.i_prime;
    cfg.seed = o.seed;
    cfg.repeats = o.repeats;
    cfg.out_dir = o.out;
    return cfg;
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ' ';
        s += fsvd::detail::format_double(v[i]);
    }
    return s;
}

int cmd_run(const CliOptions& o) {
    const fsvd::RunReport r = fsvd::run_experiment(build_config(o));
    std::cout << "algorithm " << fsvd::algorithm_name(r.algorithm) << " on " << r.m << "x" << r.n
              << " over " << r.sites << " site(s), k=" << r.k << "\n";
    std::cout << "iterations " << r.iterations << (r.converged ? " (converged)" : " (not converged)")
              << "\n";
    std::cout << "transmitted " << r.ledger.floats_total() << " floats (predicted "
              << r.predicted_floats << "), " << r.ledger.bytes() << " bytes, " << r.ledger.rounds
              << " rounds\n";
    std::cout << "sigma " << join(r.sigma) << "\n";
    if (!r.angles.empty()) std::cout << "final angles (deg) " << join(r.angles.back()) << "\n";
    if (!o.out.empty()) std::cout << "wrote " << o.out << "\n";
    return 0;
}

int cmd_attack(const CliOptions& o) {
    const fsvd::AttackDemoReport r = fsvd::run_attack_demo(build_config(o));
    std::cout << "attack transcript: " << r.pairs << " pair(s) from "
              << fsvd::algorithm_name(r.algorithm) << ", m=" << r.m << ", k=" << r.k << "\n";
    if (r.completed) {
        std::cout << "reconstructed covariance from " << r.columns_used
                  << " columns: pearson=" << fsvd::detail::format_double(r.reconstruction.pearson)
                  << " residual=" << fsvd::detail::format_double(r.reconstruction.residual)
                  << " elapsed="
                  << fsvd::detail::format_double(r.reconstruction.elapsed_seconds) << "s\n";
    } else {
        std::cout << "reconstruction failed: only " << r.columns_used << " of " << r.m
                  << " independent columns\n";
    }
    if (!r.note.empty()) std::cout << r.note << "\n";
    if (!o.out.empty()) std::cout << "wrote " << o.out << "\n";
    return 0;
}

int cmd_compare(const CliOptions& o) {
    if (o.algorithms.empty())
        throw fsvd::ConfigError("compare: give at least one algorithm via --algorithms");
    std::vector<fsvd::ExperimentConfig> configs;
    for (const std::string& name : o.algorithms) {
        CliOptions per = o;
        per.algorithm = name;
        per.out.clear();
        configs.push_back(build_config(per));
    }
    const auto reports = fsvd::compare_algorithms(configs, o.out);
    std::cout << "algorithm,iterations,converged,floats,bytes,rounds,matrix_elapsed_ms\n";
    for (const fsvd::RunReport& r : reports)
        std::cout << fsvd::algorithm_name(r.algorithm) << ',' << r.loop_iterations << ','
                  << (r.converged ? "true" : "false") << ',' << r.ledger.floats_total() << ','
                  << r.ledger.bytes() << ',' << r.ledger.rounds << ','
                  << fsvd::detail::format_double(r.matrix_seconds * 1e3) << "\n";
    if (!o.out.empty()) std::cout << "wrote " << o.out << "\n";
    return 0;
}

int cmd_gen(const CliOptions& o) {
    if (o.out.empty()) throw fsvd::ConfigError("gen: --out is required");
    fsvd::SyntheticSpec spec;
    spec.feature_count = o.synthetic_m;
    spec.sample_count = o.synthetic_n;
    spec.spectrum = o.spectrum;
    spec.seed = o.data_seed;
    const fsvd::Matrix a = fsvd::generate_synthetic(spec);
    std::string format = o.format;
    if (format.empty()) format = o.out.ends_with(".csv") ? "csv" : "binary";
    if (format == "csv")
        fsvd::save_csv(a, o.out);
    else if (format == "binary")
        fsvd::save_matrix(a, o.out);
    else
        throw fsvd::ConfigError("unknown output format '" + format + "'");
    std::cout << "wrote " << a.rows() << "x" << a.cols() << " matrix to " << o.out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"federated SVD simulator for vertically partitioned data"};
    app.set_version_flag("--version", fsvd::kVersion);
    app.require_subcommand(1);

    CliOptions run_opts;
    CLI::App* run = app.add_subcommand("run", "run one federated decomposition");
    run->add_option("--config", run_opts.config, "key=value config file; flags override it");
    add_input_options(*run, run_opts);
    add_protocol_options(*run, run_opts, true);
    run->add_option("--out", run_opts.out, "output directory (angles.csv, summary.txt, h.bin, g.bin)");

    CliOptions attack_opts;
    CLI::App* attack =
        app.add_subcommand("attack", "covariance reconstruction from the aggregator transcript");
    attack->add_option("--config", attack_opts.config, "key=value config file; flags override it");
    add_input_options(*attack, attack_opts);
    add_protocol_options(*attack, attack_opts, true);
    attack->add_option("--out", attack_opts.out,
                       "output directory (transcript/, attack_report.txt, khat.bin)");

    CliOptions compare_opts;
    CLI::App* compare = app.add_subcommand("compare", "run several algorithms on one input");
    compare->add_option("--config", compare_opts.config, "key=value config file; flags override it");
    add_input_options(*compare, compare_opts);
    add_protocol_options(*compare, compare_opts, false);
    compare->add_option("--algorithms", compare_opts.algorithms,
                        "algorithms to compare, e.g. RI-FULL,RANDOMIZED")
        ->delimiter(',');
    compare->add_option("--out", compare_opts.out, "comparison table file (csv)");

    CliOptions gen_opts;
    CLI::App* gen = app.add_subcommand("gen", "write a synthetic matrix with a known spectrum");
    gen->add_option("--synthetic-m,--m", gen_opts.synthetic_m, "feature count")->required();
    gen->add_option("--synthetic-n,--n", gen_opts.synthetic_n, "sample count")->required();
    gen->add_option("--spectrum", gen_opts.spectrum, "singular values, non-increasing")
        ->delimiter(',')
        ->required();
    gen->add_option("--data-seed", gen_opts.data_seed, "generator seed");
    gen->add_option("--output-format", gen_opts.format, "csv | binary (default: by extension)");
    gen->add_option("--out", gen_opts.out, "output file")->required();

    std::vector<std::string> args;
    try {
        args = expand_config({argv + 1, argv + argc});
    } catch (const fsvd::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::reverse(args.begin(), args.end());  // App::parse consumes back to front
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (run->parsed()) return cmd_run(run_opts);
        if (attack->parsed()) return cmd_attack(attack_opts);
        if (compare->parsed()) return cmd_compare(compare_opts);
        if (gen->parsed()) return cmd_gen(gen_opts);
    } catch (const fsvd::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const fsvd::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const fsvd::TooManySites& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const fsvd::CodecError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const fsvd::Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
