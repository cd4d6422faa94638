// Copyright 2026 The JigSaw Project Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "jigsaw/complexity.hpp"
#include "jigsaw/io.hpp"
#include "jigsaw/metrics.hpp"
#include "jigsaw/noise_sim.hpp"
#include "jigsaw/pmf.hpp"
#include "jigsaw/reconstruction.hpp"
#include "jigsaw/subsetting.hpp"

namespace jigsaw::cli {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

/// Everything one experiment needs; all randomness funnels through `seed`.
struct RunOptions {
    std::string workload = "ghz";
    int width = 0;
    std::string profile_path;
    double crosstalk_kappa10 = 1.26;
    std::uint64_t trials = 32768;
    std::uint64_t seed = 1;
    int subset_size = 2;
    std::string layers;  // "smin:smax"; empty = single layer
    double split_fraction = 0.5;
    double tolerance = 1e-4;
    int max_rounds = 100;
    bool plain_probability_weight = false;
    bool no_remap = false;
    std::string graph_path;
    std::vector<std::string> correct;
    std::string out_dir;
};

namespace detail {

inline double slope_from_kappa10(double kappa10) {
    if (kappa10 < 1.0) {
        throw ValidationError("crosstalk kappa(10) must be >= 1");
    }
    return (kappa10 - 1.0) / 9.0;
}

inline IdealSpec parse_workload(const std::string& text, int width, std::uint64_t seed) {
    if (text == "ghz") {
        if (width < 1) {
            throw ValidationError("ghz workload requires --width");
        }
        return IdealSpec::ghz(width);
    }
    if (text.rfind("bv:", 0) == 0) {
        const std::string secret = text.substr(3);
        if (width > 0 && width != static_cast<int>(secret.size())) {
            throw ValidationError("--width disagrees with bv secret length");
        }
        return IdealSpec::bv(secret);
    }
    if (text.rfind("planted:", 0) == 0) {
        std::istringstream ss(text.substr(8));
        double lambda = 0.0;
        std::size_t support = 0;
        char colon = 0;
        if (!(ss >> lambda >> colon >> support) || colon != ':') {
            throw ValidationError("planted workload syntax: planted:LAMBDA:SUPPORT_SIZE");
        }
        if (width < 1) {
            throw ValidationError("planted workload requires --width");
        }
        return random_planted(width, lambda, support, seed);
    }
    if (text.rfind("pmf:", 0) == 0) {
        SparsePmf pmf = io::read_pmf_file(text.substr(4));
        if (width > 0 && width != pmf.width()) {
            throw ValidationError("--width disagrees with pmf file width");
        }
        return IdealSpec::custom_pmf(std::move(pmf));
    }
    throw ValidationError("unknown workload '" + text +
                          "' (expected ghz, bv:SECRET, planted:L:S, or pmf:FILE)");
}

inline SubsetPlan make_plan(const RunOptions& opt, int width) {
    if (!opt.layers.empty()) {
        std::istringstream ss(opt.layers);
        int s_min = 0;
        int s_max = 0;
        char colon = 0;
        if (!(ss >> s_min >> colon >> s_max) || colon != ':') {
            throw ValidationError("--layers syntax: SMIN:SMAX");
        }
        return multilayer_plan(width, s_min, s_max);
    }
    return sliding_window_plan(width, opt.subset_size);
}

inline ReconstructionConfig make_reconstruction_config(const RunOptions& opt) {
    ReconstructionConfig cfg;
    cfg.hellinger_tolerance = opt.tolerance;
    cfg.max_rounds = opt.max_rounds;
    cfg.weight = opt.plain_probability_weight ? MarginalWeight::kPlain : MarginalWeight::kOdds;
    return cfg;
}

inline std::string cpm_file_name(std::size_t index) {
    std::ostringstream name;
    name << "cpm_" << std::setw(3) << std::setfill('0') << index << ".json";
    return name.str();
}

inline io::CountFile to_count_file(int width, std::optional<std::vector<int>> qubits,
                                   const std::map<std::string, std::uint64_t>& counts) {
    io::CountFile file;
    file.width = width;
    file.qubits = std::move(qubits);
    file.counts = counts;
    file.shots = 0;
    for (const auto& [key, count] : counts) {
        file.shots += count;
    }
    return file;
}

inline nlohmann::json run_config_json(const RunOptions& opt) {
    nlohmann::json j;
    j["workload"] = opt.workload;
    j["width"] = opt.width;
    j["profile"] = opt.profile_path;
    j["crosstalk_kappa10"] = opt.crosstalk_kappa10;
    j["trials"] = opt.trials;
    j["seed"] = opt.seed;
    if (opt.layers.empty()) {
        j["subset_size"] = opt.subset_size;
    } else {
        j["layers"] = opt.layers;
    }
    j["split_fraction"] = opt.split_fraction;
    j["tolerance"] = opt.tolerance;
    j["max_rounds"] = opt.max_rounds;
    j["weight"] = opt.plain_probability_weight ? "plain" : "odds";
    j["remap"] = !opt.no_remap;
    if (!opt.graph_path.empty()) {
        j["graph"] = opt.graph_path;
    }
    if (!opt.correct.empty()) {
        j["correct"] = opt.correct;
    }
    return j;
}

inline std::string format_metric(double v) {
    if (std::isinf(v)) {
        return "inf";
    }
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(6) << v;
    return ss.str();
}

inline void write_comparison_table(std::ostream& out, const MetricReport& baseline,
                                   const MetricReport& jigsaw) {
    auto row = [&](const std::string& name, double b, double g) {
        const double ratio = b != 0.0 && std::isfinite(b) && std::isfinite(g) ? g / b
                             : std::numeric_limits<double>::quiet_NaN();
        out << std::left << std::setw(12) << name << std::setw(14) << format_metric(b)
            << std::setw(14) << format_metric(g);
        if (std::isnan(ratio)) {
            out << "-";
        } else {
            out << format_metric(ratio);
        }
        out << '\n';
    };
    out << std::left << std::setw(12) << "metric" << std::setw(14) << "baseline" << std::setw(14)
        << "jigsaw" << "ratio" << '\n';
    row("pst", baseline.pst, jigsaw.pst);
    row("ist", baseline.ist, jigsaw.ist);
    row("fidelity", baseline.fidelity, jigsaw.fidelity);
    row("tvd", baseline.tvd, jigsaw.tvd);
    row("hellinger", baseline.hellinger, jigsaw.hellinger);
    if (baseline.arg && jigsaw.arg) {
        row("arg", *baseline.arg, *jigsaw.arg);
    }
}

inline Marginal marginal_from_count_file(const io::CountFile& file, int program_width,
                                         const std::string& name) {
    if (file.width != program_width) {
        throw ValidationError("file '" + name + "': width " + std::to_string(file.width) +
                              " does not match the global file's width " +
                              std::to_string(program_width));
    }
    Marginal m;
    if (file.qubits) {
        m.qubits = *file.qubits;
    } else {
        m.qubits.resize(static_cast<std::size_t>(program_width));
        for (int q = 0; q < program_width; ++q) {
            m.qubits[static_cast<std::size_t>(q)] = program_width - 1 - q;
        }
    }
    m.pmf = SparsePmf::from_counts(file.counts, static_cast<int>(m.qubits.size()));
    return m;
}

}  // namespace detail

/// `jigsaw profile`: generate a spatial noise profile file.
inline int cmd_profile(int channels, double median, double max, std::uint64_t seed,
                       const std::string& out) {
    const NoiseProfile profile = spatial_profile(channels, median, max, seed);
    io::write_profile(out, profile);
    std::cout << "wrote " << out << " (" << channels << " channels)\n";
    return kExitOk;
}

/// `jigsaw estimate-trials`: trials per CPM for full-coverage confidence.
inline int cmd_estimate_trials(int subset_size, double confidence) {
    std::cout << estimate_trials(subset_size, confidence) << '\n';
    return kExitOk;
}

/// `jigsaw simulate`: write the plan plus global and per-CPM count files.
/// Seed streams match `jigsaw pipeline`, so the same seed produces the same
/// histograms in both commands.
inline int cmd_simulate(const RunOptions& opt) {
    const IdealSpec spec = detail::parse_workload(opt.workload, opt.width, opt.seed);
    const NoiseProfile profile =
        io::read_profile(opt.profile_path, detail::slope_from_kappa10(opt.crosstalk_kappa10));
    const SubsetPlan plan = detail::make_plan(opt, spec.width);
    const TrialBudget budget = split_trials(opt.trials, plan, opt.split_fraction);
    if (static_cast<int>(profile.channels.size()) < spec.width) {
        throw ValidationError("profile has fewer channels than program qubits");
    }

    const SparsePmf ideal = ideal_distribution(spec);
    std::vector<int> all_qubits(static_cast<std::size_t>(spec.width));
    for (int q = 0; q < spec.width; ++q) {
        all_qubits[static_cast<std::size_t>(q)] = spec.width - 1 - q;
    }
    const QubitAssignment global_assignment = identity_assignment(spec.width);

    fs::create_directories(opt.out_dir);
    const fs::path dir(opt.out_dir);
    io::write_plan(dir / "plan.json", plan, budget);

    const auto global_counts = sample_counts(ideal, profile, global_assignment, all_qubits,
                                             budget.global_trials, derive_seed(opt.seed, 1));
    io::write_count_file(dir / "global.json",
                         detail::to_count_file(spec.width, std::nullopt, global_counts));

    const auto subsets = plan.flattened();
    std::vector<std::map<std::string, std::uint64_t>> cpm_counts(subsets.size());
    parallel_for(subsets.size(), [&](std::size_t i) {
        const QubitAssignment assignment = opt.no_remap
                                               ? global_assignment
                                               : best_qubit_assignment(profile, subsets[i]);
        cpm_counts[i] = sample_counts(ideal, profile, assignment, subsets[i], budget.per_cpm[i],
                                      derive_seed(opt.seed, 2 + i));
    });
    for (std::size_t i = 0; i < subsets.size(); ++i) {
        io::write_count_file(dir / detail::cpm_file_name(i),
                             detail::to_count_file(spec.width, subsets[i], cpm_counts[i]));
    }
    std::cout << "wrote " << (subsets.size() + 2) << " files to " << opt.out_dir << '\n';
    return kExitOk;
}

/// `jigsaw reconstruct`: update a global histogram with marginal histograms
/// and write the output PMF plus the per-round convergence log.
inline int cmd_reconstruct(const std::string& global_path,
                           const std::vector<std::string>& marginal_paths,
                           const std::string& out_path, const std::string& log_path,
                           const ReconstructionConfig& cfg) {
    const io::CountFile global_file = io::read_count_file(global_path);
    if (global_file.qubits &&
        static_cast<int>(global_file.qubits->size()) != global_file.width) {
        throw ValidationError("file '" + global_path + "' is not a global histogram");
    }
    const SparsePmf prior = SparsePmf::from_counts(global_file.counts, global_file.width);

    std::vector<Marginal> marginals;
    marginals.reserve(marginal_paths.size());
    for (const auto& path : marginal_paths) {
        marginals.push_back(
            detail::marginal_from_count_file(io::read_count_file(path), global_file.width, path));
    }

    std::vector<std::pair<int, ConvergenceLog>> logs;
    const SparsePmf out =
        reconstruct_multilayer(prior, LayerSet::group_by_size(marginals), cfg, &logs);
    io::write_pmf_file(out_path, out);
    if (!log_path.empty()) {
        io::write_convergence_log(log_path, logs);
    }
    int total_rounds = 0;
    for (const auto& [size, log] : logs) {
        total_rounds += log.rounds();
    }
    std::cout << "reconstructed " << out.support_size() << " outcomes in " << total_rounds
              << " rounds\n";
    return kExitOk;
}

/// `jigsaw metrics`: score a PMF file against an ideal/reference PMF.
inline int cmd_metrics(const std::string& pmf_path, const std::string& ideal_path,
                       const std::vector<std::string>& correct, const std::string& graph_path,
                       const std::string& out_path, bool verbose) {
    const SparsePmf observed = io::read_pmf_file(pmf_path);
    const SparsePmf ideal = io::read_pmf_file(ideal_path);
    std::optional<MaxCutInstance> graph;
    if (!graph_path.empty()) {
        std::ifstream in(graph_path);
        if (!in) {
            throw ValidationError("cannot open graph file '" + graph_path + "'");
        }
        graph = MaxCutInstance::parse(in);
    }
    const std::set<std::string> correct_set(correct.begin(), correct.end());
    const MetricReport report = evaluate_metrics(observed, ideal, correct_set,
                                                 graph ? &*graph : nullptr);

    std::cout << "pst        " << detail::format_metric(report.pst) << '\n';
    std::cout << "ist        " << detail::format_metric(report.ist) << '\n';
    std::cout << "tvd        " << detail::format_metric(report.tvd) << '\n';
    std::cout << "fidelity   " << detail::format_metric(report.fidelity) << '\n';
    std::cout << "hellinger  " << detail::format_metric(report.hellinger) << '\n';
    if (report.arg) {
        std::cout << "arg        " << detail::format_metric(*report.arg) << "%\n";
    }
    if (verbose) {
        const TvdFidelity tf = fidelity(observed, ideal);
        std::cout << "raw |p-q| sum (unnormalized tvd): " << detail::format_metric(tf.raw_abs_sum)
                  << '\n';
    }
    if (!out_path.empty()) {
        io::detail::save_json(out_path, io::metric_report_to_json(report));
    }
    return kExitOk;
}

/// `jigsaw pipeline`: full experiment into a directory — counts,
/// reconstruction, convergence log, metric report, and a baseline-vs-jigsaw
/// comparison table. Byte-identical for a fixed seed.
inline int cmd_pipeline(const RunOptions& opt) {
    const IdealSpec spec = detail::parse_workload(opt.workload, opt.width, opt.seed);
    const NoiseProfile profile =
        io::read_profile(opt.profile_path, detail::slope_from_kappa10(opt.crosstalk_kappa10));
    const SubsetPlan plan = detail::make_plan(opt, spec.width);
    const TrialBudget budget = split_trials(opt.trials, plan, opt.split_fraction);

    std::optional<MaxCutInstance> graph;
    if (!opt.graph_path.empty()) {
        std::ifstream in(opt.graph_path);
        if (!in) {
            throw ValidationError("cannot open graph file '" + opt.graph_path + "'");
        }
        graph = MaxCutInstance::parse(in);
    }

    PipelineConfig cfg;
    cfg.seed = opt.seed;
    cfg.reconstruction = detail::make_reconstruction_config(opt);
    cfg.remap_cpm = !opt.no_remap;
    cfg.correct_override = std::set<std::string>(opt.correct.begin(), opt.correct.end());
    cfg.graph = graph ? &*graph : nullptr;

    const PipelineResult result = run_pipeline(spec, profile, plan, budget, cfg);

    fs::create_directories(opt.out_dir);
    const fs::path dir(opt.out_dir);
    io::detail::save_json(dir / "run_config.json", detail::run_config_json(opt));
    io::write_plan(dir / "plan.json", plan, budget);
    io::write_profile(dir / "profile.json", profile);
    io::write_count_file(dir / "baseline.json",
                         detail::to_count_file(spec.width, std::nullopt, result.baseline_counts));
    io::write_count_file(dir / "global.json",
                         detail::to_count_file(spec.width, std::nullopt, result.global_counts));
    for (std::size_t i = 0; i < result.cpm_counts.size(); ++i) {
        const auto& [qubits, counts] = result.cpm_counts[i];
        io::write_count_file(dir / detail::cpm_file_name(i),
                             detail::to_count_file(spec.width, qubits, counts));
    }
    io::write_pmf_file(dir / "ideal.pmf.json", result.ideal);
    io::write_pmf_file(dir / "reconstructed.pmf.json", result.reconstructed);
    io::write_convergence_log(dir / "convergence.json", result.layer_logs);

    nlohmann::json report;
    report["baseline"] = io::metric_report_to_json(result.baseline_report);
    report["jigsaw"] = io::metric_report_to_json(result.jigsaw_report);
    io::detail::save_json(dir / "report.json", report);

    std::ofstream table(dir / "comparison.txt");
    detail::write_comparison_table(table, result.baseline_report, result.jigsaw_report);
    table.close();

    detail::write_comparison_table(std::cout, result.baseline_report, result.jigsaw_report);
    return kExitOk;
}

/// Builds the CLI and dispatches. Exit codes: 0 success, 2 validation
/// error, 3 numerical/degenerate-update error.
inline int run(std::vector<std::string> args) {
    CLI::App app{"Measurement-subsetting experiment toolkit"};
    app.require_subcommand(1);

    RunOptions opt;
    auto add_run_options = [&](CLI::App* cmd, bool needs_out_dir) {
        cmd->add_option("--workload", opt.workload,
                        "ghz | bv:SECRET | planted:LAMBDA:SUPPORT | pmf:FILE");
        cmd->add_option("--width", opt.width, "program width in qubits");
        cmd->add_option("--profile", opt.profile_path, "noise profile JSON file")->required();
        cmd->add_option("--crosstalk-kappa10", opt.crosstalk_kappa10,
                        "error inflation when 10 qubits are measured simultaneously");
        cmd->add_option("--trials", opt.trials, "total trial budget");
        cmd->add_option("--seed", opt.seed, "seed for all randomness in the run");
        cmd->add_option("--subset-size", opt.subset_size, "CPM size for the single-layer plan");
        cmd->add_option("--layers", opt.layers, "SMIN:SMAX multi-layer plan");
        cmd->add_option("--split-fraction", opt.split_fraction,
                        "fraction of trials spent in global mode");
        cmd->add_option("--tolerance", opt.tolerance, "Hellinger convergence tolerance");
        cmd->add_option("--max-rounds", opt.max_rounds, "reconstruction round cap");
        cmd->add_flag("--plain-probability-weight", opt.plain_probability_weight,
                      "scale update coefficients by pr_y instead of pr_y/(1-pr_y)");
        cmd->add_flag("--no-remap", opt.no_remap, "keep CPMs on the identity assignment");
        if (needs_out_dir) {
            cmd->add_option("--out", opt.out_dir, "output directory")->required();
        }
    };

    CLI::App* simulate = app.add_subcommand("simulate", "write noisy count files for a workload");
    add_run_options(simulate, true);

    CLI::App* pipeline = app.add_subcommand(
        "pipeline", "simulate, reconstruct, and score one experiment end to end");
    add_run_options(pipeline, true);
    pipeline->add_option("--graph", opt.graph_path, "MaxCut edge-list file for ARG");
    pipeline->add_option("--correct", opt.correct, "override the correct outcome set");

    std::string global_path;
    std::vector<std::string> marginal_paths;
    std::string out_path;
    std::string log_path;
    CLI::App* reconstruct =
        app.add_subcommand("reconstruct", "update a global histogram with marginal histograms");
    reconstruct->add_option("--global", global_path, "global count file")->required();
    reconstruct->add_option("--marginal", marginal_paths, "marginal count file (repeatable)");
    reconstruct->add_option("--out", out_path, "output PMF file")->required();
    reconstruct->add_option("--log", log_path, "convergence log file");
    reconstruct->add_option("--tolerance", opt.tolerance, "Hellinger convergence tolerance");
    reconstruct->add_option("--max-rounds", opt.max_rounds, "reconstruction round cap");
    reconstruct->add_flag("--plain-probability-weight", opt.plain_probability_weight,
                          "scale update coefficients by pr_y instead of pr_y/(1-pr_y)");

    std::string pmf_path;
    std::string ideal_path;
    std::string graph_path;
    std::string report_path;
    bool verbose = false;
    std::vector<std::string> correct;
    CLI::App* metrics = app.add_subcommand("metrics", "score a PMF against a reference PMF");
    metrics->add_option("--pmf", pmf_path, "observed PMF file")->required();
    metrics->add_option("--ideal", ideal_path, "reference/ideal PMF file")->required();
    metrics->add_option("--correct", correct, "correct outcome bitstring (repeatable)");
    metrics->add_option("--graph", graph_path, "MaxCut edge-list file for ARG");
    metrics->add_option("--out", report_path, "write the report JSON here");
    metrics->add_flag("--verbose", verbose, "also print the unnormalized |p-q| sum");

    int est_subset_size = 2;
    double est_confidence = 0.9999;
    CLI::App* estimate =
        app.add_subcommand("estimate-trials", "trials per CPM for full outcome coverage");
    estimate->add_option("--subset-size", est_subset_size, "CPM size")->required();
    estimate->add_option("--confidence", est_confidence, "coverage confidence in (0,1)");

    int prof_channels = 27;
    double prof_median = 0.027;
    double prof_max = 0.222;
    std::uint64_t prof_seed = 1;
    std::string prof_out;
    CLI::App* profile = app.add_subcommand("profile", "generate a spatial noise profile");
    profile->add_option("--channels", prof_channels, "readout channel count");
    profile->add_option("--median", prof_median, "target median error rate");
    profile->add_option("--max", prof_max, "worst-case error rate");
    profile->add_option("--seed", prof_seed, "profile seed");
    profile->add_option("--out", prof_out, "output profile file")->required();

    try {
        // CLI11 parses argv-style reversed vectors.
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (simulate->parsed()) {
            return cmd_simulate(opt);
        }
        if (pipeline->parsed()) {
            return cmd_pipeline(opt);
        }
        if (reconstruct->parsed()) {
            return cmd_reconstruct(global_path, marginal_paths, out_path, log_path,
                                   detail::make_reconstruction_config(opt));
        }
        if (metrics->parsed()) {
            return cmd_metrics(pmf_path, ideal_path, correct, graph_path, report_path, verbose);
        }
        if (estimate->parsed()) {
            return cmd_estimate_trials(est_subset_size, est_confidence);
        }
        if (profile->parsed()) {
            return cmd_profile(prof_channels, prof_median, prof_max, prof_seed, prof_out);
        }
        std::cerr << "no subcommand given\n";
        return kExitValidation;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const DegenerateUpdateError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
}

}  // namespace jigsaw::cli
