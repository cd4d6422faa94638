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

#include <cmath>
#include <istream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "jigsaw/errors.hpp"
#include "jigsaw/pmf.hpp"

namespace jigsaw {

/// Figure-of-merit values for one experiment. `arg` is present only for
/// MaxCut workloads.
struct MetricReport {
    double pst = 0.0;
    double ist = 0.0;
    double tvd = 0.0;
    double fidelity = 0.0;
    double hellinger = 0.0;
    std::optional<double> arg;
};

/// Probability of successful trial: total mass on the correct outcome(s).
inline double pst(const SparsePmf& p, const std::set<std::string>& correct) {
    double total = 0.0;
    for (const auto& outcome : correct) {
        total += p.probability(outcome);
    }
    return total;
}

/// Inference strength: mass of the most probable correct outcome over mass
/// of the most probable incorrect outcome. Infinity when no incorrect
/// outcome has support; 0 when no correct outcome does.
inline double ist(const SparsePmf& p, const std::set<std::string>& correct) {
    if (p.empty()) {
        throw ValidationError("ist: empty pmf");
    }
    double best_correct = 0.0;
    double best_incorrect = 0.0;
    for (const auto& [outcome, pr] : p.entries()) {
        if (correct.count(outcome)) {
            best_correct = std::max(best_correct, pr);
        } else {
            best_incorrect = std::max(best_incorrect, pr);
        }
    }
    if (best_correct == 0.0) {
        return 0.0;
    }
    if (best_incorrect == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return best_correct / best_incorrect;
}

struct TvdFidelity {
    double tvd = 0.0;
    double fidelity = 0.0;
    /// Unnormalized sum |p - q| (twice the tvd), reported in verbose output.
    double raw_abs_sum = 0.0;
};

/// Total variation distance over the union support, with the standard 1/2
/// normalization so fidelity = 1 - tvd stays within [0, 1].
inline TvdFidelity fidelity(const SparsePmf& p, const SparsePmf& q) {
    if (p.width() != q.width()) {
        throw ValidationError("fidelity: width mismatch");
    }
    double raw = 0.0;
    for (const auto& [outcome, pr] : p.entries()) {
        raw += std::fabs(pr - q.probability(outcome));
    }
    for (const auto& [outcome, qr] : q.entries()) {
        if (p.probability(outcome) == 0.0) {
            raw += qr;
        }
    }
    TvdFidelity out;
    out.raw_abs_sum = raw;
    out.tvd = std::clamp(0.5 * raw, 0.0, 1.0);
    out.fidelity = 1.0 - out.tvd;
    return out;
}

/// A MaxCut problem: vertex v corresponds to qubit v of the measured
/// bitstrings. `optimum` is the known best cut value, the denominator of the
/// approximation ratio.
struct MaxCutInstance {
    struct Edge {
        int u = 0;
        int v = 0;
        double weight = 1.0;
    };
    int vertices = 0;
    std::vector<Edge> edges;
    double optimum = 0.0;

    void validate() const {
        if (vertices < 1) {
            throw ValidationError("maxcut instance needs at least one vertex");
        }
        if (!(optimum > 0.0)) {
            throw ValidationError("maxcut optimum must be positive");
        }
        for (const Edge& e : edges) {
            if (e.u < 0 || e.u >= vertices || e.v < 0 || e.v >= vertices) {
                throw ValidationError("maxcut edge references invalid vertex");
            }
        }
    }

    /// Text format: first line "n m opt", then m lines "u v [w]".
    static MaxCutInstance parse(std::istream& in) {
        MaxCutInstance g;
        std::size_t edge_count = 0;
        if (!(in >> g.vertices >> edge_count >> g.optimum)) {
            throw ValidationError("maxcut header must be 'n m opt'");
        }
        g.edges.reserve(edge_count);
        std::string line;
        std::getline(in, line);  // rest of header line
        while (g.edges.size() < edge_count && std::getline(in, line)) {
            if (line.empty()) {
                continue;
            }
            std::istringstream ls(line);
            Edge e;
            if (!(ls >> e.u >> e.v)) {
                throw ValidationError("maxcut edge line must be 'u v [w]': " + line);
            }
            double w;
            if (ls >> w) {
                e.weight = w;
            }
            g.edges.push_back(e);
        }
        if (g.edges.size() != edge_count) {
            throw ValidationError("maxcut file ended before all edges were read");
        }
        g.validate();
        return g;
    }
};

/// Weighted cut value of one assignment: edges whose endpoints carry
/// different bits.
inline double cut_value(const std::string& outcome, const MaxCutInstance& g) {
    double total = 0.0;
    for (const auto& e : g.edges) {
        if (bit_of(outcome, e.u) != bit_of(outcome, e.v)) {
            total += e.weight;
        }
    }
    return total;
}

/// Mean cut value over the distribution's samples.
inline double maxcut_expectation(const SparsePmf& p, const MaxCutInstance& g) {
    g.validate();
    if (p.width() != g.vertices) {
        throw ValidationError("pmf width does not match maxcut vertex count");
    }
    double total = 0.0;
    for (const auto& [outcome, pr] : p.entries()) {
        total += pr * cut_value(outcome, g);
    }
    return total;
}

/// Approximation ratio gap in percent: 100 * (AR_ideal - AR_real) / AR_ideal
/// with AR = maxcut_expectation / optimum. Negative values (the observed
/// distribution cutting better than the ideal) are returned as-is.
inline double approximation_ratio_gap(const SparsePmf& ideal, const SparsePmf& observed,
                                      const MaxCutInstance& g) {
    const double ar_ideal = maxcut_expectation(ideal, g) / g.optimum;
    const double ar_real = maxcut_expectation(observed, g) / g.optimum;
    if (ar_ideal == 0.0) {
        throw ValidationError("ideal approximation ratio is zero");
    }
    return 100.0 * (ar_ideal - ar_real) / ar_ideal;
}

/// Full report of one observed distribution against the ideal one.
inline MetricReport evaluate_metrics(const SparsePmf& observed, const SparsePmf& ideal,
                                     const std::set<std::string>& correct,
                                     const MaxCutInstance* graph = nullptr) {
    MetricReport report;
    report.pst = pst(observed, correct);
    report.ist = ist(observed, correct);
    const TvdFidelity tf = fidelity(observed, ideal);
    report.tvd = tf.tvd;
    report.fidelity = tf.fidelity;
    report.hellinger = hellinger(observed, ideal);
    if (graph) {
        report.arg = approximation_ratio_gap(ideal, observed, *graph);
    }
    return report;
}

}  // namespace jigsaw
