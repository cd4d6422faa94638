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

#include <algorithm>
#include <cmath>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "jigsaw/errors.hpp"
#include "jigsaw/parallel.hpp"
#include "jigsaw/pmf.hpp"

namespace jigsaw {

/// How a marginal probability pr_y scales the update coefficients.
/// kOdds uses pr_y / (1 - pr_y); kPlain uses pr_y directly. kOdds is the
/// default. kPlain performs an exact marginal-replacement (IPF-style) step:
/// it is the variant for which marginals consistent with the prior are a
/// strict fixed point, and is exposed for comparison runs.
enum class MarginalWeight {
    kOdds,
    kPlain,
};

struct ReconstructionConfig {
    /// Stop when the Hellinger distance between successive rounds changes by
    /// less than this (or when a round leaves the PMF essentially unchanged).
    double hellinger_tolerance = 1e-4;
    int max_rounds = 100;
    /// Marginal probabilities are clamped to <= 1 - odds_clamp so delta
    /// marginals do not divide by zero in the odds factor.
    double odds_clamp = 1e-9;
    MarginalWeight weight = MarginalWeight::kOdds;

    void validate() const {
        if (!(hellinger_tolerance > 0.0)) {
            throw ValidationError("hellinger_tolerance must be > 0");
        }
        if (max_rounds < 1) {
            throw ValidationError("max_rounds must be >= 1");
        }
        if (!(odds_clamp > 0.0 && odds_clamp < 1.0)) {
            throw ValidationError("odds_clamp must be in (0, 1)");
        }
    }
};

/// Per-round Hellinger distances between consecutive PMFs, recorded for the
/// convergence log emitted by the CLI.
struct ConvergenceLog {
    std::vector<double> round_distance;
    bool converged = false;
    int rounds() const { return static_cast<int>(round_distance.size()); }
};

namespace detail {

inline void validate_marginal(const SparsePmf& prior, const Marginal& m) {
    validate_qubit_list(m.qubits, prior.width());
    if (m.pmf.width() != static_cast<int>(m.qubits.size())) {
        throw ValidationError("marginal pmf width " + std::to_string(m.pmf.width()) +
                              " does not match its qubit list size " +
                              std::to_string(m.qubits.size()));
    }
}

inline std::string qubits_to_string(const std::vector<int>& qubits) {
    std::string s = "[";
    for (std::size_t i = 0; i < qubits.size(); ++i) {
        if (i) {
            s += ",";
        }
        s += std::to_string(qubits[i]);
    }
    return s + "]";
}

/// Round state: the prior's support in a fixed (sorted) order plus aligned
/// probabilities. Reconstruction never adds outcomes and the additive merge
/// never removes them, so the support is immutable across rounds and every
/// posterior is just a dense weight vector over it.
struct RoundState {
    int width = 0;
    std::optional<std::uint64_t> trials;
    std::vector<std::string> outcomes;
    std::vector<double> probabilities;

    static RoundState from_pmf(const SparsePmf& pmf) {
        RoundState state;
        state.width = pmf.width();
        state.trials = pmf.total_trials();
        auto sorted = pmf.sorted_entries();
        state.outcomes.reserve(sorted.size());
        state.probabilities.reserve(sorted.size());
        for (auto& [outcome, pr] : sorted) {
            state.outcomes.push_back(std::move(outcome));
            state.probabilities.push_back(pr);
        }
        return state;
    }

    SparsePmf to_pmf() const {
        SparsePmf::EntryMap entries;
        entries.reserve(outcomes.size());
        for (std::size_t i = 0; i < outcomes.size(); ++i) {
            entries.emplace(outcomes[i], probabilities[i]);
        }
        return SparsePmf::from_probabilities(width, std::move(entries), trials);
    }
};

/// One marginal's posterior weights over the fixed support: the candidate
/// group of each outcome is keyed by its reduced bits, the coefficient is
/// the prior probability normalized within the group, and the scale is the
/// marginal's odds (or plain probability). Outcomes whose reduced value the
/// marginal never observed get weight zero. Normalized to sum 1.
inline std::vector<double> update_weights(const RoundState& state, const Marginal& m,
                                          const ReconstructionConfig& cfg) {
    const auto& marginal_entries = m.pmf.entries();
    // Group ids and scales from the (small) marginal table.
    std::unordered_map<std::string, int> group_of;
    group_of.reserve(marginal_entries.size());
    std::vector<double> group_scale;
    for (const auto& [reduced, pr_y_raw] : marginal_entries) {
        const double pr_y = std::min(pr_y_raw, 1.0 - cfg.odds_clamp);
        group_of.emplace(reduced, static_cast<int>(group_scale.size()));
        group_scale.push_back(cfg.weight == MarginalWeight::kOdds ? pr_y / (1.0 - pr_y) : pr_y);
    }

    std::vector<int> group_index(state.outcomes.size(), -1);
    std::vector<double> group_mass(group_scale.size(), 0.0);
    for (std::size_t i = 0; i < state.outcomes.size(); ++i) {
        const auto it = group_of.find(reduce(state.outcomes[i], m.qubits));
        if (it != group_of.end()) {
            group_index[i] = it->second;
            group_mass[static_cast<std::size_t>(it->second)] += state.probabilities[i];
        }
    }

    std::vector<double> weights(state.outcomes.size(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < state.outcomes.size(); ++i) {
        const int g = group_index[i];
        if (g < 0) {
            continue;  // weight 0: the marginal saw no mass there
        }
        const double w = state.probabilities[i] / group_mass[static_cast<std::size_t>(g)] *
                         group_scale[static_cast<std::size_t>(g)];
        weights[i] = w;
        total += w;
    }
    if (total <= 0.0) {
        throw DegenerateUpdateError("bayesian update with marginal over qubits " +
                                    qubits_to_string(m.qubits) +
                                    " is disjoint from the prior's support");
    }
    for (double& w : weights) {
        w /= total;
    }
    return weights;
}

/// Additive merge of one round: P_out = normalize(P + sum_j P_post_j),
/// accumulated in input-list order so results are reproducible
/// bit-for-bit.
inline std::vector<double> merge_round(const std::vector<double>& prior,
                                       const std::vector<std::vector<double>>& posteriors) {
    std::vector<double> merged = prior;
    for (const auto& weights : posteriors) {
        for (std::size_t i = 0; i < merged.size(); ++i) {
            merged[i] += weights[i];
        }
    }
    double total = 0.0;
    for (double v : merged) {
        total += v;
    }
    for (double& v : merged) {
        v /= total;
    }
    return merged;
}

/// Hellinger distance between two aligned probability vectors.
inline double aligned_hellinger(const std::vector<double>& a, const std::vector<double>& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = std::sqrt(a[i]) - std::sqrt(b[i]);
        sum += d * d;
    }
    return std::clamp(std::sqrt(0.5 * sum), 0.0, 1.0);
}

}  // namespace detail

/// One Bayesian update of the prior with a single marginal.
///
/// For each marginal entry (B_y, pr_y), the candidates are the prior
/// outcomes whose bits at the marginal's qubit positions equal B_y. Each
/// candidate's update coefficient is its prior probability normalized within
/// the candidate group, and its posterior weight is that coefficient scaled
/// by pr_y / (1 - pr_y) (or plain pr_y, see MarginalWeight). Prior outcomes
/// whose reduced value the marginal never observed get weight zero. The
/// weights are normalized once at the end, which makes the per-entry order
/// irrelevant because every outcome belongs to exactly one candidate group.
///
/// The support of the result is contained in the prior's support. Throws
/// DegenerateUpdateError if every weight is zero (the marginal is disjoint
/// from the prior's reduced outcomes).
inline SparsePmf bayesian_update(const SparsePmf& prior, const Marginal& m,
                                 const ReconstructionConfig& cfg = {}) {
    cfg.validate();
    detail::validate_marginal(prior, m);
    const detail::RoundState state = detail::RoundState::from_pmf(prior);
    const std::vector<double> weights = detail::update_weights(state, m, cfg);
    SparsePmf::EntryMap entries;
    entries.reserve(state.outcomes.size());
    for (std::size_t i = 0; i < state.outcomes.size(); ++i) {
        if (weights[i] > 0.0) {
            entries.emplace(state.outcomes[i], weights[i]);
        }
    }
    return SparsePmf::from_probabilities(prior.width(), std::move(entries), prior.total_trials());
}

/// Iterated Bayesian reconstruction.
///
/// Each round computes one posterior per marginal, all from the same prior
/// (which is what makes the marginal order irrelevant), merges them
/// additively with the prior, and normalizes. Rounds repeat until the
/// Hellinger distance between successive PMFs stops changing (the round
/// distance itself, or its change from the previous round, falls below the
/// tolerance) or max_rounds is reached. With no marginals the prior is
/// returned unchanged.
inline SparsePmf bayesian_reconstruction(const SparsePmf& prior,
                                         const std::vector<Marginal>& marginals,
                                         const ReconstructionConfig& cfg = {},
                                         ConvergenceLog* log = nullptr) {
    cfg.validate();
    if (log) {
        *log = ConvergenceLog{};
    }
    if (marginals.empty()) {
        if (log) {
            log->converged = true;
        }
        return prior;
    }
    for (const Marginal& m : marginals) {
        detail::validate_marginal(prior, m);
    }

    detail::RoundState state = detail::RoundState::from_pmf(prior);
    double previous_distance = std::numeric_limits<double>::infinity();
    for (int round = 0; round < cfg.max_rounds; ++round) {
        std::vector<std::vector<double>> posteriors(marginals.size());
        parallel_for(marginals.size(), [&](std::size_t j) {
            posteriors[j] = detail::update_weights(state, marginals[j], cfg);
        });
        std::vector<double> next = detail::merge_round(state.probabilities, posteriors);
        const double distance = detail::aligned_hellinger(state.probabilities, next);
        if (log) {
            log->round_distance.push_back(distance);
        }
        state.probabilities = std::move(next);
        if (distance <= cfg.hellinger_tolerance ||
            std::fabs(distance - previous_distance) < cfg.hellinger_tolerance) {
            if (log) {
                log->converged = true;
            }
            break;
        }
        previous_distance = distance;
    }
    return state.to_pmf();
}

/// Marginals grouped by subset size, ordered descending so reconstruction
/// consumes the largest (most correlated) subsets first.
struct LayerSet {
    struct Layer {
        int size = 0;
        std::vector<Marginal> marginals;
    };
    std::vector<Layer> layers;

    /// Groups a flat marginal list by subset size, descending.
    static LayerSet group_by_size(const std::vector<Marginal>& marginals) {
        std::map<int, std::vector<Marginal>, std::greater<int>> by_size;
        for (const Marginal& m : marginals) {
            by_size[static_cast<int>(m.qubits.size())].push_back(m);
        }
        LayerSet set;
        for (auto& [size, group] : by_size) {
            set.layers.push_back(Layer{size, std::move(group)});
        }
        return set;
    }
};

/// Top-down multi-layer reconstruction: the prior is first refined with the
/// largest-subset layer, then each successively smaller layer refines the
/// result. Layers supplied out of order are sorted descending with a warning
/// rather than rejected. A single layer is identical to
/// bayesian_reconstruction.
inline SparsePmf reconstruct_multilayer(const SparsePmf& prior, const LayerSet& layers,
                                        const ReconstructionConfig& cfg = {},
                                        std::vector<std::pair<int, ConvergenceLog>>* logs = nullptr) {
    cfg.validate();
    if (logs) {
        logs->clear();
    }
    LayerSet ordered = layers;
    for (const auto& layer : ordered.layers) {
        for (const Marginal& m : layer.marginals) {
            if (static_cast<int>(m.qubits.size()) != layer.size) {
                throw ValidationError("layer of size " + std::to_string(layer.size) +
                                      " contains a marginal over " +
                                      std::to_string(m.qubits.size()) + " qubits");
            }
        }
    }
    const bool sorted = std::is_sorted(
        ordered.layers.begin(), ordered.layers.end(),
        [](const LayerSet::Layer& a, const LayerSet::Layer& b) { return a.size > b.size; });
    if (!sorted) {
        std::cerr << "jigsaw: layers were not in descending subset-size order; sorting\n";
        std::stable_sort(
            ordered.layers.begin(), ordered.layers.end(),
            [](const LayerSet::Layer& a, const LayerSet::Layer& b) { return a.size > b.size; });
    }
    for (std::size_t i = 1; i < ordered.layers.size(); ++i) {
        if (ordered.layers[i].size == ordered.layers[i - 1].size) {
            throw ValidationError("duplicate layer size " + std::to_string(ordered.layers[i].size));
        }
    }

    SparsePmf current = prior;
    for (const auto& layer : ordered.layers) {
        ConvergenceLog log;
        current = bayesian_reconstruction(current, layer.marginals, cfg, &log);
        if (logs) {
            logs->emplace_back(layer.size, std::move(log));
        }
    }
    return current;
}

}  // namespace jigsaw
