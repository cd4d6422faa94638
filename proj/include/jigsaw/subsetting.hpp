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
#include <cstdint>
#include <limits>
#include <set>
#include <vector>

#include "jigsaw/errors.hpp"
#include "jigsaw/random.hpp"

namespace jigsaw {

/// Which qubits each circuit with partial measurements (CPM) measures.
/// Layers are kept in descending subset-size order, matching the
/// reconstruction ordering. Qubit lists are canonical descending, the same
/// order used when marginal count files are emitted.
struct SubsetPlan {
    struct Layer {
        int size = 0;
        std::vector<std::vector<int>> subsets;
    };
    int width = 0;
    std::vector<Layer> layers;

    std::size_t cpm_count() const {
        std::size_t n = 0;
        for (const auto& layer : layers) {
            n += layer.subsets.size();
        }
        return n;
    }

    /// CPMs in layer-major order (largest layer first, window order within).
    std::vector<std::vector<int>> flattened() const {
        std::vector<std::vector<int>> out;
        out.reserve(cpm_count());
        for (const auto& layer : layers) {
            out.insert(out.end(), layer.subsets.begin(), layer.subsets.end());
        }
        return out;
    }

    /// Checks that subsets are distinct index sets, sizes match their layer,
    /// indices are in range, and every program qubit is covered at least once.
    void validate() const {
        if (width < 2) {
            throw ValidationError("plan width must be >= 2");
        }
        std::set<std::vector<int>> seen;
        std::vector<bool> covered(static_cast<std::size_t>(width), false);
        for (const auto& layer : layers) {
            for (const auto& subset : layer.subsets) {
                if (static_cast<int>(subset.size()) != layer.size) {
                    throw ValidationError("subset size does not match its layer");
                }
                std::vector<int> key = subset;
                std::sort(key.begin(), key.end());
                if (std::adjacent_find(key.begin(), key.end()) != key.end()) {
                    throw ValidationError("subset contains duplicate qubit indices");
                }
                if (key.front() < 0 || key.back() >= width) {
                    throw ValidationError("subset index out of range");
                }
                if (!seen.insert(key).second) {
                    throw ValidationError("duplicate subset in plan");
                }
                for (int q : key) {
                    covered[static_cast<std::size_t>(q)] = true;
                }
            }
        }
        if (!std::all_of(covered.begin(), covered.end(), [](bool b) { return b; })) {
            throw ValidationError("plan does not measure every program qubit at least once");
        }
    }
};

namespace detail {

inline std::vector<int> descending(std::vector<int> subset) {
    std::sort(subset.begin(), subset.end(), std::greater<int>());
    return subset;
}

inline std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) {
        return 0;
    }
    k = std::min(k, n - k);
    std::uint64_t result = 1;
    for (int i = 1; i <= k; ++i) {
        const std::uint64_t numer = static_cast<std::uint64_t>(n - k + i);
        // Saturate rather than overflow; plans never get near this anyway.
        if (result > std::numeric_limits<std::uint64_t>::max() / numer) {
            return std::numeric_limits<std::uint64_t>::max();
        }
        result = result * numer / static_cast<std::uint64_t>(i);
    }
    return result;
}

}  // namespace detail

/// The default CPM generator: n windows (q_i ... q_{i+s-1 mod n}) including
/// the wrap-around, deduplicated as index sets. For s=2 and n>=3 this yields
/// exactly n distinct pairs covering every qubit twice; small n collapses
/// (n=2, s=2 gives a single CPM).
inline SubsetPlan sliding_window_plan(int width, int subset_size) {
    if (subset_size < 2) {
        throw ValidationError("subset size must be >= 2; single-qubit subsets capture no correlation");
    }
    if (subset_size > width) {
        throw ValidationError("subset size exceeds program width");
    }
    SubsetPlan plan;
    plan.width = width;
    SubsetPlan::Layer layer;
    layer.size = subset_size;
    std::set<std::vector<int>> seen;
    for (int i = 0; i < width; ++i) {
        std::vector<int> window(static_cast<std::size_t>(subset_size));
        for (int j = 0; j < subset_size; ++j) {
            window[static_cast<std::size_t>(j)] = (i + j) % width;
        }
        std::vector<int> canonical = detail::descending(std::move(window));
        if (seen.insert(canonical).second) {
            layer.subsets.push_back(std::move(canonical));
        }
    }
    plan.layers.push_back(std::move(layer));
    plan.validate();
    return plan;
}

/// Union of sliding-window plans for every size in [s_min, s_max], recorded
/// as layers in descending size order.
inline SubsetPlan multilayer_plan(int width, int s_min = 2, int s_max = 5) {
    if (s_min < 2 || s_min > s_max) {
        throw ValidationError("layer bounds must satisfy 2 <= s_min <= s_max");
    }
    if (s_max > width) {
        throw ValidationError("s_max exceeds program width");
    }
    SubsetPlan plan;
    plan.width = width;
    for (int s = s_max; s >= s_min; --s) {
        SubsetPlan single = sliding_window_plan(width, s);
        plan.layers.push_back(std::move(single.layers.front()));
    }
    plan.validate();
    return plan;
}

/// `count` distinct size-s subsets drawn uniformly from the C(n, s)
/// possibilities, redrawn as a group until every qubit is covered at least
/// once. Deterministic for a given seed.
inline SubsetPlan random_plan(int width, int subset_size, int count, std::uint64_t seed) {
    if (subset_size < 2 || subset_size > width) {
        throw ValidationError("subset size must be in [2, width]");
    }
    if (count < 1) {
        throw ValidationError("cpm count must be >= 1");
    }
    const std::uint64_t possible = detail::binomial(width, subset_size);
    if (static_cast<std::uint64_t>(count) > possible) {
        throw ValidationError("requested " + std::to_string(count) + " subsets but only " +
                              std::to_string(possible) + " exist");
    }
    if (static_cast<std::int64_t>(count) * subset_size < width) {
        throw ValidationError("coverage impossible: count * subset_size < width");
    }

    Rng rng(seed);
    std::vector<int> indices(static_cast<std::size_t>(width));
    constexpr int kMaxAttempts = 100000;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        std::set<std::vector<int>> chosen;
        std::vector<bool> covered(static_cast<std::size_t>(width), false);
        while (static_cast<int>(chosen.size()) < count) {
            // Partial Fisher-Yates draw of `subset_size` distinct indices.
            for (int i = 0; i < width; ++i) {
                indices[static_cast<std::size_t>(i)] = i;
            }
            std::vector<int> subset(static_cast<std::size_t>(subset_size));
            for (int j = 0; j < subset_size; ++j) {
                const auto pick =
                    static_cast<std::size_t>(j) + rng.below(static_cast<std::uint64_t>(width - j));
                std::swap(indices[static_cast<std::size_t>(j)], indices[pick]);
                subset[static_cast<std::size_t>(j)] = indices[static_cast<std::size_t>(j)];
            }
            chosen.insert(detail::descending(std::move(subset)));
        }
        for (const auto& subset : chosen) {
            for (int q : subset) {
                covered[static_cast<std::size_t>(q)] = true;
            }
        }
        if (std::all_of(covered.begin(), covered.end(), [](bool b) { return b; })) {
            SubsetPlan plan;
            plan.width = width;
            SubsetPlan::Layer layer;
            layer.size = subset_size;
            layer.subsets.assign(chosen.begin(), chosen.end());
            plan.layers.push_back(std::move(layer));
            plan.validate();
            return plan;
        }
    }
    throw ValidationError("random plan failed to cover all qubits after " +
                          std::to_string(kMaxAttempts) + " attempts");
}

/// Trial allocation: a global/subset split plus an even per-CPM division.
struct TrialBudget {
    std::uint64_t total = 0;
    std::uint64_t global_trials = 0;
    std::uint64_t subset_trials = 0;
    std::vector<std::uint64_t> per_cpm;  // aligned with SubsetPlan::flattened()
};

/// Splits the budget between global mode and the CPMs. The default is the
/// even 50/50 split; `global_fraction` tunes it. Subset trials are divided
/// evenly across CPMs with the remainder going to the earliest ones.
/// Conserves the total exactly.
inline TrialBudget split_trials(std::uint64_t total, const SubsetPlan& plan,
                                double global_fraction = 0.5) {
    if (total == 0) {
        throw ValidationError("trial budget must be positive");
    }
    if (!(global_fraction >= 0.0 && global_fraction <= 1.0)) {
        throw ValidationError("global fraction must be in [0, 1]");
    }
    const std::size_t cpms = plan.cpm_count();
    if (cpms == 0) {
        throw ValidationError("plan has no CPMs");
    }
    TrialBudget budget;
    budget.total = total;
    budget.global_trials =
        static_cast<std::uint64_t>(std::floor(static_cast<double>(total) * global_fraction));
    budget.subset_trials = total - budget.global_trials;
    const std::uint64_t base = budget.subset_trials / cpms;
    const std::uint64_t remainder = budget.subset_trials % cpms;
    budget.per_cpm.assign(cpms, base);
    for (std::uint64_t i = 0; i < remainder; ++i) {
        ++budget.per_cpm[static_cast<std::size_t>(i)];
    }
    return budget;
}

/// Trials required to observe every s-qubit outcome at least once with the
/// given confidence, assuming a uniform local distribution:
/// ceil(-ln(1 - confidence) * (2^s)^2).
inline std::uint64_t estimate_trials(int subset_size, double confidence = 0.9999) {
    if (subset_size < 1 || subset_size > 31) {
        throw ValidationError("subset size must be in [1, 31]");
    }
    if (!(confidence > 0.0 && confidence < 1.0)) {
        throw ValidationError("confidence must be in (0, 1)");
    }
    const double n_outcomes = std::ldexp(1.0, subset_size);  // 2^s
    const double t = -std::log1p(-confidence) * n_outcomes * n_outcomes;
    return static_cast<std::uint64_t>(std::ceil(t));
}

}  // namespace jigsaw
