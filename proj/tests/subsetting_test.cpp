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

#include "jigsaw/subsetting.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace jigsaw;

namespace {

std::set<std::set<int>> as_index_sets(const SubsetPlan& plan) {
    std::set<std::set<int>> out;
    for (const auto& subset : plan.flattened()) {
        out.insert(std::set<int>(subset.begin(), subset.end()));
    }
    return out;
}

}  // namespace

TEST(SlidingWindow, FourQubitExample) {
    const SubsetPlan plan = sliding_window_plan(4, 2);
    EXPECT_EQ(plan.cpm_count(), 4u);
    const std::set<std::set<int>> expected = {{0, 1}, {1, 2}, {2, 3}, {0, 3}};
    EXPECT_EQ(as_index_sets(plan), expected);
}

TEST(SlidingWindow, DegenerateWrapDeduplicates) {
    const SubsetPlan plan = sliding_window_plan(2, 2);
    EXPECT_EQ(plan.cpm_count(), 1u);
    EXPECT_EQ(as_index_sets(plan), (std::set<std::set<int>>{{0, 1}}));
}

TEST(SlidingWindow, MatchesEnumerationOracle) {
    // Independent enumeration of the wrap-around windows for n=5, s=3.
    const int n = 5;
    const int s = 3;
    std::set<std::set<int>> expected;
    for (int i = 0; i < n; ++i) {
        std::set<int> window;
        for (int j = 0; j < s; ++j) {
            window.insert((i + j) % n);
        }
        expected.insert(window);
    }
    EXPECT_EQ(expected.size(), 5u);
    const SubsetPlan plan = sliding_window_plan(n, s);
    EXPECT_EQ(plan.cpm_count(), 5u);
    EXPECT_EQ(as_index_sets(plan), expected);
}

TEST(SlidingWindow, PairPlanCoversEveryQubitTwice) {
    for (int n = 3; n <= 12; ++n) {
        const SubsetPlan plan = sliding_window_plan(n, 2);
        EXPECT_EQ(plan.cpm_count(), static_cast<std::size_t>(n));
        std::vector<int> hits(static_cast<std::size_t>(n), 0);
        for (const auto& subset : plan.flattened()) {
            for (int q : subset) {
                ++hits[static_cast<std::size_t>(q)];
            }
        }
        for (int h : hits) {
            EXPECT_EQ(h, 2);
        }
    }
}

TEST(SlidingWindow, RejectsBadSizes) {
    EXPECT_THROW(sliding_window_plan(4, 1), ValidationError);
    EXPECT_THROW(sliding_window_plan(4, 5), ValidationError);
}

TEST(SlidingWindow, SubsetsAreCanonicalDescending) {
    const SubsetPlan plan = sliding_window_plan(4, 2);
    for (const auto& subset : plan.flattened()) {
        EXPECT_TRUE(std::is_sorted(subset.begin(), subset.end(), std::greater<int>()));
    }
}

TEST(MultilayerPlan, DefaultsGiveFortyCpms) {
    const SubsetPlan plan = multilayer_plan(10);
    EXPECT_EQ(plan.layers.size(), 4u);
    EXPECT_EQ(plan.cpm_count(), 40u);
    // Layers descending: 5, 4, 3, 2.
    EXPECT_EQ(plan.layers[0].size, 5);
    EXPECT_EQ(plan.layers[3].size, 2);
    for (const auto& layer : plan.layers) {
        EXPECT_EQ(layer.subsets.size(), 10u);
    }
}

TEST(MultilayerPlan, SingleSizeMatchesSlidingPlan) {
    const SubsetPlan multi = multilayer_plan(6, 2, 2);
    const SubsetPlan single = sliding_window_plan(6, 2);
    EXPECT_EQ(as_index_sets(multi), as_index_sets(single));
}

TEST(MultilayerPlan, TopLayerCollapsesForFullWidth) {
    const SubsetPlan plan = multilayer_plan(4, 2, 4);
    EXPECT_EQ(plan.layers[0].size, 4);
    EXPECT_EQ(plan.layers[0].subsets.size(), 1u);
}

TEST(MultilayerPlan, RejectsOversizedLayer) {
    EXPECT_THROW(multilayer_plan(4, 2, 5), ValidationError);
    EXPECT_THROW(multilayer_plan(10, 3, 2), ValidationError);
}

TEST(RandomPlan, TwelveQubitSensitivityStudyShape) {
    const SubsetPlan plan = random_plan(12, 2, 12, 42);
    EXPECT_EQ(plan.cpm_count(), 12u);
    EXPECT_NO_THROW(plan.validate());  // distinct + full coverage
}

TEST(RandomPlan, ExhaustiveCountReturnsAllPairs) {
    const SubsetPlan plan = random_plan(4, 2, 6, 1);
    EXPECT_EQ(plan.cpm_count(), 6u);
    EXPECT_EQ(as_index_sets(plan).size(), 6u);
}

TEST(RandomPlan, DeterministicUnderSeed) {
    const SubsetPlan a = random_plan(10, 3, 7, 1234);
    const SubsetPlan b = random_plan(10, 3, 7, 1234);
    EXPECT_EQ(a.flattened(), b.flattened());
    const SubsetPlan c = random_plan(10, 3, 7, 1235);
    EXPECT_NE(a.flattened(), c.flattened());
}

TEST(RandomPlan, RejectsImpossibleRequests) {
    EXPECT_THROW(random_plan(4, 2, 7, 1), ValidationError);   // only C(4,2)=6 exist
    EXPECT_THROW(random_plan(12, 2, 5, 1), ValidationError);  // 5*2 < 12, no coverage
}

TEST(SplitTrials, ExactPowerOfTwoSplit) {
    const SubsetPlan plan = sliding_window_plan(4, 2);
    const TrialBudget budget = split_trials(32768, plan);
    EXPECT_EQ(budget.global_trials, 16384u);
    EXPECT_EQ(budget.subset_trials, 16384u);
    ASSERT_EQ(budget.per_cpm.size(), 4u);
    for (const auto t : budget.per_cpm) {
        EXPECT_EQ(t, 4096u);
    }
}

TEST(SplitTrials, RemainderGoesToEarliestCpms) {
    const SubsetPlan plan = sliding_window_plan(3, 2);
    const TrialBudget budget = split_trials(1000, plan);
    EXPECT_EQ(budget.global_trials, 500u);
    ASSERT_EQ(budget.per_cpm.size(), 3u);
    EXPECT_EQ(budget.per_cpm[0], 167u);
    EXPECT_EQ(budget.per_cpm[1], 167u);
    EXPECT_EQ(budget.per_cpm[2], 166u);
}

TEST(SplitTrials, TunableFraction) {
    SubsetPlan two_cpms;
    two_cpms.width = 3;
    two_cpms.layers.push_back(SubsetPlan::Layer{2, {{1, 0}, {2, 1}}});
    two_cpms.validate();
    const TrialBudget budget = split_trials(1000, two_cpms, 0.25);
    EXPECT_EQ(budget.global_trials, 250u);
    ASSERT_EQ(budget.per_cpm.size(), 2u);
    EXPECT_EQ(budget.per_cpm[0], 375u);
    EXPECT_EQ(budget.per_cpm[1], 375u);
}

TEST(SplitTrials, ConservesTotal) {
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        const int n = 3 + static_cast<int>(rng.below(10));
        const SubsetPlan plan = sliding_window_plan(n, 2);
        const std::uint64_t total = 1 + rng.below(100000);
        const double fraction = rng.next_double();
        const TrialBudget budget = split_trials(total, plan, fraction);
        std::uint64_t sum = budget.global_trials;
        for (const auto t : budget.per_cpm) {
            sum += t;
        }
        EXPECT_EQ(sum, total);
        for (std::size_t j = 1; j < budget.per_cpm.size(); ++j) {
            const auto hi = budget.per_cpm[j - 1];
            const auto lo = budget.per_cpm[j];
            EXPECT_LE(hi - lo, 1u);  // per-CPM trials equal within 1
            EXPECT_GE(hi, lo);
        }
    }
}

TEST(EstimateTrials, AppendixWorkedNumber) {
    EXPECT_EQ(estimate_trials(2, 0.9999), 148u);
}

TEST(EstimateTrials, SmallConfidenceSeriesLimit) {
    // -ln(1-P) ~ P for tiny P, so the estimate behaves like 16*P for s=2.
    EXPECT_EQ(estimate_trials(2, 1e-6), 1u);
    const double p = 1e-4;
    const double t = static_cast<double>(estimate_trials(2, p));
    EXPECT_NEAR(t, std::ceil(16.0 * p), 1.0);
}

TEST(EstimateTrials, MatchesFormulaAndPerOutcomeRelation) {
    for (int s = 1; s <= 8; ++s) {
        for (const double p : {0.5, 0.9, 0.99, 0.9999}) {
            const double n = std::ldexp(1.0, s);
            const double exact = -std::log1p(-p) * n * n;
            const double t = static_cast<double>(estimate_trials(s, p));
            EXPECT_GE(t, exact);
            EXPECT_LT(t - exact, 1.0);  // ceil
            // Per-outcome relation: t/N tracks -ln(1-P)*N.
            EXPECT_NEAR(t / n, -std::log1p(-p) * n, 1.0);
        }
    }
}

TEST(EstimateTrials, MonotoneInSizeAndConfidence) {
    for (int s = 1; s < 8; ++s) {
        EXPECT_LT(estimate_trials(s, 0.99), estimate_trials(s + 1, 0.99));
    }
    for (const double p : {0.5, 0.9, 0.99}) {
        EXPECT_LT(estimate_trials(3, p), estimate_trials(3, p + 0.009));
    }
}

TEST(EstimateTrials, RejectsBadConfidence) {
    EXPECT_THROW(estimate_trials(2, 0.0), ValidationError);
    EXPECT_THROW(estimate_trials(2, 1.0), ValidationError);
    EXPECT_THROW(estimate_trials(0, 0.5), ValidationError);
}

TEST(EstimateTrials, MonteCarloCouponCollectorOracle) {
    // s = 5: the formula says 9432 trials reach every one of the 32 outcomes
    // with very high probability; verify by direct simulation.
    const std::uint64_t trials = estimate_trials(5, 0.9999);
    EXPECT_EQ(trials, 9432u);
    Rng rng(2024);
    const int repetitions = 1000;
    int covered = 0;
    for (int rep = 0; rep < repetitions; ++rep) {
        std::uint32_t seen = 0;
        for (std::uint64_t t = 0; t < trials; ++t) {
            seen |= 1u << rng.below(32);
        }
        if (seen == 0xFFFFFFFFu) {
            ++covered;
        }
    }
    EXPECT_GE(covered, static_cast<int>(repetitions * 0.999));
}
