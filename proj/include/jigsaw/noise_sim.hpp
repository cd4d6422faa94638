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
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "jigsaw/errors.hpp"
#include "jigsaw/metrics.hpp"
#include "jigsaw/parallel.hpp"
#include "jigsaw/pmf.hpp"
#include "jigsaw/random.hpp"
#include "jigsaw/reconstruction.hpp"
#include "jigsaw/subsetting.hpp"

namespace jigsaw {

/// Crosstalk inflation slope c in kappa(k) = 1 + c*(k-1), calibrated so that
/// measuring 10 qubits simultaneously inflates error rates by 1.26x.
constexpr double kDefaultCrosstalkSlope = 0.26 / 9.0;

/// Per-channel asymmetric readout errors plus a crosstalk inflation rule.
/// eps01 is P(read 1 | true 0), eps10 is P(read 0 | true 1). Crosstalk is a
/// scalar multiplier on both rates that grows with the number of qubits
/// measured simultaneously; the functional form is a simple monotone
/// surrogate and deliberately pluggable via the slope.
struct NoiseProfile {
    struct Channel {
        double eps01 = 0.0;
        double eps10 = 0.0;
    };
    std::vector<Channel> channels;
    double crosstalk_slope = kDefaultCrosstalkSlope;

    /// kappa(k): 1 for isolated measurement, non-decreasing in k.
    double crosstalk(int measured_count) const {
        if (measured_count < 1) {
            throw ValidationError("crosstalk requires at least one measured qubit");
        }
        return 1.0 + crosstalk_slope * (measured_count - 1);
    }

    double mean_error(int channel) const {
        const auto& c = channels.at(static_cast<std::size_t>(channel));
        return 0.5 * (c.eps01 + c.eps10);
    }

    void validate() const {
        if (channels.empty()) {
            throw ValidationError("noise profile has no channels");
        }
        if (crosstalk_slope < 0.0) {
            throw ValidationError("crosstalk slope must be >= 0");
        }
        for (const auto& c : channels) {
            if (c.eps01 < 0.0 || c.eps01 >= 0.5 || c.eps10 < 0.0 || c.eps10 >= 0.5) {
                throw ValidationError("channel error rates must lie in [0, 0.5)");
            }
        }
    }

    static NoiseProfile noiseless(int n_channels) {
        NoiseProfile p;
        p.channels.assign(static_cast<std::size_t>(n_channels), Channel{});
        p.crosstalk_slope = 0.0;
        return p;
    }
};

namespace detail {

/// Effective flip probability after crosstalk inflation, clamped strictly
/// below 1/2 so a channel never becomes deterministic-inverting.
inline double inflated(double eps, double kappa) {
    const double limit = std::nextafter(0.5, 0.0);
    return std::min(eps * kappa, limit);
}

}  // namespace detail

/// Injective map from logical program qubits to physical readout channels.
struct QubitAssignment {
    std::map<int, int> channel_of;

    int channel(int logical) const {
        const auto it = channel_of.find(logical);
        if (it == channel_of.end()) {
            throw ValidationError("assignment is missing logical qubit " +
                                  std::to_string(logical));
        }
        return it->second;
    }

    void validate(const NoiseProfile& profile) const {
        std::set<int> used;
        for (const auto& [logical, physical] : channel_of) {
            if (physical < 0 || physical >= static_cast<int>(profile.channels.size())) {
                throw ValidationError("assignment targets nonexistent channel " +
                                      std::to_string(physical));
            }
            if (!used.insert(physical).second) {
                throw ValidationError("assignment is not injective");
            }
        }
    }
};

/// Logical qubit i reads out on channel i. The default for global mode.
inline QubitAssignment identity_assignment(int width) {
    QubitAssignment a;
    for (int q = 0; q < width; ++q) {
        a.channel_of[q] = q;
    }
    return a;
}

/// Channel indices sorted by mean error (ascending), ties broken by lower
/// channel index.
inline std::vector<int> ranked_channels(const NoiseProfile& profile) {
    profile.validate();
    std::vector<int> order(profile.channels.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const double ea = profile.mean_error(a);
        const double eb = profile.mean_error(b);
        return ea < eb || (ea == eb && a < b);
    });
    return order;
}

/// Models CPM recompilation: the measured qubits are remapped onto the
/// lowest-error readout channels, so the effective measurement error is
/// close to the device minimum rather than the average.
inline QubitAssignment best_qubit_assignment(const NoiseProfile& profile,
                                             const std::vector<int>& measured) {
    if (measured.empty()) {
        throw ValidationError("best_qubit_assignment: empty qubit list");
    }
    if (measured.size() > profile.channels.size()) {
        throw ValidationError("more measured qubits than readout channels");
    }
    const std::vector<int> order = ranked_channels(profile);
    QubitAssignment a;
    for (std::size_t j = 0; j < measured.size(); ++j) {
        a.channel_of[measured[j]] = order[j];
    }
    return a;
}

/// Convenience overload assigning logical qubits 0..k-1.
inline QubitAssignment best_qubit_assignment(const NoiseProfile& profile, int k) {
    std::vector<int> qubits(static_cast<std::size_t>(k));
    std::iota(qubits.begin(), qubits.end(), 0);
    return best_qubit_assignment(profile, qubits);
}

/// Workload generator for desk-scale experiments.
struct IdealSpec {
    enum class Kind {
        kGhz,      // {0^n: 0.5, 1^n: 0.5}
        kBv,       // delta at the hidden string
        kPlanted,  // lambda * delta(correct) + (1-lambda) * uniform(support)
        kCustom,   // user-provided pmf
    };

    Kind kind = Kind::kGhz;
    int width = 0;
    std::string secret;                // kBv
    double lambda = 0.0;               // kPlanted
    std::string correct;               // kPlanted
    std::vector<std::string> support;  // kPlanted; includes `correct`
    SparsePmf custom;                  // kCustom

    static IdealSpec ghz(int width) {
        IdealSpec s;
        s.kind = Kind::kGhz;
        s.width = width;
        return s;
    }

    static IdealSpec bv(const std::string& secret) {
        IdealSpec s;
        s.kind = Kind::kBv;
        s.width = static_cast<int>(secret.size());
        s.secret = secret;
        return s;
    }

    static IdealSpec planted(int width, double lambda, const std::string& correct,
                             std::vector<std::string> support) {
        IdealSpec s;
        s.kind = Kind::kPlanted;
        s.width = width;
        s.lambda = lambda;
        s.correct = correct;
        s.support = std::move(support);
        return s;
    }

    static IdealSpec custom_pmf(SparsePmf pmf) {
        IdealSpec s;
        s.kind = Kind::kCustom;
        s.width = pmf.width();
        s.custom = std::move(pmf);
        return s;
    }

    /// The outcome(s) counted as correct by PST/IST. For custom PMFs these
    /// are the modal outcomes (ties within 1e-12).
    std::set<std::string> correct_outcomes() const {
        switch (kind) {
            case Kind::kGhz:
                return {std::string(static_cast<std::size_t>(width), '0'),
                        std::string(static_cast<std::size_t>(width), '1')};
            case Kind::kBv:
                return {secret};
            case Kind::kPlanted:
                return {correct};
            case Kind::kCustom: {
                double best = 0.0;
                for (const auto& [outcome, pr] : custom.entries()) {
                    best = std::max(best, pr);
                }
                std::set<std::string> out;
                for (const auto& [outcome, pr] : custom.entries()) {
                    if (pr >= best - 1e-12) {
                        out.insert(outcome);
                    }
                }
                return out;
            }
        }
        throw ValidationError("unknown workload kind");
    }
};

inline SparsePmf ideal_distribution(const IdealSpec& spec) {
    if (spec.width < 1) {
        throw ValidationError("workload width must be >= 1");
    }
    switch (spec.kind) {
        case IdealSpec::Kind::kGhz: {
            SparsePmf::EntryMap probs;
            probs[std::string(static_cast<std::size_t>(spec.width), '0')] = 0.5;
            probs[std::string(static_cast<std::size_t>(spec.width), '1')] = 0.5;
            return SparsePmf::from_probabilities(spec.width, std::move(probs));
        }
        case IdealSpec::Kind::kBv: {
            if (!is_valid_bitstring(spec.secret, spec.width)) {
                throw ValidationError("bv secret is not a width-" + std::to_string(spec.width) +
                                      " bitstring");
            }
            SparsePmf::EntryMap probs;
            probs[spec.secret] = 1.0;
            return SparsePmf::from_probabilities(spec.width, std::move(probs));
        }
        case IdealSpec::Kind::kPlanted: {
            if (!(spec.lambda >= 0.0 && spec.lambda <= 1.0)) {
                throw ValidationError("planted lambda must be in [0, 1]");
            }
            if (spec.support.empty()) {
                throw ValidationError("planted support must not be empty");
            }
            std::set<std::string> distinct(spec.support.begin(), spec.support.end());
            if (distinct.size() != spec.support.size()) {
                throw ValidationError("planted support contains duplicates");
            }
            if (!distinct.count(spec.correct)) {
                throw ValidationError("planted support must contain the correct outcome");
            }
            const double floor = (1.0 - spec.lambda) / static_cast<double>(spec.support.size());
            SparsePmf::EntryMap probs;
            for (const auto& outcome : spec.support) {
                if (!is_valid_bitstring(outcome, spec.width)) {
                    throw ValidationError("planted outcome '" + outcome + "' has wrong width");
                }
                probs[outcome] = floor + (outcome == spec.correct ? spec.lambda : 0.0);
            }
            return SparsePmf::from_probabilities(spec.width, std::move(probs));
        }
        case IdealSpec::Kind::kCustom:
            if (spec.custom.empty()) {
                throw ValidationError("custom workload has no pmf");
            }
            return spec.custom;
    }
    throw ValidationError("unknown workload kind");
}

/// Random planted workload: `correct` plus support_size-1 chaff outcomes
/// drawn without replacement, deterministic under the seed.
inline IdealSpec random_planted(int width, double lambda, std::size_t support_size,
                                std::uint64_t seed) {
    if (width < 1 || width > 62) {
        throw ValidationError("random planted workload supports widths 1..62");
    }
    const std::uint64_t space = std::uint64_t{1} << width;
    if (support_size < 1 || support_size > space) {
        throw ValidationError("support size exceeds outcome space");
    }
    Rng rng(derive_seed(seed, 0x9D));
    std::set<std::uint64_t> picked;
    while (picked.size() < support_size) {
        picked.insert(rng.below(space));
    }
    std::vector<std::string> support;
    support.reserve(support_size);
    for (std::uint64_t v : picked) {
        std::string s(static_cast<std::size_t>(width), '0');
        for (int q = 0; q < width; ++q) {
            if ((v >> q) & 1ULL) {
                s[static_cast<std::size_t>(width - 1 - q)] = '1';
            }
        }
        support.push_back(std::move(s));
    }
    const std::string correct = support[static_cast<std::size_t>(rng.below(support.size()))];
    return IdealSpec::planted(width, lambda, correct, std::move(support));
}

/// Samples noisy counts for one run: each trial draws a true outcome from
/// the ideal distribution, keeps the measured qubits (in list order), and
/// flips every measured bit independently with its channel's error rate
/// inflated by crosstalk for |measured| simultaneous measurements.
/// Deterministic for a given seed.
inline std::map<std::string, std::uint64_t> sample_counts(
    const SparsePmf& ideal, const NoiseProfile& profile, const QubitAssignment& assignment,
    const std::vector<int>& measured, std::uint64_t trials, std::uint64_t seed) {
    profile.validate();
    validate_qubit_list(measured, ideal.width());
    assignment.validate(profile);
    if (trials == 0) {
        throw ValidationError("sample_counts requires trials > 0");
    }
    const int k = static_cast<int>(measured.size());
    const double kappa = profile.crosstalk(k);

    // Flip probabilities per read position, resolved once.
    std::vector<double> flip0(measured.size());  // true bit 0 -> read 1
    std::vector<double> flip1(measured.size());  // true bit 1 -> read 0
    for (std::size_t j = 0; j < measured.size(); ++j) {
        const auto& ch =
            profile.channels[static_cast<std::size_t>(assignment.channel(measured[j]))];
        flip0[j] = detail::inflated(ch.eps01, kappa);
        flip1[j] = detail::inflated(ch.eps10, kappa);
    }

    PmfSampler sampler(ideal);
    Rng rng(seed);
    std::map<std::string, std::uint64_t> counts;
    std::string read(measured.size(), '0');
    for (std::uint64_t t = 0; t < trials; ++t) {
        const std::string& true_outcome = sampler.sample(rng);
        for (std::size_t j = 0; j < measured.size(); ++j) {
            const char b = bit_of(true_outcome, measured[j]);
            const double p_flip = b == '0' ? flip0[j] : flip1[j];
            const bool flip = rng.bernoulli(p_flip);
            read[j] = flip ? (b == '0' ? '1' : '0') : b;
        }
        ++counts[read];
    }
    return counts;
}

namespace detail {

/// Exact read-out distribution for one fixed true (already reduced) outcome:
/// a product of per-bit flip/keep probabilities over all 2^k read strings.
/// Sums to 1 by construction.
inline void accumulate_readout(const std::string& true_reduced, double mass,
                               const std::vector<double>& flip0, const std::vector<double>& flip1,
                               SparsePmf::EntryMap& acc) {
    const std::size_t k = true_reduced.size();
    std::string read(k, '0');
    const std::uint64_t combos = std::uint64_t{1} << k;
    for (std::uint64_t bits = 0; bits < combos; ++bits) {
        double pr = mass;
        for (std::size_t j = 0; j < k; ++j) {
            const bool flipped = (bits >> j) & 1ULL;
            const char b = true_reduced[j];
            const double p_flip = b == '0' ? flip0[j] : flip1[j];
            pr *= flipped ? p_flip : 1.0 - p_flip;
            read[j] = flipped ? (b == '0' ? '1' : '0') : b;
        }
        if (pr > 0.0) {
            acc[read] += pr;
        }
    }
}

}  // namespace detail

/// Exhaustive-expectation mode: the exact noisy distribution the sampler
/// converges to, enumerated over all 2^k read strings. Limited to 12
/// measured qubits; serves as the brute-force oracle for the channel.
inline SparsePmf expected_distribution(const SparsePmf& ideal, const NoiseProfile& profile,
                                       const QubitAssignment& assignment,
                                       const std::vector<int>& measured) {
    profile.validate();
    validate_qubit_list(measured, ideal.width());
    assignment.validate(profile);
    if (measured.size() > 12) {
        throw ValidationError("exhaustive expectation supports at most 12 measured qubits");
    }
    const double kappa = profile.crosstalk(static_cast<int>(measured.size()));
    std::vector<double> flip0(measured.size());
    std::vector<double> flip1(measured.size());
    for (std::size_t j = 0; j < measured.size(); ++j) {
        const auto& ch =
            profile.channels[static_cast<std::size_t>(assignment.channel(measured[j]))];
        flip0[j] = detail::inflated(ch.eps01, kappa);
        flip1[j] = detail::inflated(ch.eps10, kappa);
    }
    const Marginal reduced_ideal = marginalize(ideal, measured);
    SparsePmf::EntryMap acc;
    for (const auto& [outcome, pr] : reduced_ideal.pmf.entries()) {
        detail::accumulate_readout(outcome, pr, flip0, flip1, acc);
    }
    return SparsePmf::from_probabilities(static_cast<int>(measured.size()), std::move(acc));
}

/// Per-channel base error rates sampled from a log-normal shaped to hit the
/// requested median exactly, with the worst channel pinned at `max_err` and
/// everything clamped below it. Base rates split asymmetrically into
/// (eps01, eps10) in the ratio 2.3 : 3.6.
inline NoiseProfile spatial_profile(int n_channels, double median_err, double max_err,
                                    std::uint64_t seed, double sigma = 0.9) {
    if (n_channels < 1) {
        throw ValidationError("profile needs at least one channel");
    }
    if (!(median_err > 0.0) || !(max_err > 0.0) || median_err >= 0.5 || max_err >= 0.5) {
        throw ValidationError("error rates must lie in (0, 0.5)");
    }
    if (max_err < median_err) {
        throw ValidationError("max error must be >= median error");
    }

    std::vector<double> base(static_cast<std::size_t>(n_channels), median_err);
    if (max_err > median_err && n_channels > 1) {
        Rng rng(seed);
        for (double& b : base) {
            b = median_err * std::exp(sigma * rng.gaussian());
        }
        // Rescale so the sample median lands on the target exactly.
        std::vector<double> sorted = base;
        std::sort(sorted.begin(), sorted.end());
        const std::size_t mid = sorted.size() / 2;
        const double sample_median = sorted.size() % 2 == 1
                                         ? sorted[mid]
                                         : 0.5 * (sorted[mid - 1] + sorted[mid]);
        const double scale = median_err / sample_median;
        for (double& b : base) {
            b = std::min(b * scale, max_err);
        }
        // Pin the worst channel at the reported worst-case rate.
        const auto worst = std::max_element(base.begin(), base.end());
        *worst = max_err;
    }

    // Asymmetry: state-0 and state-1 misread rates average 2.3% vs 3.6% on
    // hardware, so the mean is preserved while the split follows that ratio.
    constexpr double kState0 = 2.3;
    constexpr double kState1 = 3.6;
    constexpr double kMeanFactor = 0.5 * (kState0 + kState1);
    NoiseProfile profile;
    profile.channels.reserve(base.size());
    for (double b : base) {
        NoiseProfile::Channel c;
        c.eps01 = b * (kState0 / kMeanFactor);
        c.eps10 = std::min(b * (kState1 / kMeanFactor), std::nextafter(0.5, 0.0));
        profile.channels.push_back(c);
    }
    profile.validate();
    return profile;
}

/// Reconstruction-relevant configuration of one end-to-end run.
struct PipelineConfig {
    std::uint64_t seed = 1;
    ReconstructionConfig reconstruction;
    /// Remap each CPM's measured qubits onto the best channels (models
    /// recompilation). Global mode always uses the identity assignment.
    bool remap_cpm = true;
    /// Overrides the workload-derived correct outcomes when non-empty.
    std::set<std::string> correct_override;
    const MaxCutInstance* graph = nullptr;
};

struct PipelineResult {
    std::map<std::string, std::uint64_t> baseline_counts;
    std::map<std::string, std::uint64_t> global_counts;
    std::vector<std::pair<std::vector<int>, std::map<std::string, std::uint64_t>>> cpm_counts;
    SparsePmf ideal;
    SparsePmf baseline_pmf;
    SparsePmf global_pmf;
    SparsePmf reconstructed;
    std::vector<std::pair<int, ConvergenceLog>> layer_logs;
    MetricReport baseline_report;
    MetricReport jigsaw_report;
};

/// End-to-end flow: simulate the baseline (all trials, global mode), the
/// split global mode, and every CPM; build marginals; reconstruct; score
/// both PMFs against the ideal distribution. CPM simulations run in
/// parallel on per-CPM derived seeds and merge deterministically.
inline PipelineResult run_pipeline(const IdealSpec& spec, const NoiseProfile& profile,
                                   const SubsetPlan& plan, const TrialBudget& budget,
                                   const PipelineConfig& cfg = {}) {
    profile.validate();
    plan.validate();
    cfg.reconstruction.validate();
    if (plan.width != spec.width) {
        throw ValidationError("plan width does not match workload width");
    }
    if (static_cast<int>(profile.channels.size()) < spec.width) {
        throw ValidationError("profile has fewer channels than program qubits");
    }
    if (budget.per_cpm.size() != plan.cpm_count()) {
        throw ValidationError("budget does not match the plan's CPM count");
    }

    PipelineResult result;
    result.ideal = ideal_distribution(spec);

    std::vector<int> all_qubits(static_cast<std::size_t>(spec.width));
    for (int q = 0; q < spec.width; ++q) {
        all_qubits[static_cast<std::size_t>(q)] = spec.width - 1 - q;  // descending
    }
    const QubitAssignment global_assignment = identity_assignment(spec.width);

    result.baseline_counts = sample_counts(result.ideal, profile, global_assignment, all_qubits,
                                           budget.total, derive_seed(cfg.seed, 0));
    result.global_counts = sample_counts(result.ideal, profile, global_assignment, all_qubits,
                                         budget.global_trials, derive_seed(cfg.seed, 1));
    result.baseline_pmf = SparsePmf::from_counts(result.baseline_counts, spec.width);
    result.global_pmf = SparsePmf::from_counts(result.global_counts, spec.width);

    const auto subsets = plan.flattened();
    result.cpm_counts.resize(subsets.size());
    std::vector<Marginal> marginals(subsets.size());
    parallel_for(subsets.size(), [&](std::size_t i) {
        const std::vector<int>& qubits = subsets[i];
        const QubitAssignment assignment = cfg.remap_cpm
                                               ? best_qubit_assignment(profile, qubits)
                                               : global_assignment;
        auto counts = sample_counts(result.ideal, profile, assignment, qubits, budget.per_cpm[i],
                                    derive_seed(cfg.seed, 2 + i));
        marginals[i].qubits = qubits;
        marginals[i].pmf = SparsePmf::from_counts(counts, static_cast<int>(qubits.size()));
        result.cpm_counts[i] = {qubits, std::move(counts)};
    });

    const LayerSet layers = LayerSet::group_by_size(marginals);
    result.reconstructed =
        reconstruct_multilayer(result.global_pmf, layers, cfg.reconstruction, &result.layer_logs);

    const std::set<std::string> correct =
        cfg.correct_override.empty() ? spec.correct_outcomes() : cfg.correct_override;
    result.baseline_report = evaluate_metrics(result.baseline_pmf, result.ideal, correct, cfg.graph);
    result.jigsaw_report = evaluate_metrics(result.reconstructed, result.ideal, correct, cfg.graph);
    return result;
}

}  // namespace jigsaw
