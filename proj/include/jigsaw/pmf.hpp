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
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "jigsaw/errors.hpp"
#include "jigsaw/random.hpp"

namespace jigsaw {

// Outcomes are fixed-width '0'/'1' strings. The leftmost character is the
// highest qubit index, so a 3-qubit outcome reads (Q2, Q1, Q0). All file
// formats and reduce() follow this ordering.

inline bool is_valid_bitstring(const std::string& s, int width) {
    if (static_cast<int>(s.size()) != width) {
        return false;
    }
    return std::all_of(s.begin(), s.end(), [](char c) { return c == '0' || c == '1'; });
}

/// Bit of qubit `q` in `outcome` (leftmost char = highest index).
inline char bit_of(const std::string& outcome, int q) {
    if (q < 0 || q >= static_cast<int>(outcome.size())) {
        throw ValidationError("qubit index " + std::to_string(q) + " out of range for width " +
                              std::to_string(outcome.size()));
    }
    return outcome[outcome.size() - 1 - static_cast<std::size_t>(q)];
}

/// Sub-bitstring of `outcome` at the given qubit positions, in the given
/// order. Order matters: reduce("1010", {0, 3}) == "01".
inline std::string reduce(const std::string& outcome, const std::vector<int>& qubits) {
    std::string out(qubits.size(), '0');
    for (std::size_t j = 0; j < qubits.size(); ++j) {
        out[j] = bit_of(outcome, qubits[j]);
    }
    return out;
}

inline void validate_qubit_list(const std::vector<int>& qubits, int width) {
    if (qubits.empty()) {
        throw ValidationError("qubit list must not be empty");
    }
    std::vector<int> sorted = qubits;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw ValidationError("qubit list contains duplicate indices");
    }
    if (sorted.front() < 0 || sorted.back() >= width) {
        throw ValidationError("qubit index out of range for width " + std::to_string(width));
    }
}

/// Sparse probability mass function over fixed-width bitstrings. Only
/// observed (strictly positive) outcomes are stored, so the entry count is
/// bounded by min(2^n, trials) rather than 2^n. Instances are normalized at
/// construction and immutable afterwards, hence safe to share across threads.
class SparsePmf {
  public:
    using EntryMap = std::unordered_map<std::string, double>;

    SparsePmf() = default;

    /// Normalizes `probs` to sum 1. Entries that are zero or negative (e.g.
    /// after floating-point cancellation) are dropped first to keep the
    /// sparse invariant.
    static SparsePmf from_probabilities(int width, EntryMap probs,
                                        std::optional<std::uint64_t> trials = std::nullopt) {
        if (width < 1) {
            throw ValidationError("pmf width must be >= 1");
        }
        double total = 0.0;
        for (auto it = probs.begin(); it != probs.end();) {
            if (!is_valid_bitstring(it->first, width)) {
                throw ValidationError("malformed outcome '" + it->first + "' for width " +
                                      std::to_string(width));
            }
            if (it->second <= 0.0) {
                it = probs.erase(it);
            } else {
                total += it->second;
                ++it;
            }
        }
        if (probs.empty() || total <= 0.0) {
            throw ValidationError("pmf has no positive mass");
        }
        for (auto& [outcome, pr] : probs) {
            pr /= total;
        }
        SparsePmf pmf;
        pmf.width_ = width;
        pmf.entries_ = std::move(probs);
        pmf.total_trials_ = trials;
        return pmf;
    }

    /// Histogram normalization: probabilities = count / total. Zero-count
    /// keys are dropped; the trial count is recorded.
    static SparsePmf from_counts(const std::map<std::string, std::uint64_t>& counts, int width) {
        if (width < 1) {
            throw ValidationError("pmf width must be >= 1");
        }
        std::uint64_t total = 0;
        EntryMap probs;
        probs.reserve(counts.size());
        for (const auto& [outcome, count] : counts) {
            if (!is_valid_bitstring(outcome, width)) {
                throw ValidationError("malformed count key '" + outcome + "' for width " +
                                      std::to_string(width));
            }
            total += count;
        }
        if (total == 0) {
            throw ValidationError("count histogram is empty (all counts zero)");
        }
        const double denom = static_cast<double>(total);
        for (const auto& [outcome, count] : counts) {
            if (count > 0) {
                probs.emplace(outcome, static_cast<double>(count) / denom);
            }
        }
        SparsePmf pmf;
        pmf.width_ = width;
        pmf.entries_ = std::move(probs);
        pmf.total_trials_ = total;
        return pmf;
    }

    int width() const { return width_; }
    const EntryMap& entries() const { return entries_; }
    std::size_t support_size() const { return entries_.size(); }
    std::optional<std::uint64_t> total_trials() const { return total_trials_; }
    bool empty() const { return entries_.empty(); }

    double probability(const std::string& outcome) const {
        const auto it = entries_.find(outcome);
        return it == entries_.end() ? 0.0 : it->second;
    }

    /// Entries sorted by outcome, for deterministic serialization and
    /// sampling tables.
    std::vector<std::pair<std::string, double>> sorted_entries() const {
        std::vector<std::pair<std::string, double>> out(entries_.begin(), entries_.end());
        std::sort(out.begin(), out.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        return out;
    }

  private:
    int width_ = 0;
    EntryMap entries_;
    std::optional<std::uint64_t> total_trials_;
};

/// A local PMF plus the ordered list of qubits it describes (the result of a
/// circuit with partial measurements). The qubit order is the key order of
/// the PMF's bitstrings.
struct Marginal {
    std::vector<int> qubits;
    SparsePmf pmf;
};

/// Sums full-width probabilities over every outcome agreeing on the selected
/// bit positions. The caller's qubit order is preserved.
inline Marginal marginalize(const SparsePmf& p, const std::vector<int>& qubits) {
    validate_qubit_list(qubits, p.width());
    SparsePmf::EntryMap reduced;
    for (const auto& [outcome, pr] : p.entries()) {
        reduced[reduce(outcome, qubits)] += pr;
    }
    Marginal m;
    m.qubits = qubits;
    m.pmf = SparsePmf::from_probabilities(static_cast<int>(qubits.size()), std::move(reduced),
                                          p.total_trials());
    return m;
}

/// Hellinger distance (1/sqrt(2))·sqrt(sum (sqrt(p)-sqrt(q))^2) over the
/// union support; missing entries count as zero. Ranges over [0, 1].
inline double hellinger(const SparsePmf& p, const SparsePmf& q) {
    if (p.width() != q.width()) {
        throw ValidationError("hellinger: width mismatch (" + std::to_string(p.width()) + " vs " +
                              std::to_string(q.width()) + ")");
    }
    double sum = 0.0;
    for (const auto& [outcome, pr] : p.entries()) {
        const double d = std::sqrt(pr) - std::sqrt(q.probability(outcome));
        sum += d * d;
    }
    for (const auto& [outcome, qr] : q.entries()) {
        if (p.probability(outcome) == 0.0) {
            sum += qr;
        }
    }
    return std::clamp(std::sqrt(0.5 * sum), 0.0, 1.0);
}

/// min(2^width, trials); the number of distinct stored outcomes can never
/// exceed this.
inline std::uint64_t support_bound(int width, std::uint64_t trials) {
    if (width >= 63) {
        return trials;
    }
    return std::min<std::uint64_t>(std::uint64_t{1} << width, trials);
}

/// Inverse-CDF sampler over a SparsePmf. The table is built over
/// lexicographically sorted outcomes so draws are reproducible for a seed.
class PmfSampler {
  public:
    explicit PmfSampler(const SparsePmf& pmf) {
        auto sorted = pmf.sorted_entries();
        outcomes_.reserve(sorted.size());
        cumulative_.reserve(sorted.size());
        double acc = 0.0;
        for (auto& [outcome, pr] : sorted) {
            acc += pr;
            outcomes_.push_back(std::move(outcome));
            cumulative_.push_back(acc);
        }
        if (!cumulative_.empty()) {
            cumulative_.back() = 1.0;
        }
    }

    const std::string& sample(Rng& rng) const {
        const double u = rng.next_double();
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        const std::size_t idx =
            it == cumulative_.end() ? cumulative_.size() - 1
                                    : static_cast<std::size_t>(it - cumulative_.begin());
        return outcomes_[idx];
    }

  private:
    std::vector<std::string> outcomes_;
    std::vector<double> cumulative_;
};

}  // namespace jigsaw
