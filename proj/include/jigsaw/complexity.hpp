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

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <set>
#include <vector>

#include "jigsaw/errors.hpp"
#include "jigsaw/pmf.hpp"
#include "jigsaw/random.hpp"
#include "jigsaw/reconstruction.hpp"

namespace jigsaw {

/// Inputs of the analytical reconstruction cost model. epsilon and delta are
/// the global/local support fractions (observed distinct outcomes per
/// trial); layers is the number of distinct subset sizes (1 for the
/// single-layer design).
struct ComplexityParams {
    int qubits = 0;                       // n
    int cpms_per_layer = 0;               // N
    std::uint64_t trials = 0;             // T
    double global_support_fraction = 0.0; // epsilon
    double local_support_fraction = 0.0;  // delta
    int subset_size = 0;                  // s
    int layers = 1;                       // S

    void validate() const {
        if (qubits < 1 || cpms_per_layer < 1 || trials < 1 || subset_size < 1 || layers < 1) {
            throw ValidationError("complexity parameters must be positive");
        }
        if (global_support_fraction < 0.0 || global_support_fraction > 1.0 ||
            local_support_fraction < 0.0 || local_support_fraction > 1.0) {
            throw ValidationError("support fractions must lie in [0, 1]");
        }
    }

    /// L = min(2^s, delta*T): entries of one local PMF.
    double local_entries() const {
        return std::min(std::ldexp(1.0, subset_size),
                        local_support_fraction * static_cast<double>(trials));
    }
};

/// Total bytes for one global PMF (n+8 bytes per entry), N intermediate and
/// one output PMF (8 bytes per entry each), and S*N local PMFs:
/// {n + 8(2+N)} * eps*T + L*(s+8) * S*N. The single-layer design is the
/// S = 1 case.
inline std::uint64_t memory_bytes(const ComplexityParams& p) {
    p.validate();
    const double global_entries =
        p.global_support_fraction * static_cast<double>(p.trials);
    const double global_term =
        (static_cast<double>(p.qubits) + 8.0 * (2.0 + p.cpms_per_layer)) * global_entries;
    const double local_term = p.local_entries() * (p.subset_size + 8.0) *
                              static_cast<double>(p.layers) *
                              static_cast<double>(p.cpms_per_layer);
    return static_cast<std::uint64_t>(std::llround(global_term + local_term));
}

/// Update operations: 4 * eps * S * N * T (one coefficient pass plus three
/// update operations per global entry per local PMF).
inline std::uint64_t operation_count(const ComplexityParams& p) {
    p.validate();
    const double ops = 4.0 * p.global_support_fraction * static_cast<double>(p.layers) *
                       static_cast<double>(p.cpms_per_layer) * static_cast<double>(p.trials);
    return static_cast<std::uint64_t>(std::llround(ops));
}

/// One measured point of the empirical scaling study.
struct ScalingRow {
    std::size_t support = 0;     // distinct global-PMF entries
    int cpms = 0;
    int rounds = 0;
    double seconds = 0.0;        // best of `repetitions` timings
    std::size_t peak_entries = 0;
    std::uint64_t predicted_ops = 0;
    std::uint64_t predicted_bytes = 0;
};

namespace detail {

/// Synthetic prior with exactly `support` distinct outcomes and marginals
/// whose entries cover every reduced outcome, so no support is dropped and
/// per-round work stays fixed.
struct ScalingFixture {
    SparsePmf prior;
    std::vector<Marginal> marginals;
};

inline ScalingFixture make_scaling_fixture(int width, std::size_t support, int cpms,
                                           int subset_size, std::uint64_t seed) {
    if (width < subset_size || width > 62) {
        throw ValidationError("scaling fixture width out of range");
    }
    Rng rng(seed);
    const std::uint64_t space = std::uint64_t{1} << width;
    if (support > space) {
        throw ValidationError("support exceeds outcome space");
    }
    std::set<std::uint64_t> picked;
    while (picked.size() < support) {
        picked.insert(rng.below(space));
    }
    SparsePmf::EntryMap probs;
    probs.reserve(support);
    for (std::uint64_t v : picked) {
        std::string s(static_cast<std::size_t>(width), '0');
        for (int q = 0; q < width; ++q) {
            if ((v >> q) & 1ULL) {
                s[static_cast<std::size_t>(width - 1 - q)] = '1';
            }
        }
        probs.emplace(std::move(s), 0.5 + rng.next_double());
    }
    ScalingFixture fixture;
    fixture.prior = SparsePmf::from_probabilities(width, std::move(probs));
    fixture.marginals.reserve(static_cast<std::size_t>(cpms));
    for (int i = 0; i < cpms; ++i) {
        std::vector<int> qubits;
        std::set<int> used;
        while (static_cast<int>(qubits.size()) < subset_size) {
            const int q = static_cast<int>(rng.below(static_cast<std::uint64_t>(width)));
            if (used.insert(q).second) {
                qubits.push_back(q);
            }
        }
        // Perturbed exact marginal: keeps every reduced outcome observed.
        Marginal exact = marginalize(fixture.prior, qubits);
        SparsePmf::EntryMap noisy;
        for (const auto& [outcome, pr] : exact.pmf.entries()) {
            noisy[outcome] = pr * (0.5 + rng.next_double());
        }
        Marginal m;
        m.qubits = qubits;
        m.pmf = SparsePmf::from_probabilities(subset_size, std::move(noisy));
        fixture.marginals.push_back(std::move(m));
    }
    return fixture;
}

/// Pins JIGSAW_THREADS to 1 for the harness's lifetime so timings are not
/// confounded by scheduling, restoring the previous value afterwards.
class ScopedSingleThread {
  public:
    ScopedSingleThread() {
        if (const char* v = std::getenv("JIGSAW_THREADS")) {
            previous_ = v;
            had_previous_ = true;
        }
        ::setenv("JIGSAW_THREADS", "1", 1);
    }
    ~ScopedSingleThread() {
        if (had_previous_) {
            ::setenv("JIGSAW_THREADS", previous_.c_str(), 1);
        } else {
            ::unsetenv("JIGSAW_THREADS");
        }
    }
    ScopedSingleThread(const ScopedSingleThread&) = delete;
    ScopedSingleThread& operator=(const ScopedSingleThread&) = delete;

  private:
    std::string previous_;
    bool had_previous_ = false;
};

}  // namespace detail

/// Times the actual reconstruction engine (per-marginal updates plus the
/// additive merge) for a fixed number of rounds on synthetic PMFs of
/// controlled support size. Single-threaded so the timings are clean; the
/// best of `repetitions` runs is reported.
inline std::vector<ScalingRow> measure_scaling(const std::vector<std::size_t>& supports,
                                               int width, int cpms, int subset_size, int rounds,
                                               std::uint64_t seed, int repetitions = 3) {
    const detail::ScopedSingleThread single_thread;
    std::vector<ScalingRow> rows;
    rows.reserve(supports.size());
    // A vanishing tolerance pins the round count so every measurement does
    // identical work per entry.
    ReconstructionConfig cfg;
    cfg.hellinger_tolerance = 1e-300;
    cfg.max_rounds = rounds;
    for (std::size_t support : supports) {
        const auto fixture =
            detail::make_scaling_fixture(width, support, cpms, subset_size, seed);
        double best = std::numeric_limits<double>::infinity();
        for (int rep = 0; rep < repetitions; ++rep) {
            const auto start = std::chrono::steady_clock::now();
            bayesian_reconstruction(fixture.prior, fixture.marginals, cfg);
            const auto stop = std::chrono::steady_clock::now();
            best = std::min(best, std::chrono::duration<double>(stop - start).count());
        }
        ScalingRow row;
        row.support = support;
        row.cpms = cpms;
        row.rounds = rounds;
        row.seconds = best;
        row.peak_entries = fixture.prior.support_size();
        ComplexityParams params;
        params.qubits = width;
        params.cpms_per_layer = cpms;
        params.trials = support;  // support-limited regime: eps*T = support
        params.global_support_fraction = 1.0;
        params.local_support_fraction = 1.0;
        params.subset_size = subset_size;
        params.layers = 1;
        row.predicted_ops = operation_count(params) * static_cast<std::uint64_t>(rounds);
        row.predicted_bytes = memory_bytes(params);
        rows.push_back(row);
    }
    return rows;
}

inline void write_scaling_csv(std::ostream& out, const std::vector<ScalingRow>& rows) {
    out << "support,cpms,rounds,predicted_bytes,predicted_ops,measured_seconds,measured_entries\n";
    for (const auto& r : rows) {
        out << r.support << ',' << r.cpms << ',' << r.rounds << ',' << r.predicted_bytes << ','
            << r.predicted_ops << ',' << r.seconds << ',' << r.peak_entries << '\n';
    }
}

}  // namespace jigsaw
