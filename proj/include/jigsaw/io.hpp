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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "jigsaw/errors.hpp"
#include "jigsaw/metrics.hpp"
#include "jigsaw/noise_sim.hpp"
#include "jigsaw/pmf.hpp"
#include "jigsaw/reconstruction.hpp"
#include "jigsaw/subsetting.hpp"

namespace jigsaw::io {

using nlohmann::json;

/// One histogram on disk: {"width": n, "qubits": [...], "shots": N,
/// "counts": {bitstring: count}}. `qubits` is present only for marginal
/// files (absent means all qubits were measured); `width` is always the
/// program width, and the bitstring keys have length |qubits| for marginals
/// or `width` for global files. Counts must sum to `shots`.
struct CountFile {
    int width = 0;
    std::optional<std::vector<int>> qubits;
    std::uint64_t shots = 0;
    std::map<std::string, std::uint64_t> counts;

    int key_width() const {
        return qubits ? static_cast<int>(qubits->size()) : width;
    }

    void validate() const {
        if (width < 1) {
            throw ValidationError("count file: width must be >= 1");
        }
        if (qubits) {
            validate_qubit_list(*qubits, width);
        }
        std::uint64_t total = 0;
        for (const auto& [key, count] : counts) {
            if (!is_valid_bitstring(key, key_width())) {
                throw ValidationError("count file: key '" + key + "' does not have width " +
                                      std::to_string(key_width()));
            }
            total += count;
        }
        if (total != shots) {
            throw ValidationError("count file: counts sum to " + std::to_string(total) +
                                  " but shots field says " + std::to_string(shots));
        }
        if (shots == 0) {
            throw ValidationError("count file: empty histogram");
        }
    }
};

namespace detail {

inline json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open '" + path.string() + "'");
    }
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ValidationError("invalid JSON in '" + path.string() + "': " + e.what());
    }
    return j;
}

inline void save_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) {
        throw ValidationError("cannot write '" + path.string() + "'");
    }
    out << j.dump(2) << '\n';
}

template <typename T>
T get_field(const json& j, const std::string& key, const std::string& context) {
    if (!j.contains(key)) {
        throw ValidationError(context + ": missing field '" + key + "'");
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(context + ": bad field '" + key + "': " + e.what());
    }
}

}  // namespace detail

inline void write_count_file(const std::filesystem::path& path, const CountFile& file) {
    file.validate();
    json j;
    j["width"] = file.width;
    if (file.qubits) {
        j["qubits"] = *file.qubits;
    }
    j["shots"] = file.shots;
    j["counts"] = file.counts;
    detail::save_json(path, j);
}

inline CountFile read_count_file(const std::filesystem::path& path) {
    const json j = detail::load_json(path);
    const std::string context = "count file '" + path.string() + "'";
    CountFile file;
    file.width = detail::get_field<int>(j, "width", context);
    if (j.contains("qubits")) {
        file.qubits = detail::get_field<std::vector<int>>(j, "qubits", context);
    }
    file.shots = detail::get_field<std::uint64_t>(j, "shots", context);
    file.counts = detail::get_field<std::map<std::string, std::uint64_t>>(j, "counts", context);
    try {
        file.validate();
    } catch (const ValidationError& e) {
        throw ValidationError(context + ": " + e.what());
    }
    return file;
}

/// PMF files: {"width": n, "probabilities": {bitstring: pr}}.
inline void write_pmf_file(const std::filesystem::path& path, const SparsePmf& pmf) {
    json probs = json::object();
    for (const auto& [outcome, pr] : pmf.sorted_entries()) {
        probs[outcome] = pr;
    }
    json j;
    j["width"] = pmf.width();
    j["probabilities"] = std::move(probs);
    if (pmf.total_trials()) {
        j["shots"] = *pmf.total_trials();
    }
    detail::save_json(path, j);
}

inline SparsePmf read_pmf_file(const std::filesystem::path& path) {
    const json j = detail::load_json(path);
    const std::string context = "pmf file '" + path.string() + "'";
    const int width = detail::get_field<int>(j, "width", context);
    const auto probs =
        detail::get_field<std::map<std::string, double>>(j, "probabilities", context);
    std::optional<std::uint64_t> trials;
    if (j.contains("shots")) {
        trials = detail::get_field<std::uint64_t>(j, "shots", context);
    }
    SparsePmf::EntryMap entries(probs.begin(), probs.end());
    try {
        return SparsePmf::from_probabilities(width, std::move(entries), trials);
    } catch (const ValidationError& e) {
        throw ValidationError(context + ": " + e.what());
    }
}

/// Profile files are a JSON array of per-channel [eps01, eps10] pairs. The
/// crosstalk slope is a run parameter, not a device property file field.
inline void write_profile(const std::filesystem::path& path, const NoiseProfile& profile) {
    json j = json::array();
    for (const auto& c : profile.channels) {
        j.push_back(json::array({c.eps01, c.eps10}));
    }
    detail::save_json(path, j);
}

inline NoiseProfile read_profile(const std::filesystem::path& path,
                                 double crosstalk_slope = kDefaultCrosstalkSlope) {
    const json j = detail::load_json(path);
    if (!j.is_array() || j.empty()) {
        throw ValidationError("profile '" + path.string() +
                              "' must be a non-empty array of [eps01, eps10] pairs");
    }
    NoiseProfile profile;
    profile.crosstalk_slope = crosstalk_slope;
    for (const auto& entry : j) {
        if (!entry.is_array() || entry.size() != 2) {
            throw ValidationError("profile '" + path.string() +
                                  "': each channel must be [eps01, eps10]");
        }
        NoiseProfile::Channel c;
        c.eps01 = entry[0].get<double>();
        c.eps10 = entry[1].get<double>();
        profile.channels.push_back(c);
    }
    try {
        profile.validate();
    } catch (const ValidationError& e) {
        throw ValidationError("profile '" + path.string() + "': " + e.what());
    }
    return profile;
}

/// Plan files: {"width": n, "layers": [{"size": s, "subsets": [[i,..],..]}],
/// "trials": {"total": T, "global": G, "per_cpm": [..]}}.
inline void write_plan(const std::filesystem::path& path, const SubsetPlan& plan,
                       const TrialBudget& budget) {
    json layers = json::array();
    for (const auto& layer : plan.layers) {
        json l;
        l["size"] = layer.size;
        l["subsets"] = layer.subsets;
        layers.push_back(std::move(l));
    }
    json j;
    j["width"] = plan.width;
    j["layers"] = std::move(layers);
    j["trials"] = {{"total", budget.total},
                   {"global", budget.global_trials},
                   {"per_cpm", budget.per_cpm}};
    detail::save_json(path, j);
}

inline std::pair<SubsetPlan, TrialBudget> read_plan(const std::filesystem::path& path) {
    const json j = detail::load_json(path);
    const std::string context = "plan file '" + path.string() + "'";
    SubsetPlan plan;
    plan.width = detail::get_field<int>(j, "width", context);
    for (const auto& l : detail::get_field<json>(j, "layers", context)) {
        SubsetPlan::Layer layer;
        layer.size = detail::get_field<int>(l, "size", context);
        layer.subsets = detail::get_field<std::vector<std::vector<int>>>(l, "subsets", context);
        plan.layers.push_back(std::move(layer));
    }
    TrialBudget budget;
    const json trials = detail::get_field<json>(j, "trials", context);
    budget.total = detail::get_field<std::uint64_t>(trials, "total", context);
    budget.global_trials = detail::get_field<std::uint64_t>(trials, "global", context);
    budget.per_cpm = detail::get_field<std::vector<std::uint64_t>>(trials, "per_cpm", context);
    budget.subset_trials = budget.total - budget.global_trials;
    try {
        plan.validate();
    } catch (const ValidationError& e) {
        throw ValidationError(context + ": " + e.what());
    }
    if (budget.per_cpm.size() != plan.cpm_count()) {
        throw ValidationError(context + ": per_cpm length does not match plan");
    }
    return {std::move(plan), std::move(budget)};
}

/// IST can be infinite (no incorrect outcome observed); JSON has no
/// infinity, so it is stored as null and read back as infinity.
inline json metric_report_to_json(const MetricReport& report) {
    json j;
    j["pst"] = report.pst;
    if (std::isinf(report.ist)) {
        j["ist"] = nullptr;
    } else {
        j["ist"] = report.ist;
    }
    j["tvd"] = report.tvd;
    j["fidelity"] = report.fidelity;
    j["hellinger"] = report.hellinger;
    if (report.arg) {
        j["arg"] = *report.arg;
    }
    return j;
}

inline MetricReport metric_report_from_json(const json& j) {
    MetricReport report;
    report.pst = j.at("pst").get<double>();
    report.ist = j.at("ist").is_null() ? std::numeric_limits<double>::infinity()
                                       : j.at("ist").get<double>();
    report.tvd = j.at("tvd").get<double>();
    report.fidelity = j.at("fidelity").get<double>();
    report.hellinger = j.at("hellinger").get<double>();
    if (j.contains("arg")) {
        report.arg = j.at("arg").get<double>();
    }
    return report;
}

inline void write_convergence_log(const std::filesystem::path& path,
                                  const std::vector<std::pair<int, ConvergenceLog>>& logs) {
    json layers = json::array();
    for (const auto& [size, log] : logs) {
        json l;
        l["size"] = size;
        l["rounds"] = log.rounds();
        l["converged"] = log.converged;
        l["hellinger"] = log.round_distance;
        layers.push_back(std::move(l));
    }
    json j;
    j["layers"] = std::move(layers);
    detail::save_json(path, j);
}

}  // namespace jigsaw::io
