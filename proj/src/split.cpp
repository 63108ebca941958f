#include "oralstack/split.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>

#include "oralstack/core.hpp"
#include "oralstack/error.hpp"
#include "oralstack/random.hpp"

namespace oralstack {

PatientGroups PatientGroups::from_ids(std::span<const std::string> patient_ids) {
    PatientGroups g;
    std::map<std::string, std::size_t> index;
    g.group_of_row.reserve(patient_ids.size());
    for (std::size_t i = 0; i < patient_ids.size(); ++i) {
        auto [it, inserted] = index.emplace(patient_ids[i], g.names.size());
        if (inserted) {
            g.names.push_back(patient_ids[i]);
            g.rows.emplace_back();
        }
        g.group_of_row.push_back(it->second);
        g.rows[it->second].push_back(i);
    }
    return g;
}

std::vector<int> patient_majority_labels(const PatientGroups& groups, std::span<const int> labels) {
    std::vector<int> out(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
        std::array<std::size_t, kClasses> counts{};
        for (std::size_t r : groups.rows[g]) counts[static_cast<std::size_t>(labels[r])]++;
        out[g] = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    }
    return out;
}

namespace {

std::array<std::vector<std::size_t>, kClasses> patients_by_class(std::span<const int> patient_labels) {
    std::array<std::vector<std::size_t>, kClasses> by_class;
    for (std::size_t p = 0; p < patient_labels.size(); ++p) {
        const int c = patient_labels[p];
        if (c < 0 || c >= static_cast<int>(kClasses)) throw DataError("patient label out of range");
        by_class[static_cast<std::size_t>(c)].push_back(p);
    }
    return by_class;
}

} // namespace

HoldoutSplit grouped_stratified_holdout(std::span<const int> patient_labels, double fraction, std::uint64_t seed) {
    if (patient_labels.empty()) throw DataError("holdout split: empty patient list");
    if (!(fraction >= 0.0 && fraction <= 1.0)) throw ConfigError("holdout fraction must lie in [0, 1]");
    Rng rng(derive_seed(seed, 0x401dULL));
    HoldoutSplit split;
    for (auto& members : patients_by_class(patient_labels)) {
        rng.shuffle(members);
        const auto take = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(members.size())));
        split.holdout.insert(split.holdout.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(take));
        split.development.insert(split.development.end(), members.begin() + static_cast<std::ptrdiff_t>(take),
                                 members.end());
    }
    std::sort(split.holdout.begin(), split.holdout.end());
    std::sort(split.development.begin(), split.development.end());
    return split;
}

std::vector<int> grouped_stratified_kfold(std::span<const int> patient_labels, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw ConfigError("fold count must be >= 2");
    if (k > patient_labels.size()) {
        throw DataError("fold count " + std::to_string(k) + " exceeds patient count " +
                        std::to_string(patient_labels.size()));
    }
    Rng rng(derive_seed(seed, 0xf01dULL));
    std::vector<int> fold(patient_labels.size(), -1);
    std::size_t next = 0;
    for (auto& members : patients_by_class(patient_labels)) {
        rng.shuffle(members);
        for (std::size_t p : members) {
            fold[p] = static_cast<int>(next);
            next = (next + 1) % k;
        }
    }
    return fold;
}

std::size_t overlap_count(std::span<const std::size_t> a, std::span<const std::size_t> b) {
    const std::set<std::size_t> sa(a.begin(), a.end());
    return static_cast<std::size_t>(std::count_if(b.begin(), b.end(), [&](std::size_t v) { return sa.count(v) > 0; }));
}

void assert_disjoint(std::span<const std::size_t> a, std::span<const std::size_t> b, const std::string& what) {
    if (const std::size_t n = overlap_count(a, b); n > 0) {
        throw InvariantError("patient leakage in " + what + ": " + std::to_string(n) + " patients on both sides");
    }
}

} // namespace oralstack
