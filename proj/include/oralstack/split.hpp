#pragma once
// Patient-grouped, stratified splitting. Every function works on patient
// indices; a patient's images always travel together.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace oralstack {

// Maps per-row patient ids to dense group indices (first-appearance order).
struct PatientGroups {
    std::vector<std::size_t> group_of_row;
    std::vector<std::string> names;
    std::vector<std::vector<std::size_t>> rows;  // rows per group, ascending

    static PatientGroups from_ids(std::span<const std::string> patient_ids);
    std::size_t size() const { return names.size(); }
};

// Majority label of each group's rows; ties go to the lowest class index.
std::vector<int> patient_majority_labels(const PatientGroups& groups, std::span<const int> labels);

struct HoldoutSplit {
    std::vector<std::size_t> holdout;      // patient indices, ascending
    std::vector<std::size_t> development;  // patient indices, ascending
};

// Per class, round(fraction * class patient count) patients are drawn
// without replacement into the holdout.
HoldoutSplit grouped_stratified_holdout(std::span<const int> patient_labels, double fraction, std::uint64_t seed);

// Fold index per patient. Within each class patients are shuffled and dealt
// round-robin; the deal position carries over between classes so totals
// stay balanced as well.
std::vector<int> grouped_stratified_kfold(std::span<const int> patient_labels, std::size_t k, std::uint64_t seed);

// Throws InvariantError if any patient index occurs in both sets.
void assert_disjoint(std::span<const std::size_t> a, std::span<const std::size_t> b, const std::string& what);

// Size of the intersection of two patient index sets.
std::size_t overlap_count(std::span<const std::size_t> a, std::span<const std::size_t> b);

} // namespace oralstack
