#pragma once
// Per-sample raw modality vectors, extracted once from a manifest and
// stored in a length-prefixed binary file with a JSON header.
//
// Layout: "FST1", u32 LE header length, UTF-8 JSON header
// {"format","schema_version","modalities":{name: dim},"records"}, then per
// record a u32 LE payload length followed by the payload: u32 length +
// sample_id bytes, u32 length + patient_id bytes, u8 label, then the
// float64 LE values of every modality listed in the header, in fused order.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "oralstack/core.hpp"
#include "oralstack/fusion.hpp"

namespace oralstack {

struct FeatureRecord {
    std::string sample_id;
    std::string patient_id;
    int label = 0;
    SampleFeatures features;
};

struct FeatureStore {
    ModalityMask present;
    std::array<std::size_t, kModalities> dims{};  // 0 for absent modalities
    std::vector<FeatureRecord> records;

    std::size_t size() const { return records.size(); }
    std::vector<int> labels() const;
    std::vector<std::string> patient_ids() const;
    std::vector<std::string> sample_ids() const;
    std::vector<SampleFeatures> features() const;
    FeatureStore subset(std::span<const std::size_t> rows) const;

    bool operator==(const FeatureStore& o) const;
};

std::vector<std::uint8_t> encode_feature_store(const FeatureStore& store);
FeatureStore decode_feature_store(std::span<const std::uint8_t> bytes);
void write_feature_store(const std::filesystem::path& path, const FeatureStore& store);
FeatureStore read_feature_store(const std::filesystem::path& path);

// Loads the cube / embedding of one sample and computes the requested
// modalities.
SampleFeatures extract_sample_features(const SampleRecord& record, ModalityMask groups);

// Extracts every sample (in parallel, order preserved). Failures are
// rethrown as DataError naming the sample_id.
FeatureStore extract_features(const Dataset& dataset, ModalityMask groups);

} // namespace oralstack
