#pragma once
// SLM1 model bundle: "SLM1", u32 LE version, then a CBOR document holding the
// normalizer, the four base models, their calibrators and the meta-classifier.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "oralstack/ihml.hpp"

namespace oralstack {

inline constexpr std::uint32_t kBundleVersion = 1;

std::vector<std::uint8_t> encode_bundle(const IhmlModel& model);
// Throws DataError on a malformed or foreign container.
IhmlModel decode_bundle(std::span<const std::uint8_t> bytes);

void save_bundle(const std::filesystem::path& path, const IhmlModel& model);
IhmlModel load_bundle(const std::filesystem::path& path);

} // namespace oralstack
