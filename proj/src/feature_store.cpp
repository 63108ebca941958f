#include "oralstack/feature_store.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "oralstack/error.hpp"
#include "oralstack/parallel.hpp"
#include "oralstack/spectral_features.hpp"
#include "oralstack/texture_features.hpp"

namespace oralstack {

namespace {

constexpr std::array<Modality, kModalities> kOrder = {Modality::deep, Modality::hae, Modality::tex, Modality::spec,
                                                       Modality::demo};
constexpr int kSchemaVersion = 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

void put_string(std::vector<std::uint8_t>& out, const std::string& s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    void need(std::size_t n) const {
        if (pos_ + n > bytes_.size()) throw DataError("feature store truncated at byte " + std::to_string(pos_));
    }
    std::uint8_t u8() {
        need(1);
        return bytes_[pos_++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + static_cast<std::size_t>(i)]) << (8 * i);
        pos_ += 4;
        return v;
    }
    double f64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + static_cast<std::size_t>(i)]) << (8 * i);
        pos_ += 8;
        return std::bit_cast<double>(v);
    }
    std::string str(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    std::size_t pos() const { return pos_; }
    bool done() const { return pos_ == bytes_.size(); }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

} // namespace

std::vector<int> FeatureStore::labels() const {
    std::vector<int> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.label);
    return out;
}

std::vector<std::string> FeatureStore::patient_ids() const {
    std::vector<std::string> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.patient_id);
    return out;
}

std::vector<std::string> FeatureStore::sample_ids() const {
    std::vector<std::string> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.sample_id);
    return out;
}

std::vector<SampleFeatures> FeatureStore::features() const {
    std::vector<SampleFeatures> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.features);
    return out;
}

FeatureStore FeatureStore::subset(std::span<const std::size_t> rows) const {
    FeatureStore out;
    out.present = present;
    out.dims = dims;
    out.records.reserve(rows.size());
    for (std::size_t i : rows) out.records.push_back(records.at(i));
    return out;
}

bool FeatureStore::operator==(const FeatureStore& o) const {
    if (!(present == o.present) || dims != o.dims || records.size() != o.records.size()) return false;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& a = records[i];
        const auto& b = o.records[i];
        if (a.sample_id != b.sample_id || a.patient_id != b.patient_id || a.label != b.label) return false;
        for (std::size_t m = 0; m < kModalities; ++m) {
            const auto& va = a.features.modalities[m];
            const auto& vb = b.features.modalities[m];
            // Bitwise so NaN sentinels compare equal.
            if (va.size() != vb.size() ||
                (!va.empty() && std::memcmp(va.data(), vb.data(), va.size() * sizeof(double)) != 0)) {
                return false;
            }
        }
    }
    return true;
}

std::vector<std::uint8_t> encode_feature_store(const FeatureStore& store) {
    nlohmann::ordered_json header;
    header["format"] = "FST1";
    header["schema_version"] = kSchemaVersion;
    nlohmann::ordered_json mods = nlohmann::ordered_json::object();
    for (Modality m : kOrder) {
        if (store.present.has(m)) mods[std::string(modality_name(m))] = store.dims[static_cast<std::size_t>(m)];
    }
    header["modalities"] = mods;
    header["records"] = store.records.size();
    const std::string header_text = header.dump();

    std::vector<std::uint8_t> out = {'F', 'S', 'T', '1'};
    put_u32(out, static_cast<std::uint32_t>(header_text.size()));
    out.insert(out.end(), header_text.begin(), header_text.end());

    std::vector<std::uint8_t> payload;
    for (const auto& r : store.records) {
        payload.clear();
        put_string(payload, r.sample_id);
        put_string(payload, r.patient_id);
        payload.push_back(static_cast<std::uint8_t>(r.label));
        for (Modality m : kOrder) {
            if (!store.present.has(m)) continue;
            const auto& v = r.features[m];
            if (v.size() != store.dims[static_cast<std::size_t>(m)]) {
                throw DataError("feature store record " + r.sample_id + ": modality " +
                                std::string(modality_name(m)) + " has the wrong length");
            }
            for (double x : v) put_f64(payload, x);
        }
        put_u32(out, static_cast<std::uint32_t>(payload.size()));
        out.insert(out.end(), payload.begin(), payload.end());
    }
    return out;
}

FeatureStore decode_feature_store(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), "FST1", 4) != 0) {
        throw DataError("bad magic: not an FST1 feature store");
    }
    Reader in(bytes.subspan(4));
    const std::uint32_t header_len = in.u32();
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(in.str(header_len));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("feature store header is not valid JSON: ") + e.what());
    }
    if (header.value("schema_version", 0) != kSchemaVersion) throw DataError("unsupported feature store schema version");

    FeatureStore store;
    for (const auto& [name, dim] : header.at("modalities").items()) {
        Modality m;
        try {
            m = parse_modality(name);
        } catch (const ConfigError& e) {
            throw DataError(std::string("feature store: ") + e.what());
        }
        store.present.set(m);
        store.dims[static_cast<std::size_t>(m)] = dim.get<std::size_t>();
    }
    const auto count = header.at("records").get<std::size_t>();
    store.records.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint32_t len = in.u32();
        const std::size_t start = in.pos();
        FeatureRecord r;
        r.sample_id = in.str(in.u32());
        r.patient_id = in.str(in.u32());
        r.label = in.u8();
        if (r.label >= static_cast<int>(kClasses)) throw DataError("feature store: label out of range");
        for (Modality m : kOrder) {
            if (!store.present.has(m)) continue;
            auto& v = r.features[m];
            v.resize(store.dims[static_cast<std::size_t>(m)]);
            for (auto& x : v) x = in.f64();
        }
        if (in.pos() - start != len) throw DataError("feature store record " + r.sample_id + ": length prefix mismatch");
        store.records.push_back(std::move(r));
    }
    if (!in.done()) throw DataError("feature store has trailing bytes");
    return store;
}

void write_feature_store(const std::filesystem::path& path, const FeatureStore& store) {
    const auto bytes = encode_feature_store(store);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed: " + path.string());
}

FeatureStore read_feature_store(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open feature store " + path.string());
    const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return decode_feature_store(bytes);
}

SampleFeatures extract_sample_features(const SampleRecord& record, ModalityMask groups) {
    SampleFeatures f;
    if (groups.has(Modality::deep)) f[Modality::deep] = load_embedding(record.embedding_path);
    const bool needs_cube = groups.has(Modality::hae) || groups.has(Modality::tex) || groups.has(Modality::spec);
    if (needs_cube) {
        const SpectralCube cube = load_cube(record.cube_path);
        const BandStatistics stats = roi_band_statistics(cube);
        if (groups.has(Modality::hae)) {
            const auto v = hb_features(stats);
            f[Modality::hae].assign(v.begin(), v.end());
        }
        if (groups.has(Modality::tex)) {
            const auto v = texture_features(luminance_plane(cube));
            f[Modality::tex].assign(v.begin(), v.end());
        }
        if (groups.has(Modality::spec)) {
            const auto v = spectral_shape_features(stats.mean);
            f[Modality::spec].assign(v.begin(), v.end());
        }
    }
    if (groups.has(Modality::demo)) {
        const auto v = demographic_vector(record);
        f[Modality::demo].assign(v.begin(), v.end());
    }
    return f;
}

FeatureStore extract_features(const Dataset& dataset, ModalityMask groups) {
    FeatureStore store;
    store.present = groups;
    store.records.resize(dataset.size());
    parallel_for(dataset.size(), [&](std::size_t i) {
        const SampleRecord& s = dataset[i];
        try {
            store.records[i] = {s.sample_id, s.patient_id, static_cast<int>(s.label), extract_sample_features(s, groups)};
        } catch (const std::exception& e) {
            throw DataError("sample " + s.sample_id + ": " + e.what());
        }
    });
    for (Modality m : kOrder) {
        if (!groups.has(m)) continue;
        store.dims[static_cast<std::size_t>(m)] =
            store.records.empty() ? kModalityDims[static_cast<std::size_t>(m)] : store.records.front().features[m].size();
    }
    return store;
}

} // namespace oralstack
