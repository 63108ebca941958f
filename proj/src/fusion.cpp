#include "oralstack/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "oralstack/error.hpp"

namespace oralstack {

namespace {

constexpr std::array<std::string_view, kModalities> kNames = {"deep", "hae", "tex", "spec", "demo"};

constexpr std::array<Modality, kModalities> kOrder = {Modality::deep, Modality::hae, Modality::tex, Modality::spec,
                                                       Modality::demo};

bool is_missing_flag(double v) { return v < 0.0; }

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

std::string_view modality_name(Modality m) { return kNames[static_cast<std::size_t>(m)]; }

Modality parse_modality(std::string_view name) {
    for (std::size_t i = 0; i < kModalities; ++i) {
        if (kNames[i] == name) return static_cast<Modality>(i);
    }
    throw ConfigError("unknown modality '" + std::string(name) + "'");
}

ModalityMask ModalityMask::parse(std::string_view list) {
    ModalityMask mask;
    std::size_t pos = 0;
    while (pos <= list.size()) {
        const std::size_t comma = std::min(list.find(',', pos), list.size());
        const auto token = list.substr(pos, comma - pos);
        if (token.empty()) throw ConfigError("empty modality name in '" + std::string(list) + "'");
        mask.set(parse_modality(token));
        pos = comma + 1;
    }
    return mask;
}

std::string ModalityMask::to_string() const {
    std::string out;
    for (Modality m : kOrder) {
        if (!has(m)) continue;
        if (!out.empty()) out += ',';
        out += modality_name(m);
    }
    return out;
}

std::size_t ModalityMask::fused_dim() const {
    std::size_t d = 0;
    for (Modality m : kOrder) {
        if (has(m)) d += kModalityDims[static_cast<std::size_t>(m)];
    }
    return d;
}

void check_modality_dims(const SampleFeatures& sample, ModalityMask required) {
    for (Modality m : kOrder) {
        if (!required.has(m)) continue;
        if (sample[m].size() != kModalityDims[static_cast<std::size_t>(m)]) {
            throw DataError("modality dimension mismatch: " + std::string(modality_name(m)) + " (expected " +
                            std::to_string(kModalityDims[static_cast<std::size_t>(m)]) + ", got " +
                            std::to_string(sample[m].size()) + ")");
        }
    }
}

std::vector<double> impute_demographics(std::span<const double> demo, const std::array<double, 5>& impute) {
    std::vector<double> out(demo.begin(), demo.end());
    if (std::isnan(out[0])) out[0] = impute[0];
    for (std::size_t j = 1; j < 5; ++j) {
        if (is_missing_flag(out[j])) out[j] = impute[j];
    }
    return out;
}

ModalityNormalizer fit_normalizer(std::span<const SampleFeatures> train) {
    if (train.empty()) throw DataError("cannot fit normalizer on zero training rows");
    ModalityNormalizer norm;

    // Which modalities are present is decided by the first row; all rows
    // must agree.
    ModalityMask present;
    for (Modality m : kOrder) present.set(m, !train.front()[m].empty());
    for (const auto& s : train) check_modality_dims(s, present);

    if (present.has(Modality::demo)) {
        std::vector<double> ages;
        for (const auto& s : train) {
            if (!std::isnan(s[Modality::demo][0])) ages.push_back(s[Modality::demo][0]);
        }
        norm.demo_impute[0] = ages.empty() ? 0.0 : median(std::move(ages));
        for (std::size_t j = 1; j < 5; ++j) {
            std::size_t ones = 0;
            std::size_t zeros = 0;
            for (const auto& s : train) {
                const double v = s[Modality::demo][j];
                if (is_missing_flag(v)) continue;
                (v > 0.5 ? ones : zeros)++;
            }
            norm.demo_impute[j] = ones > zeros ? 1.0 : 0.0;
        }
    }

    const double n = static_cast<double>(train.size());
    for (Modality m : kOrder) {
        if (!present.has(m)) continue;
        const std::size_t dim = kModalityDims[static_cast<std::size_t>(m)];
        ModalityStats st{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
        std::vector<std::vector<double>> rows;
        rows.reserve(train.size());
        for (const auto& s : train) {
            rows.push_back(m == Modality::demo ? impute_demographics(s[m], norm.demo_impute) : s[m]);
        }
        for (const auto& r : rows) {
            for (std::size_t j = 0; j < dim; ++j) st.mean[j] += r[j];
        }
        for (auto& v : st.mean) v /= n;
        for (const auto& r : rows) {
            for (std::size_t j = 0; j < dim; ++j) st.stddev[j] += (r[j] - st.mean[j]) * (r[j] - st.mean[j]);
        }
        for (auto& v : st.stddev) v = std::max(std::sqrt(v / n), kStdFloor);
        norm.stats[static_cast<std::size_t>(m)] = std::move(st);
    }
    return norm;
}

FusedVector fuse(const SampleFeatures& sample, const ModalityNormalizer& normalizer, ModalityMask active) {
    check_modality_dims(sample, active);
    FusedVector out;
    out.mask = active;
    out.values.reserve(active.fused_dim());
    for (Modality m : kOrder) {
        if (!active.has(m)) continue;
        const ModalityStats* st = normalizer.get(m);
        if (!st) throw DataError("normalizer was not fitted for modality " + std::string(modality_name(m)));
        const std::vector<double> raw =
            m == Modality::demo ? impute_demographics(sample[m], normalizer.demo_impute) : sample[m];
        for (std::size_t j = 0; j < raw.size(); ++j) out.values.push_back((raw[j] - st->mean[j]) / st->stddev[j]);
    }
    return out;
}

Matrix fuse_all(std::span<const SampleFeatures> samples, const ModalityNormalizer& normalizer, ModalityMask active) {
    Matrix x(samples.size(), active.fused_dim());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto v = fuse(samples[i], normalizer, active).values;
        std::copy(v.begin(), v.end(), x.row(i).begin());
    }
    return x;
}

} // namespace oralstack
