#pragma once
// In-memory feature stores with class signal, for tests that skip file I/O.

#include "oralstack/feature_store.hpp"
#include "oralstack/ihml.hpp"
#include "oralstack/random.hpp"

namespace testing {

inline oralstack::FeatureStore toy_store(std::size_t patients, std::size_t images, std::uint64_t seed,
                                         double signal) {
    using namespace oralstack;
    Rng rng(seed);
    FeatureStore store;
    store.present = ModalityMask::all();
    for (std::size_t m = 0; m < kModalities; ++m) store.dims[m] = kModalityDims[m];
    for (std::size_t p = 0; p < patients; ++p) {
        const int label = static_cast<int>(p % 4);
        std::vector<double> patient_shift(8);
        for (auto& v : patient_shift) v = 0.5 * rng.normal();
        for (std::size_t i = 0; i < images; ++i) {
            FeatureRecord r;
            r.sample_id = "p" + std::to_string(p) + "_i" + std::to_string(i);
            r.patient_id = "p" + std::to_string(p);
            r.label = label;
            for (std::size_t m = 0; m < kModalities; ++m) {
                auto& v = r.features.modalities[m];
                v.resize(kModalityDims[m]);
                for (std::size_t j = 0; j < v.size(); ++j) {
                    v[j] = rng.normal() + (j < 8 ? patient_shift[j] : 0.0);
                    if (j < 4 && static_cast<int>(j) == label) v[j] += signal;
                }
            }
            auto& demo = r.features[Modality::demo];
            demo[0] = rng.uniform(0.2, 0.8);
            for (std::size_t j = 1; j < 5; ++j) demo[j] = rng.bernoulli(0.5) ? 1.0 : 0.0;
            store.records.push_back(std::move(r));
        }
    }
    return store;
}

// Defaults with fewer trees and rounds, for quick unit runs.
inline oralstack::IhmlConfig fast_config(std::uint64_t seed) {
    auto cfg = oralstack::IhmlConfig::defaults(seed);
    for (auto& l : cfg.learners) {
        l.extra_trees.n_trees = 40;
        l.gbdt.rounds = 15;
    }
    return cfg;
}

} // namespace testing
