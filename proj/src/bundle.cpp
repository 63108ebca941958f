#include "oralstack/bundle.hpp"

#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "oralstack/error.hpp"

namespace oralstack {

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

Matrix matrix_from_json(const json& j) {
    Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    auto data = j.at("data").get<std::vector<double>>();
    if (data.size() != m.rows() * m.cols()) throw DataError("bundle: matrix size mismatch");
    m.data() = std::move(data);
    return m;
}

json logreg_to_json(const LogisticRegression& lr) {
    return json{{"weights", matrix_to_json(lr.weights())}, {"bias", lr.bias()}};
}

LogisticRegression logreg_from_json(const json& j) {
    return LogisticRegression(matrix_from_json(j.at("weights")), j.at("bias").get<std::vector<double>>());
}

// Trees are stored column-wise: one array per node field.
json class_tree_to_json(const ClassTree& t) {
    std::vector<int> feature, left, right;
    std::vector<double> threshold, dist;
    for (const auto& n : t.nodes) {
        feature.push_back(n.feature);
        left.push_back(n.left);
        right.push_back(n.right);
        threshold.push_back(n.threshold);
        dist.insert(dist.end(), n.dist.begin(), n.dist.end());
    }
    return json{{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right}, {"dist", dist}};
}

ClassTree class_tree_from_json(const json& j) {
    const auto feature = j.at("feature").get<std::vector<int>>();
    const auto threshold = j.at("threshold").get<std::vector<double>>();
    const auto left = j.at("left").get<std::vector<int>>();
    const auto right = j.at("right").get<std::vector<int>>();
    const auto dist = j.at("dist").get<std::vector<double>>();
    const std::size_t n = feature.size();
    if (threshold.size() != n || left.size() != n || right.size() != n || dist.size() != n * kClasses) {
        throw DataError("bundle: inconsistent tree arrays");
    }
    ClassTree t;
    t.nodes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& node = t.nodes[i];
        node.feature = feature[i];
        node.threshold = threshold[i];
        node.left = left[i];
        node.right = right[i];
        std::copy_n(dist.begin() + static_cast<std::ptrdiff_t>(i * kClasses), kClasses, node.dist.begin());
    }
    return t;
}

json reg_tree_to_json(const RegTree& t) {
    std::vector<int> feature, left, right;
    std::vector<double> threshold, value;
    for (const auto& n : t.nodes) {
        feature.push_back(n.feature);
        left.push_back(n.left);
        right.push_back(n.right);
        threshold.push_back(n.threshold);
        value.push_back(n.value);
    }
    return json{{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right}, {"value", value}};
}

RegTree reg_tree_from_json(const json& j) {
    const auto feature = j.at("feature").get<std::vector<int>>();
    const auto threshold = j.at("threshold").get<std::vector<double>>();
    const auto left = j.at("left").get<std::vector<int>>();
    const auto right = j.at("right").get<std::vector<int>>();
    const auto value = j.at("value").get<std::vector<double>>();
    const std::size_t n = feature.size();
    if (threshold.size() != n || left.size() != n || right.size() != n || value.size() != n) {
        throw DataError("bundle: inconsistent tree arrays");
    }
    RegTree t;
    t.nodes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        t.nodes[i] = RegTreeNode{feature[i], threshold[i], left[i], right[i], value[i]};
    }
    return t;
}

json base_to_json(const BaseModel& model) {
    return std::visit(
        [](const auto& m) -> json {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, LogisticRegression>) {
                return json{{"type", "logreg"}, {"model", logreg_to_json(m)}};
            } else if constexpr (std::is_same_v<T, ExtraTrees>) {
                json trees = json::array();
                for (const auto& t : m.trees) trees.push_back(class_tree_to_json(t));
                return json{{"type", "extra_trees"}, {"trees", std::move(trees)}};
            } else {
                json rounds = json::array();
                for (const auto& r : m.rounds) {
                    json per_class = json::array();
                    for (const auto& t : r) per_class.push_back(reg_tree_to_json(t));
                    rounds.push_back(std::move(per_class));
                }
                return json{{"type", "gbdt"}, {"init", m.init}, {"rounds", std::move(rounds)}};
            }
        },
        model);
}

BaseModel base_from_json(const json& j) {
    const auto type = j.at("type").get<std::string>();
    if (type == "logreg") return logreg_from_json(j.at("model"));
    if (type == "extra_trees") {
        ExtraTrees et;
        for (const auto& t : j.at("trees")) et.trees.push_back(class_tree_from_json(t));
        return et;
    }
    if (type == "gbdt") {
        Gbdt g;
        g.init = j.at("init").get<ClassDistribution>();
        for (const auto& r : j.at("rounds")) {
            if (r.size() != kClasses) throw DataError("bundle: gbdt round must hold one tree per class");
            std::array<RegTree, kClasses> trees;
            for (std::size_t c = 0; c < kClasses; ++c) trees[c] = reg_tree_from_json(r[c]);
            g.rounds.push_back(std::move(trees));
        }
        return g;
    }
    throw DataError("bundle: unknown base model type '" + type + "'");
}

json normalizer_to_json(const ModalityNormalizer& n) {
    json stats = json::object();
    for (std::size_t m = 0; m < kModalities; ++m) {
        if (!n.stats[m]) continue;
        stats[std::string(modality_name(static_cast<Modality>(m)))] =
            json{{"mean", n.stats[m]->mean}, {"stddev", n.stats[m]->stddev}};
    }
    return json{{"stats", std::move(stats)}, {"demo_impute", n.demo_impute}};
}

ModalityNormalizer normalizer_from_json(const json& j) {
    ModalityNormalizer n;
    for (const auto& [name, s] : j.at("stats").items()) {
        const Modality m = parse_modality(name);
        ModalityStats stats{s.at("mean").get<std::vector<double>>(), s.at("stddev").get<std::vector<double>>()};
        const std::size_t dim = kModalityDims[static_cast<std::size_t>(m)];
        if (stats.mean.size() != dim || stats.stddev.size() != dim) {
            throw DataError("bundle: normalizer dimension mismatch: " + name);
        }
        n.stats[static_cast<std::size_t>(m)] = std::move(stats);
    }
    n.demo_impute = j.at("demo_impute").get<std::array<double, 5>>();
    return n;
}

json calibrators_to_json(const ClassCalibrators& cal) {
    json out = json::array();
    for (const auto& map : cal) out.push_back(json{{"breakpoints", map.breakpoints}, {"values", map.values}});
    return out;
}

ClassCalibrators calibrators_from_json(const json& j) {
    if (j.size() != kClasses) throw DataError("bundle: expected one calibrator per class");
    ClassCalibrators cal;
    for (std::size_t c = 0; c < kClasses; ++c) {
        cal[c].breakpoints = j[c].at("breakpoints").get<std::vector<double>>();
        cal[c].values = j[c].at("values").get<std::vector<double>>();
        if (cal[c].breakpoints.size() != cal[c].values.size()) throw DataError("bundle: calibrator size mismatch");
    }
    return cal;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

} // namespace

std::vector<std::uint8_t> encode_bundle(const IhmlModel& model) {
    json doc;
    doc["groups"] = model.groups.to_string();
    doc["normalizer"] = normalizer_to_json(model.normalizer);
    json base = json::array();
    json cals = json::array();
    for (std::size_t m = 0; m < model.base.size(); ++m) {
        json entry = base_to_json(model.base[m]);
        entry["learner"] = std::string(learner_name(kLearnerKinds[m]));
        base.push_back(std::move(entry));
        cals.push_back(calibrators_to_json(model.calibrators[m]));
    }
    doc["base"] = std::move(base);
    doc["calibrators"] = std::move(cals);
    doc["meta"] = logreg_to_json(model.meta);
    doc["smoothing"] = json{{"alpha", model.smoothing.alpha},
                            {"iterations", model.smoothing.iterations},
                            {"target", std::string(smoothing_target_name(model.smoothing.target))}};

    std::vector<std::uint8_t> out = {'S', 'L', 'M', '1'};
    put_u32(out, kBundleVersion);
    const auto body = json::to_cbor(doc);
    out.insert(out.end(), body.begin(), body.end());
    return out;
}

IhmlModel decode_bundle(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8 || std::memcmp(bytes.data(), "SLM1", 4) != 0) throw DataError("not an SLM1 model bundle");
    std::uint32_t version = 0;
    for (int i = 0; i < 4; ++i) version |= static_cast<std::uint32_t>(bytes[4 + i]) << (8 * i);
    if (version != kBundleVersion) throw DataError("unsupported SLM1 bundle version " + std::to_string(version));
    try {
        const json doc = json::from_cbor(bytes.subspan(8));
        IhmlModel model;
        model.groups = ModalityMask::parse(doc.at("groups").get<std::string>());
        model.normalizer = normalizer_from_json(doc.at("normalizer"));
        const auto& base = doc.at("base");
        const auto& cals = doc.at("calibrators");
        if (base.size() != model.base.size() || cals.size() != model.base.size()) {
            throw DataError("bundle: expected four base models");
        }
        for (std::size_t m = 0; m < model.base.size(); ++m) {
            if (base[m].at("learner").get<std::string>() != learner_name(kLearnerKinds[m])) {
                throw DataError("bundle: base model order mismatch");
            }
            model.base[m] = base_from_json(base[m]);
            model.calibrators[m] = calibrators_from_json(cals[m]);
        }
        model.meta = logreg_from_json(doc.at("meta"));
        const auto& s = doc.at("smoothing");
        model.smoothing.alpha = s.at("alpha").get<double>();
        model.smoothing.iterations = s.at("iterations").get<int>();
        model.smoothing.target = parse_smoothing_target(s.at("target").get<std::string>());
        return model;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed SLM1 bundle: ") + e.what());
    } catch (const ConfigError& e) {
        throw DataError(std::string("malformed SLM1 bundle: ") + e.what());
    }
}

void save_bundle(const std::filesystem::path& path, const IhmlModel& model) {
    const auto bytes = encode_bundle(model);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write bundle " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("cannot write bundle " + path.string());
}

IhmlModel load_bundle(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open bundle " + path.string());
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_bundle(bytes);
}

} // namespace oralstack
