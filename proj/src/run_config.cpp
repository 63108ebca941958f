#include "oralstack/run_config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include "oralstack/error.hpp"

namespace oralstack {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void check_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) throw ConfigError("config: '" + std::string(where) + "' must be an object");
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || key == a;
        if (!ok) {
            const std::string path = where.empty() ? key : std::string(where) + "." + key;
            throw ConfigError("config: unknown key '" + path + "'");
        }
    }
}

template <typename T>
void read(const json& obj, std::string_view key, std::string_view where, T& out) {
    const auto it = obj.find(std::string(key));
    if (it == obj.end()) return;
    try {
        if constexpr (std::is_integral_v<T>) {
            if (!it->is_number_integer()) throw ConfigError("");
            if constexpr (std::is_unsigned_v<T>) {
                if (it->is_number_unsigned() || it->template get<long long>() >= 0) {
                    out = it->template get<T>();
                    return;
                }
                throw ConfigError("");
            } else {
                out = it->template get<T>();
            }
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!it->is_number()) throw ConfigError("");
            out = it->template get<T>();
        } else {
            if (!it->is_string()) throw ConfigError("");
            out = it->template get<T>();
        }
    } catch (const ConfigError&) {
        throw ConfigError("config: invalid value for '" + std::string(where) + "." + std::string(key) + "'");
    }
}

void read_logreg(const json& j, std::string_view where, LogRegConfig& cfg) {
    check_keys(j, where, {"l2", "max_iter", "grad_tol", "history"});
    read(j, "l2", where, cfg.l2);
    read(j, "max_iter", where, cfg.max_iter);
    read(j, "grad_tol", where, cfg.grad_tol);
    read(j, "history", where, cfg.history);
}

void read_extra_trees(const json& j, std::string_view where, ExtraTreesConfig& cfg) {
    check_keys(j, where, {"n_trees", "min_leaf", "max_features"});
    read(j, "n_trees", where, cfg.n_trees);
    read(j, "min_leaf", where, cfg.min_leaf);
    read(j, "max_features", where, cfg.max_features);
}

void read_gbdt(const json& j, std::string_view where, GbdtConfig& cfg) {
    check_keys(j, where, {"rounds", "learning_rate", "max_depth", "max_leaves", "l2", "min_leaf"});
    read(j, "rounds", where, cfg.rounds);
    read(j, "learning_rate", where, cfg.learning_rate);
    read(j, "max_depth", where, cfg.max_depth);
    read(j, "max_leaves", where, cfg.max_leaves);
    read(j, "l2", where, cfg.l2);
    read(j, "min_leaf", where, cfg.min_leaf);
}

ordered_json logreg_json(const LogRegConfig& c) {
    return ordered_json{{"l2", c.l2}, {"max_iter", c.max_iter}, {"grad_tol", c.grad_tol}, {"history", c.history}};
}

ordered_json gbdt_json(const GbdtConfig& c) {
    return ordered_json{{"rounds", c.rounds}, {"learning_rate", c.learning_rate}, {"max_depth", c.max_depth},
                        {"max_leaves", c.max_leaves}, {"l2", c.l2}, {"min_leaf", c.min_leaf}};
}

std::size_t slot(LearnerKind k) { return static_cast<std::size_t>(k); }

} // namespace

IhmlConfig RunConfig::resolved_ihml() const {
    IhmlConfig cfg = ihml;
    cfg.seed = seed;
    if (preset) cfg.groups = preset_groups(*preset);
    return cfg;
}

void RunConfig::validate() const {
    resolved_ihml().validate();
    if (!(split.holdout_fraction > 0.0 && split.holdout_fraction < 1.0)) {
        throw ConfigError("config: split.holdout_fraction must lie in (0, 1)");
    }
    if (split.folds < 2) throw ConfigError("config: split.folds must be >= 2");
}

RunConfig parse_run_config(const json& doc, RunConfig cfg) {
    check_keys(doc, "", {"seed", "preset", "groups", "learners", "meta", "smoothing", "inner_folds", "split", "paths"});
    read(doc, "seed", "", cfg.seed);
    if (doc.contains("preset")) {
        if (doc["preset"].is_null()) {
            cfg.preset.reset();
        } else {
            std::string name;
            read(doc, "preset", "", name);
            cfg.preset = parse_preset(name);
        }
    }
    if (doc.contains("groups")) {
        std::string groups;
        read(doc, "groups", "", groups);
        cfg.ihml.groups = ModalityMask::parse(groups);
    }
    if (doc.contains("learners")) {
        const auto& l = doc["learners"];
        check_keys(l, "learners", {"logreg", "extra_trees", "gbdt_level", "gbdt_leaf"});
        if (l.contains("logreg")) read_logreg(l["logreg"], "learners.logreg", cfg.ihml.learners[slot(LearnerKind::logreg)].logreg);
        if (l.contains("extra_trees")) {
            read_extra_trees(l["extra_trees"], "learners.extra_trees",
                             cfg.ihml.learners[slot(LearnerKind::extra_trees)].extra_trees);
        }
        if (l.contains("gbdt_level")) {
            read_gbdt(l["gbdt_level"], "learners.gbdt_level", cfg.ihml.learners[slot(LearnerKind::gbdt_level)].gbdt);
        }
        if (l.contains("gbdt_leaf")) {
            read_gbdt(l["gbdt_leaf"], "learners.gbdt_leaf", cfg.ihml.learners[slot(LearnerKind::gbdt_leaf)].gbdt);
        }
    }
    if (doc.contains("meta")) read_logreg(doc["meta"], "meta", cfg.ihml.meta);
    if (doc.contains("smoothing")) {
        const auto& s = doc["smoothing"];
        check_keys(s, "smoothing", {"alpha", "iterations", "target"});
        read(s, "alpha", "smoothing", cfg.ihml.smoothing.alpha);
        read(s, "iterations", "smoothing", cfg.ihml.smoothing.iterations);
        if (s.contains("target")) {
            std::string t;
            read(s, "target", "smoothing", t);
            cfg.ihml.smoothing.target = parse_smoothing_target(t);
        }
    }
    read(doc, "inner_folds", "", cfg.ihml.inner_folds);
    if (doc.contains("split")) {
        const auto& s = doc["split"];
        check_keys(s, "split", {"holdout_fraction", "folds", "seed"});
        read(s, "holdout_fraction", "split", cfg.split.holdout_fraction);
        read(s, "folds", "split", cfg.split.folds);
        if (s.contains("seed")) {
            std::uint64_t v = 0;
            read(s, "seed", "split", v);
            cfg.split_seed = v;
        }
    }
    if (doc.contains("paths")) {
        const auto& p = doc["paths"];
        check_keys(p, "paths", {"manifest", "features", "bundle", "out"});
        std::string v;
        auto path = [&](std::string_view key, std::filesystem::path& out) {
            if (!p.contains(std::string(key))) return;
            read(p, key, "paths", v);
            out = v;
        };
        path("manifest", cfg.paths.manifest);
        path("features", cfg.paths.features);
        path("bundle", cfg.paths.bundle);
        path("out", cfg.paths.out);
    }
    cfg.validate();
    return cfg;
}

RunConfig parse_run_config(std::string_view text, RunConfig base) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    return parse_run_config(doc, std::move(base));
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_run_config(std::string_view(ss.str()), std::move(base));
}

ordered_json run_config_to_json(const RunConfig& cfg) {
    const IhmlConfig ihml = cfg.resolved_ihml();
    ordered_json learners;
    const auto& lr = ihml.learners[slot(LearnerKind::logreg)];
    const auto& et = ihml.learners[slot(LearnerKind::extra_trees)].extra_trees;
    learners["logreg"] = logreg_json(lr.logreg);
    learners["extra_trees"] = ordered_json{{"n_trees", et.n_trees}, {"min_leaf", et.min_leaf}, {"max_features", et.max_features}};
    learners["gbdt_level"] = gbdt_json(ihml.learners[slot(LearnerKind::gbdt_level)].gbdt);
    learners["gbdt_leaf"] = gbdt_json(ihml.learners[slot(LearnerKind::gbdt_leaf)].gbdt);

    ordered_json out;
    out["seed"] = cfg.seed;
    out["preset"] = cfg.preset ? ordered_json(std::string(preset_name(*cfg.preset))) : ordered_json(nullptr);
    out["groups"] = ihml.groups.to_string();
    out["learners"] = std::move(learners);
    out["meta"] = logreg_json(ihml.meta);
    out["smoothing"] = ordered_json{{"alpha", ihml.smoothing.alpha},
                                    {"iterations", ihml.smoothing.iterations},
                                    {"target", std::string(smoothing_target_name(ihml.smoothing.target))}};
    out["inner_folds"] = ihml.inner_folds;
    out["split"] = ordered_json{{"holdout_fraction", cfg.split.holdout_fraction},
                                {"folds", cfg.split.folds},
                                {"seed", cfg.resolved_split_seed()}};
    out["paths"] = ordered_json{{"manifest", cfg.paths.manifest.generic_string()},
                                {"features", cfg.paths.features.generic_string()},
                                {"bundle", cfg.paths.bundle.generic_string()},
                                {"out", cfg.paths.out.generic_string()}};
    return out;
}

} // namespace oralstack
