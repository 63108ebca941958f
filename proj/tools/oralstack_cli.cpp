// oralstack command-line driver: synth, features, train, evaluate, cv, ablate.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "oralstack/bundle.hpp"
#include "oralstack/error.hpp"
#include "oralstack/evaluation.hpp"
#include "oralstack/feature_store.hpp"
#include "oralstack/parallel.hpp"
#include "oralstack/report.hpp"
#include "oralstack/run_config.hpp"
#include "oralstack/synth.hpp"

namespace fs = std::filesystem;
using namespace oralstack;

namespace {

struct Globals {
    std::optional<std::uint64_t> seed;
    std::string config;
    unsigned threads = 0;
    std::string out;
};

struct SynthArgs {
    SynthConfig cfg;
    std::string images = "2..5";
    std::string priors;
    std::optional<double> signal;
};

struct FeatureArgs {
    std::string manifest;
    std::string groups = "deep,hae,tex,spec,demo";
};

struct ModelArgs {
    std::string features;
    std::string bundle;
    std::string preset;
    std::string predictions;
    std::string csv;
};

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
    if (!out) throw DataError("cannot write " + path.string());
}

void write_json(const fs::path& path, const ordered_json& doc) { write_text(path, doc.dump(2) + "\n"); }

RunConfig resolve_config(const Globals& g) {
    RunConfig cfg;
    if (!g.config.empty()) cfg = load_run_config(g.config);
    if (g.seed) cfg.seed = *g.seed;
    if (!g.out.empty()) cfg.paths.out = g.out;
    cfg.validate();
    return cfg;
}

fs::path require_path(const std::string& flag, const fs::path& from_config, std::string_view what) {
    fs::path p = flag.empty() ? from_config : fs::path(flag);
    if (p.empty()) throw ConfigError(std::string(what) + " path is required");
    return p;
}

std::pair<std::size_t, std::size_t> parse_range(const std::string& text) {
    const auto dots = text.find("..");
    try {
        if (dots == std::string::npos) {
            const auto n = std::stoul(text);
            return {n, n};
        }
        return {std::stoul(text.substr(0, dots)), std::stoul(text.substr(dots + 2))};
    } catch (const std::exception&) {
        throw ConfigError("images must be N or MIN..MAX, got '" + text + "'");
    }
}

int cmd_synth(const Globals& g, SynthArgs& a) {
    SynthConfig& cfg = a.cfg;
    const auto [lo, hi] = parse_range(a.images);
    cfg.images_min = lo;
    cfg.images_max = hi;
    if (a.signal) cfg.set_signal(*a.signal);
    if (!a.priors.empty()) {
        std::stringstream ss(a.priors);
        std::string tok;
        for (std::size_t c = 0; c < kClasses; ++c) {
            if (!std::getline(ss, tok, ',')) throw ConfigError("priors must list 4 comma-separated values");
            try {
                cfg.class_priors[c] = std::stod(tok);
            } catch (const std::exception&) {
                throw ConfigError("invalid prior '" + tok + "'");
            }
        }
    }
    if (g.seed) cfg.seed = *g.seed;
    cfg.validate();
    if (g.out.empty()) throw ConfigError("synth requires --out <directory>");
    const SynthSummary s = generate_cohort(cfg, g.out);
    std::cout << s.manifest.generic_string() << '\n';
    std::cout << "patients " << cfg.patients << ", images " << s.images << '\n';
    for (std::size_t c = 0; c < kClasses; ++c) {
        std::cout << "  " << label_name(static_cast<Label>(c)) << ": " << s.class_patients[c] << " patients, "
                  << s.class_images[c] << " images\n";
    }
    return 0;
}

int cmd_features(const Globals& g, const FeatureArgs& a) {
    const RunConfig cfg = resolve_config(g);
    const fs::path manifest = require_path(a.manifest, cfg.paths.manifest, "manifest");
    const fs::path out = require_path("", cfg.paths.features.empty() ? cfg.paths.out : cfg.paths.features, "output");
    const ModalityMask groups = ModalityMask::parse(a.groups);
    const Dataset dataset = read_manifest(manifest);
    const FeatureStore store = extract_features(dataset, groups);
    write_feature_store(out, store);
    std::cout << "wrote " << store.size() << " records to " << out.generic_string() << '\n';
    std::size_t total = 0;
    for (std::size_t m = 0; m < kModalities; ++m) {
        if (!store.present.has(static_cast<Modality>(m))) continue;
        std::cout << "  " << modality_name(static_cast<Modality>(m)) << ": " << store.dims[m] << '\n';
        total += store.dims[m];
    }
    std::cout << "  total: " << total << '\n';
    return 0;
}

FeatureStore load_store(const ModelArgs& a, const RunConfig& cfg) {
    return read_feature_store(require_path(a.features, cfg.paths.features, "feature store"));
}

RunConfig with_preset(RunConfig cfg, const ModelArgs& a) {
    if (!a.preset.empty()) cfg.preset = parse_preset(a.preset);
    cfg.validate();
    return cfg;
}

int cmd_train(const Globals& g, const ModelArgs& a) {
    const RunConfig cfg = with_preset(resolve_config(g), a);
    const FeatureStore store = load_store(a, cfg);
    const fs::path out = require_path(a.bundle, cfg.paths.bundle.empty() ? cfg.paths.out : cfg.paths.bundle, "bundle");
    IhmlTrainingReport report;
    const IhmlModel model = train_ihml(store.features(), store.labels(), store.patient_ids(), cfg.resolved_ihml(), &report);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    save_bundle(out, model);
    std::cout << "wrote " << out.generic_string() << " (" << store.size() << " samples, groups "
              << cfg.resolved_ihml().groups.to_string() << ")\n";
    for (std::size_t m = 0; m < kLearnerKinds.size(); ++m) {
        std::printf("  %-12s OOF accuracy %.2f\n", std::string(learner_name(kLearnerKinds[m])).c_str(),
                    100.0 * report.base_oof_accuracy[m]);
    }
    std::printf("  %-12s train accuracy %.2f\n", "meta", 100.0 * report.meta_train_accuracy);
    return 0;
}

int cmd_evaluate(const Globals& g, const ModelArgs& a) {
    const RunConfig cfg = resolve_config(g);
    const FeatureStore store = load_store(a, cfg);
    const IhmlModel model = load_bundle(require_path(a.bundle, cfg.paths.bundle, "bundle"));
    const IhmlPrediction pred = predict_ihml(model, store.features(), store.patient_ids());
    const auto scores = score_prediction(pred, store.labels());
    std::cout << render_table(scores);
    if (!cfg.paths.out.empty()) write_json(cfg.paths.out, evaluate_report_to_json(scores, cfg));
    if (!a.predictions.empty()) write_text(a.predictions, predictions_to_csv(store, pred));
    return 0;
}

int cmd_cv(const Globals& g, const ModelArgs& a) {
    const RunConfig cfg = with_preset(resolve_config(g), a);
    const FeatureStore store = load_store(a, cfg);
    const CvReport report = run_cv(store, cfg.resolved_ihml(), cfg.split, cfg.resolved_split_seed());
    for (const auto& run : report.folds) std::cout << run.name << '\n' << render_table(run.scores);
    std::cout << report.holdout.name << '\n' << render_table(report.holdout.scores);
    if (!cfg.paths.out.empty()) write_json(cfg.paths.out, cv_report_to_json(report, store, cfg));
    return 0;
}

int cmd_ablate(const Globals& g, const ModelArgs& a) {
    const RunConfig cfg = resolve_config(g);
    const FeatureStore store = load_store(a, cfg);
    std::vector<AblationRow> rows;
    for (AblationPreset p : kAllPresets) {
        rows.push_back(run_ablation(store, p, cfg.resolved_ihml(), cfg.split, cfg.resolved_split_seed()));
    }
    const std::string csv = ablation_to_csv(rows);
    std::cout << csv;
    if (!cfg.paths.out.empty()) {
        write_json(cfg.paths.out, ablation_to_json(rows, cfg));
        fs::path csv_path = a.csv.empty() ? fs::path(cfg.paths.out).replace_extension(".csv") : fs::path(a.csv);
        write_text(csv_path, csv);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    set_warning_handler([](std::string_view msg) { std::cerr << "warning: " << msg << '\n'; });

    CLI::App app{"Multimodal oral lesion classification pipeline"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--seed", g.seed, "Random seed (overrides the config file)");
    app.add_option("--config", g.config, "JSON run configuration");
    app.add_option("--threads", g.threads, "Worker threads (default: hardware concurrency)");
    app.add_option("--out", g.out, "Output directory or file");

    SynthArgs synth;
    auto* s = app.add_subcommand("synth", "Generate a synthetic cohort");
    s->add_option("--patients", synth.cfg.patients, "Number of patients")->capture_default_str();
    s->add_option("--images", synth.images, "Images per patient, N or MIN..MAX")->capture_default_str();
    s->add_option("--priors", synth.priors, "Class priors healthy,benign,opmd,oca");
    s->add_option("--size", synth.cfg.cube_size, "Cube height and width")->capture_default_str();
    s->add_option("--signal", synth.signal, "Signal strength for every modality");
    s->add_option("--signal-deep", synth.cfg.signal_deep)->capture_default_str();
    s->add_option("--signal-spectral", synth.cfg.signal_spectral)->capture_default_str();
    s->add_option("--signal-texture", synth.cfg.signal_texture)->capture_default_str();
    s->add_option("--signal-demographic", synth.cfg.signal_demographic)->capture_default_str();
    s->add_option("--patient-effect", synth.cfg.patient_effect)->capture_default_str();
    s->add_option("--noise", synth.cfg.noise)->capture_default_str();
    s->add_option("--missing", synth.cfg.missing_rate, "Per-field demographic missing rate")->capture_default_str();

    FeatureArgs feat;
    auto* f = app.add_subcommand("features", "Extract modality features into a feature store");
    f->add_option("--manifest", feat.manifest, "Manifest CSV");
    f->add_option("--groups", feat.groups, "Modalities to extract")->capture_default_str();

    ModelArgs model;
    auto* t = app.add_subcommand("train", "Train IHML and write an SLM1 bundle");
    t->add_option("--features", model.features, "Feature store");
    t->add_option("--preset", model.preset, "Ablation preset M1..M5");
    t->add_option("--bundle", model.bundle, "Bundle path (default: --out)");

    auto* e = app.add_subcommand("evaluate", "Score a bundle on a labelled feature store");
    e->add_option("--features", model.features, "Feature store");
    e->add_option("--bundle", model.bundle, "SLM1 bundle");
    e->add_option("--predictions", model.predictions, "Optional per-sample prediction CSV");

    auto* c = app.add_subcommand("cv", "Holdout plus K-fold patient-grouped cross-validation");
    c->add_option("--features", model.features, "Feature store");
    c->add_option("--preset", model.preset, "Ablation preset M1..M5");

    auto* a = app.add_subcommand("ablate", "Run the M1..M5 feature-group presets");
    a->add_option("--features", model.features, "Feature store");
    a->add_option("--csv", model.csv, "CSV table path (default: --out with .csv)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::CallForAllHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::ParseError& ex) {
        app.exit(ex);
        return 2;
    }

    set_thread_count(g.threads ? g.threads : std::max(1u, std::thread::hardware_concurrency()));
    try {
        if (s->parsed()) return cmd_synth(g, synth);
        if (f->parsed()) return cmd_features(g, feat);
        if (t->parsed()) return cmd_train(g, model);
        if (e->parsed()) return cmd_evaluate(g, model);
        if (c->parsed()) return cmd_cv(g, model);
        if (a->parsed()) return cmd_ablate(g, model);
    } catch (const ConfigError& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 2;
    } catch (const DataError& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 3;
    } catch (const InvariantError& ex) {
        std::cerr << "internal error: " << ex.what() << '\n';
        return 4;
    } catch (const std::filesystem::filesystem_error& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 3;
    }
    return 2;
}
