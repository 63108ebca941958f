#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cohort.hpp"
#include "errors.hpp"
#include "oralstack/bundle.hpp"
#include "oralstack/core.hpp"
#include "oralstack/error.hpp"
#include "oralstack/feature_store.hpp"
#include "oralstack/run_config.hpp"
#include "oralstack/spectral_features.hpp"
#include "oralstack/synth.hpp"
#include "support.hpp"

using namespace oralstack;
namespace fs = std::filesystem;

namespace {

std::vector<std::uint8_t> slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string slurp_text(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Every regular file under dir keyed by relative path.
std::map<std::string, std::vector<std::uint8_t>> tree(const fs::path& dir) {
    std::map<std::string, std::vector<std::uint8_t>> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) out[fs::relative(e.path(), dir).generic_string()] = slurp(e.path());
    }
    return out;
}

SynthConfig small_synth(std::uint64_t seed) {
    SynthConfig cfg;
    cfg.patients = 8;
    cfg.images_min = 1;
    cfg.images_max = 3;
    cfg.cube_size = 8;
    cfg.seed = seed;
    return cfg;
}

struct CliResult {
    int status = -1;
    std::string output;
};

CliResult run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string("\"") + ORALSTACK_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int raw = std::system(cmd.c_str());
    CliResult r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.output = slurp_text(log);
    return r;
}

} // namespace

TEST_SUITE("io") {

TEST_CASE("feature store round trip is exact") {
    FeatureStore store = testing::toy_store(5, 2, 1, 1.0);
    store.records[0].features[Modality::demo][0] = kMissingAge;
    store.records[1].features[Modality::deep][3] = -0.0;
    const auto bytes = encode_feature_store(store);
    const FeatureStore back = decode_feature_store(bytes);
    CHECK(back == store);
    CHECK(encode_feature_store(back) == bytes);
    CHECK(std::isnan(back.records[0].features[Modality::demo][0]));

    auto truncated = bytes;
    truncated.resize(bytes.size() - 3);
    CHECK_THROWS_AS(decode_feature_store(truncated), DataError);
    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(decode_feature_store(bad), DataError);
}

TEST_CASE("bundle round trip is byte identical") {
    const FeatureStore store = testing::toy_store(12, 2, 2, 2.0);
    const auto model = train_ihml(store.features(), store.labels(), store.patient_ids(), testing::fast_config(4));
    const auto bytes = encode_bundle(model);
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "SLM1");
    const IhmlModel back = decode_bundle(bytes);
    CHECK(encode_bundle(back) == bytes);
    const auto a = predict_ihml(model, store.features(), store.patient_ids());
    const auto b = predict_ihml(back, store.features(), store.patient_ids());
    CHECK(a.posteriors == b.posteriors);

    auto broken = bytes;
    broken.resize(bytes.size() / 2);
    CHECK_THROWS_AS(decode_bundle(broken), DataError);
}

TEST_CASE("run config parsing") {
    const RunConfig cfg = parse_run_config(std::string_view(R"({
        "seed": 9, "preset": "M2",
        "learners": {"gbdt_level": {"rounds": 7}},
        "smoothing": {"alpha": 0.5, "iterations": 2, "target": "both"},
        "split": {"holdout_fraction": 0.2, "folds": 4, "seed": 77}
    })"));
    CHECK(cfg.seed == 9);
    CHECK(cfg.resolved_split_seed() == 77);
    CHECK(cfg.split.folds == 4);
    const IhmlConfig ihml = cfg.resolved_ihml();
    CHECK(ihml.seed == 9);
    CHECK(ihml.groups.fused_dim() == 773);
    CHECK(ihml.smoothing.alpha == 0.5);
    CHECK(ihml.smoothing.target == SmoothingTarget::both);
    CHECK(ihml.learners[2].gbdt.rounds == 7);

    const auto unknown = thrown_message([] { parse_run_config(std::string_view(R"({"learners": {"svm": {}}})")); });
    CHECK(contains(unknown, "unknown key 'learners.svm'"));
    CHECK_THROWS_AS(parse_run_config(std::string_view(R"({"smoothing": {"alpha": "high"}})")), ConfigError);
    CHECK_THROWS_AS(parse_run_config(std::string_view(R"({"split": {"folds": 1}})")), ConfigError);
    CHECK_THROWS_AS(parse_run_config(std::string_view("{not json")), ConfigError);

    const auto echo = run_config_to_json(cfg);
    CHECK(echo.at("seed") == 9);
    CHECK(parse_run_config(std::string_view(echo.dump())).resolved_ihml().smoothing.alpha == 0.5);
}

}

TEST_SUITE("data-synth") {

TEST_CASE("same seed writes identical trees") {
    const auto a = testing::scratch_dir("synth_a");
    const auto b = testing::scratch_dir("synth_b");
    const auto sa = generate_cohort(small_synth(5), a);
    generate_cohort(small_synth(5), b);
    CHECK(tree(a) == tree(b));
    const Dataset ds = read_manifest(sa.manifest);
    CHECK(ds.size() == sa.images);
    CHECK(ds.patients().size() == 8);
    for (const auto& s : ds.samples()) {
        const SpectralCube cube = load_cube(s.cube_path);
        CHECK(cube.height() == 8);
        CHECK(cube.out_of_range_count() == 0);
        CHECK(load_embedding(s.embedding_path).size() == kDeepDim);
    }
    const auto c = testing::scratch_dir("synth_c");
    generate_cohort(small_synth(6), c);
    CHECK(tree(a) != tree(c));
    fs::remove_all(a);
    fs::remove_all(b);
    fs::remove_all(c);
}

TEST_CASE("configuration validation") {
    SynthConfig cfg;
    cfg.patients = 0;
    CHECK(contains(thrown_message([&] { cfg.validate(); }), "patients must be"));
    cfg = {};
    cfg.class_priors = {0.5, 0.5, 0.5, 0.0};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.signal_texture = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.images_min = 4;
    cfg.images_max = 2;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("rgb expansion is a fixed linear map") {
    for (double v : expand_rgb_to_pseudo_hsi(0, 0, 0).values) CHECK(v == 0.0);
    const auto& basis = rgb_basis();
    const auto r = expand_rgb_to_pseudo_hsi(1, 0, 0);
    for (std::size_t k = 0; k < kBands; ++k) CHECK(r.values[k] == basis[0][k]);
    CHECK(std::max_element(basis[0].begin(), basis[0].end()) - basis[0].begin() == 21);
    CHECK(std::max_element(basis[1].begin(), basis[1].end()) - basis[1].begin() == 15);
    CHECK(std::max_element(basis[2].begin(), basis[2].end()) - basis[2].begin() == 6);

    Rng rng(8);
    for (int t = 0; t < 100; ++t) {
        const double a[3] = {rng.uniform(0, 0.5), rng.uniform(0, 0.5), rng.uniform(0, 0.5)};
        const double b[3] = {rng.uniform(0, 0.5), rng.uniform(0, 0.5), rng.uniform(0, 0.5)};
        const auto sa = expand_rgb_to_pseudo_hsi(a[0], a[1], a[2]);
        const auto sb = expand_rgb_to_pseudo_hsi(b[0], b[1], b[2]);
        const auto sum = expand_rgb_to_pseudo_hsi(a[0] + b[0], a[1] + b[1], a[2] + b[2]);
        for (std::size_t k = 0; k < kBands; ++k) CHECK(std::abs(sa.values[k] + sb.values[k] - sum.values[k]) <= 1e-12);
    }
    CHECK_THROWS(expand_rgb_to_pseudo_hsi(1.2, 0, 0));
    CHECK_THROWS(expand_rgb_to_pseudo_hsi(0, -0.1, 0));
}

TEST_CASE("prototype dips deepen with class index") {
    const std::size_t band560 = 16;
    for (int c = 0; c + 1 < 4; ++c) {
        CHECK(class_prototype_spectrum(c + 1, 1.0).values[band560] < class_prototype_spectrum(c, 1.0).values[band560]);
        CHECK(class_prototype_spectrum(c + 1, 0.0).values == class_prototype_spectrum(c, 0.0).values);
    }
}

TEST_CASE("spectral signal separates the NDI slot") {
    SynthConfig cfg;
    cfg.patients = 100;
    cfg.images_min = 4;
    cfg.images_max = 4;
    cfg.cube_size = 12;
    cfg.set_signal(0.0);
    cfg.signal_spectral = 1.0;
    cfg.seed = 21;
    const auto dir = testing::scratch_dir("synth_f");
    const Dataset ds = read_manifest(generate_cohort(cfg, dir).manifest);
    REQUIRE(ds.size() == 400);

    // One-way ANOVA on NDI(545, 575).
    std::array<std::vector<double>, 4> groups;
    for (const auto& s : ds.samples()) {
        groups[static_cast<std::size_t>(s.label)].push_back(hb_features(load_cube(s.cube_path))[22]);
    }
    double grand = 0.0;
    for (const auto& g : groups)
        for (double v : g) grand += v / 400.0;
    double between = 0.0;
    double within = 0.0;
    std::size_t k = 0;
    for (const auto& g : groups) {
        if (g.empty()) continue;
        ++k;
        double m = 0.0;
        for (double v : g) m += v / static_cast<double>(g.size());
        between += static_cast<double>(g.size()) * (m - grand) * (m - grand);
        for (double v : g) within += (v - m) * (v - m);
    }
    const double f = (between / static_cast<double>(k - 1)) / (within / static_cast<double>(400 - k));
    CHECK(f > 10.0);
    fs::remove_all(dir);
}

TEST_CASE("corrupt cube names its sample") {
    const auto dir = testing::scratch_dir("synth_corrupt");
    const auto summary = generate_cohort(small_synth(3), dir);
    const Dataset ds = read_manifest(summary.manifest);
    const auto& victim = ds[ds.size() / 2];
    fs::resize_file(victim.cube_path, 20);
    const auto msg = thrown_message([&] { extract_features(ds, ModalityMask::all()); });
    CHECK(contains(msg, victim.sample_id));
    fs::remove_all(dir);
}

}

TEST_SUITE("cli") {

TEST_CASE("workflow end to end") {
    const auto dir = testing::scratch_dir("cli");
    const auto log = dir / "log.txt";

    auto r = run_cli("synth --patients 0 --out \"" + (dir / "none").string() + "\"", log);
    CHECK(r.status == 2);
    CHECK(contains(r.output, "patients must be ≥ 1"));

    CHECK(run_cli("synth --bogus 1", log).status == 2);

    r = run_cli("--seed 7 synth --patients 6 --images 2..3 --size 8 --out \"" + (dir / "cohort").string() + "\"", log);
    REQUIRE(r.status == 0);
    const auto manifest_bytes = slurp(dir / "cohort" / "manifest.csv");
    r = run_cli("--seed 7 synth --patients 6 --images 2..3 --size 8 --out \"" + (dir / "cohort2").string() + "\"", log);
    CHECK(slurp(dir / "cohort2" / "manifest.csv") == manifest_bytes);

    r = run_cli("features --manifest \"" + (dir / "cohort" / "manifest.csv").string() + "\" --out \"" +
                    (dir / "f.fst").string() + "\"",
                log);
    REQUIRE(r.status == 0);
    CHECK(contains(r.output, "total: 908"));
    const FeatureStore extracted = read_feature_store(dir / "f.fst");
    for (std::size_t m = 0; m < kModalities; ++m) CHECK(extracted.dims[m] == kModalityDims[m]);

    r = run_cli("features --groups deep,demo --manifest \"" + (dir / "cohort" / "manifest.csv").string() +
                    "\" --out \"" + (dir / "dd.fst").string() + "\"",
                log);
    REQUIRE(r.status == 0);
    const FeatureStore partial = read_feature_store(dir / "dd.fst");
    CHECK(partial.present.to_string() == ModalityMask::parse("deep,demo").to_string());
    CHECK(partial.records.front().features[Modality::hae].empty());

    // Modelling commands run on a larger in-memory cohort with light learners.
    write_feature_store(dir / "toy.fst", testing::toy_store(30, 2, 12, 2.0));
    {
        std::ofstream cfg(dir / "fast.json");
        cfg << R"({"learners": {"extra_trees": {"n_trees": 30}, "gbdt_level": {"rounds": 10},
                  "gbdt_leaf": {"rounds": 10}}})";
    }
    const std::string common = "--config \"" + (dir / "fast.json").string() + "\" --seed 3 ";
    const std::string toy = " --features \"" + (dir / "toy.fst").string() + "\"";

    r = run_cli(common + "train" + toy + " --bundle \"" + (dir / "m.slm").string() + "\"", log);
    REQUIRE(r.status == 0);
    r = run_cli(common + "--out \"" + (dir / "eval.json").string() + "\" evaluate" + toy + " --bundle \"" +
                    (dir / "m.slm").string() + "\" --predictions \"" + (dir / "pred.csv").string() + "\"",
                log);
    REQUIRE(r.status == 0);
    const auto eval = nlohmann::json::parse(slurp_text(dir / "eval.json"));
    CHECK(eval.at("models").size() == 5);
    CHECK(contains(slurp_text(dir / "pred.csv"), "sample_id,patient_id,p_healthy"));

    FeatureStore wrong = testing::toy_store(4, 1, 13, 0.0);
    wrong.dims[0] = 700;
    for (auto& rec : wrong.records) rec.features[Modality::deep].resize(700);
    write_feature_store(dir / "wrong.fst", wrong);
    r = run_cli("evaluate --features \"" + (dir / "wrong.fst").string() + "\" --bundle \"" + (dir / "m.slm").string() +
                    "\"",
                log);
    CHECK(r.status == 3);
    CHECK(contains(r.output, "modality dimension mismatch: deep"));

    r = run_cli(common + "--out \"" + (dir / "cv.json").string() + "\" cv" + toy, log);
    REQUIRE(r.status == 0);
    const auto cv = nlohmann::json::parse(slurp_text(dir / "cv.json"));
    CHECK(cv.at("folds").size() == 5);
    for (const auto& run : cv.at("folds")) {
        CHECK(run.at("models").size() == 5);
        CHECK(run.at("models").back().at("metrics").contains("confusion"));
    }
    CHECK(cv.at("holdout").at("models").back().at("model") == "ihml");
    CHECK(cv.at("leakage_audit").at("total_overlap") == 0);
    CHECK(cv.at("config").at("seed") == 3);

    r = run_cli(common + "--out \"" + (dir / "ablate.json").string() + "\" ablate" + toy, log);
    REQUIRE(r.status == 0);
    const std::string csv = slurp_text(dir / "ablate.csv");
    CHECK(contains(csv, "preset,groups,fused_dim,macro_f1,accuracy,pr_auc,auc_roc"));
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
    CHECK(nlohmann::json::parse(slurp_text(dir / "ablate.json")).at("rows").size() == 5);

    {
        std::ofstream bad(dir / "bad.json");
        bad << R"({"smoothing": {"alpah": 0.1}})";
    }
    r = run_cli("--config \"" + (dir / "bad.json").string() + "\" train" + toy + " --bundle x.slm", log);
    CHECK(r.status == 2);
    CHECK(contains(r.output, "smoothing.alpah"));
    fs::remove_all(dir);
}

}
