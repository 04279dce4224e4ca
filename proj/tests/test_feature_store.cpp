#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "fsn/episode.hpp"
#include "fsn/error.hpp"
#include "fsn/io.hpp"
#include "fsn/synthetic.hpp"

using namespace fsn;
namespace fs = std::filesystem;

namespace {

FeatureDataset tiny_dataset() {
    FeatureDataset ds;
    ds.dim = 3;
    ds.classes = {0, 1};
    ds.relu_constraint = true;
    ds.name = "tiny";
    ds.samples = {{{1.0f, 0.5f, 0.25f}, 0},
                  {{0.1f, 0.2f, 0.3f}, 0},
                  {{2.0f, 0.0f, 1.0f}, 1},
                  {{0.0f, 3.0f, 0.5f}, 1}};
    return ds;
}

struct TempFile {
    fs::path path;
    explicit TempFile(const char* name) {
        path = fs::temp_directory_path() / (std::string("fsn_test_") + name);
    }
    ~TempFile() { std::error_code ec; fs::remove(path, ec); }
};

}  // namespace

TEST_CASE("validate rejects bad datasets") {
    auto ds = tiny_dataset();
    CHECK_NOTHROW(ds.validate());

    auto bad_dim = ds;
    bad_dim.samples[1].feature.pop_back();
    CHECK_THROWS_WITH_AS(bad_dim.validate(), "dimension mismatch at row 1", DataError);

    auto neg = ds;
    neg.samples[2].feature[0] = -0.1f;
    CHECK_THROWS_WITH_AS(neg.validate(), "negative activation at row 2", DataError);

    auto zero_dim = ds;
    zero_dim.dim = 0;
    CHECK_THROWS_WITH_AS(zero_dim.validate(), "zero dimensionality", DataError);

    auto empty_class = ds;
    empty_class.classes.push_back(7);
    CHECK_THROWS_WITH_AS(empty_class.validate(), "class with zero samples: 7", DataError);
}

TEST_CASE("binary round-trip is the identity") {
    auto ds = tiny_dataset();
    TempFile f("roundtrip.fsf");
    save_dataset(ds, f.path, DatasetFormat::binary);
    const auto back = load_dataset(f.path, DatasetFormat::binary);
    CHECK(back.dim == ds.dim);
    CHECK(back.classes == ds.classes);
    CHECK(back.relu_constraint == ds.relu_constraint);
    REQUIRE(back.samples.size() == ds.samples.size());
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        CHECK(back.samples[i].label == ds.samples[i].label);
        CHECK(back.samples[i].feature == ds.samples[i].feature);  // bit-exact
    }

    // second save produces byte-identical files
    TempFile g("roundtrip2.fsf");
    save_dataset(back, g.path, DatasetFormat::binary);
    CHECK(fs::file_size(f.path) == fs::file_size(g.path));
    std::ifstream a(f.path, std::ios::binary), b(g.path, std::ios::binary);
    std::vector<char> ba((std::istreambuf_iterator<char>(a)), {});
    std::vector<char> bb((std::istreambuf_iterator<char>(b)), {});
    CHECK(ba == bb);
}

TEST_CASE("text round-trip within 1e-9") {
    auto ds = tiny_dataset();
    TempFile f("roundtrip.csv");
    save_dataset(ds, f.path, DatasetFormat::text);
    const auto back = load_dataset(f.path, DatasetFormat::text);
    REQUIRE(back.samples.size() == ds.samples.size());
    for (std::size_t i = 0; i < ds.samples.size(); ++i)
        for (std::size_t j = 0; j < ds.dim; ++j)
            CHECK(std::abs(back.samples[i].feature[j] - ds.samples[i].feature[j]) < 1e-9);
}

TEST_CASE("load reports malformed files") {
    TempFile f("bad.fsf");
    {
        std::ofstream os(f.path, std::ios::binary);
        os << "NOPE";
    }
    CHECK_THROWS_AS(load_dataset(f.path, DatasetFormat::binary), DataError);
    CHECK_THROWS_AS(load_dataset("/nonexistent/x.fsf", DatasetFormat::binary), DataError);
}

TEST_CASE("save rejects invalid datasets") {
    auto ds = tiny_dataset();
    ds.classes.push_back(9);  // class with zero samples
    TempFile f("invalid.fsf");
    CHECK_THROWS_AS(save_dataset(ds, f.path, DatasetFormat::binary), DataError);
}

TEST_CASE("split_base_novel partitions the dataset") {
    SyntheticConfig cfg;
    cfg.dim = 4;
    cfg.n_base_classes = 8;
    cfg.n_novel_classes = 2;
    cfg.samples_per_class = 5;
    cfg.seed = 3;
    const auto ds = generate_synthetic(cfg);

    auto [base, novel] = split_base_novel(ds, {8, 9});
    CHECK(base.classes.size() == 8);
    CHECK(novel.classes.size() == 2);
    CHECK(base.samples.size() + novel.samples.size() == ds.samples.size());
    for (const auto& s : novel.samples) CHECK(s.label >= 8);

    std::unordered_set<std::uint32_t> all(ds.classes.begin(), ds.classes.end());
    CHECK_THROWS_AS(split_base_novel(ds, all), DataError);
    CHECK_THROWS_WITH_AS(split_base_novel(ds, {99}), "unknown class 99", DataError);
    CHECK_THROWS_AS(split_base_novel(ds, {}), DataError);
}

TEST_CASE("synthetic generation is deterministic and non-negative") {
    SyntheticConfig cfg;
    cfg.dim = 8;
    cfg.n_base_classes = 3;
    cfg.n_novel_classes = 0;
    cfg.samples_per_class = 10;
    cfg.seed = 1;
    const auto a = generate_synthetic(cfg);
    const auto b = generate_synthetic(cfg);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i)
        CHECK(a.samples[i].feature == b.samples[i].feature);

    CHECK(a.relu_constraint);
    for (const auto& s : a.samples)
        for (float v : s.feature) CHECK(v >= 0.0f);
}

TEST_CASE("synthetic with zero noise collapses to prototypes") {
    SyntheticConfig cfg;
    cfg.dim = 6;
    cfg.n_base_classes = 2;
    cfg.n_novel_classes = 0;
    cfg.samples_per_class = 4;
    cfg.within_class_std = 0.0;
    cfg.seed = 7;
    const auto ds = generate_synthetic(cfg);
    for (auto cid : ds.classes) {
        const auto idx = ds.indices_of(cid);
        for (auto i : idx) CHECK(ds.samples[i].feature == ds.samples[idx[0]].feature);
    }
}

TEST_CASE("episode sampling: counts, disjointness, determinism") {
    SyntheticConfig cfg;
    cfg.n_base_classes = 6;
    cfg.n_novel_classes = 20;
    cfg.samples_per_class = 30;
    cfg.seed = 11;
    const auto ds = generate_synthetic(cfg);
    std::unordered_set<std::uint32_t> novel_ids;
    for (std::uint32_t c = 6; c < 26; ++c) novel_ids.insert(c);
    auto [base, novel] = split_base_novel(ds, novel_ids);

    EpisodeSpec spec;
    spec.n_way = 5;
    spec.k_shot = 1;
    spec.query_per_class = 10;
    spec.seed = 42;
    const auto ep = sample_episode(base, novel, spec);
    CHECK(ep.novel_support.samples.size() == 5);
    CHECK(ep.novel_query.samples.size() == 50);
    CHECK(ep.class_map.size() == 5);
    CHECK(!ep.base_support.has_value());
    for (auto cid : ep.class_map) {
        std::size_t sup = 0;
        for (const auto& s : ep.novel_support.samples) sup += s.label == cid;
        CHECK(sup == spec.k_shot);
    }
    // support and query are disjoint as sample sets
    auto key = [](const LabeledFeature& s) {
        std::string k = std::to_string(s.label);
        for (float v : s.feature) k += "," + std::to_string(v);
        return k;
    };
    std::set<std::string> sup_keys;
    for (const auto& s : ep.novel_support.samples) sup_keys.insert(key(s));
    for (const auto& s : ep.novel_query.samples) CHECK(!sup_keys.count(key(s)));

    const auto ep2 = sample_episode(base, novel, spec);
    CHECK(ep2.class_map == ep.class_map);
    REQUIRE(ep2.novel_support.samples.size() == ep.novel_support.samples.size());
    for (std::size_t i = 0; i < ep.novel_support.samples.size(); ++i)
        CHECK(ep2.novel_support.samples[i].feature == ep.novel_support.samples[i].feature);

    // base and novel classes disjoint
    for (auto cid : ep.class_map) CHECK(!base.has_class(cid));
}

TEST_CASE("episode sampling errors") {
    SyntheticConfig cfg;
    cfg.n_base_classes = 2;
    cfg.n_novel_classes = 4;
    cfg.samples_per_class = 3;
    const auto ds = generate_synthetic(cfg);
    auto [base, novel] = split_base_novel(ds, {2, 3, 4, 5});

    EpisodeSpec spec;
    spec.n_way = 5;  // only 4 novel classes
    CHECK_THROWS_AS(sample_episode(base, novel, spec), DataError);

    spec.n_way = 4;
    spec.k_shot = 2;
    spec.query_per_class = 5;  // needs 7 > 3 samples
    CHECK_THROWS_AS(sample_episode(base, novel, spec), DataError);
}

TEST_CASE("balanced mode draws k-shot base support") {
    SyntheticConfig cfg;
    cfg.n_base_classes = 4;
    cfg.n_novel_classes = 6;
    cfg.samples_per_class = 20;
    cfg.seed = 5;
    const auto ds = generate_synthetic(cfg);
    auto [base, novel] = split_base_novel(ds, {4, 5, 6, 7, 8, 9});
    EpisodeSpec spec;
    spec.n_way = 5;
    spec.k_shot = 3;
    spec.query_per_class = 5;
    const auto ep = sample_episode(base, novel, spec, BaseMode::undersampled_balanced);
    REQUIRE(ep.base_support.has_value());
    CHECK(ep.base_support->samples.size() == 4 * 3);
    for (auto cid : base.classes) {
        std::size_t n = 0;
        for (const auto& s : ep.base_support->samples) n += s.label == cid;
        CHECK(n == spec.k_shot);
    }
}
