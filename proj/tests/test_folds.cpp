#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <unordered_set>

#include "bsrk/folds.hpp"
#include "bsrk/rng.hpp"

using namespace bsrk;

namespace {

// Synthetic index: climate class and location chosen per entry.
std::vector<PatchIndexEntry> synthetic_index(int n, std::uint64_t seed) {
    CounterRng rng(seed);
    std::vector<PatchIndexEntry> idx(n);
    const int classes[4] = {15, 26, 27, 8}; // Cfb, Dfb, Dfc, Csa
    for (int i = 0; i < n; ++i) {
        auto& e = idx[i];
        e.patch_id = i;
        const double lon = std::floor(rng.uniform(-12.0, 31.0) * 10.0) / 10.0;
        const double lat = std::floor(rng.uniform(34.0, 68.9) * 10.0) / 10.0;
        e.extent = GeoExtent::make(lon, lon + 3.0, lat, lat + 3.0, 0.1);
        e.date = {2020, 6, 1};
        e.climate_class = classes[static_cast<int>(rng.below(4))];
        e.zero_fraction = rng.uniform(0.0, 0.1);
    }
    return idx;
}

FoldSpec make_spec(std::set<int> held_out, std::uint64_t seed = 7) {
    FoldSpec s;
    s.name = "test";
    s.held_out_classes = std::move(held_out);
    s.spatial_holdout_region = GeoExtent::make(10.0, 20.0, 45.0, 55.0, 0.1);
    s.holdout_sample_size = 10000;
    s.rng_seed = seed;
    return s;
}

bool center_in(const PatchIndexEntry& e, const GeoExtent& r) {
    return r.contains_point(e.center_lon(), e.center_lat());
}

} // namespace

TEST_CASE("fold invariants: disjoint partitions, complete coverage, correct pools") {
    auto idx = synthetic_index(5000, 11);
    auto spec = make_spec({26, 27}); // Dfb, Dfc held out
    auto m = build_fold(idx, spec);

    std::unordered_set<std::int64_t> seen;
    auto add_all = [&](const std::vector<std::int64_t>& v) {
        for (auto id : v) {
            CHECK(seen.insert(id).second); // no duplicates across partitions
        }
    };
    add_all(m.train);
    add_all(m.val);
    add_all(m.test_standard);
    add_all(m.test_unseen_spatial);
    add_all(m.test_unseen_climate);
    CHECK(seen.size() == idx.size()); // pools smaller than cap: everything lands somewhere

    for (auto id : m.test_unseen_climate) {
        const auto& e = idx[static_cast<std::size_t>(id)];
        CHECK(spec.held_out_classes.count(e.climate_class) == 1);
    }
    for (auto id : m.test_unseen_spatial) {
        const auto& e = idx[static_cast<std::size_t>(id)];
        CHECK(spec.held_out_classes.count(e.climate_class) == 0);
        CHECK(center_in(e, spec.spatial_holdout_region));
    }
    auto check_eligible = [&](const std::vector<std::int64_t>& v) {
        for (auto id : v) {
            const auto& e = idx[static_cast<std::size_t>(id)];
            CHECK(spec.held_out_classes.count(e.climate_class) == 0);
            CHECK(!center_in(e, spec.spatial_holdout_region));
        }
    };
    check_eligible(m.train);
    check_eligible(m.val);
    check_eligible(m.test_standard);
}

TEST_CASE("split sizes follow 75/5/20 within rounding") {
    auto idx = synthetic_index(8000, 13);
    auto m = build_fold(idx, make_spec({8}));
    const double n = static_cast<double>(m.train.size() + m.val.size() +
                                         m.test_standard.size());
    CHECK(std::abs(m.train.size() / n - 0.75) <= 1.0 / n);
    CHECK(std::abs(m.val.size() / n - 0.05) <= 1.0 / n);
    CHECK(std::abs(m.test_standard.size() / n - 0.20) <= 2.0 / n);
}

TEST_CASE("same seed reproduces, different seed reshuffles") {
    auto idx = synthetic_index(3000, 17);
    auto spec = make_spec({26, 27}, 41);
    auto m1 = build_fold(idx, spec);
    auto m2 = build_fold(idx, spec);
    CHECK(m1.train == m2.train);
    CHECK(m1.val == m2.val);
    CHECK(m1.test_standard == m2.test_standard);
    CHECK(m1.test_unseen_spatial == m2.test_unseen_spatial);
    CHECK(m1.test_unseen_climate == m2.test_unseen_climate);

    spec.rng_seed = 42;
    auto m3 = build_fold(idx, spec);
    CHECK(m1.train != m3.train);
    // Membership of the eligible pool itself is seed-independent.
    auto members = [](const FoldManifest& m) {
        std::set<std::int64_t> s(m.train.begin(), m.train.end());
        s.insert(m.val.begin(), m.val.end());
        s.insert(m.test_standard.begin(), m.test_standard.end());
        return s;
    };
    CHECK(members(m1) == members(m3));
}

TEST_CASE("unseen sets are capped at holdout_sample_size") {
    auto idx = synthetic_index(4000, 19);
    auto spec = make_spec({26, 27});
    spec.holdout_sample_size = 50;
    auto m = build_fold(idx, spec);
    CHECK(m.test_unseen_climate.size() == 50);
    CHECK(m.test_unseen_spatial.size() == 50);
    // Sampled without replacement.
    std::set<std::int64_t> u(m.test_unseen_climate.begin(), m.test_unseen_climate.end());
    CHECK(u.size() == 50);
}

TEST_CASE("degenerate pools raise data errors") {
    // All patches share one climate class: holding it out empties training.
    std::vector<PatchIndexEntry> idx(100);
    for (int i = 0; i < 100; ++i) {
        idx[i].patch_id = i;
        idx[i].extent = GeoExtent::make(0.0, 3.0, 40.0, 43.0, 0.1);
        idx[i].climate_class = 15;
    }
    CHECK_THROWS_AS(build_fold(idx, make_spec({15})), Error);
    // No patch in the held-out class at all.
    CHECK_THROWS_AS(build_fold(idx, make_spec({26})), Error);
    // Spec with empty held-out set is a config error.
    FoldSpec bad = make_spec({15});
    bad.held_out_classes.clear();
    CHECK_THROWS_AS(build_fold(idx, bad), Error);
    // Ratios must sum to one.
    FoldSpec bad2 = make_spec({15});
    bad2.val_ratio = 0.3;
    CHECK_THROWS_AS(bad2.validate(), Error);
}

TEST_CASE("spatial holdout uses the center-inside rule") {
    std::vector<PatchIndexEntry> idx;
    auto region = GeoExtent::make(10.0, 20.0, 45.0, 55.0, 0.1);
    // Patch straddling the west edge, center at lon 9.5: outside.
    PatchIndexEntry a;
    a.patch_id = 0;
    a.extent = GeoExtent::make(8.0, 11.0, 48.0, 51.0, 0.1);
    a.climate_class = 15;
    // Patch with center at lon 11.5: inside.
    PatchIndexEntry b = a;
    b.patch_id = 1;
    b.extent = GeoExtent::make(10.0, 13.0, 48.0, 51.0, 0.1);
    // A held-out-class patch and a far-away eligible patch to keep pools non-empty.
    PatchIndexEntry c = a;
    c.patch_id = 2;
    c.climate_class = 26;
    PatchIndexEntry d = a;
    d.patch_id = 3;
    d.extent = GeoExtent::make(-5.0, -2.0, 40.0, 43.0, 0.1);
    idx = {a, b, c, d};

    FoldSpec spec = make_spec({26});
    auto m = build_fold(idx, spec);
    CHECK(m.test_unseen_spatial == std::vector<std::int64_t>{1});
    CHECK(m.test_unseen_climate == std::vector<std::int64_t>{2});
}

TEST_CASE("manifest JSON roundtrip") {
    auto idx = synthetic_index(1000, 23);
    auto m = build_fold(idx, make_spec({8}, 99));
    const std::string path =
        (std::filesystem::temp_directory_path() / "bsrk_test_fold.json").string();
    m.save(path);
    auto back = FoldManifest::load(path);
    CHECK(back.spec.name == m.spec.name);
    CHECK(back.spec.held_out_classes == m.spec.held_out_classes);
    CHECK(back.spec.rng_seed == m.spec.rng_seed);
    CHECK(back.train == m.train);
    CHECK(back.val == m.val);
    CHECK(back.test_standard == m.test_standard);
    CHECK(back.test_unseen_spatial == m.test_unseen_spatial);
    CHECK(back.test_unseen_climate == m.test_unseen_climate);
    std::remove(path.c_str());
}

TEST_CASE("fold spec file parses names and codes") {
    const std::string path =
        (std::filesystem::temp_directory_path() / "bsrk_test_specs.json").string();
    {
        std::ofstream os(path);
        os << R"({
          "spatial_holdout": {"lon_min": 10.0, "lon_max": 20.0,
                              "lat_min": 45.0, "lat_max": 55.0, "cell_size": 0.1},
          "holdout_sample_size": 777,
          "seed": 5,
          "split": [0.75, 0.05, 0.20],
          "folds": [
            {"name": "Cfb", "held_out_classes": ["Cfb"]},
            {"name": "Med", "held_out_classes": ["Csa", "Csb", 6, 7, 4, 5, "Cfa", 17, 18]}
          ]
        })";
    }
    auto specs = load_fold_specs(path);
    REQUIRE(specs.size() == 2);
    CHECK(specs[0].name == "Cfb");
    CHECK(specs[0].held_out_classes == std::set<int>{15});
    CHECK(specs[0].holdout_sample_size == 777);
    CHECK(specs[0].rng_seed == 5);
    CHECK(specs[1].held_out_classes ==
          std::set<int>{4, 5, 6, 7, 8, 9, 14, 17, 18});
    std::remove(path.c_str());
}
