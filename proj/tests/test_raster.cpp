#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <filesystem>
#include <functional>

#include "bsrk/raster_io.hpp"
#include "bsrk/resample.hpp"
#include "bsrk/rng.hpp"

using namespace bsrk;

namespace {

std::string tmp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

RasterGrid make_grid(const GeoExtent& e, GridKind kind,
                     const std::function<double(int, int)>& f) {
    Array2D a(e.rows(), e.cols());
    for (int r = 0; r < a.rows(); ++r)
        for (int c = 0; c < a.cols(); ++c)
            a.at(r, c) = f(r, c);
    return RasterGrid(e, kind, std::move(a));
}

// Direct 4x4 cubic convolution sum at one fractional position, written
// independently of the library sampler.
double oracle_bicubic(const Array2D& a, double u, double v) {
    auto w = [](double s) {
        s = std::abs(s);
        const double a_ = -0.5;
        if (s <= 1.0) return (a_ + 2.0) * s * s * s - (a_ + 3.0) * s * s + 1.0;
        if (s < 2.0) return a_ * (s * s * s - 5.0 * s * s + 8.0 * s - 4.0);
        return 0.0;
    };
    auto refl = [](int i, int n) {
        while (i < 0 || i >= n) {
            if (i < 0) i = -i - 1;
            if (i >= n) i = 2 * n - 1 - i;
        }
        return i;
    };
    const int i0 = static_cast<int>(std::floor(u));
    const int j0 = static_cast<int>(std::floor(v));
    double acc = 0.0;
    for (int m = -1; m <= 2; ++m)
        for (int n = -1; n <= 2; ++n)
            acc += w(u - (i0 + m)) * w(v - (j0 + n)) *
                   a.at(refl(i0 + m, a.rows()), refl(j0 + n, a.cols()));
    return acc;
}

} // namespace

TEST_CASE("GeoExtent validates bounds and multiples") {
    CHECK_THROWS_AS(GeoExtent::make(1.0, 0.0, 0.0, 1.0, 0.1), Error);
    CHECK_THROWS_AS(GeoExtent::make(0.0, 1.05, 0.0, 1.0, 0.1), Error);
    auto e = GeoExtent::make(-12.0, 45.0, 34.0, 71.9, 0.1);
    CHECK(e.rows() == 379);
    CHECK(e.cols() == 570);
}

TEST_CASE("study-area-sized emission file loads with full dimensions") {
    // Cell centers from 11.95 W / 34.05 N, 0.1 degree spacing.
    auto e = GeoExtent::make(-12.0, 45.0, 34.0, 71.9, 0.1);
    Array2D a(e.rows(), e.cols(), 0.5);
    RasterGrid g(e, GridKind::Emission, a);
    const std::string path = tmp_path("bsrk_test_study.bsrc");
    save_raster(path, g, "emi");
    RasterGrid back = load_raster(path, "emi");
    CHECK(back.rows() == 379);
    CHECK(back.cols() == 570);
    CHECK(back.extent().cell_size == doctest::Approx(0.1));
    std::remove(path.c_str());
}

TEST_CASE("container roundtrip and identity load") {
    auto e = GeoExtent::make(0.0, 0.2, 0.0, 0.2, 0.1);
    Array2D a(2, 2);
    a.at(0, 0) = 1;
    a.at(0, 1) = 2;
    a.at(1, 0) = 3;
    a.at(1, 1) = 4;
    RasterGrid g(e, GridKind::Emission, a);
    const std::string path = tmp_path("bsrk_test_grid.bsrc");
    save_raster(path, g, "emi");

    RasterGrid back = load_raster(path, "emi");
    CHECK(back.extent().same_registration(e));
    CHECK(back.extent().lon_min == doctest::Approx(e.lon_min).epsilon(1e-9));
    CHECK(back.extent().lat_max == doctest::Approx(e.lat_max).epsilon(1e-9));
    CHECK(back.at(0, 0) == 1);
    CHECK(back.at(1, 1) == 4);

    CHECK_THROWS_AS(load_raster(path, "other_var"), Error);
    std::remove(path.c_str());
}

TEST_CASE("load rejects irregular coordinate spacing") {
    // Hand-build a container with lat spacing [0.1, 0.2, 0.35].
    const std::string path = tmp_path("bsrk_test_irregular.bsrc");
    {
        std::string header =
            R"({"version":1,"variable":"v","kind":"emission","missing_value":-999.0,)"
            R"("lon":[0.05,0.15],"lat":[0.1,0.2,0.35]})";
        std::ofstream os(path, std::ios::binary);
        os.write("BSRC", 4);
        std::uint32_t len = static_cast<std::uint32_t>(header.size());
        os.write(reinterpret_cast<char*>(&len), 4);
        os.write(header.data(), len);
        double payload[6] = {};
        os.write(reinterpret_cast<char*>(payload), sizeof(payload));
    }
    CHECK_THROWS_WITH_AS(load_raster(path, "v"), doctest::Contains("NonUniformGrid"), Error);
    std::remove(path.c_str());
}

TEST_CASE("missing values map to NaN and back") {
    auto e = GeoExtent::make(0.0, 0.3, 0.0, 0.3, 0.1);
    Array2D a(3, 3, 1.0);
    a.at(1, 1) = Array2D::missing();
    RasterGrid g(e, GridKind::Emission, a);
    const std::string path = tmp_path("bsrk_test_missing.bsrc");
    save_raster(path, g, "emi");
    RasterGrid back = load_raster(path, "emi");
    CHECK(Array2D::is_missing(back.at(1, 1)));
    CHECK(back.at(0, 0) == 1.0);
    std::remove(path.c_str());
}

TEST_CASE("coarsen BlockMean: constant field and mean preservation") {
    auto e = GeoExtent::make(0.0, 0.4, 0.0, 0.4, 0.1);
    auto ones = make_grid(e, GridKind::Emission, [](int, int) { return 1.0; });
    auto out = coarsen_mean(ones, 0.2);
    CHECK(out.rows() == 2);
    CHECK(out.cols() == 2);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
            CHECK(out.at(r, c) == doctest::Approx(1.0).epsilon(1e-15));

    CounterRng rng(7);
    auto e8 = GeoExtent::make(0.0, 0.8, 0.0, 0.8, 0.1);
    auto noise = make_grid(e8, GridKind::Emission, [&](int, int) { return rng.uniform(); });
    auto c2 = coarsen_mean(noise, 0.4);
    double fine = 0.0, coarse = 0.0;
    for (double x : noise.data().values()) fine += x;
    for (double x : c2.data().values()) coarse += x;
    CHECK(coarse / c2.data().size() ==
          doctest::Approx(fine / noise.data().size()).epsilon(1e-12));
}

TEST_CASE("coarsen errors on non-integer ratio") {
    auto e = GeoExtent::make(0.0, 0.4, 0.0, 0.4, 0.1);
    auto g = make_grid(e, GridKind::Emission, [](int, int) { return 1.0; });
    CHECK_THROWS_AS(coarsen_mean(g, 0.15), Error);
}

TEST_CASE("ClassFraction: symmetry case and brute-force oracle") {
    auto e = GeoExtent::make(0.0, 0.2, 0.0, 0.2, 0.1);
    Array2D codes(2, 2);
    codes.at(0, 0) = 10;
    codes.at(0, 1) = 10;
    codes.at(1, 0) = 40;
    codes.at(1, 1) = 40;
    CategoricalLandCover lc(e, codes);
    auto frac = class_fraction(lc, 0.2, 10);
    CHECK(frac.at(0, 0) == doctest::Approx(50.0));
    CHECK(frac.kind() == GridKind::Percentage);

    // Random 8x8, factor 4, against explicit nested-loop block counting.
    CounterRng rng(11);
    auto e8 = GeoExtent::make(0.0, 0.8, 0.0, 0.8, 0.1);
    Array2D rnd(8, 8);
    for (double& x : rnd.values())
        x = kLandCoverClasses[rng.below(11)];
    CategoricalLandCover lc8(e8, rnd);
    auto out = class_fraction(lc8, 0.4, 30);
    for (int br = 0; br < 2; ++br)
        for (int bc = 0; bc < 2; ++bc) {
            int hits = 0;
            for (int r = br * 4; r < br * 4 + 4; ++r)
                for (int c = bc * 4; c < bc * 4 + 4; ++c)
                    if (rnd.at(r, c) == 30) ++hits;
            CHECK(out.at(br, bc) == doctest::Approx(100.0 * hits / 16.0).epsilon(1e-12));
        }
}

TEST_CASE("ClassFraction over all classes sums to 100 per cell") {
    CounterRng rng(13);
    auto e = GeoExtent::make(0.0, 0.8, 0.0, 0.8, 0.1);
    Array2D rnd(8, 8);
    for (double& x : rnd.values())
        x = kLandCoverClasses[rng.below(11)];
    CategoricalLandCover lc(e, rnd);
    Array2D sum(2, 2, 0.0);
    for (int code : kLandCoverClasses) {
        auto f = class_fraction(lc, 0.4, code);
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c)
                sum.at(r, c) += f.at(r, c);
    }
    for (double s : sum.values()) CHECK(s == doctest::Approx(100.0).epsilon(1e-11));
}

TEST_CASE("bicubic reproduces constants and degree-1 ramps") {
    auto e = GeoExtent::make(0.0, 0.8, 0.0, 0.8, 0.1);
    auto constant = make_grid(e, GridKind::Emission, [](int, int) { return 3.25; });
    auto up = resample_bicubic(constant, GeoExtent::make(0.0, 0.8, 0.0, 0.8, 0.05));
    for (double x : up.data().values()) CHECK(x == doctest::Approx(3.25).epsilon(1e-12));

    auto ramp = make_grid(e, GridKind::Emission,
                          [](int r, int c) { return 0.7 * r + 1.3 * c; });
    auto up2 = resample_bicubic(ramp, GeoExtent::make(0.0, 0.8, 0.0, 0.8, 0.05));
    // Interior cells: two source cells away from each border.
    for (int r = 4; r < up2.rows() - 4; ++r)
        for (int c = 4; c < up2.cols() - 4; ++c) {
            // Expected value at the target cell center in source index space.
            const double u = (up2.extent().lat_center(r) - 0.0) / 0.1 - 0.5;
            const double v = (up2.extent().lon_center(c) - 0.0) / 0.1 - 0.5;
            CHECK(std::abs(up2.at(r, c) - (0.7 * u + 1.3 * v)) < 1e-9);
        }
}

TEST_CASE("bicubic matches direct kernel evaluation on a random 6x6 grid") {
    CounterRng rng(23);
    auto e = GeoExtent::make(0.0, 0.6, 0.0, 0.6, 0.1);
    auto g = make_grid(e, GridKind::Emission, [&](int, int) { return rng.uniform(); });

    auto target = GeoExtent::make(0.05, 0.55, 0.05, 0.55, 0.05);
    auto out = resample_bicubic(g, target);
    for (int r = 0; r < out.rows(); ++r)
        for (int c = 0; c < out.cols(); ++c) {
            const double u = (target.lat_center(r) - e.lat_min) / e.cell_size - 0.5;
            const double v = (target.lon_center(c) - e.lon_min) / e.cell_size - 0.5;
            CHECK(out.at(r, c) == doctest::Approx(oracle_bicubic(g.data(), u, v)).epsilon(1e-12));
        }
}

TEST_CASE("downsample_bicubic equals resample to the coarse extent") {
    CounterRng rng(29);
    auto e = GeoExtent::make(0.0, 3.0, 0.0, 3.0, 0.1);
    auto g = make_grid(e, GridKind::Emission, [&](int, int) { return rng.uniform(); });
    auto down = downsample_bicubic(g, 2);
    auto ref = resample_bicubic(g, GeoExtent::make(0.0, 3.0, 0.0, 3.0, 0.2));
    CHECK(down.rows() == 15);
    for (std::size_t i = 0; i < down.data().size(); ++i)
        CHECK(down.data().values()[i] == ref.data().values()[i]);

    SUBCASE("ramp keeps its gradient") {
        auto r30 = make_grid(e, GridKind::Emission,
                             [](int r, int c) { return 0.5 * r + 0.25 * c; });
        auto d = downsample_bicubic(r30, 2);
        // Gradient doubles per cell step at half resolution.
        for (int r = 2; r < d.rows() - 2; ++r)
            for (int c = 2; c < d.cols() - 3; ++c)
                CHECK(d.at(r, c + 1) - d.at(r, c) == doctest::Approx(0.5).epsilon(1e-9));
    }

    CHECK_THROWS_AS(downsample_bicubic(g, 7), Error);
}

TEST_CASE("downsample of upsample stays close on band-limited fields") {
    auto e = GeoExtent::make(0.0, 3.0, 0.0, 3.0, 0.1);
    auto g = make_grid(e, GridKind::Emission, [](int r, int c) {
        return 1.0 + 0.4 * std::sin(2.0 * M_PI * r / 30.0) +
               0.3 * std::cos(2.0 * M_PI * c / 15.0) +
               0.2 * std::sin(2.0 * M_PI * (r + c) / 20.0);
    });
    auto up = upsample_bicubic(g, 2);
    auto back = downsample_bicubic(up, 2);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < g.data().size(); ++i) {
        const double d = back.data().values()[i] - g.data().values()[i];
        num += d * d;
        den += g.data().values()[i] * g.data().values()[i];
    }
    CHECK(std::sqrt(num / den) <= 0.05);
}

TEST_CASE("align_to crops when registrations match") {
    auto e = GeoExtent::make(0.0, 1.0, 0.0, 1.0, 0.1);
    auto g = make_grid(e, GridKind::Emission, [](int r, int c) { return r * 10.0 + c; });
    auto ref = GeoExtent::make(0.2, 0.5, 0.3, 0.6, 0.1);
    auto out = align_to(g, ref);
    CHECK(out.rows() == 3);
    CHECK(out.at(0, 0) == 3 * 10.0 + 2);

    auto outside = GeoExtent::make(5.0, 6.0, 5.0, 6.0, 0.1);
    CHECK_THROWS_AS(align_to(g, outside), Error);
}

TEST_CASE("missing cells: block mean exclusion and bicubic substitution") {
    auto e = GeoExtent::make(0.0, 0.4, 0.0, 0.4, 0.1);
    Array2D a(4, 4, 2.0);
    a.at(0, 0) = Array2D::missing();
    RasterGrid g(e, GridKind::Emission, a);
    auto c = coarsen_mean(g, 0.2);
    CHECK(c.at(0, 0) == doctest::Approx(2.0)); // mean over the 3 present cells

    Array2D all_missing(4, 4, Array2D::missing());
    RasterGrid gm(e, GridKind::Emission, all_missing);
    auto cm = coarsen_mean(gm, 0.2);
    CHECK(Array2D::is_missing(cm.at(0, 0)));
    auto rm = resample_bicubic(gm, GeoExtent::make(0.0, 0.4, 0.0, 0.4, 0.2));
    CHECK(Array2D::is_missing(rm.at(0, 0)));

    // One missing neighbor is replaced by its row neighbor, keeping the
    // interpolation finite.
    auto r = resample_bicubic(g, GeoExtent::make(0.0, 0.4, 0.0, 0.4, 0.2));
    for (double x : r.data().values()) CHECK(x == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("raw dump roundtrip is bit-exact") {
    CounterRng rng(31);
    Array2D a(5, 7);
    for (double& x : a.values()) x = rng.uniform() * 1e-12;
    a.at(2, 3) = Array2D::missing();
    const std::string path = tmp_path("bsrk_test_raw.bin");
    write_raw_file(path, a, 0.1);
    double cell = 0.0;
    Array2D b = read_raw_file(path, &cell);
    CHECK(cell == 0.1);
    REQUIRE(b.rows() == 5);
    REQUIRE(b.cols() == 7);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (Array2D::is_missing(a.values()[i]))
            CHECK(Array2D::is_missing(b.values()[i]));
        else
            CHECK(a.values()[i] == b.values()[i]);
    }
    std::remove(path.c_str());
}
