#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "bsrk/metrics.hpp"
#include "bsrk/rng.hpp"

using namespace bsrk;

namespace {

Array2D random_grid(int rows, int cols, std::uint64_t seed, double lo = 0.0,
                    double hi = 1.0) {
    CounterRng rng(seed);
    Array2D a(rows, cols);
    for (double& v : a.values()) v = rng.uniform(lo, hi);
    return a;
}

int reflect_idx(int i, int n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

double oracle_mse(const Array2D& a, const Array2D& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.values()[i] - b.values()[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.size());
}

double oracle_nmse_db(const Array2D& est, const Array2D& ref) {
    double p = 0.0;
    for (double x : ref.values()) p += x * x;
    p /= static_cast<double>(ref.size());
    return 10.0 * std::log10(oracle_mse(est, ref) / p);
}

double oracle_psnr_db(const Array2D& est, const Array2D& ref, double dr) {
    return 10.0 * std::log10(dr * dr / oracle_mse(est, ref));
}

// Direct (non-separable) 2D Gaussian-window SSIM, averaged over every pixel.
double oracle_ssim(const Array2D& x, const Array2D& y, double dr) {
    double g1[11];
    double gsum = 0.0;
    for (int i = 0; i < 11; ++i) {
        const double d = i - 5;
        g1[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
        gsum += g1[i];
    }
    for (double& g : g1) g /= gsum;
    const double c1 = (0.01 * dr) * (0.01 * dr);
    const double c2 = (0.03 * dr) * (0.03 * dr);

    double acc = 0.0;
    for (int r = 0; r < x.rows(); ++r)
        for (int c = 0; c < x.cols(); ++c) {
            double mx = 0, my = 0, xx = 0, yy = 0, xy = 0;
            for (int i = -5; i <= 5; ++i)
                for (int j = -5; j <= 5; ++j) {
                    const double w = g1[i + 5] * g1[j + 5];
                    const double xv = x.at(reflect_idx(r + i, x.rows()),
                                           reflect_idx(c + j, x.cols()));
                    const double yv = y.at(reflect_idx(r + i, y.rows()),
                                           reflect_idx(c + j, y.cols()));
                    mx += w * xv;
                    my += w * yv;
                    xx += w * xv * xv;
                    yy += w * yv * yv;
                    xy += w * xv * yv;
                }
            const double vx = xx - mx * mx, vy = yy - my * my, cov = xy - mx * my;
            acc += ((2 * mx * my + c1) * (2 * cov + c2)) /
                   ((mx * mx + my * my + c1) * (vx + vy + c2));
        }
    return acc / static_cast<double>(x.size());
}

double oracle_uiqi(const Array2D& x, const Array2D& y) {
    double acc = 0.0;
    int count = 0;
    for (int r0 = 0; r0 + 8 <= x.rows(); ++r0)
        for (int c0 = 0; c0 + 8 <= x.cols(); ++c0) {
            std::vector<double> xs, ys;
            for (int r = r0; r < r0 + 8; ++r)
                for (int c = c0; c < c0 + 8; ++c) {
                    xs.push_back(x.at(r, c));
                    ys.push_back(y.at(r, c));
                }
            double mx = 0, my = 0;
            for (int i = 0; i < 64; ++i) {
                mx += xs[i];
                my += ys[i];
            }
            mx /= 64;
            my /= 64;
            double vx = 0, vy = 0, cov = 0;
            for (int i = 0; i < 64; ++i) {
                vx += (xs[i] - mx) * (xs[i] - mx);
                vy += (ys[i] - my) * (ys[i] - my);
                cov += (xs[i] - mx) * (ys[i] - my);
            }
            vx /= 64;
            vy /= 64;
            cov /= 64;
            const double denom = (vx + vy) * (mx * mx + my * my);
            if (denom == 0.0) continue;
            acc += 4.0 * cov * mx * my / denom;
            ++count;
        }
    return acc / count;
}

double oracle_scc(const Array2D& x, const Array2D& y) {
    auto lap = [](const Array2D& a) {
        Array2D out(a.rows(), a.cols());
        for (int r = 0; r < a.rows(); ++r)
            for (int c = 0; c < a.cols(); ++c)
                out.at(r, c) = 4 * a.at(r, c) -
                               a.at(reflect_idx(r - 1, a.rows()), c) -
                               a.at(reflect_idx(r + 1, a.rows()), c) -
                               a.at(r, reflect_idx(c - 1, a.cols())) -
                               a.at(r, reflect_idx(c + 1, a.cols()));
        return out;
    };
    Array2D lx = lap(x), ly = lap(y);
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx.values()[i];
        my += ly.values()[i];
    }
    mx /= static_cast<double>(lx.size());
    my /= static_cast<double>(ly.size());
    double num = 0, dx = 0, dy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        num += (lx.values()[i] - mx) * (ly.values()[i] - my);
        dx += (lx.values()[i] - mx) * (lx.values()[i] - mx);
        dy += (ly.values()[i] - my) * (ly.values()[i] - my);
    }
    return num / std::sqrt(dx * dy);
}

} // namespace

TEST_CASE("NMSE hand case: unit error against amplitude-2 reference") {
    Array2D ref(4, 4, 2.0), est(4, 4, 1.0);
    CHECK(nmse_db(est, ref).value() ==
          doctest::Approx(10.0 * std::log10(0.25)).epsilon(1e-12)); // -6.0206 dB
    Array2D zero(4, 4, 0.0);
    CHECK(!nmse_db(est, zero).has_value());
    CHECK(nmse_db(ref, ref).value() == kNmseFloorDb);
}

TEST_CASE("all metrics match their direct-formula oracles on random 8x8 pairs") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto ref = random_grid(8, 8, seed, 0.2, 1.0);
        Array2D est(8, 8);
        CounterRng noise(seed + 100);
        for (std::size_t i = 0; i < est.size(); ++i)
            est.values()[i] = ref.values()[i] + noise.uniform(-0.1, 0.1);
        const double dr = data_range_of(ref);

        CHECK(nmse_db(est, ref).value() ==
              doctest::Approx(oracle_nmse_db(est, ref)).epsilon(1e-10));
        double ma = 0.0;
        for (std::size_t i = 0; i < est.size(); ++i)
            ma = std::max(ma, std::abs(est.values()[i] - ref.values()[i]));
        CHECK(maxae(est, ref) == ma);
        CHECK(ssim(est, ref, dr) == doctest::Approx(oracle_ssim(est, ref, dr)).epsilon(1e-10));
        CHECK(psnr_db(est, ref, dr) ==
              doctest::Approx(oracle_psnr_db(est, ref, dr)).epsilon(1e-10));
        CHECK(uiqi(est, ref) == doctest::Approx(oracle_uiqi(est, ref)).epsilon(1e-10));
        CHECK(scc(est, ref) == doctest::Approx(oracle_scc(est, ref)).epsilon(1e-10));
    }
}

TEST_CASE("identical inputs saturate every metric") {
    auto a = random_grid(16, 16, 9, 0.1, 1.0);
    CHECK(nmse_db(a, a).value() == kNmseFloorDb);
    CHECK(maxae(a, a) == 0.0);
    CHECK(ssim(a, a, data_range_of(a)) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(psnr_db(a, a, data_range_of(a)) == kPsnrCapDb);
    CHECK(uiqi(a, a) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(scc(a, a) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("shift invariance where the definition implies it") {
    auto ref = random_grid(12, 12, 21, 0.2, 1.0);
    Array2D est(12, 12);
    CounterRng noise(22);
    for (std::size_t i = 0; i < est.size(); ++i)
        est.values()[i] = ref.values()[i] + noise.uniform(-0.05, 0.05);
    const double dr = data_range_of(ref);

    Array2D ref_s(12, 12), est_s(12, 12);
    for (std::size_t i = 0; i < ref.size(); ++i) {
        ref_s.values()[i] = ref.values()[i] + 5.0;
        est_s.values()[i] = est.values()[i] + 5.0;
    }
    CHECK(maxae(est_s, ref_s) == doctest::Approx(maxae(est, ref)).epsilon(1e-12));
    CHECK(psnr_db(est_s, ref_s, dr) == doctest::Approx(psnr_db(est, ref, dr)).epsilon(1e-12));
    // The Laplacian removes constants entirely.
    CHECK(scc(est_s, ref_s) == doctest::Approx(scc(est, ref)).epsilon(1e-9));
}

TEST_CASE("psnr and nmse are consistent through the shared MSE") {
    auto ref = random_grid(10, 10, 31, 0.2, 1.0);
    Array2D est(10, 10);
    CounterRng noise(32);
    for (std::size_t i = 0; i < est.size(); ++i)
        est.values()[i] = ref.values()[i] + noise.uniform(-0.1, 0.1);
    const double dr = data_range_of(ref);
    double power = 0.0;
    for (double x : ref.values()) power += x * x;
    power /= static_cast<double>(ref.size());
    // psnr + nmse = 10*log10(dr^2) - 10*log10(power)
    const double expected = 10.0 * std::log10(dr * dr / power);
    CHECK(psnr_db(est, ref, dr) + nmse_db(est, ref).value() ==
          doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("NIR reference points") {
    CHECK(nir_from_db(-25.0, -20.0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(nir_from_db(kNmseFloorDb, -20.0) == doctest::Approx(14.0).epsilon(1e-12));
    CHECK(nir_from_db(-20.0, -20.0) == 0.0);
    CHECK(nir_from_db(-15.0, -20.0) == doctest::Approx(-0.25).epsilon(1e-12));
    CHECK_THROWS_AS(nir_from_db(-10.0, 0.0), Error);

    // Array form agrees with the dB form.
    auto truth = random_grid(8, 8, 41, 0.2, 1.0);
    Array2D est(8, 8), base(8, 8);
    CounterRng noise(42);
    for (std::size_t i = 0; i < est.size(); ++i) {
        est.values()[i] = truth.values()[i] + noise.uniform(-0.02, 0.02);
        base.values()[i] = truth.values()[i] + noise.uniform(-0.1, 0.1);
    }
    const double expected = nir_from_db(nmse_db(est, truth).value(),
                                        nmse_db(base, truth).value());
    CHECK(nir(est, base, truth) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("evaluate_patch fills every field with the patch data range") {
    auto ref = random_grid(15, 15, 51, 0.1, 0.9);
    Array2D est(15, 15);
    CounterRng noise(52);
    for (std::size_t i = 0; i < est.size(); ++i)
        est.values()[i] = ref.values()[i] + noise.uniform(-0.05, 0.05);
    auto m = evaluate_patch(7, MetricDomain::Transformed, est, ref);
    CHECK(m.patch_id == 7);
    const double dr = data_range_of(ref);
    CHECK(m.ssim == doctest::Approx(ssim(est, ref, dr)).epsilon(1e-12));
    CHECK(m.psnr_db == doctest::Approx(psnr_db(est, ref, dr)).epsilon(1e-12));
    CHECK(m.nmse_db.value() == doctest::Approx(nmse_db(est, ref).value()).epsilon(1e-12));
}

TEST_CASE("report CSV roundtrip and aggregates") {
    MetricsReport rep;
    for (int i = 0; i < 5; ++i) {
        auto ref = random_grid(10, 10, 60 + i, 0.1, 1.0);
        Array2D est(10, 10);
        CounterRng noise(70 + i);
        for (std::size_t j = 0; j < est.size(); ++j)
            est.values()[j] = ref.values()[j] + noise.uniform(-0.08, 0.08);
        rep.per_patch.push_back(
            evaluate_patch(i, i % 2 ? MetricDomain::Isoprene : MetricDomain::Transformed,
                           est, ref));
    }
    rep.compute_aggregates();
    CHECK(rep.nmse.count == 5);

    double mean = 0.0;
    for (const auto& p : rep.per_patch) mean += p.ssim;
    mean /= 5.0;
    CHECK(rep.ssim.avg == doctest::Approx(mean).epsilon(1e-12));

    const std::string path =
        (std::filesystem::temp_directory_path() / "bsrk_test_metrics.csv").string();
    rep.write_csv(path);
    auto back = MetricsReport::read_csv(path);
    REQUIRE(back.per_patch.size() == rep.per_patch.size());
    for (std::size_t i = 0; i < rep.per_patch.size(); ++i) {
        CHECK(back.per_patch[i].patch_id == rep.per_patch[i].patch_id);
        CHECK(back.per_patch[i].domain == rep.per_patch[i].domain);
        CHECK(back.per_patch[i].nmse_db.value() == rep.per_patch[i].nmse_db.value());
        CHECK(back.per_patch[i].ssim == rep.per_patch[i].ssim);
        CHECK(back.per_patch[i].scc == rep.per_patch[i].scc);
    }
    std::remove(path.c_str());
}
