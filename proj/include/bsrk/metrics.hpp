#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bsrk/array2d.hpp"

namespace bsrk {

inline constexpr double kNmseFloorDb = -300.0;
inline constexpr double kPsnrCapDb = 300.0;

/// 10*log10(MSE(est, ref) / mean(ref^2)) in dB; zero MSE reports the -300 dB
/// floor. Returns nullopt for an all-zero reference.
std::optional<double> nmse_db(const Array2D& est, const Array2D& ref);

/// Maximum absolute per-pixel error.
double maxae(const Array2D& est, const Array2D& ref);

/// Mean local SSIM, 11x11 Gaussian window (sigma 1.5), K1=0.01, K2=0.03,
/// reflect-padded windows centered on every pixel.
double ssim(const Array2D& est, const Array2D& ref, double data_range);

/// 10*log10(data_range^2 / MSE); zero MSE reports the +300 dB cap.
double psnr_db(const Array2D& est, const Array2D& ref, double data_range);

/// Universal image quality index, mean over valid 8x8 sliding windows;
/// windows with a zero denominator are skipped.
double uiqi(const Array2D& est, const Array2D& ref);

/// Spatial correlation coefficient: Pearson correlation of the two images
/// after 3x3 Laplacian high-pass filtering with reflect boundaries.
double scc(const Array2D& est, const Array2D& ref);

/// NMSE improvement ratio of est against the single-channel baseline, both
/// measured against truth in the transformed domain.
double nir(const Array2D& est_t, const Array2D& ref_baseline_t, const Array2D& truth_t);
double nir_from_db(double est_nmse_db, double baseline_nmse_db);

/// data_range convention used throughout: per-patch ground-truth range.
double data_range_of(const Array2D& ref);

enum class MetricDomain { Transformed, Isoprene };
std::string metric_domain_name(MetricDomain d);

struct PatchMetrics {
    std::int64_t patch_id = -1;
    MetricDomain domain = MetricDomain::Transformed;
    std::optional<double> nmse_db;
    double maxae = 0.0;
    double ssim = 0.0;
    double psnr_db = 0.0;
    double uiqi = 0.0;
    double scc = 0.0;
};

PatchMetrics evaluate_patch(std::int64_t patch_id, MetricDomain domain,
                            const Array2D& est, const Array2D& ref);

struct MetricAggregate {
    double avg = 0.0;
    double std = 0.0;
    std::size_t count = 0;
};

struct MetricsReport {
    std::vector<PatchMetrics> per_patch;
    MetricAggregate nmse, maxae, ssim, psnr, uiqi, scc;

    void compute_aggregates();
    void write_csv(const std::string& path) const;
    void write_aggregate_json(const std::string& path) const;
    static MetricsReport read_csv(const std::string& path);
};

} // namespace bsrk
