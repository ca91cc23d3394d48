#pragma once

#include <optional>
#include <vector>

#include "bsrk/array2d.hpp"
#include "bsrk/raster.hpp"

namespace bsrk {

/// Pearson product-moment coefficient over paired non-missing entries.
/// Returns nullopt when either side has zero variance or fewer than two
/// valid pairs.
std::optional<double> pcc(const std::vector<double>& a, const std::vector<double>& b);
std::optional<double> pcc(const Array2D& a, const Array2D& b);

/// Shannon entropy of x over `bins` uniform bins spanning [min(x), max(x)],
/// in bits. A constant array has zero entropy.
double entropy_bits(const Array2D& x, int bins);

/// H(X|Y) = H(X,Y) - H(Y) from the joint histogram, per-variable min-max
/// uniform binning, log base 2.
double conditional_entropy(const Array2D& x, const Array2D& y, int bins);

struct DistributionSummary {
    double mean = 0.0;
    double stddev = 0.0;
    double median = 0.0;
    std::size_t count = 0;
};

DistributionSummary summarize(std::vector<double> values);

struct CorrelationSeriesPoint {
    CalendarDate date;
    double mean_isoprene = 0.0;
    double mean_driver = 0.0;
    std::optional<double> pcc_across_patches;
};

/// Per-date series of patch-averaged isoprene and driver intensity, with the
/// PCC across the patch means of each date.
std::vector<CorrelationSeriesPoint> temporal_correlation_series(
    const std::vector<CalendarDate>& dates,
    const std::vector<std::vector<double>>& isoprene_patch_means,
    const std::vector<std::vector<double>>& driver_patch_means);

struct SpatialCorrelationStudy {
    std::vector<double> per_patch_pcc; // skipped patches omitted
    DistributionSummary summary;
};

/// One PCC per patch across its cells; degenerate patches are skipped.
SpatialCorrelationStudy spatial_correlation_study(
    const std::vector<const Array2D*>& isoprene,
    const std::vector<const Array2D*>& driver);

struct EntropyStudy {
    std::vector<double> per_patch_bits;
    DistributionSummary summary;
};

EntropyStudy conditional_entropy_study(const std::vector<const Array2D*>& isoprene,
                                       const std::vector<const Array2D*>& driver,
                                       int bins = 32);

} // namespace bsrk
