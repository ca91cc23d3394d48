#include "bsrk/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bsrk/error.hpp"

namespace bsrk {

namespace {

// Bin index over [lo, hi] with the top edge folded into the last bin.
// A constant variable collapses into bin 0.
int bin_of(double x, double lo, double hi, int bins) {
    if (hi <= lo) return 0;
    int b = static_cast<int>((x - lo) / (hi - lo) * bins);
    return std::clamp(b, 0, bins - 1);
}

void min_max(const Array2D& a, double& lo, double& hi) {
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (double x : a.values()) {
        if (Array2D::is_missing(x)) continue;
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
}

double entropy_of_counts(const std::vector<double>& counts, double total) {
    double h = 0.0;
    for (double n : counts) {
        if (n <= 0.0) continue; // empty bins contribute zero
        const double p = n / total;
        h -= p * std::log2(p);
    }
    return h;
}

} // namespace

std::optional<double> pcc(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw data_error("pcc: length mismatch");
    double sa = 0.0, sb = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::isnan(a[i]) || std::isnan(b[i])) continue;
        sa += a[i];
        sb += b[i];
        ++n;
    }
    if (n < 2) return std::nullopt;
    const double ma = sa / n, mb = sb / n;
    double cab = 0.0, caa = 0.0, cbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::isnan(a[i]) || std::isnan(b[i])) continue;
        cab += (a[i] - ma) * (b[i] - mb);
        caa += (a[i] - ma) * (a[i] - ma);
        cbb += (b[i] - mb) * (b[i] - mb);
    }
    if (caa == 0.0 || cbb == 0.0) return std::nullopt;
    return cab / std::sqrt(caa * cbb);
}

std::optional<double> pcc(const Array2D& a, const Array2D& b) {
    if (!a.same_shape(b)) throw data_error("pcc: shape mismatch");
    return pcc(a.values(), b.values());
}

double entropy_bits(const Array2D& x, int bins) {
    if (bins < 2) throw config_error("entropy: bins must be >= 2");
    double lo, hi;
    min_max(x, lo, hi);
    std::vector<double> counts(bins, 0.0);
    double total = 0.0;
    for (double v : x.values()) {
        if (Array2D::is_missing(v)) continue;
        counts[bin_of(v, lo, hi, bins)] += 1.0;
        total += 1.0;
    }
    if (total == 0.0) return 0.0;
    return entropy_of_counts(counts, total);
}

double conditional_entropy(const Array2D& x, const Array2D& y, int bins) {
    if (!x.same_shape(y)) throw data_error("conditional_entropy: shape mismatch");
    if (bins < 2) throw config_error("conditional_entropy: bins must be >= 2");
    double xlo, xhi, ylo, yhi;
    min_max(x, xlo, xhi);
    min_max(y, ylo, yhi);

    std::vector<double> joint(static_cast<std::size_t>(bins) * bins, 0.0);
    std::vector<double> marginal_y(bins, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double xv = x.values()[i], yv = y.values()[i];
        if (Array2D::is_missing(xv) || Array2D::is_missing(yv)) continue;
        const int bx = bin_of(xv, xlo, xhi, bins);
        const int by = bin_of(yv, ylo, yhi, bins);
        joint[static_cast<std::size_t>(bx) * bins + by] += 1.0;
        marginal_y[by] += 1.0;
        total += 1.0;
    }
    if (total == 0.0) return 0.0;
    return entropy_of_counts(joint, total) - entropy_of_counts(marginal_y, total);
}

DistributionSummary summarize(std::vector<double> values) {
    DistributionSummary s;
    s.count = values.size();
    if (values.empty()) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / values.size();
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / values.size());
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    s.median = (n % 2 == 1) ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
    return s;
}

std::vector<CorrelationSeriesPoint> temporal_correlation_series(
    const std::vector<CalendarDate>& dates,
    const std::vector<std::vector<double>>& isoprene_patch_means,
    const std::vector<std::vector<double>>& driver_patch_means) {
    if (dates.size() != isoprene_patch_means.size() ||
        dates.size() != driver_patch_means.size())
        throw data_error("temporal_correlation_series: length mismatch");
    std::vector<CorrelationSeriesPoint> out;
    for (std::size_t i = 0; i < dates.size(); ++i) {
        CorrelationSeriesPoint p;
        p.date = dates[i];
        const auto& iso = isoprene_patch_means[i];
        const auto& drv = driver_patch_means[i];
        double si = 0.0, sd = 0.0;
        for (double v : iso) si += v;
        for (double v : drv) sd += v;
        p.mean_isoprene = iso.empty() ? 0.0 : si / iso.size();
        p.mean_driver = drv.empty() ? 0.0 : sd / drv.size();
        p.pcc_across_patches = pcc(iso, drv);
        out.push_back(p);
    }
    return out;
}

SpatialCorrelationStudy spatial_correlation_study(
    const std::vector<const Array2D*>& isoprene,
    const std::vector<const Array2D*>& driver) {
    if (isoprene.size() != driver.size())
        throw data_error("spatial_correlation_study: length mismatch");
    SpatialCorrelationStudy s;
    for (std::size_t i = 0; i < isoprene.size(); ++i) {
        auto r = pcc(*isoprene[i], *driver[i]);
        if (r) s.per_patch_pcc.push_back(*r);
    }
    s.summary = summarize(s.per_patch_pcc);
    return s;
}

EntropyStudy conditional_entropy_study(const std::vector<const Array2D*>& isoprene,
                                       const std::vector<const Array2D*>& driver,
                                       int bins) {
    if (isoprene.size() != driver.size())
        throw data_error("conditional_entropy_study: length mismatch");
    EntropyStudy s;
    for (std::size_t i = 0; i < isoprene.size(); ++i)
        s.per_patch_bits.push_back(conditional_entropy(*isoprene[i], *driver[i], bins));
    s.summary = summarize(s.per_patch_bits);
    return s;
}

} // namespace bsrk
