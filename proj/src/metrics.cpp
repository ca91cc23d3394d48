#include "bsrk/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bsrk/error.hpp"
#include "bsrk/stats.hpp"

namespace bsrk {

namespace {

void check_shapes(const Array2D& a, const Array2D& b, const char* what) {
    if (!a.same_shape(b)) throw data_error(std::string(what) + ": shape mismatch");
    if (a.size() == 0) throw data_error(std::string(what) + ": empty input");
}

double mse(const Array2D& est, const Array2D& ref) {
    double acc = 0.0;
    for (std::size_t i = 0; i < est.size(); ++i) {
        const double d = est.values()[i] - ref.values()[i];
        acc += d * d;
    }
    return acc / static_cast<double>(est.size());
}

int reflect(int i, int n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

// Normalized 11x11 Gaussian window, sigma 1.5.
const std::vector<double>& gaussian_window_1d() {
    static const std::vector<double> w = [] {
        std::vector<double> v(11);
        double sum = 0.0;
        for (int i = 0; i < 11; ++i) {
            const double x = i - 5;
            v[i] = std::exp(-x * x / (2.0 * 1.5 * 1.5));
            sum += v[i];
        }
        for (double& x : v) x /= sum;
        return v;
    }();
    return w;
}

// Separable Gaussian filter with reflect boundaries.
Array2D gauss_filter(const Array2D& a) {
    const auto& w = gaussian_window_1d();
    Array2D tmp(a.rows(), a.cols());
    for (int r = 0; r < a.rows(); ++r)
        for (int c = 0; c < a.cols(); ++c) {
            double acc = 0.0;
            for (int k = -5; k <= 5; ++k)
                acc += w[k + 5] * a.at(r, reflect(c + k, a.cols()));
            tmp.at(r, c) = acc;
        }
    Array2D out(a.rows(), a.cols());
    for (int r = 0; r < a.rows(); ++r)
        for (int c = 0; c < a.cols(); ++c) {
            double acc = 0.0;
            for (int k = -5; k <= 5; ++k)
                acc += w[k + 5] * tmp.at(reflect(r + k, a.rows()), c);
            out.at(r, c) = acc;
        }
    return out;
}

Array2D hadamard(const Array2D& a, const Array2D& b) {
    Array2D out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i)
        out.values()[i] = a.values()[i] * b.values()[i];
    return out;
}

} // namespace

std::optional<double> nmse_db(const Array2D& est, const Array2D& ref) {
    check_shapes(est, ref, "nmse");
    double power = 0.0;
    for (double x : ref.values()) power += x * x;
    power /= static_cast<double>(ref.size());
    if (power == 0.0) return std::nullopt;
    const double e = mse(est, ref);
    if (e == 0.0) return kNmseFloorDb;
    return std::max(10.0 * std::log10(e / power), kNmseFloorDb);
}

double maxae(const Array2D& est, const Array2D& ref) {
    check_shapes(est, ref, "maxae");
    double m = 0.0;
    for (std::size_t i = 0; i < est.size(); ++i)
        m = std::max(m, std::abs(est.values()[i] - ref.values()[i]));
    return m;
}

double ssim(const Array2D& est, const Array2D& ref, double data_range) {
    check_shapes(est, ref, "ssim");
    const double c1 = (0.01 * data_range) * (0.01 * data_range);
    const double c2 = (0.03 * data_range) * (0.03 * data_range);

    const Array2D mu_x = gauss_filter(est);
    const Array2D mu_y = gauss_filter(ref);
    const Array2D xx = gauss_filter(hadamard(est, est));
    const Array2D yy = gauss_filter(hadamard(ref, ref));
    const Array2D xy = gauss_filter(hadamard(est, ref));

    double acc = 0.0;
    for (std::size_t i = 0; i < est.size(); ++i) {
        const double mx = mu_x.values()[i], my = mu_y.values()[i];
        const double vx = xx.values()[i] - mx * mx;
        const double vy = yy.values()[i] - my * my;
        const double cov = xy.values()[i] - mx * my;
        acc += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
               ((mx * mx + my * my + c1) * (vx + vy + c2));
    }
    return acc / static_cast<double>(est.size());
}

double psnr_db(const Array2D& est, const Array2D& ref, double data_range) {
    check_shapes(est, ref, "psnr");
    const double e = mse(est, ref);
    if (e == 0.0) return kPsnrCapDb;
    return std::min(10.0 * std::log10(data_range * data_range / e), kPsnrCapDb);
}

double uiqi(const Array2D& est, const Array2D& ref) {
    check_shapes(est, ref, "uiqi");
    constexpr int W = 8;
    if (est.rows() < W || est.cols() < W)
        throw data_error("uiqi: image smaller than the 8x8 window");
    const double inv_n = 1.0 / (W * W);
    double acc = 0.0;
    std::size_t windows = 0;
    for (int r0 = 0; r0 + W <= est.rows(); ++r0)
        for (int c0 = 0; c0 + W <= est.cols(); ++c0) {
            double sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
            for (int r = r0; r < r0 + W; ++r)
                for (int c = c0; c < c0 + W; ++c) {
                    const double x = est.at(r, c), y = ref.at(r, c);
                    sx += x;
                    sy += y;
                    sxx += x * x;
                    syy += y * y;
                    sxy += x * y;
                }
            const double mx = sx * inv_n, my = sy * inv_n;
            const double vx = sxx * inv_n - mx * mx;
            const double vy = syy * inv_n - my * my;
            const double cov = sxy * inv_n - mx * my;
            const double denom = (vx + vy) * (mx * mx + my * my);
            if (denom == 0.0) continue;
            acc += 4.0 * cov * mx * my / denom;
            ++windows;
        }
    if (windows == 0) throw data_error("uiqi: all windows degenerate");
    return acc / static_cast<double>(windows);
}

double scc(const Array2D& est, const Array2D& ref) {
    check_shapes(est, ref, "scc");
    auto laplacian = [](const Array2D& a) {
        Array2D out(a.rows(), a.cols());
        for (int r = 0; r < a.rows(); ++r)
            for (int c = 0; c < a.cols(); ++c)
                out.at(r, c) = 4.0 * a.at(r, c) -
                               a.at(reflect(r - 1, a.rows()), c) -
                               a.at(reflect(r + 1, a.rows()), c) -
                               a.at(r, reflect(c - 1, a.cols())) -
                               a.at(r, reflect(c + 1, a.cols()));
        return out;
    };
    auto r = pcc(laplacian(est), laplacian(ref));
    if (!r) throw data_error("scc: zero variance after high-pass filtering");
    return *r;
}

double nir_from_db(double est_nmse_db, double baseline_nmse_db) {
    if (baseline_nmse_db == 0.0) throw numeric_error("nir: zero baseline NMSE");
    return (est_nmse_db - baseline_nmse_db) / baseline_nmse_db;
}

double nir(const Array2D& est_t, const Array2D& ref_baseline_t, const Array2D& truth_t) {
    auto est = nmse_db(est_t, truth_t);
    auto base = nmse_db(ref_baseline_t, truth_t);
    if (!est || !base) throw numeric_error("nir: undefined NMSE (all-zero truth)");
    return nir_from_db(*est, *base);
}

double data_range_of(const Array2D& ref) {
    double lo = ref.values()[0], hi = lo;
    for (double x : ref.values()) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    return hi - lo;
}

std::string metric_domain_name(MetricDomain d) {
    return d == MetricDomain::Transformed ? "transformed" : "isoprene";
}

PatchMetrics evaluate_patch(std::int64_t patch_id, MetricDomain domain,
                            const Array2D& est, const Array2D& ref) {
    PatchMetrics m;
    m.patch_id = patch_id;
    m.domain = domain;
    const double dr = data_range_of(ref);
    m.nmse_db = nmse_db(est, ref);
    m.maxae = maxae(est, ref);
    m.ssim = ssim(est, ref, dr > 0.0 ? dr : 1.0);
    m.psnr_db = psnr_db(est, ref, dr > 0.0 ? dr : 1.0);
    m.uiqi = uiqi(est, ref);
    m.scc = scc(est, ref);
    return m;
}

namespace {

MetricAggregate aggregate(const std::vector<double>& v) {
    MetricAggregate a;
    a.count = v.size();
    if (v.empty()) return a;
    double sum = 0.0;
    for (double x : v) sum += x;
    a.avg = sum / v.size();
    double ss = 0.0;
    for (double x : v) ss += (x - a.avg) * (x - a.avg);
    a.std = std::sqrt(ss / v.size());
    return a;
}

} // namespace

void MetricsReport::compute_aggregates() {
    std::vector<double> vn, vm, vs, vp, vu, vc;
    for (const auto& p : per_patch) {
        if (p.nmse_db) vn.push_back(*p.nmse_db);
        vm.push_back(p.maxae);
        vs.push_back(p.ssim);
        vp.push_back(p.psnr_db);
        vu.push_back(p.uiqi);
        vc.push_back(p.scc);
    }
    nmse = aggregate(vn);
    maxae = aggregate(vm);
    ssim = aggregate(vs);
    psnr = aggregate(vp);
    uiqi = aggregate(vu);
    scc = aggregate(vc);
}

void MetricsReport::write_csv(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw data_error("cannot open for write: " + path);
    os << "patch_id,domain,nmse_db,maxae,ssim,psnr_db,uiqi,scc\n";
    os.precision(17);
    for (const auto& p : per_patch) {
        os << p.patch_id << "," << metric_domain_name(p.domain) << ",";
        if (p.nmse_db) os << *p.nmse_db;
        os << "," << p.maxae << "," << p.ssim << "," << p.psnr_db << ","
           << p.uiqi << "," << p.scc << "\n";
    }
}

void MetricsReport::write_aggregate_json(const std::string& path) const {
    auto to_json = [](const MetricAggregate& a) {
        return nlohmann::json{{"avg", a.avg}, {"std", a.std}, {"count", a.count}};
    };
    nlohmann::json j;
    j["nmse_db"] = to_json(nmse);
    j["maxae"] = to_json(maxae);
    j["ssim"] = to_json(ssim);
    j["psnr_db"] = to_json(psnr);
    j["uiqi"] = to_json(uiqi);
    j["scc"] = to_json(scc);
    std::ofstream os(path);
    if (!os) throw data_error("cannot open for write: " + path);
    os << j.dump(2) << "\n";
}

MetricsReport MetricsReport::read_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw data_error("cannot open: " + path);
    MetricsReport rep;
    std::string line;
    std::getline(is, line); // header
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string field;
        PatchMetrics p;
        std::getline(ls, field, ',');
        p.patch_id = std::stoll(field);
        std::getline(ls, field, ',');
        p.domain = field == "isoprene" ? MetricDomain::Isoprene : MetricDomain::Transformed;
        std::getline(ls, field, ',');
        if (!field.empty()) p.nmse_db = std::stod(field);
        std::getline(ls, field, ',');
        p.maxae = std::stod(field);
        std::getline(ls, field, ',');
        p.ssim = std::stod(field);
        std::getline(ls, field, ',');
        p.psnr_db = std::stod(field);
        std::getline(ls, field, ',');
        p.uiqi = std::stod(field);
        std::getline(ls, field, ',');
        p.scc = std::stod(field);
        rep.per_patch.push_back(p);
    }
    rep.compute_aggregates();
    return rep;
}

} // namespace bsrk
