// bsrk: isoprene-emission super-resolution pipeline driver.
//
// Subcommands cover the full workflow: make-toy, preprocess, extract-patches,
// fit-transform, apply-transform, build-folds, analyze-stats, train, deploy,
// evaluate, report. Every artifact gets a <artifact>.log.json provenance log.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bsrk/climate.hpp"
#include "bsrk/error.hpp"
#include "bsrk/folds.hpp"
#include "bsrk/metrics.hpp"
#include "bsrk/patchset.hpp"
#include "bsrk/raster_io.hpp"
#include "bsrk/resample.hpp"
#include "bsrk/rng.hpp"
#include "bsrk/run_log.hpp"
#include "bsrk/sr/engine.hpp"
#include "bsrk/sr/synthetic.hpp"
#include "bsrk/sr/train.hpp"
#include "bsrk/stats.hpp"
#include "bsrk/transform.hpp"

namespace fs = std::filesystem;
using namespace bsrk;

namespace {

std::string g_data_dir;
int g_threads = 1;

// Input paths resolve against --data-dir / $BSRK_DATA_DIR when relative.
std::string in_path(const std::string& p) {
    if (g_data_dir.empty() || p.empty() || fs::path(p).is_absolute()) return p;
    return (fs::path(g_data_dir) / p).string();
}

std::string pp(const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

// ---------------------------------------------------------------- make-toy

struct ToyOpts {
    std::string out;
    int dates = 6;
    std::uint64_t seed = 1;
};

void run_make_toy(const ToyOpts& o) {
    fs::create_directories(o.out);
    fs::create_directories(o.out + "/emissions");
    const auto extent = GeoExtent::make(0.0, 6.0, 40.0, 46.0, 0.1); // 60x60

    // Climate: four 15-column stripes so every window column offset has a
    // distinct dominant class (Cfb, Dfb, Dfc, Csa).
    Array2D climate(60, 60);
    for (int r = 0; r < 60; ++r)
        for (int c = 0; c < 60; ++c)
            climate.at(r, c) = c < 15 ? 15.0 : c < 30 ? 26.0 : c < 45 ? 27.0 : 8.0;
    save_raster(o.out + "/climate.bsrc",
                RasterGrid(extent, GridKind::ClimateClass, climate), "climate");

    auto smooth = [](double r, double c, double p1, double p2) {
        return 50.0 + 40.0 * std::sin(2.0 * M_PI * r / 60.0 + p1) *
                          std::cos(2.0 * M_PI * c / 60.0 + p2);
    };
    Array2D cl(60, 60), tc(60, 60);
    for (int r = 0; r < 60; ++r)
        for (int c = 0; c < 60; ++c) {
            cl.at(r, c) = smooth(r, c, 0.3, 0.9);
            tc.at(r, c) = smooth(r, c, 1.7, 0.1);
        }
    save_raster(o.out + "/cl.bsrc", RasterGrid(extent, GridKind::Percentage, cl), "cl");
    save_raster(o.out + "/tc.bsrc", RasterGrid(extent, GridKind::Percentage, tc), "tc");

    CounterRng rng(o.seed);
    for (int d = 0; d < o.dates; ++d) {
        Array2D emi(60, 60);
        for (int r = 0; r < 60; ++r)
            for (int c = 0; c < 60; ++c) {
                if ((r * 31 + c * 17 + d * 7) % 23 == 0) {
                    emi.at(r, c) = 0.0; // ~4% exact zeros, below the 10% cutoff
                    continue;
                }
                const double season = 1.0 + 0.3 * std::sin(2.0 * M_PI * d / 12.0);
                const double s = 0.5 + 0.5 * std::sin(2.0 * M_PI * r / 30.0) *
                                           std::cos(2.0 * M_PI * c / 20.0);
                emi.at(r, c) = season * (0.2 + s) * std::exp(0.4 * rng.normal());
            }
        CalendarDate date{2020, 1 + d, 15};
        save_raster(o.out + "/emissions/emi_" + date.to_string() + ".bsrc",
                    RasterGrid(extent, GridKind::Emission, emi, date), "isoprene");
    }

    {
        std::ofstream os(o.out + "/folds.json");
        os << R"({
  "spatial_holdout": {"lon_min": 0.0, "lon_max": 6.0,
                      "lat_min": 44.0, "lat_max": 45.0, "cell_size": 0.1},
  "holdout_sample_size": 10000,
  "seed": 11,
  "split": [0.75, 0.05, 0.20],
  "folds": [
    {"name": "Cfb", "held_out_classes": ["Cfb"]},
    {"name": "Dfb", "held_out_classes": ["Dfb"]},
    {"name": "Dfc", "held_out_classes": ["Dfc"]},
    {"name": "Med", "held_out_classes": ["Csa", "Csb", "BSh", "BSk",
                                          "BWh", "BWk", "Cfa", "Dsa", "Dsb"]}
  ]
}
)";
    }
    {
        std::ofstream os(o.out + "/train.json");
        os << R"({"lr0": 1e-3, "max_epochs": 6, "batch_size": 16,
  "lr_patience": 3, "stop_patience": 6, "rng_seed": 7}
)";
    }
    write_run_log(o.out + "/climate.bsrc", "make-toy", {},
                  {{"dates", std::to_string(o.dates)}, {"seed", std::to_string(o.seed)}});
    std::cout << "toy dataset written to " << o.out << "\n";
}

// -------------------------------------------------------------- preprocess

struct PreprocessOpts {
    std::string landcover, out_cl, out_tc;
    std::string lai, out_lai, reference;
    double cell = 0.1;
};

void run_preprocess(const PreprocessOpts& o) {
    const auto lc_info = probe_container(in_path(o.landcover));
    RasterGrid lc_raw = load_raster(in_path(o.landcover), lc_info.variable);
    CategoricalLandCover lc(lc_raw.extent(), lc_raw.data());

    RasterGrid cl = class_fraction(lc, o.cell, kCroplandClass);
    RasterGrid tc = class_fraction(lc, o.cell, kTreeCoverClass);
    if (!o.reference.empty()) {
        const auto ref = probe_container(in_path(o.reference)).extent;
        cl = align_to(cl, ref);
        tc = align_to(tc, ref);
    }
    save_raster(o.out_cl, cl, "cl");
    save_raster(o.out_tc, tc, "tc");
    write_run_log(o.out_cl, "preprocess", {in_path(o.landcover)},
                  {{"class", "CL"}, {"cell", pp("%g", o.cell)}});
    write_run_log(o.out_tc, "preprocess", {in_path(o.landcover)},
                  {{"class", "TC"}, {"cell", pp("%g", o.cell)}});

    if (!o.lai.empty()) {
        if (o.out_lai.empty())
            throw config_error("preprocess: --lai requires --out-lai");
        const auto lai_info = probe_container(in_path(o.lai));
        RasterGrid lai = load_raster(in_path(o.lai), lai_info.variable);
        lai = coarsen_mean(lai, o.cell);
        if (!o.reference.empty())
            lai = align_to(lai, probe_container(in_path(o.reference)).extent);
        save_raster(o.out_lai, lai, "lai");
        write_run_log(o.out_lai, "preprocess", {in_path(o.lai)},
                      {{"class", "LAI"}, {"cell", pp("%g", o.cell)}});
    }
    std::cout << "derived driver maps written\n";
}

// ---------------------------------------------------------- extract-patches

struct ExtractOpts {
    std::string emission_dir, cl, tc, climate, lai, out;
    double patch_deg = 3.0, stride_deg = 1.0, zero_thresh = 0.10;
    int alpha = 2;
    int n_q = TransformModel::kDefaultQuantiles;
};

RasterGrid load_driver_aligned(const std::string& path, const GeoExtent& ref,
                               const char* what) {
    if (!fs::exists(path))
        throw data_error(std::string("missing ") + what + " input: " + path);
    const auto info = probe_container(path);
    RasterGrid g = load_raster(path, info.variable);
    if (g.extent() == ref) return g;
    return align_to(g, ref);
}

void run_extract(const ExtractOpts& o) {
    std::vector<std::string> files;
    const std::string edir = in_path(o.emission_dir);
    if (!fs::is_directory(edir))
        throw data_error("missing emission directory: " + edir);
    for (const auto& e : fs::directory_iterator(edir))
        if (e.path().extension() == ".bsrc") files.push_back(e.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw data_error("no .bsrc emission files in " + edir);

    std::vector<RasterGrid> emissions;
    for (const auto& f : files) {
        const auto info = probe_container(f);
        if (info.time_steps == 0) {
            emissions.push_back(load_raster(f, info.variable));
        } else {
            for (std::size_t t = 0; t < info.time_steps; ++t)
                emissions.push_back(load_raster(f, info.variable, t));
        }
    }
    const GeoExtent& ref = emissions.front().extent();
    for (const auto& g : emissions)
        if (!(g.extent() == ref))
            throw data_error("emission grids do not share one extent");

    RasterGrid cl = load_driver_aligned(in_path(o.cl), ref, "CL driver");
    RasterGrid tc = load_driver_aligned(in_path(o.tc), ref, "TC driver");
    std::vector<const RasterGrid*> drivers{&cl, &tc};
    std::optional<RasterGrid> lai;
    if (!o.lai.empty()) {
        lai = load_driver_aligned(in_path(o.lai), ref, "LAI driver");
        drivers.push_back(&*lai);
    }

    const std::string cpath = in_path(o.climate);
    if (!fs::exists(cpath)) throw data_error("missing climate input: " + cpath);
    RasterGrid climate = load_raster(cpath, probe_container(cpath).variable);
    if (!(climate.extent() == ref)) {
        if (!climate.extent().same_registration(ref))
            throw data_error("climate grid must share registration with emissions "
                             "(categorical data cannot be interpolated)");
        climate = align_to(climate, ref);
    }

    auto windows = extract_patches(emissions, o.patch_deg, o.stride_deg, o.zero_thresh);
    if (windows.empty()) throw data_error("no patches passed the zero-flux filter");

    // Provisional transform over every retained HR value; refit on the
    // training partition with fit-transform + apply-transform afterwards.
    std::vector<double> samples;
    samples.reserve(windows.size() * windows.front().i_hr.size());
    for (const auto& w : windows)
        samples.insert(samples.end(), w.i_hr.values().begin(), w.i_hr.values().end());
    auto transform = TransformModel::fit(std::move(samples), o.n_q);

    fs::create_directories(o.out);
    transform.save(o.out + "/transform.json");
    {
        PatchStoreWriter writer(o.out, static_cast<int>(drivers.size()));
        for (const auto& w : windows)
            writer.append(build_patch(w, drivers, climate, transform, o.alpha));
    }

    std::vector<std::string> inputs{in_path(o.cl), in_path(o.tc), cpath};
    if (!o.lai.empty()) inputs.push_back(in_path(o.lai));
    inputs.insert(inputs.end(), files.begin(), files.end());
    write_run_log(store_index_path(o.out), "extract-patches", inputs,
                  {{"patch_deg", pp("%g", o.patch_deg)},
                   {"stride_deg", pp("%g", o.stride_deg)},
                   {"zero_thresh", pp("%g", o.zero_thresh)},
                   {"alpha", std::to_string(o.alpha)},
                   {"n_q", std::to_string(o.n_q)}});
    std::cout << "extracted " << windows.size() << " patches to " << o.out << "\n";
}

// ------------------------------------------------------------- build-folds

struct FoldsOpts {
    std::string index, spec, out;
};

std::string store_dir_of(const std::string& index_arg) {
    fs::path p(index_arg);
    if (fs::is_directory(p)) return p.string();
    return p.parent_path().string();
}

void run_build_folds(const FoldsOpts& o) {
    PatchStore store(store_dir_of(in_path(o.index)));
    auto specs = load_fold_specs(in_path(o.spec));
    fs::create_directories(o.out);
    for (const auto& spec : specs) {
        auto manifest = build_fold(store.index(), spec);
        const std::string path = o.out + "/" + spec.name + ".fold.json";
        manifest.save(path);
        write_run_log(path, "build-folds",
                      {store_index_path(store_dir_of(in_path(o.index))), in_path(o.spec)},
                      {{"fold", spec.name}, {"seed", std::to_string(spec.rng_seed)}});
        std::cout << spec.name << ": train " << manifest.train.size() << ", val "
                  << manifest.val.size() << ", test " << manifest.test_standard.size()
                  << ", unseen-spatial " << manifest.test_unseen_spatial.size()
                  << ", unseen-climate " << manifest.test_unseen_climate.size() << "\n";
    }
}

// ----------------------------------------------- fit-transform / apply-transform

struct FitTransformOpts {
    std::string store, manifest, out;
    int n_q = TransformModel::kDefaultQuantiles;
};

void run_fit_transform(const FitTransformOpts& o) {
    PatchStore store(in_path(o.store));
    auto manifest = FoldManifest::load(in_path(o.manifest));
    std::vector<double> samples;
    for (auto id : manifest.train) {
        const Patch p = store.read(id);
        samples.insert(samples.end(), p.i_hr.values().begin(), p.i_hr.values().end());
    }
    auto t = TransformModel::fit(std::move(samples), o.n_q);
    t.save(o.out);
    write_run_log(o.out, "fit-transform",
                  {store_index_path(in_path(o.store)), in_path(o.manifest)},
                  {{"n_q", std::to_string(o.n_q)},
                   {"train_patches", std::to_string(manifest.train.size())}});
    std::cout << "transform fitted on " << manifest.train.size() << " train patches\n";
}

struct ApplyTransformOpts {
    std::string store, transform;
};

void run_apply_transform(const ApplyTransformOpts& o) {
    auto t = TransformModel::load(in_path(o.transform));
    PatchStore::apply_transform(in_path(o.store), t);
    fs::copy_file(in_path(o.transform), in_path(o.store) + "/transform.json",
                  fs::copy_options::overwrite_existing);
    write_run_log(store_data_path(in_path(o.store)), "apply-transform",
                  {in_path(o.transform)}, {});
    std::cout << "transformed arrays rewritten in " << o.store << "\n";
}

// ------------------------------------------------------------ analyze-stats

struct StatsOpts {
    std::string store, driver = "cl", out;
    int bins = 32;
};

int driver_index_of(const std::string& name, int driver_count) {
    const std::map<std::string, int> idx{{"cl", 0}, {"tc", 1}, {"lai", 2}};
    auto it = idx.find(name);
    if (it == idx.end()) throw config_error("unknown driver: " + name);
    if (it->second >= driver_count)
        throw data_error("driver '" + name + "' not present in this patch store");
    return it->second;
}

void run_analyze_stats(const StatsOpts& o) {
    PatchStore store(in_path(o.store));
    const int d = driver_index_of(o.driver, store.driver_count());

    std::vector<Patch> patches;
    patches.reserve(store.size());
    for (const auto& e : store.index()) patches.push_back(store.read_entry(e));

    std::vector<const Array2D*> iso, drv;
    for (const auto& p : patches) {
        iso.push_back(&p.i_lr);
        drv.push_back(&p.drivers_lr[d]);
    }
    auto spatial = spatial_correlation_study(iso, drv);
    auto entropy = conditional_entropy_study(iso, drv, o.bins);

    // Per-date series of patch means.
    std::map<CalendarDate, std::pair<std::vector<double>, std::vector<double>>> by_date;
    auto mean_of = [](const Array2D& a) {
        double s = 0.0;
        std::size_t n = 0;
        for (double x : a.values())
            if (!Array2D::is_missing(x)) {
                s += x;
                ++n;
            }
        return n ? s / static_cast<double>(n) : 0.0;
    };
    for (const auto& p : patches) {
        auto& [im, dm] = by_date[p.meta.date];
        im.push_back(mean_of(p.i_lr));
        dm.push_back(mean_of(p.drivers_lr[d]));
    }
    std::vector<CalendarDate> dates;
    std::vector<std::vector<double>> iso_means, drv_means;
    for (const auto& [date, v] : by_date) {
        dates.push_back(date);
        iso_means.push_back(v.first);
        drv_means.push_back(v.second);
    }
    auto series = temporal_correlation_series(dates, iso_means, drv_means);

    const std::string stem = o.out.substr(0, o.out.rfind('.'));
    {
        std::ofstream os(stem + "_per_patch.csv");
        os.precision(17);
        os << "patch_id,date,pcc,cond_entropy_bits,mean_isoprene,mean_driver\n";
        for (std::size_t i = 0; i < patches.size(); ++i) {
            const auto& p = patches[i];
            auto r = pcc(p.i_lr, p.drivers_lr[d]);
            os << p.meta.patch_id << "," << p.meta.date.to_string() << ",";
            if (r) os << *r;
            os << "," << conditional_entropy(p.i_lr, p.drivers_lr[d], o.bins) << ","
               << mean_of(p.i_lr) << "," << mean_of(p.drivers_lr[d]) << "\n";
        }
    }
    {
        std::ofstream os(stem + "_series.csv");
        os.precision(17);
        os << "date,mean_isoprene,mean_driver,pcc_across_patches\n";
        for (const auto& s : series) {
            os << s.date.to_string() << "," << s.mean_isoprene << "," << s.mean_driver
               << ",";
            if (s.pcc_across_patches) os << *s.pcc_across_patches;
            os << "\n";
        }
    }

    nlohmann::json j;
    j["driver"] = o.driver;
    j["bins"] = o.bins;
    j["patch_count"] = patches.size();
    auto sum_json = [](const DistributionSummary& s) {
        return nlohmann::json{{"mean", s.mean}, {"std", s.stddev},
                              {"median", s.median}, {"count", s.count}};
    };
    j["spatial_pcc"] = sum_json(spatial.summary);
    j["conditional_entropy_bits"] = sum_json(entropy.summary);
    nlohmann::json ser = nlohmann::json::array();
    for (const auto& s : series) {
        nlohmann::json e{{"date", s.date.to_string()},
                         {"mean_isoprene", s.mean_isoprene},
                         {"mean_driver", s.mean_driver}};
        if (s.pcc_across_patches) e["pcc_across_patches"] = *s.pcc_across_patches;
        ser.push_back(e);
    }
    j["temporal_series"] = ser;
    std::ofstream os(o.out);
    if (!os) throw data_error("cannot open for write: " + o.out);
    os << j.dump(2) << "\n";
    write_run_log(o.out, "analyze-stats", {store_index_path(in_path(o.store))},
                  {{"driver", o.driver}, {"bins", std::to_string(o.bins)}});
    std::cout << "stats report written: spatial PCC mean "
              << pp("%.4f", spatial.summary.mean) << ", H(isop|" << o.driver
              << ") mean " << pp("%.4f", entropy.summary.mean) << " bits\n";
}

// ------------------------------------------------------------------- train

struct ChannelConfig {
    std::vector<int> driver_indices;
    std::vector<double> divisors;
};

ChannelConfig parse_channels(const std::string& spec, int driver_count) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) parts.push_back(tok);
    if (parts.empty() || parts[0] != "isop")
        throw config_error("--channels must start with 'isop'");
    ChannelConfig cc;
    for (std::size_t i = 1; i < parts.size(); ++i) {
        cc.driver_indices.push_back(driver_index_of(parts[i], driver_count));
        cc.divisors.push_back(parts[i] == "lai" ? sr::kLaiDivisor : sr::kPercentDivisor);
    }
    return cc;
}

sr::TrainSample sample_with_channels(const Patch& p, const ChannelConfig& cc, int alpha) {
    Patch sub;
    sub.t_lr = p.t_lr;
    sub.t_hr = p.t_hr;
    sub.i_lr = p.i_lr;
    sub.i_hr = p.i_hr;
    for (int d : cc.driver_indices) sub.drivers_lr.push_back(p.drivers_lr[d]);
    return sr::sample_from_patch(sub, alpha, cc.divisors);
}

int alpha_of(const Patch& p) { return p.i_hr.rows() / p.i_lr.rows(); }

Patch subset_patch(const Patch& p, const ChannelConfig& cc) {
    Patch sub;
    sub.t_lr = p.t_lr;
    sub.t_hr = p.t_hr;
    sub.i_lr = p.i_lr;
    sub.i_hr = p.i_hr;
    sub.meta = p.meta;
    for (int d : cc.driver_indices) sub.drivers_lr.push_back(p.drivers_lr[d]);
    return sub;
}

// Default channel selection: the first C-1 stored drivers, in store order.
ChannelConfig default_channels(const sr::SRBackend& backend, int driver_count) {
    ChannelConfig cc;
    const int want = sr::backend_channels(backend);
    const int n = want < 0 ? driver_count : want - 1;
    if (n > driver_count)
        throw data_error("model expects more driver channels than the store provides");
    for (int d = 0; d < n; ++d) {
        cc.driver_indices.push_back(d);
        cc.divisors.push_back(d == 2 ? sr::kLaiDivisor : sr::kPercentDivisor);
    }
    return cc;
}

struct TrainOpts {
    std::string store, manifest, channels = "isop", config, out;
};

void run_train(const TrainOpts& o) {
    PatchStore store(in_path(o.store));
    auto manifest = FoldManifest::load(in_path(o.manifest));
    auto cc = parse_channels(o.channels, store.driver_count());
    sr::TrainConfig cfg;
    if (!o.config.empty()) cfg = sr::load_train_config(in_path(o.config));

    std::vector<sr::TrainSample> train_set, val_set;
    int alpha = 2;
    for (auto id : manifest.train) {
        const Patch p = store.read(id);
        alpha = alpha_of(p);
        train_set.push_back(sample_with_channels(p, cc, alpha));
    }
    for (auto id : manifest.val)
        val_set.push_back(sample_with_channels(store.read(id), cc, alpha));

    sr::ConvModel init(1 + static_cast<int>(cc.driver_indices.size()), alpha,
                       cfg.rng_seed);
    auto result = sr::train(init, train_set, val_set, cfg);
    result.model.save(o.out);
    {
        std::ofstream os(o.out + ".history.csv");
        os.precision(17);
        os << "epoch,train_mse,val_mse,lr\n";
        for (const auto& e : result.history)
            os << e.epoch << "," << e.train_mse << "," << e.val_mse << "," << e.lr << "\n";
    }
    std::vector<std::string> inputs{store_index_path(in_path(o.store)), in_path(o.manifest)};
    if (!o.config.empty()) inputs.push_back(in_path(o.config));
    write_run_log(o.out, "train", inputs,
                  {{"channels", o.channels},
                   {"seed", std::to_string(cfg.rng_seed)},
                   {"stop_reason", result.stop_reason},
                   {"best_val_mse", pp("%.17g", result.best_val_mse)}});
    std::cout << "trained " << o.channels << " model: best val MSE "
              << pp("%.6g", result.best_val_mse) << " (" << result.stop_reason << " at epoch "
              << result.stopped_epoch << ")\n";
}

// ------------------------------------------------------------------ deploy

struct DeployOpts {
    std::string model, store, ids, out, transform, channels;
};

sr::SRBackend load_backend(const std::string& model_arg, int alpha) {
    if (model_arg == "bicubic") return sr::BicubicBaseline{alpha};
    return sr::ConvModel::load(in_path(model_arg));
}

std::vector<std::int64_t> read_id_list(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw data_error("cannot open id list: " + path);
    std::vector<std::int64_t> ids;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        ids.push_back(std::stoll(line));
    }
    if (ids.empty()) throw data_error("empty id list: " + path);
    return ids;
}

void run_deploy(const DeployOpts& o) {
    PatchStore store(in_path(o.store));
    const std::string tpath =
        o.transform.empty() ? in_path(o.store) + "/transform.json" : in_path(o.transform);
    auto transform = TransformModel::load(tpath);
    auto ids = read_id_list(in_path(o.ids));
    fs::create_directories(o.out);

    for (auto id : ids) {
        const Patch p = store.read(id);
        auto backend = load_backend(o.model, alpha_of(p));
        const ChannelConfig cc = o.channels.empty()
                                     ? default_channels(backend, store.driver_count())
                                     : parse_channels(o.channels, store.driver_count());
        const auto input = sr::make_input(subset_patch(p, cc), alpha_of(p), cc.divisors);
        const Array2D est = transform.inverse(sr::super_resolve(backend, input));
        write_raw_file(o.out + "/" + std::to_string(id) + ".bin", est,
                       p.meta.extent.cell_size);
    }
    std::vector<std::string> inputs{store_index_path(in_path(o.store)),
                                    in_path(o.ids), tpath};
    if (o.model != "bicubic") inputs.push_back(in_path(o.model));
    write_run_log(o.out + "/deploy", "deploy", inputs,
                  {{"model", o.model}, {"patches", std::to_string(ids.size())}});
    std::cout << "deployed " << ids.size() << " estimates to " << o.out << "\n";
}

// ---------------------------------------------------------------- evaluate

struct EvaluateOpts {
    std::string store, manifest, model, domain = "t", out;
    std::string split = "test", channels, transform;
};

void run_evaluate(const EvaluateOpts& o) {
    PatchStore store(in_path(o.store));
    auto manifest = FoldManifest::load(in_path(o.manifest));
    const std::string tpath =
        o.transform.empty() ? in_path(o.store) + "/transform.json" : in_path(o.transform);
    auto transform = TransformModel::load(tpath);

    std::vector<std::int64_t> ids;
    if (o.split == "train") ids = manifest.train;
    else if (o.split == "val") ids = manifest.val;
    else if (o.split == "test") ids = manifest.test_standard;
    else if (o.split == "unseen-spatial") ids = manifest.test_unseen_spatial;
    else if (o.split == "unseen-climate") ids = manifest.test_unseen_climate;
    else if (o.split == "all-test") {
        ids = manifest.test_standard;
        ids.insert(ids.end(), manifest.test_unseen_spatial.begin(),
                   manifest.test_unseen_spatial.end());
        ids.insert(ids.end(), manifest.test_unseen_climate.begin(),
                   manifest.test_unseen_climate.end());
    } else
        throw config_error("unknown --split: " + o.split);
    if (ids.empty()) throw data_error("selected split is empty");

    if (o.domain != "t" && o.domain != "i" && o.domain != "both")
        throw config_error("--domain must be t, i, or both");

    MetricsReport report;
    for (auto id : ids) {
        const Patch p = store.read(id);
        const int alpha = alpha_of(p);
        auto backend = load_backend(o.model, alpha);

        const ChannelConfig cc = o.channels.empty()
                                     ? default_channels(backend, store.driver_count())
                                     : parse_channels(o.channels, store.driver_count());
        const auto input = sr::make_input(subset_patch(p, cc), alpha, cc.divisors);
        const Array2D est_t = sr::super_resolve(backend, input);

        if (o.domain == "t" || o.domain == "both")
            report.per_patch.push_back(
                evaluate_patch(id, MetricDomain::Transformed, est_t, p.t_hr));
        if (o.domain == "i" || o.domain == "both")
            report.per_patch.push_back(evaluate_patch(
                id, MetricDomain::Isoprene, transform.inverse(est_t), p.i_hr));
    }
    report.compute_aggregates();
    report.write_csv(o.out);
    std::string agg = o.out;
    if (agg.size() > 4 && agg.substr(agg.size() - 4) == ".csv")
        agg = agg.substr(0, agg.size() - 4);
    report.write_aggregate_json(agg + ".aggregate.json");

    std::vector<std::string> inputs{store_index_path(in_path(o.store)),
                                    in_path(o.manifest), tpath};
    if (o.model != "bicubic") inputs.push_back(in_path(o.model));
    write_run_log(o.out, "evaluate", inputs,
                  {{"model", o.model}, {"domain", o.domain}, {"split", o.split}});
    std::cout << "evaluated " << ids.size() << " patches: mean NMSE "
              << pp("%.4f", report.nmse.avg) << " dB, mean SSIM "
              << pp("%.4f", report.ssim.avg) << "\n";
}

// ------------------------------------------------------------------ report

struct ReportOpts {
    std::vector<std::string> evals;
    std::string baseline, out;
};

std::map<std::string, double> mean_nmse_by_domain(const MetricsReport& r) {
    std::map<std::string, std::pair<double, std::size_t>> acc;
    for (const auto& p : r.per_patch)
        if (p.nmse_db) {
            auto& [sum, n] = acc[metric_domain_name(p.domain)];
            sum += *p.nmse_db;
            ++n;
        }
    std::map<std::string, double> out;
    for (const auto& [k, v] : acc) out[k] = v.first / static_cast<double>(v.second);
    return out;
}

void run_report(const ReportOpts& o) {
    const auto base = mean_nmse_by_domain(MetricsReport::read_csv(in_path(o.baseline)));
    std::ostringstream table;
    table << "eval,domain,nmse_avg_db,baseline_nmse_avg_db,nir\n";
    table.precision(17);
    for (const auto& ev : o.evals) {
        const auto cur = mean_nmse_by_domain(MetricsReport::read_csv(in_path(ev)));
        for (const auto& [domain, nmse] : cur) {
            auto it = base.find(domain);
            if (it == base.end())
                throw data_error("baseline lacks domain '" + domain + "'");
            const double nir = nir_from_db(nmse, it->second);
            table << ev << "," << domain << "," << nmse << "," << it->second << ","
                  << (nir == 0.0 ? 0.0 : nir) << "\n";
        }
    }
    std::cout << table.str();
    if (!o.out.empty()) {
        std::ofstream os(o.out);
        if (!os) throw data_error("cannot open for write: " + o.out);
        os << table.str();
        std::vector<std::string> inputs = o.evals;
        for (auto& p : inputs) p = in_path(p);
        inputs.push_back(in_path(o.baseline));
        write_run_log(o.out, "report", inputs, {});
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Isoprene-emission super-resolution pipeline"};
    app.require_subcommand(1);
    app.set_config("--run-config", "", "TOML-style config file with flag defaults");
    app.add_option("--data-dir", g_data_dir,
                   "Base directory for relative input paths")
        ->envname("BSRK_DATA_DIR");
    app.add_option("--threads", g_threads, "Worker thread cap")
        ->check(CLI::PositiveNumber);

    ToyOpts toy;
    auto* c_toy = app.add_subcommand("make-toy", "Generate the bundled toy dataset");
    c_toy->add_option("--out", toy.out)->required();
    c_toy->add_option("--dates", toy.dates)->check(CLI::PositiveNumber);
    c_toy->add_option("--seed", toy.seed);
    c_toy->callback([&] { run_make_toy(toy); });

    PreprocessOpts pre;
    auto* c_pre = app.add_subcommand("preprocess",
                                     "Derive CL/TC percentage maps and coarsen LAI");
    c_pre->add_option("--landcover", pre.landcover)->required();
    c_pre->add_option("--out-cl", pre.out_cl)->required();
    c_pre->add_option("--out-tc", pre.out_tc)->required();
    c_pre->add_option("--cell", pre.cell);
    c_pre->add_option("--lai", pre.lai);
    c_pre->add_option("--out-lai", pre.out_lai);
    c_pre->add_option("--reference", pre.reference);
    c_pre->callback([&] { run_preprocess(pre); });

    ExtractOpts ex;
    auto* c_ex = app.add_subcommand("extract-patches", "Build the patch store");
    c_ex->add_option("--emission", ex.emission_dir)->required();
    c_ex->add_option("--cl", ex.cl)->required();
    c_ex->add_option("--tc", ex.tc)->required();
    c_ex->add_option("--climate", ex.climate)->required();
    c_ex->add_option("--out", ex.out)->required();
    c_ex->add_option("--lai", ex.lai);
    c_ex->add_option("--patch-deg", ex.patch_deg);
    c_ex->add_option("--stride-deg", ex.stride_deg);
    c_ex->add_option("--zero-thresh", ex.zero_thresh);
    c_ex->add_option("--alpha", ex.alpha)->check(CLI::Range(2, 16));
    c_ex->add_option("--n-q", ex.n_q)->check(CLI::PositiveNumber);
    c_ex->callback([&] { run_extract(ex); });

    FoldsOpts fo;
    auto* c_fo = app.add_subcommand("build-folds", "Materialize climate folds");
    c_fo->add_option("--index", fo.index)->required();
    c_fo->add_option("--spec", fo.spec)->required();
    c_fo->add_option("--out", fo.out)->required();
    c_fo->callback([&] { run_build_folds(fo); });

    FitTransformOpts ft;
    auto* c_ft = app.add_subcommand("fit-transform",
                                    "Fit the uniform transform on a train split");
    c_ft->add_option("--store", ft.store)->required();
    c_ft->add_option("--manifest", ft.manifest)->required();
    c_ft->add_option("--out", ft.out)->required();
    c_ft->add_option("--n-q", ft.n_q)->check(CLI::PositiveNumber);
    c_ft->callback([&] { run_fit_transform(ft); });

    ApplyTransformOpts at;
    auto* c_at = app.add_subcommand("apply-transform",
                                    "Rewrite stored transformed arrays");
    c_at->add_option("--store", at.store)->required();
    c_at->add_option("--transform", at.transform)->required();
    c_at->callback([&] { run_apply_transform(at); });

    StatsOpts st;
    auto* c_st = app.add_subcommand("analyze-stats",
                                    "Isoprene/driver correlation and entropy study");
    c_st->add_option("--store", st.store)->required();
    c_st->add_option("--driver", st.driver)->check(CLI::IsMember({"cl", "tc", "lai"}));
    c_st->add_option("--out", st.out)->required();
    c_st->add_option("--bins", st.bins)->check(CLI::PositiveNumber);
    c_st->callback([&] { run_analyze_stats(st); });

    TrainOpts tr;
    auto* c_tr = app.add_subcommand("train", "Train the conv SR model");
    c_tr->add_option("--store", tr.store)->required();
    c_tr->add_option("--manifest", tr.manifest)->required();
    c_tr->add_option("--channels", tr.channels);
    c_tr->add_option("--config", tr.config);
    c_tr->add_option("--out", tr.out)->required();
    c_tr->callback([&] { run_train(tr); });

    DeployOpts de;
    auto* c_de = app.add_subcommand("deploy", "Super-resolve stored patches");
    c_de->add_option("--model", de.model)->required();
    c_de->add_option("--store", de.store)->required();
    c_de->add_option("--ids", de.ids)->required();
    c_de->add_option("--out", de.out)->required();
    c_de->add_option("--transform", de.transform);
    c_de->add_option("--channels", de.channels);
    c_de->callback([&] { run_deploy(de); });

    EvaluateOpts ev;
    auto* c_ev = app.add_subcommand("evaluate", "Metric report over a fold split");
    c_ev->add_option("--store", ev.store)->required();
    c_ev->add_option("--manifest", ev.manifest)->required();
    c_ev->add_option("--model", ev.model)->required();
    c_ev->add_option("--domain", ev.domain)->check(CLI::IsMember({"t", "i", "both"}));
    c_ev->add_option("--split", ev.split)
        ->check(CLI::IsMember({"train", "val", "test", "unseen-spatial",
                               "unseen-climate", "all-test"}));
    c_ev->add_option("--channels", ev.channels);
    c_ev->add_option("--transform", ev.transform);
    c_ev->add_option("--out", ev.out)->required();
    c_ev->callback([&] { run_evaluate(ev); });

    ReportOpts re;
    auto* c_re = app.add_subcommand("report", "NIR table comparing metric reports");
    c_re->add_option("--eval", re.evals)->required();
    c_re->add_option("--baseline", re.baseline)->required();
    c_re->add_option("--out", re.out);
    c_re->callback([&] { run_report(re); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Help/version exit 0; any flag misuse is a configuration error.
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
