#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bsrk/sr/engine.hpp"
#include "bsrk/sr/model.hpp"

namespace bsrk::sr {

struct TrainConfig {
    double beta1 = 0.9;
    double beta2 = 0.99;
    double lr0 = 1e-4;
    double lr_min = 1e-7;
    int lr_patience = 10;      // stagnant epochs before dividing lr by 10
    int stop_patience = 50;    // stagnant epochs before early stop
    int max_epochs = 500;
    int batch_size = 32;
    std::uint64_t rng_seed = 0;

    void validate() const;
};

/// One training sample: stacked input plus the transformed HR target.
struct TrainSample {
    Tensor3 input;  // (C, H, W)
    Array2D target; // (aH, aW), T_HR
};

struct EpochRecord {
    int epoch = 0;
    double train_mse = 0.0;
    double val_mse = 0.0;
    double lr = 0.0;
};

struct TrainResult {
    ConvModel model; // weights with the best validation MSE
    std::vector<EpochRecord> history;
    double best_val_mse = 0.0;
    int stopped_epoch = 0;
    std::string stop_reason; // "max_epochs" | "early_stop" | "lr_floor_stop"
};

/// Minimizes MSE(output, target) with Adam and the plateau schedule.
/// Deterministic for a fixed cfg.rng_seed: samples are shuffled with the
/// counter RNG and batches accumulated in a fixed order, single-threaded.
/// Throws a numeric error on NaN loss.
TrainResult train(const ConvModel& initial, const std::vector<TrainSample>& train_set,
                  const std::vector<TrainSample>& val_set, const TrainConfig& cfg);

double mse_of(const ConvModel& model, const std::vector<TrainSample>& set);

TrainSample sample_from_patch(const Patch& patch, int alpha = 2,
                              const std::vector<double>& driver_divisors = {});

TrainConfig load_train_config(const std::string& path); // JSON, all keys optional

} // namespace bsrk::sr
