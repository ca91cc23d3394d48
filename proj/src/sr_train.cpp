#include "bsrk/sr/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "bsrk/error.hpp"
#include "bsrk/rng.hpp"

namespace bsrk::sr {

void TrainConfig::validate() const {
    if (lr_min > lr0) throw config_error("train config: lr_min > lr0");
    if (lr_patience <= 0 || stop_patience <= 0 || max_epochs <= 0 || batch_size <= 0)
        throw config_error("train config: counts must be positive");
}

double mse_of(const ConvModel& model, const std::vector<TrainSample>& set) {
    if (set.empty()) throw data_error("mse_of: empty sample set");
    double acc = 0.0;
    std::size_t n = 0;
    for (const auto& s : set) {
        const Array2D out = model.forward(s.input);
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double d = out.values()[i] - s.target.values()[i];
            acc += d * d;
        }
        n += out.size();
    }
    return acc / static_cast<double>(n);
}

TrainSample sample_from_patch(const Patch& patch, int alpha,
                              const std::vector<double>& driver_divisors) {
    TrainSample s;
    s.input = make_input(patch, alpha, driver_divisors).channels;
    s.target = patch.t_hr;
    return s;
}

TrainResult train(const ConvModel& initial, const std::vector<TrainSample>& train_set,
                  const std::vector<TrainSample>& val_set, const TrainConfig& cfg) {
    cfg.validate();
    if (train_set.empty() || val_set.empty())
        throw data_error("train: empty train or validation set");

    ConvModel model = initial;
    std::vector<double> params = model.parameters();
    const std::size_t np = params.size();
    std::vector<double> m(np, 0.0), v(np, 0.0), grad(np, 0.0);

    CounterRng rng(cfg.rng_seed);
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);

    TrainResult result;
    double lr = cfg.lr0;
    double best_val = std::numeric_limits<double>::infinity();
    std::vector<double> best_params = params;
    int stagnant = 0, since_decay = 0;
    std::size_t adam_t = 0;

    ConvModel::Workspace ws;
    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        rng.shuffle(order);

        double epoch_loss = 0.0;
        std::size_t epoch_terms = 0;
        for (std::size_t b0 = 0; b0 < order.size(); b0 += cfg.batch_size) {
            const std::size_t b1 = std::min(order.size(), b0 + cfg.batch_size);
            std::fill(grad.begin(), grad.end(), 0.0);
            double batch_loss = 0.0;
            std::size_t batch_terms = 0;

            for (std::size_t k = b0; k < b1; ++k) {
                const TrainSample& s = train_set[order[k]];
                model.forward(s.input, ws);
                Array2D d_out(ws.output.rows(), ws.output.cols());
                for (std::size_t i = 0; i < ws.output.size(); ++i) {
                    const double d = ws.output.values()[i] - s.target.values()[i];
                    batch_loss += d * d;
                    d_out.values()[i] = 2.0 * d;
                }
                batch_terms += ws.output.size();
                model.backward(ws, d_out, grad);
            }

            if (!std::isfinite(batch_loss))
                throw numeric_error("train: NaN loss at epoch " + std::to_string(epoch));

            // Mean gradient over the batch (loss is mean squared error).
            const double scale = 1.0 / static_cast<double>(batch_terms);
            ++adam_t;
            const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(adam_t));
            const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(adam_t));
            for (std::size_t i = 0; i < np; ++i) {
                const double g = grad[i] * scale;
                m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
                v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
                params[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + 1e-8);
            }
            model.set_parameters(params);

            epoch_loss += batch_loss;
            epoch_terms += batch_terms;
        }

        const double train_mse = epoch_loss / static_cast<double>(epoch_terms);
        const double val_mse = mse_of(model, val_set);
        if (!std::isfinite(val_mse))
            throw numeric_error("train: NaN validation loss at epoch " + std::to_string(epoch));
        result.history.push_back({epoch, train_mse, val_mse, lr});
        result.stopped_epoch = epoch;

        if (val_mse < best_val) {
            best_val = val_mse;
            best_params = params;
            stagnant = 0;
            since_decay = 0;
        } else {
            ++stagnant;
            ++since_decay;
        }

        if (stagnant >= cfg.stop_patience) {
            result.stop_reason = "early_stop";
            break;
        }
        if (since_decay >= cfg.lr_patience) {
            if (lr / 10.0 >= cfg.lr_min) {
                lr /= 10.0;
                since_decay = 0;
            }
        }
    }
    if (result.stop_reason.empty()) result.stop_reason = "max_epochs";

    model.set_parameters(best_params);
    result.model = std::move(model);
    result.best_val_mse = best_val;
    return result;
}

TrainConfig load_train_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw config_error("cannot open train config: " + path);
    nlohmann::json j;
    is >> j;
    TrainConfig c;
    c.beta1 = j.value("beta1", c.beta1);
    c.beta2 = j.value("beta2", c.beta2);
    c.lr0 = j.value("lr0", c.lr0);
    c.lr_min = j.value("lr_min", c.lr_min);
    c.lr_patience = j.value("lr_patience", c.lr_patience);
    c.stop_patience = j.value("stop_patience", c.stop_patience);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.rng_seed = j.value("rng_seed", c.rng_seed);
    c.validate();
    return c;
}

} // namespace bsrk::sr
