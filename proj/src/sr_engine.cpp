#include "bsrk/sr/engine.hpp"

#include <algorithm>

#include "bsrk/error.hpp"
#include "bsrk/resample.hpp"

namespace bsrk::sr {

namespace {

Array2D clamp01(Array2D a) {
    for (double& x : a.values())
        if (!Array2D::is_missing(x)) x = std::clamp(x, 0.0, 1.0);
    return a;
}

} // namespace

int backend_alpha(const SRBackend& b) {
    if (const auto* bb = std::get_if<BicubicBaseline>(&b)) return bb->alpha;
    return std::get<ConvModel>(b).alpha();
}

int backend_channels(const SRBackend& b) {
    if (std::holds_alternative<BicubicBaseline>(b)) return -1;
    return std::get<ConvModel>(b).channels();
}

Array2D super_resolve(const SRBackend& backend, const SRInput& input) {
    if (backend_alpha(backend) != input.alpha)
        throw config_error("super_resolve: backend/input alpha mismatch");

    if (std::holds_alternative<BicubicBaseline>(backend)) {
        Array2D lr0(input.channels.h, input.channels.w);
        for (int r = 0; r < lr0.rows(); ++r)
            for (int c = 0; c < lr0.cols(); ++c)
                lr0.at(r, c) = input.channels.at(0, r, c);
        return clamp01(upsample_bicubic_array(lr0, input.alpha));
    }

    const ConvModel& model = std::get<ConvModel>(backend);
    if (model.channels() != input.channels.c)
        throw data_error("super_resolve: channel count mismatch with trained model");
    return clamp01(model.forward(input.channels));
}

SRInput make_input(const Patch& patch, int alpha,
                   const std::vector<double>& driver_divisors) {
    SRInput in;
    in.alpha = alpha;
    const int h = patch.t_lr.rows(), w = patch.t_lr.cols();
    in.channels = Tensor3(1 + static_cast<int>(patch.drivers_lr.size()), h, w);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            in.channels.at(0, r, c) = patch.t_lr.at(r, c);
    if (!driver_divisors.empty() && driver_divisors.size() != patch.drivers_lr.size())
        throw config_error("make_input: driver divisor count mismatch");
    for (std::size_t d = 0; d < patch.drivers_lr.size(); ++d) {
        const Array2D& drv = patch.drivers_lr[d];
        if (drv.rows() != h || drv.cols() != w)
            throw data_error("make_input: driver shape mismatch");
        const double divisor =
            driver_divisors.empty() ? kPercentDivisor : driver_divisors[d];
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c) {
                double x = drv.at(r, c);
                if (!Array2D::is_missing(x)) x = std::clamp(x / divisor, 0.0, 1.0);
                in.channels.at(1 + static_cast<int>(d), r, c) = x;
            }
    }
    return in;
}

Array2D deploy(const SRBackend& backend, const TransformModel& transform,
               const Patch& patch) {
    SRInput in = make_input(patch, backend_alpha(backend));
    return transform.inverse(super_resolve(backend, in));
}

} // namespace bsrk::sr
