#pragma once

#include <optional>
#include <variant>

#include "bsrk/patchset.hpp"
#include "bsrk/sr/model.hpp"
#include "bsrk/transform.hpp"

namespace bsrk::sr {

/// Stacked network input: channel 0 is T_LR, channels 1..D the drivers
/// rescaled to [0,1].
struct SRInput {
    Tensor3 channels;
    int alpha = 2;
};

struct BicubicBaseline {
    int alpha = 2;
};

using SRBackend = std::variant<BicubicBaseline, ConvModel>;

int backend_alpha(const SRBackend& b);
int backend_channels(const SRBackend& b); // baseline accepts any C

/// N(.): bicubic upsample of channel 0 for the baseline, conv forward pass
/// otherwise. Output is clamped to [0,1] in both cases.
Array2D super_resolve(const SRBackend& backend, const SRInput& input);

/// Builds the stacked input from a stored patch. Each driver channel is
/// divided by its divisor and clamped to [0,1]; an empty divisor list means
/// all drivers are percentages (divisor 100). LAI channels use
/// kLaiDivisor, the inventory ceiling.
inline constexpr double kPercentDivisor = 100.0;
inline constexpr double kLaiDivisor = 7.2;
SRInput make_input(const Patch& patch, int alpha = 2,
                   const std::vector<double>& driver_divisors = {});

/// Full deployment path: I_HR_hat = T^-1(N({T_LR, drivers})).
Array2D deploy(const SRBackend& backend, const TransformModel& transform,
               const Patch& patch);

} // namespace bsrk::sr
