#pragma once

#include <limits>

namespace steergen {

enum class LabelSource { proposed, pid };

/// One pseudo-label row, as serialized to the labels CSV.
struct PseudoLabelRecord {
    long frame = 0;
    double timestamp = 0.0;
    double steering_pred_rad = 0.0;
    double wheel_angle_rad = 0.0;
    double radius_m = std::numeric_limits<double>::infinity();
    bool valid = false;
    LabelSource source = LabelSource::proposed;
};

}  // namespace steergen
