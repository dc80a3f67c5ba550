#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include "steergen/geometry.hpp"

namespace steergen {

/// Vehicle domain knowledge needed to turn a pose pair into a steering angle.
struct VehicleParams {
    double wheelbase_m = 2.994;     // front-to-rear axle distance
    double steering_ratio = 15.8;   // steering-wheel angle per front-wheel angle
    double min_motion_m = 0.01;     // below this displacement a frame is stationary

    void validate() const {
        if (!(wheelbase_m > 0.0)) throw std::invalid_argument("VehicleParams: wheelbase_m must be > 0");
        if (!(steering_ratio > 0.0)) throw std::invalid_argument("VehicleParams: steering_ratio must be > 0");
        if (!(min_motion_m >= 0.0)) throw std::invalid_argument("VehicleParams: min_motion_m must be >= 0");
    }
};

struct StationaryMotion : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RadiusTooSmall : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One steering estimate. Sign convention: positive = right turn.
/// radius_m uses +/-infinity as the straight-driving sentinel.
struct SteeringEstimate {
    enum class Status { ok, stationary, radius_too_small };

    double radius_m = std::numeric_limits<double>::infinity();
    double wheel_angle_rad = 0.0;
    double steering_angle_rad = 0.0;
    bool valid = false;
    Status status = Status::ok;
};

// Below this |d_x| the motion is treated as straight (infinite radius).
inline constexpr double kStraightEps = 1e-9;

enum class RadiusFormula {
    derived,  // X-intercept of the line perpendicular to d through t (default)
    printed,  // transposed-slope variant, kept for comparison only
};

/// Signed turning radius from a relative pose and its forward direction.
/// Geometry: the instantaneous turn center is the X-intercept of the line
/// perpendicular to d that passes through t (Z dropped). Positive radius =
/// right turn, negative = left; +/-inf for straight motion.
/// Throws StationaryMotion when the planar displacement is under min_motion_m.
inline double turning_radius(const Pose& rel, const Direction3& d, double min_motion_m = 0.0,
                             RadiusFormula formula = RadiusFormula::derived) {
    const double tx = rel.translation.x();
    const double ty = rel.translation.y();
    if (std::hypot(tx, ty) < min_motion_m)
        throw StationaryMotion("turning_radius: displacement below stationarity threshold");

    const double dx = d.x();
    const double dy = d.y();
    if (formula == RadiusFormula::printed) return ty * (dx / dy) + tx;

    if (std::abs(dx) < kStraightEps)
        return dx < 0.0 ? -std::numeric_limits<double>::infinity()
                        : std::numeric_limits<double>::infinity();
    return ty * (dy / dx) + tx;
}

/// Ackermann front-wheel angle: wheelbase is the opposite side, |radius| the
/// hypotenuse, so delta = arcsin(l_wb / r) with the sign of r. Zero for the
/// infinite-radius sentinel. Throws RadiusTooSmall when |r| < wheelbase
/// (arcsin argument > 1, a physically impossible turn).
inline double wheel_angle(double radius_m, const VehicleParams& params) {
    if (std::isinf(radius_m)) return 0.0;
    if (std::abs(radius_m) < params.wheelbase_m)
        throw RadiusTooSmall("wheel_angle: |radius| below wheelbase");
    return std::asin(params.wheelbase_m / radius_m);
}

/// Steering-wheel angle from the front-wheel angle. Simulators that command
/// wheel angles directly use steering_ratio = 1.
inline double steering_angle(double delta_rad, const VehicleParams& params) {
    return params.steering_ratio * delta_rad;
}

/// Full pose-pair predictor: relative pose -> forward direction -> turning
/// radius -> wheel angle -> steering angle. Never throws; stationary frames
/// and sub-wheelbase radii come back with valid=false and best-effort fields
/// (straight for stationary, clamped +/-pi/2 wheel angle for tiny radii).
inline SteeringEstimate pseudo_label(const Pose& current, const Pose& previous,
                                     const VehicleParams& params) {
    const Pose rel = relative_pose(current, previous);
    const Direction3 d = forward_direction(rel);

    SteeringEstimate est;
    const double tx = rel.translation.x();
    const double ty = rel.translation.y();
    if (std::hypot(tx, ty) < params.min_motion_m) {
        est.status = SteeringEstimate::Status::stationary;
        est.valid = false;
        return est;
    }

    est.radius_m = turning_radius(rel, d);
    if (!std::isinf(est.radius_m) && std::abs(est.radius_m) < params.wheelbase_m) {
        est.status = SteeringEstimate::Status::radius_too_small;
        est.valid = false;
        est.wheel_angle_rad = std::copysign(M_PI / 2.0, est.radius_m);
    } else {
        est.status = SteeringEstimate::Status::ok;
        est.valid = true;
        est.wheel_angle_rad = wheel_angle(est.radius_m, params);
    }
    est.steering_angle_rad = steering_angle(est.wheel_angle_rad, params);
    return est;
}

}  // namespace steergen
