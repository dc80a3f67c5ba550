#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "steergen/odometry.hpp"
#include "steergen/pipeline_types.hpp"
#include "steergen/steering.hpp"

namespace steergen {

struct TrajectoryTooShort : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoOverlap : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Pose-pair pseudo-labels over a trajectory with temporal interval k: the
/// record for frame i (i >= k) compares poses i and i-k, so the output has
/// trajectory-length minus k records. Invalid frames (stationary, impossible
/// radius) carry the previous valid label forward and stay flagged invalid,
/// keeping frame alignment for downstream consumers.
inline std::vector<PseudoLabelRecord> generate_pseudo_labels(const TrajectoryEstimate& trajectory,
                                                             const VehicleParams& params,
                                                             std::size_t k,
                                                             bool flip_steering_sign = false) {
    if (k == 0) throw std::invalid_argument("generate_pseudo_labels: k must be >= 1");
    if (trajectory.size() <= k)
        throw TrajectoryTooShort("generate_pseudo_labels: need more than " + std::to_string(k) +
                                 " poses, got " + std::to_string(trajectory.size()));
    params.validate();

    std::vector<PseudoLabelRecord> records;
    records.reserve(trajectory.size() - k);
    const PseudoLabelRecord* last_valid = nullptr;
    for (std::size_t i = k; i < trajectory.size(); ++i) {
        const SteeringEstimate est = pseudo_label(trajectory.poses[i], trajectory.poses[i - k], params);
        PseudoLabelRecord rec;
        rec.frame = static_cast<long>(i);
        rec.timestamp = trajectory.timestamps[i];
        rec.source = LabelSource::proposed;
        rec.valid = est.valid;
        if (est.valid) {
            rec.radius_m = est.radius_m;
            rec.wheel_angle_rad = est.wheel_angle_rad;
            rec.steering_pred_rad = est.steering_angle_rad;
        } else if (last_valid != nullptr) {
            rec.radius_m = last_valid->radius_m;
            rec.wheel_angle_rad = last_valid->wheel_angle_rad;
            rec.steering_pred_rad = last_valid->steering_pred_rad;
        } else {
            rec.radius_m = est.radius_m;
            rec.wheel_angle_rad = est.wheel_angle_rad;
            rec.steering_pred_rad = est.steering_angle_rad;
        }
        if (flip_steering_sign) {
            rec.radius_m = -rec.radius_m;
            rec.wheel_angle_rad = -rec.wheel_angle_rad;
            rec.steering_pred_rad = -rec.steering_pred_rad;
        }
        records.push_back(rec);
        if (records.back().valid) last_valid = &records.back();
    }
    return records;
}

struct PidGains {
    double kp = 1.25;
    double ki = 0.1;
    double kd = 0.3;
    double integral_clamp = 5.0;
    double output_clamp_rad = 8.0;

    void validate() const {
        if (!(output_clamp_rad > 0.0)) throw std::invalid_argument("PidGains: output_clamp_rad must be > 0");
    }
};

/// Baseline pseudo-label predictor: a discrete PID on the bearing from each
/// past pose i-k toward the waypoint at pose i (bearing of the relative
/// translation in the i-k body frame, positive to the right). Output is the
/// clamped controller response, tagged source=pid.
inline std::vector<PseudoLabelRecord> pid_baseline_labels(const TrajectoryEstimate& trajectory,
                                                          const PidGains& gains, std::size_t k) {
    if (k == 0) throw std::invalid_argument("pid_baseline_labels: k must be >= 1");
    if (trajectory.size() <= k)
        throw TrajectoryTooShort("pid_baseline_labels: need more than " + std::to_string(k) +
                                 " poses, got " + std::to_string(trajectory.size()));
    gains.validate();

    std::vector<PseudoLabelRecord> records;
    records.reserve(trajectory.size() - k);
    double integral = 0.0;
    double prev_error = 0.0;
    bool have_prev = false;
    for (std::size_t i = k; i < trajectory.size(); ++i) {
        const Pose rel = relative_pose(trajectory.poses[i], trajectory.poses[i - k]);
        const double bearing = std::atan2(rel.translation.x(), rel.translation.y());

        const double dt = i >= 1 && trajectory.timestamps[i] > trajectory.timestamps[i - 1]
                              ? trajectory.timestamps[i] - trajectory.timestamps[i - 1]
                              : 1.0;
        integral = std::clamp(integral + bearing * dt, -gains.integral_clamp, gains.integral_clamp);
        const double derivative = have_prev ? (bearing - prev_error) / dt : 0.0;
        prev_error = bearing;
        have_prev = true;

        const double out = gains.kp * bearing + gains.ki * integral + gains.kd * derivative;

        PseudoLabelRecord rec;
        rec.frame = static_cast<long>(i);
        rec.timestamp = trajectory.timestamps[i];
        rec.steering_pred_rad = std::clamp(out, -gains.output_clamp_rad, gains.output_clamp_rad);
        rec.wheel_angle_rad = 0.0;
        rec.radius_m = std::numeric_limits<double>::infinity();
        rec.valid = true;
        rec.source = LabelSource::pid;
        records.push_back(rec);
    }
    return records;
}

/// Open-loop evaluation report.
struct EvalReport {
    double mse = 0.0;       // mean squared steering error, radians^2, valid frames only
    long n_frames = 0;      // compared (valid) frames
    long n_invalid = 0;     // records skipped for validity
    struct Bin {
        double abs_truth_lo = 0.0;  // |truth| range covered by this bin
        double abs_truth_hi = 0.0;
        double mse = 0.0;
        long n = 0;
    };
    std::vector<Bin> bins;  // breakdown by |ground-truth steering| quartile
};

/// MSE between predicted and ground-truth steering over frames present in
/// both inputs; invalid records are excluded and counted. Throws NoOverlap
/// when no valid comparison exists.
inline EvalReport evaluate_mse(const std::vector<PseudoLabelRecord>& predictions,
                               const std::vector<std::pair<long, double>>& truth) {
    std::unordered_map<long, double> truth_by_frame;
    truth_by_frame.reserve(truth.size());
    for (const auto& [frame, value] : truth) truth_by_frame.emplace(frame, value);

    EvalReport report;
    std::vector<std::pair<double, double>> compared;  // (|truth|, squared error)
    double sq_sum = 0.0;
    for (const auto& rec : predictions) {
        const auto it = truth_by_frame.find(rec.frame);
        if (it == truth_by_frame.end()) continue;
        if (!rec.valid) {
            ++report.n_invalid;
            continue;
        }
        const double err = rec.steering_pred_rad - it->second;
        sq_sum += err * err;
        compared.emplace_back(std::abs(it->second), err * err);
    }
    if (compared.empty()) throw NoOverlap("evaluate_mse: no comparable valid frames");

    report.n_frames = static_cast<long>(compared.size());
    report.mse = sq_sum / static_cast<double>(compared.size());

    std::sort(compared.begin(), compared.end());
    const std::size_t n = compared.size();
    const std::size_t n_bins = std::min<std::size_t>(4, n);
    for (std::size_t b = 0; b < n_bins; ++b) {
        const std::size_t lo = n * b / n_bins;
        const std::size_t hi = n * (b + 1) / n_bins;
        EvalReport::Bin bin;
        bin.abs_truth_lo = compared[lo].first;
        bin.abs_truth_hi = compared[hi - 1].first;
        bin.n = static_cast<long>(hi - lo);
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += compared[i].second;
        bin.mse = s / static_cast<double>(hi - lo);
        report.bins.push_back(bin);
    }
    return report;
}

}  // namespace steergen
