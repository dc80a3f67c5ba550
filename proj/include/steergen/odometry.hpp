#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SVD>

#include "steergen/geometry.hpp"
#include "steergen/kdtree.hpp"
#include "steergen/pointcloud.hpp"

namespace steergen {

struct DegenerateGeometry : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InsufficientOverlap : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OdometryConfig {
    int max_iterations = 50;
    double convergence_tol = 1e-6;     // meters, delta of mean residual between iterations
    double max_correspondence_m = 1.0; // pairs farther than this are rejected
    double voxel_size_m = 0.0;         // 0 disables downsampling
    bool use_motion_prior = true;      // seed each alignment with the previous increment

    void validate() const {
        if (max_iterations <= 0) throw std::invalid_argument("OdometryConfig: max_iterations must be > 0");
        if (!(convergence_tol > 0.0)) throw std::invalid_argument("OdometryConfig: convergence_tol must be > 0");
        if (!(max_correspondence_m > 0.0)) throw std::invalid_argument("OdometryConfig: max_correspondence_m must be > 0");
        if (voxel_size_m < 0.0) throw std::invalid_argument("OdometryConfig: voxel_size_m must be >= 0");
    }
};

/// Per-frame vehicle poses, all expressed relative to the first frame.
struct TrajectoryEstimate {
    std::vector<Pose> poses;        // poses[0] is the identity
    std::vector<double> timestamps; // seconds
    std::vector<double> residuals;  // meters, scan-matching residual per frame

    std::size_t size() const { return poses.size(); }
};

inline constexpr std::size_t kMinCorrespondences = 10;

/// Least-squares rigid transform T minimizing sum ||T(src_i) - tgt_i||^2
/// over paired points (Kabsch, SVD of the cross-covariance). The returned
/// rotation is always proper: a reflection in the SVD solution is corrected
/// by flipping the smallest singular direction. Throws DegenerateGeometry
/// for fewer than 3 pairs or collinear/coincident geometry.
inline Pose best_fit_transform(const std::vector<Eigen::Vector3d>& source_pts,
                               const std::vector<Eigen::Vector3d>& target_pts) {
    if (source_pts.size() != target_pts.size())
        throw std::invalid_argument("best_fit_transform: size mismatch");
    const std::size_t n = source_pts.size();
    if (n < 3) throw DegenerateGeometry("best_fit_transform: need at least 3 pairs");

    Eigen::Vector3d src_mean = Eigen::Vector3d::Zero();
    Eigen::Vector3d tgt_mean = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
        src_mean += source_pts[i];
        tgt_mean += target_pts[i];
    }
    src_mean /= static_cast<double>(n);
    tgt_mean /= static_cast<double>(n);

    Eigen::Matrix3d cross = Eigen::Matrix3d::Zero();
    double src_spread = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Vector3d s = source_pts[i] - src_mean;
        const Eigen::Vector3d t = target_pts[i] - tgt_mean;
        cross += s * t.transpose();
        src_spread += s.squaredNorm();
    }
    if (src_spread < 1e-18) throw DegenerateGeometry("best_fit_transform: coincident points");

    Eigen::JacobiSVD<Eigen::Matrix3d> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Vector3d sigma = svd.singularValues();
    // rank <= 1 cross-covariance: rotation about the line is unobservable
    if (sigma(1) <= 1e-9 * sigma(0) || sigma(0) <= 0.0)
        throw DegenerateGeometry("best_fit_transform: collinear geometry");

    Eigen::Matrix3d u = svd.matrixU();
    Eigen::Matrix3d v = svd.matrixV();
    if ((v * u.transpose()).determinant() < 0.0) v.col(2) *= -1.0;
    const Eigen::Matrix3d r = v * u.transpose();
    return Pose(r, tgt_mean - r * src_mean);
}

struct IcpResult {
    Pose transform;       // maps source frame into target frame
    double residual = 0.0;  // mean distance over accepted correspondences, final iterate
    int iterations = 0;
    bool converged = false; // false means the iteration cap was hit
    std::vector<double> residual_history;
};

/// Point-to-point ICP between two scans. Alternates nearest-neighbor
/// matching against a k-d tree of the target with closed-form rigid
/// re-estimation, until the mean residual stops improving by more than
/// convergence_tol or max_iterations is reached. Throws InsufficientOverlap
/// when fewer than 10 correspondences survive the distance gate.
inline IcpResult icp_align(const PointCloud& source, const PointCloud& target,
                           const OdometryConfig& cfg, const Pose& init = Pose{}) {
    cfg.validate();
    const PointCloud src = voxel_downsample(source, cfg.voxel_size_m);
    const PointCloud tgt = voxel_downsample(target, cfg.voxel_size_m);
    if (src.empty() || tgt.empty())
        throw std::invalid_argument("icp_align: empty cloud after downsampling");

    const KdTree tree(tgt.points);
    const double gate_sq = cfg.max_correspondence_m * cfg.max_correspondence_m;

    IcpResult result;
    result.transform = init;
    double prev_residual = std::numeric_limits<double>::infinity();

    std::vector<Eigen::Vector3d> matched_src;
    std::vector<Eigen::Vector3d> matched_tgt;
    matched_src.reserve(src.size());
    matched_tgt.reserve(src.size());

    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        matched_src.clear();
        matched_tgt.clear();
        for (const auto& p : src.points) {
            const Eigen::Vector3d q = result.transform.apply(p);
            const KdTree::Neighbor nn = tree.nearest(q);
            if (nn.dist_sq <= gate_sq) {
                matched_src.push_back(q);
                matched_tgt.push_back(tgt.points[nn.index]);
            }
        }
        if (matched_src.size() < kMinCorrespondences)
            throw InsufficientOverlap("icp_align: fewer than " + std::to_string(kMinCorrespondences) +
                                      " correspondences (got " + std::to_string(matched_src.size()) + ")");

        const Pose delta = best_fit_transform(matched_src, matched_tgt);
        result.transform = compose(delta, result.transform);
        result.iterations = iter + 1;

        double dist_sum = 0.0;
        for (std::size_t i = 0; i < matched_src.size(); ++i)
            dist_sum += (delta.apply(matched_src[i]) - matched_tgt[i]).norm();
        result.residual = dist_sum / static_cast<double>(matched_src.size());
        result.residual_history.push_back(result.residual);

        if (std::abs(prev_residual - result.residual) < cfg.convergence_tol) {
            result.converged = true;
            break;
        }
        prev_residual = result.residual;
    }
    return result;
}

/// Chain scan-to-scan alignments into absolute poses relative to frame 0.
/// poses[i] = poses[i-1] * increment_i, where increment_i aligns scan i to
/// scan i-1; the previous increment seeds the next alignment when the
/// constant-velocity prior is enabled. Timestamps default to the frame index.
inline TrajectoryEstimate estimate_trajectory(const std::vector<PointCloud>& scans,
                                              const OdometryConfig& cfg,
                                              const std::vector<double>& timestamps = {}) {
    if (scans.size() < 2)
        throw std::invalid_argument("estimate_trajectory: need at least 2 scans");
    if (!timestamps.empty() && timestamps.size() != scans.size())
        throw std::invalid_argument("estimate_trajectory: timestamp count mismatch");

    TrajectoryEstimate traj;
    traj.poses.reserve(scans.size());
    traj.residuals.reserve(scans.size());
    traj.poses.push_back(Pose::identity());
    traj.residuals.push_back(0.0);

    Pose prior = Pose::identity();
    for (std::size_t i = 1; i < scans.size(); ++i) {
        IcpResult inc;
        try {
            inc = icp_align(scans[i], scans[i - 1], cfg, cfg.use_motion_prior ? prior : Pose{});
        } catch (const InsufficientOverlap& e) {
            throw InsufficientOverlap("frame " + std::to_string(i) + ": " + e.what());
        }
        traj.poses.push_back(compose(traj.poses[i - 1], inc.transform));
        traj.residuals.push_back(inc.residual);
        prior = inc.transform;
    }

    if (timestamps.empty()) {
        traj.timestamps.resize(scans.size());
        for (std::size_t i = 0; i < scans.size(); ++i) traj.timestamps[i] = static_cast<double>(i);
    } else {
        traj.timestamps = timestamps;
    }
    return traj;
}

}  // namespace steergen
