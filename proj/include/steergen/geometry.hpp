#pragma once

#include <cstdint>
#include <stdexcept>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SVD>

namespace steergen {

// Vehicle coordinate convention used everywhere in this library:
// X right, Y forward, Z up. Adapters must convert into this frame.

inline double orthonormality_residual(const Eigen::Matrix3d& r) {
    return ((r.transpose() * r) - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
}

// Nearest proper rotation via the polar factor of the SVD.
inline Eigen::Matrix3d project_to_rotation(const Eigen::Matrix3d& m) {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d u = svd.matrixU();
    const Eigen::Matrix3d v = svd.matrixV();
    if ((u * v.transpose()).determinant() < 0.0) u.col(2) *= -1.0;
    return u * v.transpose();
}

/// Rigid transform (rotation + translation). Rotation is stored as a 3x3
/// matrix; quaternions are accepted at I/O boundaries and converted once.
/// Orthonormality is maintained to 1e-9: constructors project drifting
/// inputs, and long composition chains are re-orthonormalized every 100
/// compositions (or earlier if the residual exceeds the bound).
struct Pose {
    static constexpr double kOrthoTol = 1e-9;
    static constexpr std::uint32_t kRenormalizeEvery = 100;

    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();
    std::uint32_t compose_depth = 0;  // compositions since last re-orthonormalization

    Pose() = default;

    Pose(const Eigen::Matrix3d& r, const Eigen::Vector3d& t)
        : rotation(r), translation(t) {
        if (rotation.determinant() < 0.0)
            throw std::invalid_argument("Pose: rotation has negative determinant (reflection)");
        if (orthonormality_residual(rotation) > kOrthoTol)
            rotation = project_to_rotation(rotation);
    }

    static Pose identity() { return Pose{}; }

    static Pose from_quaternion(const Eigen::Quaterniond& q, const Eigen::Vector3d& t) {
        return Pose(q.normalized().toRotationMatrix(), t);
    }

    // Yaw about +Z, right-handed (positive = counterclockwise viewed from above).
    static Pose from_yaw(double yaw_rad, const Eigen::Vector3d& t = Eigen::Vector3d::Zero()) {
        return Pose(Eigen::AngleAxisd(yaw_rad, Eigen::Vector3d::UnitZ()).toRotationMatrix(), t);
    }

    Eigen::Quaterniond quaternion() const { return Eigen::Quaterniond(rotation); }

    Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }

    Pose normalized() const {
        Pose out;
        out.rotation = project_to_rotation(rotation);
        out.translation = translation;
        return out;
    }
};

/// result = a * b (homogeneous-transform product).
inline Pose compose(const Pose& a, const Pose& b) {
    Pose out;
    out.rotation = a.rotation * b.rotation;
    out.translation = a.rotation * b.translation + a.translation;
    out.compose_depth = std::max(a.compose_depth, b.compose_depth) + 1;
    if (out.compose_depth >= Pose::kRenormalizeEvery ||
        orthonormality_residual(out.rotation) > Pose::kOrthoTol) {
        out.rotation = project_to_rotation(out.rotation);
        out.compose_depth = 0;
    }
    return out;
}

/// p^-1 = [R^T, -R^T t]
inline Pose inverse(const Pose& p) {
    Pose out;
    out.rotation = p.rotation.transpose();
    out.translation = -(p.rotation.transpose() * p.translation);
    out.compose_depth = p.compose_depth;
    return out;
}

/// Pose of `current` expressed in the body frame of `previous`; both inputs
/// must share one reference frame. R = Rp^-1 * Rc, t = Rp^-1 * (tc - tp):
/// the translation is the current position seen from the previous pose,
/// which is the frame the downstream turning-radius geometry lives in.
/// previous * relative_pose(current, previous) recovers current.
inline Pose relative_pose(const Pose& current, const Pose& previous) {
    return compose(inverse(previous), current);
}

/// Unit vector in the vehicle frame (X right, Y forward, Z up).
struct Direction3 {
    static constexpr double kUnitTol = 1e-9;

    Eigen::Vector3d v = Eigen::Vector3d::UnitY();

    Direction3() = default;

    explicit Direction3(const Eigen::Vector3d& d) : v(d) {
        const double n = v.norm();
        if (n == 0.0) throw std::invalid_argument("Direction3: zero vector");
        if (std::abs(n - 1.0) > kUnitTol) v /= n;
    }

    double x() const { return v.x(); }
    double y() const { return v.y(); }
    double z() const { return v.z(); }
};

/// Heading of the vehicle after a relative motion: the rotated unit-Y axis.
/// The Z component is carried in the type but ignored by the planar steering
/// math downstream.
inline Direction3 forward_direction(const Pose& rel) {
    return Direction3(rel.rotation * Eigen::Vector3d::UnitY());
}

}  // namespace steergen
