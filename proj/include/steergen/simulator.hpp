#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "steergen/geometry.hpp"
#include "steergen/pointcloud.hpp"
#include "steergen/steering.hpp"

namespace steergen {

// Wall segment in the ground plane; rendered as an infinitely tall surface
// for the planar raycaster.
struct WallSegment {
    Eigen::Vector2d a;
    Eigen::Vector2d b;
};

// Point landmark: a thin vertical pillar with a small footprint radius so
// rays can actually hit it.
struct Pillar {
    Eigen::Vector2d center;
    double radius = 0.15;
};

struct World {
    std::vector<WallSegment> walls;
    std::vector<Pillar> pillars;
    std::uint64_t seed = 0;
    double extent_m = 0.0;

    std::size_t obstacle_count() const { return walls.size() + pillars.size(); }
};

struct LidarConfig {
    int beam_count = 720;
    double max_range_m = 40.0;
    double azimuth_fov_rad = 2.0 * M_PI;
    double range_noise_sigma_m = 0.0;

    void validate() const {
        if (beam_count <= 0) throw std::invalid_argument("LidarConfig: beam_count must be > 0");
        if (!(max_range_m > 0.0)) throw std::invalid_argument("LidarConfig: max_range_m must be > 0");
        if (!(azimuth_fov_rad > 0.0)) throw std::invalid_argument("LidarConfig: azimuth_fov_rad must be > 0");
        if (range_noise_sigma_m < 0.0) throw std::invalid_argument("LidarConfig: range_noise_sigma_m must be >= 0");
    }
};

enum class KinematicsModel {
    arc_sine,  // turn radius r = l_wb / sin(delta); inverse of the Ackermann label math
    tangent,   // common bicycle-model r = l_wb / tan(delta), for robustness experiments
};

struct ScenarioConfig {
    double dt = 0.1;        // seconds per frame
    double speed_mps = 8.0; // constant forward speed
    std::vector<double> steering_profile;  // commanded steering-wheel angle per frame
    LidarConfig lidar;
    VehicleParams vehicle;
    KinematicsModel model = KinematicsModel::arc_sine;
    std::uint64_t noise_seed = 0;  // base seed for per-frame LiDAR noise

    void validate() const {
        if (!(dt > 0.0)) throw std::invalid_argument("ScenarioConfig: dt must be > 0");
        if (!(speed_mps > 0.0)) throw std::invalid_argument("ScenarioConfig: speed_mps must be > 0");
        if (steering_profile.empty()) throw std::invalid_argument("ScenarioConfig: empty steering profile");
        lidar.validate();
        vehicle.validate();
    }
};

/// Simulator output: ground-truth poses, the commanded steering per frame,
/// and one LiDAR scan per frame.
struct DrivingLog {
    std::vector<Pose> poses;           // poses[0] is the identity
    std::vector<double> steering_truth;  // radians, steering-wheel angle
    std::vector<PointCloud> scans;
    std::vector<double> timestamps;

    std::size_t size() const { return poses.size(); }
};

/// Advance a pose along the exact circular arc commanded by a steering-wheel
/// angle. delta = y / steering_ratio; the reference point moves by arc length
/// ds on the circle of signed radius r = l_wb / sin(delta) (straight line for
/// delta = 0), heading kept tangent. Built to be the exact inverse of the
/// pseudo-label chain, so labels on noise-free pose pairs recover y.
inline Pose step_arc(const Pose& pose, double steering_wheel_rad, const VehicleParams& params,
                     double ds, KinematicsModel model = KinematicsModel::arc_sine) {
    params.validate();
    const double delta = steering_wheel_rad / params.steering_ratio;
    if (!(std::abs(delta) < M_PI / 2.0))
        throw std::invalid_argument("step_arc: |wheel angle| must be < pi/2");

    if (std::abs(delta) < 1e-15)
        return compose(pose, Pose(Eigen::Matrix3d::Identity(), Eigen::Vector3d(0.0, ds, 0.0)));

    const double radius = model == KinematicsModel::arc_sine ? params.wheelbase_m / std::sin(delta)
                                                             : params.wheelbase_m / std::tan(delta);
    const double turn = ds / radius;  // signed arc angle, positive = right
    const Eigen::Vector3d body_motion(radius * (1.0 - std::cos(turn)), radius * std::sin(turn), 0.0);
    return compose(pose, Pose(Pose::from_yaw(-turn).rotation, body_motion));
}

/// Scatter walls and pillars uniformly over a square of side extent_m
/// centered on the origin. The obstacle count is Poisson with mean
/// density * extent^2. Identical seeds give identical worlds.
inline World generate_world(std::uint64_t seed, double extent_m, double density_per_m2) {
    if (!(extent_m > 0.0)) throw std::invalid_argument("generate_world: extent must be > 0");
    if (!(density_per_m2 > 0.0)) throw std::invalid_argument("generate_world: density must be > 0");

    std::mt19937_64 rng(seed);
    const double mean_count = density_per_m2 * extent_m * extent_m;
    std::poisson_distribution<long> count_dist(mean_count);
    const long n = count_dist(rng);

    std::uniform_real_distribution<double> coord(-extent_m / 2.0, extent_m / 2.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> wall_len(2.0, 8.0);
    std::uniform_real_distribution<double> wall_dir(0.0, M_PI);
    std::uniform_real_distribution<double> pillar_radius(0.08, 0.25);

    World world;
    world.seed = seed;
    world.extent_m = extent_m;
    for (long i = 0; i < n; ++i) {
        const Eigen::Vector2d c(coord(rng), coord(rng));
        if (unit(rng) < 0.2) {
            const double len = wall_len(rng);
            const double ang = wall_dir(rng);
            const Eigen::Vector2d half = 0.5 * len * Eigen::Vector2d(std::cos(ang), std::sin(ang));
            world.walls.push_back(WallSegment{c - half, c + half});
        } else {
            world.pillars.push_back(Pillar{c, pillar_radius(rng)});
        }
    }
    return world;
}

namespace detail {

// Ray-segment intersection; returns the ray parameter t >= 0 or infinity.
inline double ray_segment(const Eigen::Vector2d& origin, const Eigen::Vector2d& dir,
                          const WallSegment& wall) {
    const Eigen::Vector2d e = wall.b - wall.a;
    const double denom = dir.x() * e.y() - dir.y() * e.x();
    if (std::abs(denom) < 1e-15) return std::numeric_limits<double>::infinity();
    const Eigen::Vector2d ao = wall.a - origin;
    const double t = (ao.x() * e.y() - ao.y() * e.x()) / denom;
    const double s = (ao.x() * dir.y() - ao.y() * dir.x()) / denom;
    if (t < 0.0 || s < 0.0 || s > 1.0) return std::numeric_limits<double>::infinity();
    return t;
}

// Ray-circle intersection; nearest non-negative root or infinity.
inline double ray_circle(const Eigen::Vector2d& origin, const Eigen::Vector2d& dir,
                         const Pillar& pillar) {
    const Eigen::Vector2d oc = origin - pillar.center;
    const double b = dir.dot(oc);
    const double c = oc.squaredNorm() - pillar.radius * pillar.radius;
    const double disc = b * b - c;
    if (disc < 0.0) return std::numeric_limits<double>::infinity();
    const double sq = std::sqrt(disc);
    const double t0 = -b - sq;
    if (t0 >= 0.0) return t0;
    const double t1 = -b + sq;
    if (t1 >= 0.0) return t1;
    return std::numeric_limits<double>::infinity();
}

}  // namespace detail

/// Planar raycast scan from a vehicle pose. Beam azimuths are measured from
/// the body +Y (forward) axis, positive toward +X (right); a full-circle FOV
/// spaces beams exclusively, a partial FOV includes both endpoints. Hits
/// within max_range come back in the sensor frame, with optional seeded
/// Gaussian range noise. Beams that hit nothing produce no point.
inline PointCloud lidar_scan(const World& world, const Pose& pose, const LidarConfig& cfg,
                             std::uint64_t noise_seed = 0) {
    cfg.validate();
    const Eigen::Vector2d origin = pose.translation.head<2>();

    // prune to obstacles that can possibly be in range
    std::vector<const WallSegment*> walls;
    std::vector<const Pillar*> pillars;
    for (const auto& w : world.walls) {
        const Eigen::Vector2d e = w.b - w.a;
        const double len_sq = e.squaredNorm();
        double s = len_sq > 0.0 ? (origin - w.a).dot(e) / len_sq : 0.0;
        s = std::clamp(s, 0.0, 1.0);
        if ((w.a + s * e - origin).norm() <= cfg.max_range_m) walls.push_back(&w);
    }
    for (const auto& p : world.pillars)
        if ((p.center - origin).norm() <= cfg.max_range_m + p.radius) pillars.push_back(&p);

    const bool full_circle = cfg.azimuth_fov_rad >= 2.0 * M_PI - 1e-12;
    const int n = cfg.beam_count;

    std::mt19937_64 rng(noise_seed);
    std::normal_distribution<double> noise(0.0, cfg.range_noise_sigma_m);

    PointCloud cloud;
    cloud.points.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        double azimuth;
        if (full_circle)
            azimuth = -M_PI + (2.0 * M_PI * j) / n;
        else
            azimuth = n == 1 ? 0.0
                             : -cfg.azimuth_fov_rad / 2.0 + cfg.azimuth_fov_rad * j / (n - 1);

        const Eigen::Vector3d body_dir(std::sin(azimuth), std::cos(azimuth), 0.0);
        Eigen::Vector2d world_dir = (pose.rotation * body_dir).head<2>();
        world_dir.normalize();

        double range = std::numeric_limits<double>::infinity();
        for (const auto* w : walls) range = std::min(range, detail::ray_segment(origin, world_dir, *w));
        for (const auto* p : pillars) range = std::min(range, detail::ray_circle(origin, world_dir, *p));
        if (range > cfg.max_range_m) continue;

        if (cfg.range_noise_sigma_m > 0.0) range = std::max(1e-3, range + noise(rng));
        cloud.points.emplace_back(range * body_dir);
    }
    return cloud;
}

/// Drive the commanded steering profile at constant speed, recording the
/// ground-truth pose, commanded steering, and a LiDAR scan per frame.
/// steering_profile[i] is the command that produces the motion from frame
/// i-1 to frame i (frame 0 sits at the identity). Per-frame noise seeds are
/// derived from cfg.noise_seed and the frame index.
inline DrivingLog run_scenario(const World& world, const ScenarioConfig& cfg) {
    cfg.validate();
    const std::size_t frames = cfg.steering_profile.size();
    const double ds = cfg.speed_mps * cfg.dt;

    DrivingLog log;
    log.poses.reserve(frames);
    log.steering_truth = cfg.steering_profile;
    log.scans.reserve(frames);
    log.timestamps.reserve(frames);

    Pose pose = Pose::identity();
    for (std::size_t i = 0; i < frames; ++i) {
        if (i > 0) {
            try {
                pose = step_arc(pose, cfg.steering_profile[i], cfg.vehicle, ds, cfg.model);
            } catch (const std::invalid_argument& e) {
                throw std::invalid_argument("run_scenario: frame " + std::to_string(i) + ": " + e.what());
            }
        }
        log.poses.push_back(pose);
        log.timestamps.push_back(static_cast<double>(i) * cfg.dt);
        log.scans.push_back(lidar_scan(world, pose, cfg.lidar, cfg.noise_seed + i));
    }
    return log;
}

}  // namespace steergen
