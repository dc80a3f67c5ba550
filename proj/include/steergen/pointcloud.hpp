#pragma once

#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace steergen {

/// LiDAR scan in the sensor frame, meters.
struct PointCloud {
    std::vector<Eigen::Vector3d> points;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }

    bool all_finite() const {
        for (const auto& p : points)
            if (!p.allFinite()) return false;
        return true;
    }
};

inline PointCloud transform_cloud(const PointCloud& cloud, const Eigen::Matrix3d& r,
                                  const Eigen::Vector3d& t) {
    PointCloud out;
    out.points.reserve(cloud.size());
    for (const auto& p : cloud.points) out.points.push_back(r * p + t);
    return out;
}

/// Voxel-grid downsample: one centroid per occupied voxel. Voxels are emitted
/// in first-occupancy order so the output is deterministic for a given input.
/// voxel_size <= 0 returns the input unchanged.
inline PointCloud voxel_downsample(const PointCloud& cloud, double voxel_size) {
    if (voxel_size <= 0.0 || cloud.empty()) return cloud;

    struct Cell {
        Eigen::Vector3d sum = Eigen::Vector3d::Zero();
        std::size_t count = 0;
        std::size_t order = 0;
    };
    auto key_of = [voxel_size](const Eigen::Vector3d& p) {
        const auto ix = static_cast<std::int64_t>(std::floor(p.x() / voxel_size));
        const auto iy = static_cast<std::int64_t>(std::floor(p.y() / voxel_size));
        const auto iz = static_cast<std::int64_t>(std::floor(p.z() / voxel_size));
        // 21 bits per axis is plenty at desk scale
        return (static_cast<std::uint64_t>(ix & 0x1FFFFF) << 42) |
               (static_cast<std::uint64_t>(iy & 0x1FFFFF) << 21) |
               static_cast<std::uint64_t>(iz & 0x1FFFFF);
    };

    std::unordered_map<std::uint64_t, Cell> grid;
    grid.reserve(cloud.size());
    std::size_t next_order = 0;
    for (const auto& p : cloud.points) {
        Cell& c = grid[key_of(p)];
        if (c.count == 0) c.order = next_order++;
        c.sum += p;
        ++c.count;
    }

    PointCloud out;
    out.points.resize(grid.size());
    for (const auto& [key, cell] : grid)
        out.points[cell.order] = cell.sum / static_cast<double>(cell.count);
    return out;
}

}  // namespace steergen
