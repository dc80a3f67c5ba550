#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Core>

namespace steergen {

/// 3-d kd-tree over a borrowed point array; exact nearest-neighbor queries.
/// Rebuilt per target scan, which is cheap at desk scale.
class KdTree {
public:
    struct Neighbor {
        std::size_t index = 0;
        double dist_sq = std::numeric_limits<double>::infinity();
    };

    KdTree() = default;

    explicit KdTree(const std::vector<Eigen::Vector3d>& points) : points_(&points) {
        const std::size_t n = points.size();
        nodes_.reserve(n);
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        if (n > 0) root_ = build(idx, 0, n, 0);
    }

    bool empty() const { return nodes_.empty(); }

    Neighbor nearest(const Eigen::Vector3d& query) const {
        Neighbor best;
        if (root_ >= 0) search(root_, query, best);
        return best;
    }

private:
    struct Node {
        std::size_t point = 0;
        int left = -1;
        int right = -1;
        int axis = 0;
    };

    int build(std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi, int depth) {
        if (lo >= hi) return -1;
        const int axis = depth % 3;
        const std::size_t mid = lo + (hi - lo) / 2;
        std::nth_element(idx.begin() + lo, idx.begin() + mid, idx.begin() + hi,
                         [&](std::size_t a, std::size_t b) {
                             return (*points_)[a][axis] < (*points_)[b][axis];
                         });
        const int node = static_cast<int>(nodes_.size());
        nodes_.push_back(Node{idx[mid], -1, -1, axis});
        const int left = build(idx, lo, mid, depth + 1);
        const int right = build(idx, mid + 1, hi, depth + 1);
        nodes_[node].left = left;
        nodes_[node].right = right;
        return node;
    }

    void search(int node, const Eigen::Vector3d& query, Neighbor& best) const {
        const Node& n = nodes_[node];
        const Eigen::Vector3d& p = (*points_)[n.point];
        const double d2 = (p - query).squaredNorm();
        if (d2 < best.dist_sq) best = Neighbor{n.point, d2};

        const double diff = query[n.axis] - p[n.axis];
        const int near = diff < 0.0 ? n.left : n.right;
        const int far = diff < 0.0 ? n.right : n.left;
        if (near >= 0) search(near, query, best);
        if (far >= 0 && diff * diff < best.dist_sq) search(far, query, best);
    }

    const std::vector<Eigen::Vector3d>* points_ = nullptr;
    std::vector<Node> nodes_;
    int root_ = -1;
};

}  // namespace steergen
