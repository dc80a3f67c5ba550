// scratch probe: single scan-pair alignment vs ground truth (not in the suite)
#include <chrono>
#include <cmath>
#include <iostream>

#include "steergen/odometry.hpp"
#include "steergen/simulator.hpp"

using namespace steergen;

int main() {
    VehicleParams audi{2.994, 15.8, 0.01};
    const double wheel = std::asin(audi.wheelbase_m / 10.0);

    ScenarioConfig scenario;
    scenario.dt = 0.1;
    scenario.speed_mps = 2.0;
    scenario.steering_profile.assign(5, wheel * audi.steering_ratio);
    scenario.vehicle = audi;
    scenario.lidar.beam_count = 900;
    scenario.lidar.max_range_m = 30.0;

    const World world = generate_world(99, 90.0, 0.12);
    const DrivingLog log = run_scenario(world, scenario);

    const Pose truth = relative_pose(log.poses[1], log.poses[0]);
    std::cout << "truth increment t = " << truth.translation.transpose() << "\n";

    OdometryConfig cfg;
    cfg.convergence_tol = 1e-9;
    cfg.max_iterations = 80;
    cfg.max_correspondence_m = 0.6;

    const IcpResult res = icp_align(log.scans[1], log.scans[0], cfg);
    std::cout << "icp increment   t = " << res.transform.translation.transpose() << "\n";
    std::cout << "iters " << res.iterations << " residual " << res.residual << " converged "
              << res.converged << "\n";
    std::cout << "rot err max " << (res.transform.rotation - truth.rotation).cwiseAbs().maxCoeff()
              << "  trans err " << (res.transform.translation - truth.translation).norm() << "\n";
    std::cout << "scan sizes " << log.scans[0].size() << " " << log.scans[1].size() << "\n";

    // what does the residual landscape look like at the truth?
    double sum = 0;
    int cnt = 0;
    KdTree tree(log.scans[0].points);
    for (const auto& p : log.scans[1].points) {
        const auto nn = tree.nearest(truth.apply(p));
        if (nn.dist_sq < 0.36) {
            sum += std::sqrt(nn.dist_sq);
            ++cnt;
        }
    }
    std::cout << "residual at truth " << sum / cnt << " over " << cnt << " pts\n";
    return 0;
}
