#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>

#include "steergen/steering.hpp"

#include "oracles.hpp"

using steergen::Direction3;
using steergen::forward_direction;
using steergen::Pose;
using steergen::pseudo_label;
using steergen::RadiusFormula;
using steergen::RadiusTooSmall;
using steergen::relative_pose;
using steergen::StationaryMotion;
using steergen::SteeringEstimate;
using steergen::steering_angle;
using steergen::turning_radius;
using steergen::VehicleParams;
using steergen::wheel_angle;

namespace {
const VehicleParams kAudi{2.994, 15.8, 0.01};    // Audi Q7 e-tron
const VehicleParams kZoe{2.924, 15.2, 0.01};     // Renault Zoe
const double kInf = std::numeric_limits<double>::infinity();
}  // namespace

TEST_CASE("turning_radius: circular-arc oracle") {
    SECTION("right arc, r = 10") {
        const Pose rel = oracle::arc_pose(10.0, 0.1);
        const Direction3 d = forward_direction(rel);
        CHECK(turning_radius(rel, d) == Catch::Approx(10.0).margin(1e-9));
    }
    SECTION("mirrored left arc, r = -10") {
        const Pose rel = oracle::arc_pose(-10.0, 0.1);
        const Direction3 d = forward_direction(rel);
        CHECK(turning_radius(rel, d) == Catch::Approx(-10.0).margin(1e-9));
    }
    SECTION("straight motion maps to the infinite sentinel") {
        const Pose rel(Eigen::Matrix3d::Identity(), Eigen::Vector3d(0.0, 1.0, 0.0));
        CHECK(turning_radius(rel, forward_direction(rel)) == kInf);
    }
}

TEST_CASE("turning_radius: stationary frames are rejected") {
    const Pose rel(Eigen::Matrix3d::Identity(), Eigen::Vector3d(0.0, 0.004, 0.0));
    CHECK_THROWS_AS(turning_radius(rel, forward_direction(rel), 0.01), StationaryMotion);
}

TEST_CASE("turning_radius: printed-form variant does not reproduce arcs") {
    // The derived X-intercept form recovers the radius exactly; the printed
    // transposed-slope form does not (and collapses straight motion to 0).
    const Pose rel = oracle::arc_pose(10.0, 0.1);
    const Direction3 d = forward_direction(rel);
    const double printed = turning_radius(rel, d, 0.0, RadiusFormula::printed);
    CHECK(printed == Catch::Approx(0.1501258784440384).margin(1e-9));
    CHECK(std::abs(printed - 10.0) > 9.0);

    const Pose straight(Eigen::Matrix3d::Identity(), Eigen::Vector3d(0.0, 1.0, 0.0));
    CHECK(turning_radius(straight, forward_direction(straight), 0.0, RadiusFormula::printed) ==
          Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("wheel_angle: arcsine of wheelbase over radius") {
    // asin(2.994 / 10), frozen from direct evaluation
    CHECK(wheel_angle(10.0, kAudi) == Catch::Approx(0.30406374526552415).margin(1e-12));
    CHECK(wheel_angle(-10.0, kAudi) == Catch::Approx(-0.30406374526552415).margin(1e-12));
    CHECK(wheel_angle(kInf, kAudi) == 0.0);
    CHECK(wheel_angle(-kInf, kAudi) == 0.0);
    CHECK(wheel_angle(kAudi.wheelbase_m, kAudi) == Catch::Approx(M_PI / 2.0).margin(1e-12));
    CHECK_THROWS_AS(wheel_angle(2.0, kAudi), RadiusTooSmall);
    CHECK_THROWS_AS(wheel_angle(-1.5, kAudi), RadiusTooSmall);
}

TEST_CASE("steering_angle: scaled by the steering ratio") {
    CHECK(steering_angle(0.30406374526552415, kAudi) ==
          Catch::Approx(4.804207175195282).margin(1e-12));
    CHECK(steering_angle(0.0, kAudi) == 0.0);
    CHECK(steering_angle(0.1, kZoe) == Catch::Approx(1.52).margin(1e-15));
}

TEST_CASE("pseudo_label: full chain on exact arcs") {
    SECTION("stationary pair is invalid") {
        oracle::PoseGen gen(21);
        const Pose p = gen.next();
        const SteeringEstimate est = pseudo_label(p, p, kAudi);
        CHECK_FALSE(est.valid);
        CHECK(est.status == SteeringEstimate::Status::stationary);
    }
    SECTION("10 m right arc with Audi parameters") {
        const SteeringEstimate est = pseudo_label(oracle::arc_pose(10.0, 0.1), Pose::identity(), kAudi);
        REQUIRE(est.valid);
        CHECK(est.radius_m == Catch::Approx(10.0).margin(1e-9));
        CHECK(est.wheel_angle_rad == Catch::Approx(0.30406374526552415).margin(1e-9));
        CHECK(est.steering_angle_rad == Catch::Approx(4.804207175195282).margin(1e-8));
    }
    SECTION("straight pair gives zero steering, valid") {
        const Pose cur(Eigen::Matrix3d::Identity(), Eigen::Vector3d(0.0, 1.0, 0.0));
        const SteeringEstimate est = pseudo_label(cur, Pose::identity(), kAudi);
        REQUIRE(est.valid);
        CHECK(est.steering_angle_rad == 0.0);
        CHECK(est.radius_m == kInf);
    }
    SECTION("sub-wheelbase radius comes back clamped and invalid") {
        const SteeringEstimate est = pseudo_label(oracle::arc_pose(1.0, 0.3), Pose::identity(), kAudi);
        CHECK_FALSE(est.valid);
        CHECK(est.status == SteeringEstimate::Status::radius_too_small);
        CHECK(est.wheel_angle_rad == Catch::Approx(M_PI / 2.0).margin(1e-12));
        CHECK(std::abs(est.steering_angle_rad) <= kAudi.steering_ratio * M_PI / 2.0 + 1e-12);
    }
}

TEST_CASE("pseudo_label: arc exactness over the radius/angle envelope") {
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> log_r(std::log(kAudi.wheelbase_m + 0.1), std::log(1e4));
    std::uniform_real_distribution<double> theta(0.005, 0.5);
    std::bernoulli_distribution left(0.5);

    for (int i = 0; i < 500; ++i) {
        const double r = std::exp(log_r(rng)) * (left(rng) ? -1.0 : 1.0);
        const double th = theta(rng);
        const SteeringEstimate est = pseudo_label(oracle::arc_pose(r, th), Pose::identity(), kAudi);
        REQUIRE(est.valid);
        REQUIRE(est.wheel_angle_rad ==
                Catch::Approx(std::asin(kAudi.wheelbase_m / r)).margin(1e-9));
    }
}

TEST_CASE("pseudo_label: mirror antisymmetry") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> radius(5.0, 500.0);
    std::uniform_real_distribution<double> theta(0.01, 0.5);
    for (int i = 0; i < 200; ++i) {
        const double r = radius(rng);
        const double th = theta(rng);
        const SteeringEstimate right = pseudo_label(oracle::arc_pose(r, th), Pose::identity(), kAudi);
        const SteeringEstimate mirrored = pseudo_label(oracle::arc_pose(-r, th), Pose::identity(), kAudi);
        REQUIRE(right.valid);
        REQUIRE(mirrored.valid);
        CHECK(mirrored.radius_m == -right.radius_m);
        CHECK(mirrored.wheel_angle_rad == -right.wheel_angle_rad);
        CHECK(mirrored.steering_angle_rad == -right.steering_angle_rad);
    }
}

TEST_CASE("pseudo_label: radius is geometric, not kinematic") {
    // doubling the arc angle (and implicitly the time step) on one circle
    // leaves the recovered radius unchanged
    for (double r : {12.0, 47.0, -33.0, 180.0}) {
        const double a = turning_radius(oracle::arc_pose(r, 0.05),
                                        forward_direction(oracle::arc_pose(r, 0.05)));
        const double b = turning_radius(oracle::arc_pose(r, 0.10),
                                        forward_direction(oracle::arc_pose(r, 0.10)));
        CHECK(a == Catch::Approx(r).margin(1e-9));
        CHECK(b == Catch::Approx(r).margin(1e-9));
    }
}

TEST_CASE("wheel_angle magnitude strictly decreases with radius") {
    double prev = M_PI;
    for (double r = kAudi.wheelbase_m + 0.01; r < 1e4; r *= 1.5) {
        const double w = std::abs(wheel_angle(r, kAudi));
        CHECK(w < prev);
        prev = w;
    }
}
