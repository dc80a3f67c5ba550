#include <catch2/catch_amalgamated.hpp>

#include <unistd.h>

#include <cmath>
#include <filesystem>

#include "steergen/pipeline.hpp"
#include "steergen/runner.hpp"
#include "steergen/simulator.hpp"

#include "oracles.hpp"

using steergen::DrivingLog;
using steergen::EvalReport;
using steergen::evaluate_mse;
using steergen::generate_pseudo_labels;
using steergen::LabelSource;
using steergen::NoOverlap;
using steergen::pid_baseline_labels;
using steergen::PidGains;
using steergen::Pose;
using steergen::PseudoLabelRecord;
using steergen::TrajectoryEstimate;
using steergen::TrajectoryTooShort;
using steergen::VehicleParams;

namespace fs = std::filesystem;

namespace {

const VehicleParams kAudi{2.994, 15.8, 0.01};

TrajectoryEstimate from_log(const DrivingLog& log) {
    TrajectoryEstimate traj;
    traj.poses = log.poses;
    traj.timestamps = log.timestamps;
    traj.residuals.assign(log.size(), 0.0);
    return traj;
}

DrivingLog make_log(const std::vector<double>& profile, double speed = 8.0, double dt = 0.1) {
    steergen::ScenarioConfig cfg;
    cfg.dt = dt;
    cfg.speed_mps = speed;
    cfg.steering_profile = profile;
    cfg.vehicle = kAudi;
    cfg.lidar.beam_count = 4;
    cfg.lidar.max_range_m = 2.0;
    const steergen::World world = steergen::generate_world(9, 40.0, 0.01);
    return steergen::run_scenario(world, cfg);
}

std::vector<std::pair<long, double>> truth_pairs(const DrivingLog& log) {
    std::vector<std::pair<long, double>> pairs;
    for (std::size_t i = 0; i < log.size(); ++i)
        pairs.emplace_back(static_cast<long>(i), log.steering_truth[i]);
    return pairs;
}

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() /
                     ("steergen_pipe_" + std::to_string(::getpid()) + "_" +
                      std::to_string(counter++))) {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static inline int counter = 0;
};

}  // namespace

TEST_CASE("generate_pseudo_labels: exact on ground-truth poses at k=1") {
    const DrivingLog log = make_log(std::vector<double>(50, 2.2));
    const auto records = generate_pseudo_labels(from_log(log), kAudi, 1);
    REQUIRE(records.size() == log.size() - 1);
    for (const auto& rec : records) {
        REQUIRE(rec.valid);
        CHECK(rec.steering_pred_rad ==
              Catch::Approx(log.steering_truth[rec.frame]).margin(1e-9));
    }
}

TEST_CASE("generate_pseudo_labels: constant command stays exact for any k") {
    const DrivingLog log = make_log(std::vector<double>(60, -3.1));
    for (std::size_t k : {1u, 4u, 8u}) {
        const auto records = generate_pseudo_labels(from_log(log), kAudi, k);
        REQUIRE(records.size() == log.size() - k);
        for (const auto& rec : records)
            CHECK(rec.steering_pred_rad ==
                  Catch::Approx(log.steering_truth[rec.frame]).margin(1e-9));
    }
}

TEST_CASE("generate_pseudo_labels: stationary trajectory is fully invalid") {
    TrajectoryEstimate traj;
    for (int i = 0; i < 10; ++i) {
        traj.poses.push_back(Pose::identity());
        traj.timestamps.push_back(0.1 * i);
        traj.residuals.push_back(0.0);
    }
    const auto records = generate_pseudo_labels(traj, kAudi, 1);
    REQUIRE(records.size() == 9);
    for (const auto& rec : records) {
        CHECK_FALSE(rec.valid);
        CHECK(rec.steering_pred_rad == 0.0);
    }
}

TEST_CASE("generate_pseudo_labels: invalid frames carry the last valid label") {
    // drive, stop for three frames, drive again
    TrajectoryEstimate traj;
    Pose pose = Pose::identity();
    double t = 0.0;
    auto push = [&](bool move) {
        if (move) pose = steergen::step_arc(pose, 2.0, kAudi, 0.8);
        traj.poses.push_back(pose);
        traj.timestamps.push_back(t += 0.1);
        traj.residuals.push_back(0.0);
    };
    push(false);
    for (int i = 0; i < 5; ++i) push(true);
    for (int i = 0; i < 3; ++i) push(false);
    for (int i = 0; i < 4; ++i) push(true);

    const auto records = generate_pseudo_labels(traj, kAudi, 1);
    REQUIRE(records.size() == 12);
    const double expected = records[4].steering_pred_rad;  // last valid before the stop
    CHECK(expected == Catch::Approx(2.0).margin(1e-9));
    for (int i = 5; i < 8; ++i) {
        CHECK_FALSE(records[i].valid);
        CHECK(records[i].steering_pred_rad == expected);  // carried forward
        CHECK(records[i].radius_m == records[4].radius_m);
    }
    CHECK(records[8].valid);
}

TEST_CASE("generate_pseudo_labels: flip switch negates the outputs") {
    const DrivingLog log = make_log(std::vector<double>(20, 2.2));
    const auto plain = generate_pseudo_labels(from_log(log), kAudi, 1, false);
    const auto flipped = generate_pseudo_labels(from_log(log), kAudi, 1, true);
    for (std::size_t i = 0; i < plain.size(); ++i) {
        CHECK(flipped[i].steering_pred_rad == -plain[i].steering_pred_rad);
        CHECK(flipped[i].radius_m == -plain[i].radius_m);
    }
}

TEST_CASE("generate_pseudo_labels: short trajectories are rejected") {
    const DrivingLog log = make_log(std::vector<double>(5, 1.0));
    CHECK_THROWS_AS(generate_pseudo_labels(from_log(log), kAudi, 5), TrajectoryTooShort);
    CHECK_THROWS_AS(generate_pseudo_labels(from_log(log), kAudi, 7), TrajectoryTooShort);
}

TEST_CASE("pid_baseline_labels: zero on straight, settles on arcs") {
    const DrivingLog straight = make_log(std::vector<double>(40, 0.0));
    const PidGains gains;
    const auto zero = pid_baseline_labels(from_log(straight), gains, 1);
    for (const auto& rec : zero) {
        CHECK(rec.steering_pred_rad == Catch::Approx(0.0).margin(1e-12));
        CHECK(rec.source == LabelSource::pid);
    }

    const DrivingLog arc = make_log(std::vector<double>(400, 3.0));
    PidGains arc_gains;
    arc_gains.integral_clamp = 0.5;  // settles well inside the run
    const auto out = pid_baseline_labels(from_log(arc), arc_gains, 1);
    // after the integral clamps, the output is steady
    const double tail = out.back().steering_pred_rad;
    CHECK(tail != 0.0);
    for (std::size_t i = out.size() - 50; i < out.size(); ++i)
        CHECK(out[i].steering_pred_rad == Catch::Approx(tail).epsilon(0.05));

    CHECK_THROWS_AS(pid_baseline_labels(from_log(straight), gains, 40), TrajectoryTooShort);
}

TEST_CASE("pid_baseline_labels: output clamp engages") {
    PidGains gains;
    gains.kp = 1e4;
    gains.output_clamp_rad = 2.0;
    const DrivingLog arc = make_log(std::vector<double>(30, 3.0));
    const auto out = pid_baseline_labels(from_log(arc), gains, 1);
    for (const auto& rec : out) CHECK(std::abs(rec.steering_pred_rad) <= 2.0);
}

TEST_CASE("evaluate_mse: closed-form cases") {
    auto rec = [](long frame, double pred, bool valid = true) {
        PseudoLabelRecord r;
        r.frame = frame;
        r.steering_pred_rad = pred;
        r.valid = valid;
        return r;
    };

    SECTION("perfect predictions") {
        const EvalReport rep = evaluate_mse({rec(0, 0.3), rec(1, -0.2)}, {{0, 0.3}, {1, -0.2}});
        CHECK(rep.mse == 0.0);
        CHECK(rep.n_frames == 2);
        CHECK(rep.n_invalid == 0);
    }
    SECTION("constant offset of 0.1 rad") {
        std::vector<PseudoLabelRecord> preds;
        std::vector<std::pair<long, double>> truth;
        for (long i = 0; i < 20; ++i) {
            preds.push_back(rec(i, 0.5 + 0.1));
            truth.emplace_back(i, 0.5);
        }
        CHECK(evaluate_mse(preds, truth).mse == Catch::Approx(0.01).margin(1e-15));
    }
    SECTION("hand-computed two-frame case") {
        const EvalReport rep = evaluate_mse({rec(0, 0.0), rec(1, 0.4)}, {{0, 0.1}, {1, 0.2}});
        CHECK(rep.mse == Catch::Approx(0.025).margin(1e-15));
    }
    SECTION("invalid frames are excluded and counted") {
        const EvalReport rep =
            evaluate_mse({rec(0, 9.0, false), rec(1, 0.2)}, {{0, 0.1}, {1, 0.2}});
        CHECK(rep.mse == 0.0);
        CHECK(rep.n_frames == 1);
        CHECK(rep.n_invalid == 1);
    }
    SECTION("no overlap") {
        CHECK_THROWS_AS(evaluate_mse({rec(10, 0.0)}, {{0, 0.1}}), NoOverlap);
        CHECK_THROWS_AS(evaluate_mse({rec(0, 0.0, false)}, {{0, 0.1}}), NoOverlap);
    }
    SECTION("quartile bins cover all compared frames") {
        std::vector<PseudoLabelRecord> preds;
        std::vector<std::pair<long, double>> truth;
        for (long i = 0; i < 100; ++i) {
            preds.push_back(rec(i, 0.0));
            truth.emplace_back(i, 0.01 * i);
        }
        const EvalReport rep = evaluate_mse(preds, truth);
        REQUIRE(rep.bins.size() == 4);
        long total = 0;
        for (const auto& b : rep.bins) total += b.n;
        CHECK(total == rep.n_frames);
        CHECK(rep.bins.front().abs_truth_lo <= rep.bins.back().abs_truth_lo);
    }
}

TEST_CASE("ground-truth poses give effectively zero MSE at k=1") {
    steergen::ProfileSpec mixed{.kind = "mixed", .frames = 300, .amplitude = 2.5};
    const DrivingLog log = make_log(mixed.build());
    const auto records = generate_pseudo_labels(from_log(log), kAudi, 1);
    const EvalReport rep = evaluate_mse(records, truth_pairs(log));
    CHECK(rep.mse <= 1e-12);
}

TEST_CASE("valid records equal direct per-frame evaluation") {
    // labeling is per-pair; the sequential pipeline adds only carry-forward
    steergen::ProfileSpec mixed{.kind = "mixed", .frames = 120, .amplitude = 2.0};
    const DrivingLog log = make_log(mixed.build());
    const TrajectoryEstimate traj = from_log(log);
    const auto records = generate_pseudo_labels(traj, kAudi, 2);
    for (const auto& rec : records) {
        if (!rec.valid) continue;
        const steergen::SteeringEstimate direct =
            steergen::pseudo_label(traj.poses[rec.frame], traj.poses[rec.frame - 2], kAudi);
        CHECK(rec.steering_pred_rad == direct.steering_angle_rad);
        CHECK(rec.wheel_angle_rad == direct.wheel_angle_rad);
        CHECK(rec.radius_m == direct.radius_m);
    }
}

TEST_CASE("orchestrated full run equals the stage-by-stage path bit for bit") {
    TempDir tmp;
    steergen::Config cfg;
    cfg.simulator.profile = steergen::ProfileSpec{.kind = "mixed", .frames = 60, .amplitude = 2.0};
    cfg.simulator.lidar.beam_count = 360;
    cfg.simulator.lidar.max_range_m = 30.0;
    cfg.simulator.world.extent_m = 150.0;
    cfg.simulator.world.density_per_m2 = 0.05;
    cfg.odometry.max_correspondence_m = 0.8;

    const EvalReport via_full = steergen::run_full(cfg, tmp.path / "full");

    steergen::run_simulate(cfg, tmp.path / "stages");
    steergen::run_odometry(cfg, tmp.path / "stages" / "scans", tmp.path / "stages");
    steergen::run_label(cfg, tmp.path / "stages" / "odometry_trajectory.jsonl", tmp.path / "stages");
    const EvalReport via_stages =
        steergen::run_eval(tmp.path / "stages" / "labels.csv", tmp.path / "stages" / "ground_truth.csv");

    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    CHECK(slurp(tmp.path / "full" / "labels.csv") == slurp(tmp.path / "stages" / "labels.csv"));
    CHECK(slurp(tmp.path / "full" / "odometry_trajectory.jsonl") ==
          slurp(tmp.path / "stages" / "odometry_trajectory.jsonl"));
    CHECK(via_full.mse == via_stages.mse);
    CHECK(fs::exists(tmp.path / "full" / "manifest.json"));
}
