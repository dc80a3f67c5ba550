#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "steergen/config.hpp"
#include "steergen/io.hpp"
#include "steergen/odometry.hpp"
#include "steergen/pipeline.hpp"
#include "steergen/simulator.hpp"
#include "steergen/version.hpp"

namespace steergen {

/// Provenance record written atomically next to every output set.
struct RunManifest {
    std::string subcommand;
    nlohmann::json config_snapshot;
    std::uint64_t world_seed = 0;
    std::uint64_t noise_seed = 0;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    double duration_s = 0.0;

    nlohmann::json to_json() const {
        return nlohmann::json{{"subcommand", subcommand}, {"tool_version", kVersion},
                              {"schema_version", kConfigSchemaVersion},
                              {"config", config_snapshot},  {"world_seed", world_seed},
                              {"noise_seed", noise_seed},   {"inputs", inputs},
                              {"outputs", outputs},         {"duration_s", duration_s}};
    }
};

inline void write_manifest(const std::filesystem::path& dir, const RunManifest& manifest) {
    atomic_write(dir / "manifest.json", manifest.to_json().dump(2) + "\n");
}

class StageTimer {
public:
    StageTimer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

// ---------------------------------------------------------------------------
// pipeline stages; each writes its output set plus a manifest

/// Simulate the configured scenario and write trajectory.jsonl,
/// ground_truth.csv, and scans/ into out_dir.
inline DrivingLog run_simulate(const Config& cfg, const std::filesystem::path& out_dir) {
    StageTimer timer;
    const World world = generate_world(cfg.simulator.world.seed, cfg.simulator.world.extent_m,
                                       cfg.simulator.world.density_per_m2);
    ScenarioConfig scenario;
    scenario.dt = cfg.simulator.dt;
    scenario.speed_mps = cfg.simulator.speed_mps;
    scenario.steering_profile = cfg.simulator.profile.build();
    scenario.lidar = cfg.simulator.lidar;
    scenario.vehicle = cfg.vehicle;
    scenario.model = cfg.simulator.kinematics();
    scenario.noise_seed = cfg.simulator.noise_seed;

    const DrivingLog log = run_scenario(world, scenario);
    export_log(log, out_dir, cfg.pipeline.ply_format());

    RunManifest manifest;
    manifest.subcommand = "simulate";
    manifest.config_snapshot = config_to_json(cfg);
    manifest.world_seed = cfg.simulator.world.seed;
    manifest.noise_seed = cfg.simulator.noise_seed;
    manifest.outputs = {"trajectory.jsonl", "ground_truth.csv", "scans/"};
    manifest.duration_s = timer.seconds();
    write_manifest(out_dir, manifest);
    return log;
}

/// Estimate the trajectory from a directory of scans and write
/// odometry_trajectory.jsonl into out_dir.
inline TrajectoryEstimate run_odometry(const Config& cfg, const std::filesystem::path& scans_dir,
                                       const std::filesystem::path& out_dir) {
    StageTimer timer;
    const std::vector<PointCloud> scans = load_scans(scans_dir);
    std::vector<double> timestamps(scans.size());
    for (std::size_t i = 0; i < scans.size(); ++i) timestamps[i] = static_cast<double>(i) * cfg.simulator.dt;

    const TrajectoryEstimate traj = estimate_trajectory(scans, cfg.odometry, timestamps);
    std::filesystem::create_directories(out_dir);
    save_trajectory(out_dir / "odometry_trajectory.jsonl", traj);

    RunManifest manifest;
    manifest.subcommand = "odometry";
    manifest.config_snapshot = config_to_json(cfg);
    manifest.inputs = {scans_dir.string()};
    manifest.outputs = {"odometry_trajectory.jsonl"};
    manifest.duration_s = timer.seconds();
    write_manifest(out_dir, manifest);
    return traj;
}

/// Generate pseudo-labels (or the PID baseline) from a trajectory file and
/// write labels.csv into out_dir.
inline std::vector<PseudoLabelRecord> run_label(const Config& cfg,
                                                const std::filesystem::path& trajectory_path,
                                                const std::filesystem::path& out_dir,
                                                LabelSource predictor = LabelSource::proposed) {
    StageTimer timer;
    const TrajectoryEstimate traj = load_trajectory(trajectory_path);
    const std::vector<PseudoLabelRecord> records =
        predictor == LabelSource::proposed
            ? generate_pseudo_labels(traj, cfg.vehicle, cfg.pipeline.k, cfg.pipeline.flip_steering_sign)
            : pid_baseline_labels(traj, cfg.pid, cfg.pipeline.k);
    std::filesystem::create_directories(out_dir);
    save_labels(out_dir / "labels.csv", records);

    RunManifest manifest;
    manifest.subcommand = "label";
    manifest.config_snapshot = config_to_json(cfg);
    manifest.inputs = {trajectory_path.string()};
    manifest.outputs = {"labels.csv"};
    manifest.duration_s = timer.seconds();
    write_manifest(out_dir, manifest);
    return records;
}

inline EvalReport run_eval(const std::filesystem::path& labels_path,
                           const std::filesystem::path& truth_path) {
    const std::vector<PseudoLabelRecord> records = load_labels(labels_path);
    const std::vector<TruthRow> truth = load_truth(truth_path);
    std::vector<std::pair<long, double>> pairs;
    pairs.reserve(truth.size());
    for (const auto& row : truth) pairs.emplace_back(row.frame, row.steering_truth_rad);
    return evaluate_mse(records, pairs);
}

inline nlohmann::json eval_report_to_json(const EvalReport& report) {
    nlohmann::json bins = nlohmann::json::array();
    for (const auto& b : report.bins)
        bins.push_back({{"abs_truth_lo", b.abs_truth_lo},
                        {"abs_truth_hi", b.abs_truth_hi},
                        {"mse", b.mse},
                        {"n", b.n}});
    return nlohmann::json{
        {"mse", report.mse}, {"n_frames", report.n_frames}, {"n_invalid", report.n_invalid},
        {"bins", bins}};
}

/// simulate -> odometry -> label -> eval in one output directory. Stages
/// exchange data through the written files, so a full run is byte-identical
/// to running the four subcommands in sequence.
inline EvalReport run_full(const Config& cfg, const std::filesystem::path& out_dir,
                           LabelSource predictor = LabelSource::proposed) {
    StageTimer timer;
    run_simulate(cfg, out_dir);
    run_odometry(cfg, out_dir / "scans", out_dir);
    run_label(cfg, out_dir / "odometry_trajectory.jsonl", out_dir, predictor);
    const EvalReport report = run_eval(out_dir / "labels.csv", out_dir / "ground_truth.csv");
    atomic_write(out_dir / "eval.json", eval_report_to_json(report).dump() + "\n");

    RunManifest manifest;
    manifest.subcommand = "full";
    manifest.config_snapshot = config_to_json(cfg);
    manifest.world_seed = cfg.simulator.world.seed;
    manifest.noise_seed = cfg.simulator.noise_seed;
    manifest.outputs = {"trajectory.jsonl", "ground_truth.csv", "scans/",
                        "odometry_trajectory.jsonl", "labels.csv", "eval.json"};
    manifest.duration_s = timer.seconds();
    write_manifest(out_dir, manifest);
    return report;
}

}  // namespace steergen
