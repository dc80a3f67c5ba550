#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "steergen/errors.hpp"
#include "steergen/odometry.hpp"
#include "steergen/pipeline.hpp"
#include "steergen/ply.hpp"
#include "steergen/simulator.hpp"
#include "steergen/ssrl.hpp"
#include "steergen/steering.hpp"
#include "steergen/version.hpp"

namespace steergen {

/// Steering-profile generator for scenario configs: either an explicit
/// per-frame array or a closed-form program expanded at load time.
struct ProfileSpec {
    std::string kind = "mixed";  // constant | sine | mixed | array
    std::size_t frames = 500;
    double value = 0.0;            // constant
    double amplitude = 2.5;        // sine / mixed, radians of steering wheel
    double period_frames = 120.0;  // sine
    std::vector<double> values;    // array

    std::vector<double> build() const {
        if (kind == "array") {
            if (values.empty()) throw SchemaError("simulator.profile.values", "empty array profile");
            return values;
        }
        if (frames == 0) throw SchemaError("simulator.profile.frames", "must be > 0");
        std::vector<double> out(frames);
        if (kind == "constant") {
            for (auto& v : out) v = value;
        } else if (kind == "sine") {
            for (std::size_t i = 0; i < frames; ++i)
                out[i] = amplitude * std::sin(2.0 * M_PI * static_cast<double>(i) / period_frames);
        } else if (kind == "mixed") {
            // straights, both turn directions, and a frequency sweep; smooth
            // enough to keep wheel angles well inside +/- pi/2
            for (std::size_t i = 0; i < frames; ++i) {
                const double u = static_cast<double>(i) / static_cast<double>(frames);
                double v = 0.0;
                if (u < 0.1) v = 0.0;
                else if (u < 0.35) v = amplitude * std::sin(2.0 * M_PI * (u - 0.1) / 0.25);
                else if (u < 0.45) v = 0.0;
                else if (u < 0.7) v = -0.8 * amplitude * std::sin(2.0 * M_PI * (u - 0.45) / 0.125);
                else v = amplitude * std::sin(2.0 * M_PI * (u - 0.7) / 0.0625) * (1.0 - u);
                out[i] = v;
            }
        } else {
            throw SchemaError("simulator.profile.kind", "unknown kind '" + kind + "'");
        }
        return out;
    }
};

struct WorldConfig {
    std::uint64_t seed = 7;
    double extent_m = 400.0;
    double density_per_m2 = 0.02;
};

struct SimulatorConfig {
    double dt = 0.1;
    double speed_mps = 8.0;
    LidarConfig lidar;
    WorldConfig world;
    ProfileSpec profile;
    std::string model = "arcsin";  // arcsin | tan
    std::uint64_t noise_seed = 0;

    KinematicsModel kinematics() const {
        if (model == "arcsin") return KinematicsModel::arc_sine;
        if (model == "tan") return KinematicsModel::tangent;
        throw SchemaError("simulator.model", "unknown model '" + model + "'");
    }
};

struct PipelineConfig {
    std::size_t k = 1;
    bool flip_steering_sign = false;
    std::string scan_format = "binary";  // binary | ascii

    PlyFormat ply_format() const {
        if (scan_format == "binary") return PlyFormat::binary_little_endian;
        if (scan_format == "ascii") return PlyFormat::ascii;
        throw SchemaError("pipeline.scan_format", "unknown format '" + scan_format + "'");
    }
};

struct SsrlConfig {
    GaussianTaskConfig task;
    std::size_t n_test = 100000;
    std::size_t seeds = 5;
    bool use_mlp = false;
};

/// Whole run configuration: one JSON document with sections vehicle,
/// odometry, simulator, pid, pipeline (plus ssrl for the regression demo).
struct Config {
    VehicleParams vehicle;
    OdometryConfig odometry;
    SimulatorConfig simulator;
    PidGains pid;
    PipelineConfig pipeline;
    SsrlConfig ssrl;
};

namespace detail {

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out, const std::string& section) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw SchemaError(section + "." + key, "wrong type");
    }
}

}  // namespace detail

inline Config config_from_json(const nlohmann::json& j) {
    Config cfg;
    if (j.contains("schema_version") && j["schema_version"].get<int>() != kConfigSchemaVersion)
        throw SchemaError("schema_version", "expected " + std::to_string(kConfigSchemaVersion));

    if (j.contains("vehicle")) {
        const auto& v = j["vehicle"];
        detail::read_field(v, "wheelbase_m", cfg.vehicle.wheelbase_m, "vehicle");
        detail::read_field(v, "steering_ratio", cfg.vehicle.steering_ratio, "vehicle");
        detail::read_field(v, "min_motion_m", cfg.vehicle.min_motion_m, "vehicle");
    }
    if (j.contains("odometry")) {
        const auto& o = j["odometry"];
        detail::read_field(o, "max_iterations", cfg.odometry.max_iterations, "odometry");
        detail::read_field(o, "convergence_tol", cfg.odometry.convergence_tol, "odometry");
        detail::read_field(o, "max_correspondence_m", cfg.odometry.max_correspondence_m, "odometry");
        detail::read_field(o, "voxel_size_m", cfg.odometry.voxel_size_m, "odometry");
        detail::read_field(o, "use_motion_prior", cfg.odometry.use_motion_prior, "odometry");
    }
    if (j.contains("simulator")) {
        const auto& s = j["simulator"];
        detail::read_field(s, "dt", cfg.simulator.dt, "simulator");
        detail::read_field(s, "speed_mps", cfg.simulator.speed_mps, "simulator");
        detail::read_field(s, "model", cfg.simulator.model, "simulator");
        detail::read_field(s, "noise_seed", cfg.simulator.noise_seed, "simulator");
        if (s.contains("lidar")) {
            const auto& l = s["lidar"];
            detail::read_field(l, "beam_count", cfg.simulator.lidar.beam_count, "simulator.lidar");
            detail::read_field(l, "max_range_m", cfg.simulator.lidar.max_range_m, "simulator.lidar");
            detail::read_field(l, "azimuth_fov_rad", cfg.simulator.lidar.azimuth_fov_rad, "simulator.lidar");
            detail::read_field(l, "range_noise_sigma_m", cfg.simulator.lidar.range_noise_sigma_m,
                               "simulator.lidar");
        }
        if (s.contains("world")) {
            const auto& w = s["world"];
            detail::read_field(w, "seed", cfg.simulator.world.seed, "simulator.world");
            detail::read_field(w, "extent_m", cfg.simulator.world.extent_m, "simulator.world");
            detail::read_field(w, "density_per_m2", cfg.simulator.world.density_per_m2, "simulator.world");
        }
        if (s.contains("profile")) {
            const auto& p = s["profile"];
            detail::read_field(p, "kind", cfg.simulator.profile.kind, "simulator.profile");
            detail::read_field(p, "frames", cfg.simulator.profile.frames, "simulator.profile");
            detail::read_field(p, "value", cfg.simulator.profile.value, "simulator.profile");
            detail::read_field(p, "amplitude", cfg.simulator.profile.amplitude, "simulator.profile");
            detail::read_field(p, "period_frames", cfg.simulator.profile.period_frames, "simulator.profile");
            detail::read_field(p, "values", cfg.simulator.profile.values, "simulator.profile");
        }
    }
    if (j.contains("pid")) {
        const auto& p = j["pid"];
        detail::read_field(p, "kp", cfg.pid.kp, "pid");
        detail::read_field(p, "ki", cfg.pid.ki, "pid");
        detail::read_field(p, "kd", cfg.pid.kd, "pid");
        detail::read_field(p, "integral_clamp", cfg.pid.integral_clamp, "pid");
        detail::read_field(p, "output_clamp_rad", cfg.pid.output_clamp_rad, "pid");
    }
    if (j.contains("pipeline")) {
        const auto& p = j["pipeline"];
        detail::read_field(p, "k", cfg.pipeline.k, "pipeline");
        detail::read_field(p, "flip_steering_sign", cfg.pipeline.flip_steering_sign, "pipeline");
        detail::read_field(p, "scan_format", cfg.pipeline.scan_format, "pipeline");
    }
    if (j.contains("ssrl")) {
        const auto& s = j["ssrl"];
        detail::read_field(s, "sigma_y", cfg.ssrl.task.sigma_y, "ssrl");
        detail::read_field(s, "sigma_1", cfg.ssrl.task.sigma_1, "ssrl");
        detail::read_field(s, "sigma_2", cfg.ssrl.task.sigma_2, "ssrl");
        detail::read_field(s, "bias_g", cfg.ssrl.task.bias_g, "ssrl");
        detail::read_field(s, "n", cfg.ssrl.task.n, "ssrl");
        detail::read_field(s, "seed", cfg.ssrl.task.seed, "ssrl");
        detail::read_field(s, "n_test", cfg.ssrl.n_test, "ssrl");
        detail::read_field(s, "seeds", cfg.ssrl.seeds, "ssrl");
        detail::read_field(s, "use_mlp", cfg.ssrl.use_mlp, "ssrl");
    }
    return cfg;
}

inline nlohmann::json config_to_json(const Config& cfg) {
    nlohmann::json j;
    j["schema_version"] = kConfigSchemaVersion;
    j["vehicle"] = {{"wheelbase_m", cfg.vehicle.wheelbase_m},
                    {"steering_ratio", cfg.vehicle.steering_ratio},
                    {"min_motion_m", cfg.vehicle.min_motion_m}};
    j["odometry"] = {{"max_iterations", cfg.odometry.max_iterations},
                     {"convergence_tol", cfg.odometry.convergence_tol},
                     {"max_correspondence_m", cfg.odometry.max_correspondence_m},
                     {"voxel_size_m", cfg.odometry.voxel_size_m},
                     {"use_motion_prior", cfg.odometry.use_motion_prior}};
    j["simulator"] = {
        {"dt", cfg.simulator.dt},
        {"speed_mps", cfg.simulator.speed_mps},
        {"model", cfg.simulator.model},
        {"noise_seed", cfg.simulator.noise_seed},
        {"lidar",
         {{"beam_count", cfg.simulator.lidar.beam_count},
          {"max_range_m", cfg.simulator.lidar.max_range_m},
          {"azimuth_fov_rad", cfg.simulator.lidar.azimuth_fov_rad},
          {"range_noise_sigma_m", cfg.simulator.lidar.range_noise_sigma_m}}},
        {"world",
         {{"seed", cfg.simulator.world.seed},
          {"extent_m", cfg.simulator.world.extent_m},
          {"density_per_m2", cfg.simulator.world.density_per_m2}}},
        {"profile",
         {{"kind", cfg.simulator.profile.kind},
          {"frames", cfg.simulator.profile.frames},
          {"value", cfg.simulator.profile.value},
          {"amplitude", cfg.simulator.profile.amplitude},
          {"period_frames", cfg.simulator.profile.period_frames},
          {"values", cfg.simulator.profile.values}}}};
    j["pid"] = {{"kp", cfg.pid.kp},
                {"ki", cfg.pid.ki},
                {"kd", cfg.pid.kd},
                {"integral_clamp", cfg.pid.integral_clamp},
                {"output_clamp_rad", cfg.pid.output_clamp_rad}};
    j["pipeline"] = {{"k", cfg.pipeline.k},
                     {"flip_steering_sign", cfg.pipeline.flip_steering_sign},
                     {"scan_format", cfg.pipeline.scan_format}};
    j["ssrl"] = {{"sigma_y", cfg.ssrl.task.sigma_y}, {"sigma_1", cfg.ssrl.task.sigma_1},
                 {"sigma_2", cfg.ssrl.task.sigma_2}, {"bias_g", cfg.ssrl.task.bias_g},
                 {"n", cfg.ssrl.task.n},             {"seed", cfg.ssrl.task.seed},
                 {"n_test", cfg.ssrl.n_test},        {"seeds", cfg.ssrl.seeds},
                 {"use_mlp", cfg.ssrl.use_mlp}};
    return j;
}

/// Set one value by dotted path ("vehicle.wheelbase_m=2.9"); the value is
/// parsed as JSON when possible, else taken as a string.
inline void apply_override(nlohmann::json& doc, const std::string& dotted_path,
                           const std::string& value) {
    std::string pointer = "/";
    for (char c : dotted_path) pointer += c == '.' ? '/' : c;
    nlohmann::json parsed;
    try {
        parsed = nlohmann::json::parse(value);
    } catch (const nlohmann::json::exception&) {
        parsed = value;
    }
    try {
        doc[nlohmann::json::json_pointer(pointer)] = parsed;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(dotted_path, std::string("cannot apply override: ") + e.what());
    }
}

inline nlohmann::json load_config_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid config JSON: ") + e.what());
    }
}

}  // namespace steergen
