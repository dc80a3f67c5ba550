#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "steergen/errors.hpp"
#include "steergen/geometry.hpp"
#include "steergen/odometry.hpp"
#include "steergen/ply.hpp"
#include "steergen/pipeline_types.hpp"
#include "steergen/simulator.hpp"

namespace steergen {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// formatting helpers

/// Shortest representation that round-trips through double.
inline std::string format_double(double v) {
    if (std::isinf(v)) return v > 0.0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s, long line, const char* field) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ParseError(std::string(field) + ": not a number: '" + s + "'", line);
    }
}

/// Write content to `path` atomically (temp file + rename).
inline void atomic_write(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// trajectory JSONL
//
// One object per line:
//   {"frame": int, "t": seconds, "q": [w,x,y,z], "p": [x,y,z]}
// "R" (9 floats, row-major) may replace "q"; the two are mutually exclusive.

inline std::string trajectory_to_jsonl(const TrajectoryEstimate& traj) {
    std::ostringstream out;
    for (std::size_t i = 0; i < traj.poses.size(); ++i) {
        const Eigen::Quaterniond q = traj.poses[i].quaternion().normalized();
        const Eigen::Vector3d& p = traj.poses[i].translation;
        nlohmann::json row;
        row["frame"] = static_cast<long>(i);
        row["t"] = traj.timestamps[i];
        row["q"] = {q.w(), q.x(), q.y(), q.z()};
        row["p"] = {p.x(), p.y(), p.z()};
        out << row.dump() << "\n";
    }
    return out.str();
}

inline void save_trajectory(const fs::path& path, const TrajectoryEstimate& traj) {
    atomic_write(path, trajectory_to_jsonl(traj));
}

inline TrajectoryEstimate load_trajectory(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_trajectory: cannot open " + path.string());

    TrajectoryEstimate traj;
    std::string line;
    long line_no = 0;
    long prev_frame = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json row;
        try {
            row = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
        }
        if (!row.contains("frame") || !row.contains("t") || !row.contains("p"))
            throw ParseError("missing required key (frame, t, p)", line_no);
        const bool has_q = row.contains("q");
        const bool has_r = row.contains("R");
        if (has_q == has_r)
            throw ParseError("exactly one of 'q' or 'R' is required", line_no);

        const long frame = row["frame"].get<long>();
        if (frame <= prev_frame)
            throw SchemaError("frame", "indices must be strictly increasing (line " +
                                           std::to_string(line_no) + ")");
        prev_frame = frame;

        const auto pv = row["p"].get<std::vector<double>>();
        if (pv.size() != 3) throw SchemaError("p", "frame " + std::to_string(frame) + ": need 3 components");
        const Eigen::Vector3d p(pv[0], pv[1], pv[2]);
        if (!p.allFinite()) throw SchemaError("p", "frame " + std::to_string(frame) + ": non-finite translation");

        Eigen::Matrix3d rot;
        if (has_q) {
            const auto qv = row["q"].get<std::vector<double>>();
            if (qv.size() != 4) throw SchemaError("q", "frame " + std::to_string(frame) + ": need 4 components");
            Eigen::Quaterniond q(qv[0], qv[1], qv[2], qv[3]);
            if (!q.coeffs().allFinite())
                throw SchemaError("q", "frame " + std::to_string(frame) + ": non-finite quaternion");
            if (std::abs(q.norm() - 1.0) > 1e-6)
                throw SchemaError("q", "frame " + std::to_string(frame) + ": quaternion norm " +
                                           format_double(q.norm()) + " is not unit");
            rot = q.normalized().toRotationMatrix();
        } else {
            const auto rv = row["R"].get<std::vector<double>>();
            if (rv.size() != 9) throw SchemaError("R", "frame " + std::to_string(frame) + ": need 9 components");
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) rot(r, c) = rv[3 * r + c];
            if (!rot.allFinite())
                throw SchemaError("R", "frame " + std::to_string(frame) + ": non-finite rotation");
            if (orthonormality_residual(rot) > 1e-6 || rot.determinant() < 0.0)
                throw SchemaError("R", "frame " + std::to_string(frame) + ": not a proper rotation");
        }

        traj.poses.emplace_back(rot, p);
        traj.timestamps.push_back(row["t"].get<double>());
        traj.residuals.push_back(0.0);
    }
    if (traj.poses.empty()) throw ParseError("empty trajectory file", line_no);
    return traj;
}

// ---------------------------------------------------------------------------
// label CSV
// header: frame,timestamp,steering_pred_rad,wheel_angle_rad,radius_m,valid,source

inline constexpr const char* kLabelsCsvHeader =
    "frame,timestamp,steering_pred_rad,wheel_angle_rad,radius_m,valid,source";

inline std::string labels_to_csv(const std::vector<PseudoLabelRecord>& records) {
    std::ostringstream out;
    out << kLabelsCsvHeader << "\n";
    for (const auto& r : records) {
        out << r.frame << "," << format_double(r.timestamp) << ","
            << format_double(r.steering_pred_rad) << "," << format_double(r.wheel_angle_rad) << ","
            << format_double(r.radius_m) << "," << (r.valid ? 1 : 0) << ","
            << (r.source == LabelSource::proposed ? "proposed" : "pid") << "\n";
    }
    return out.str();
}

inline void save_labels(const fs::path& path, const std::vector<PseudoLabelRecord>& records) {
    atomic_write(path, labels_to_csv(records));
}

inline std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

inline std::vector<PseudoLabelRecord> load_labels(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_labels: cannot open " + path.string());

    std::string line;
    long line_no = 0;
    if (!std::getline(in, line)) throw ParseError("empty file", 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kLabelsCsvHeader) throw ParseError("unexpected header: " + line, line_no);

    std::vector<PseudoLabelRecord> records;
    long prev_frame = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv_row(line);
        if (f.size() != 7) throw ParseError("expected 7 columns, got " + std::to_string(f.size()), line_no);
        PseudoLabelRecord r;
        r.frame = static_cast<long>(parse_double(f[0], line_no, "frame"));
        if (r.frame <= prev_frame) throw SchemaError("frame", "indices must be strictly increasing (line " +
                                                                  std::to_string(line_no) + ")");
        prev_frame = r.frame;
        r.timestamp = parse_double(f[1], line_no, "timestamp");
        r.steering_pred_rad = parse_double(f[2], line_no, "steering_pred_rad");
        r.wheel_angle_rad = parse_double(f[3], line_no, "wheel_angle_rad");
        r.radius_m = parse_double(f[4], line_no, "radius_m");
        if (f[5] == "1" || f[5] == "true") r.valid = true;
        else if (f[5] == "0" || f[5] == "false") r.valid = false;
        else throw ParseError("valid: expected 0/1, got '" + f[5] + "'", line_no);
        if (f[6] == "proposed") r.source = LabelSource::proposed;
        else if (f[6] == "pid") r.source = LabelSource::pid;
        else throw ParseError("source: expected proposed/pid, got '" + f[6] + "'", line_no);
        records.push_back(r);
    }
    return records;
}

// ---------------------------------------------------------------------------
// ground-truth CSV
// header: frame,timestamp,steering_truth_rad

inline constexpr const char* kTruthCsvHeader = "frame,timestamp,steering_truth_rad";

struct TruthRow {
    long frame = 0;
    double timestamp = 0.0;
    double steering_truth_rad = 0.0;
};

inline std::string truth_to_csv(const std::vector<TruthRow>& rows) {
    std::ostringstream out;
    out << kTruthCsvHeader << "\n";
    for (const auto& r : rows)
        out << r.frame << "," << format_double(r.timestamp) << ","
            << format_double(r.steering_truth_rad) << "\n";
    return out.str();
}

inline void save_truth(const fs::path& path, const std::vector<TruthRow>& rows) {
    atomic_write(path, truth_to_csv(rows));
}

inline std::vector<TruthRow> load_truth(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_truth: cannot open " + path.string());

    std::string line;
    long line_no = 0;
    if (!std::getline(in, line)) throw ParseError("empty file", 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kTruthCsvHeader) throw ParseError("unexpected header: " + line, line_no);

    std::vector<TruthRow> rows;
    long prev_frame = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv_row(line);
        if (f.size() != 3) throw ParseError("expected 3 columns, got " + std::to_string(f.size()), line_no);
        TruthRow r;
        r.frame = static_cast<long>(parse_double(f[0], line_no, "frame"));
        if (r.frame <= prev_frame) throw SchemaError("frame", "indices must be strictly increasing (line " +
                                                                  std::to_string(line_no) + ")");
        prev_frame = r.frame;
        r.timestamp = parse_double(f[1], line_no, "timestamp");
        r.steering_truth_rad = parse_double(f[2], line_no, "steering_truth_rad");
        if (!std::isfinite(r.steering_truth_rad))
            throw SchemaError("steering_truth_rad", "frame " + std::to_string(r.frame) + ": non-finite");
        rows.push_back(r);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// scan directories (scan_%06d.ply)

inline std::string scan_filename(std::size_t frame) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "scan_%06zu.ply", frame);
    return std::string(buf);
}

inline void save_scans(const fs::path& dir, const std::vector<PointCloud>& scans,
                       PlyFormat format = PlyFormat::binary_little_endian) {
    fs::create_directories(dir);
    for (std::size_t i = 0; i < scans.size(); ++i) write_ply(dir / scan_filename(i), scans[i], format);
}

inline std::vector<PointCloud> load_scans(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw std::runtime_error("load_scans: not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("scan_", 0) == 0 && entry.path().extension() == ".ply")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::runtime_error("load_scans: no scan_*.ply files in " + dir.string());
    std::vector<PointCloud> scans;
    scans.reserve(files.size());
    for (const auto& f : files) scans.push_back(read_ply(f));
    return scans;
}

// ---------------------------------------------------------------------------
// full driving-log export

/// Write a DrivingLog as trajectory.jsonl + ground_truth.csv + scans/*.ply.
inline void export_log(const DrivingLog& log, const fs::path& dir,
                       PlyFormat format = PlyFormat::binary_little_endian) {
    fs::create_directories(dir);
    TrajectoryEstimate traj;
    traj.poses = log.poses;
    traj.timestamps = log.timestamps;
    traj.residuals.assign(log.poses.size(), 0.0);
    save_trajectory(dir / "trajectory.jsonl", traj);

    std::vector<TruthRow> rows;
    rows.reserve(log.size());
    for (std::size_t i = 0; i < log.size(); ++i)
        rows.push_back(TruthRow{static_cast<long>(i), log.timestamps[i], log.steering_truth[i]});
    save_truth(dir / "ground_truth.csv", rows);

    save_scans(dir / "scans", log.scans, format);
}

}  // namespace steergen
