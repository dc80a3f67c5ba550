#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "steergen/errors.hpp"
#include "steergen/pointcloud.hpp"

namespace steergen {

enum class PlyFormat { ascii, binary_little_endian };

/// Write a point cloud as a PLY file with float32 x/y/z vertex properties.
inline void write_ply(const std::filesystem::path& path, const PointCloud& cloud,
                      PlyFormat format = PlyFormat::binary_little_endian) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_ply: cannot open " + path.string());

    out << "ply\n"
        << "format " << (format == PlyFormat::ascii ? "ascii" : "binary_little_endian") << " 1.0\n"
        << "element vertex " << cloud.size() << "\n"
        << "property float x\n"
        << "property float y\n"
        << "property float z\n"
        << "end_header\n";

    if (format == PlyFormat::ascii) {
        std::ostringstream line;
        line.precision(9);
        for (const auto& p : cloud.points) {
            line.str("");
            line << static_cast<float>(p.x()) << " " << static_cast<float>(p.y()) << " "
                 << static_cast<float>(p.z()) << "\n";
            out << line.str();
        }
    } else {
        for (const auto& p : cloud.points) {
            const float xyz[3] = {static_cast<float>(p.x()), static_cast<float>(p.y()),
                                  static_cast<float>(p.z())};
            out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
        }
    }
    if (!out) throw std::runtime_error("write_ply: write failed for " + path.string());
}

/// Read a PLY point cloud. Supports ascii and binary_little_endian files
/// whose vertex element carries float32 x/y/z (extra vertex properties are
/// rejected, as are non-vertex elements with data).
inline PointCloud read_ply(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_ply: cannot open " + path.string());

    long line_no = 0;
    auto next_line = [&](std::string& line) {
        if (!std::getline(in, line)) throw ParseError("unexpected end of header", line_no);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        ++line_no;
    };

    std::string line;
    next_line(line);
    if (line != "ply") throw ParseError("not a PLY file (missing magic)", line_no);

    PlyFormat format = PlyFormat::ascii;
    bool have_format = false;
    std::size_t vertex_count = 0;
    bool in_vertex_element = false;
    bool have_vertex = false;
    std::vector<std::string> vertex_props;

    for (;;) {
        next_line(line);
        std::istringstream ss(line);
        std::string word;
        ss >> word;
        if (word == "comment" || word.empty()) continue;
        if (word == "end_header") break;
        if (word == "format") {
            std::string fmt, version;
            ss >> fmt >> version;
            if (fmt == "ascii") format = PlyFormat::ascii;
            else if (fmt == "binary_little_endian") format = PlyFormat::binary_little_endian;
            else throw ParseError("unsupported PLY format '" + fmt + "'", line_no);
            have_format = true;
        } else if (word == "element") {
            std::string name;
            std::size_t count = 0;
            ss >> name >> count;
            if (name == "vertex") {
                vertex_count = count;
                in_vertex_element = true;
                have_vertex = true;
            } else {
                if (count > 0) throw ParseError("unsupported element '" + name + "'", line_no);
                in_vertex_element = false;
            }
        } else if (word == "property") {
            if (!in_vertex_element) continue;
            std::string type, name;
            ss >> type >> name;
            if (type != "float" && type != "float32")
                throw ParseError("vertex property '" + name + "' must be float32", line_no);
            vertex_props.push_back(name);
        } else {
            throw ParseError("unrecognized header keyword '" + word + "'", line_no);
        }
    }
    if (!have_format) throw ParseError("missing format line", line_no);
    if (!have_vertex) throw ParseError("missing vertex element", line_no);
    if (vertex_props != std::vector<std::string>{"x", "y", "z"})
        throw ParseError("vertex properties must be exactly x, y, z", line_no);

    PointCloud cloud;
    cloud.points.reserve(vertex_count);
    if (format == PlyFormat::ascii) {
        for (std::size_t i = 0; i < vertex_count; ++i) {
            next_line(line);
            std::istringstream ss(line);
            double x, y, z;
            if (!(ss >> x >> y >> z)) throw ParseError("malformed vertex row", line_no);
            cloud.points.emplace_back(x, y, z);
        }
    } else {
        std::vector<float> buf(vertex_count * 3);
        in.read(reinterpret_cast<char*>(buf.data()),
                static_cast<std::streamsize>(buf.size() * sizeof(float)));
        if (static_cast<std::size_t>(in.gcount()) != buf.size() * sizeof(float))
            throw ParseError("truncated binary vertex data", line_no);
        for (std::size_t i = 0; i < vertex_count; ++i)
            cloud.points.emplace_back(buf[3 * i], buf[3 * i + 1], buf[3 * i + 2]);
    }
    if (!cloud.all_finite()) throw SchemaError("vertex", "non-finite coordinate in " + path.string());
    return cloud;
}

}  // namespace steergen
