// Copyright Contributors to the sdfad Project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "sdfad/error.hpp"
#include "sdfad/mesh.hpp"
#include "sdfad/rng.hpp"
#include "sdfad/vec3.hpp"

namespace sdfad {

/// Test-time point set. Labels, when present, mark anomalous points (1).
struct PointCloud {
    std::vector<Vec3> points;
    std::optional<std::vector<std::uint8_t>> labels;

    std::size_t size() const { return points.size(); }
};

/// Per-coordinate Gaussian perturbation used by the noise-robustness sweep.
/// sigma = 0 returns the input unchanged; labels ride along untouched.
inline PointCloud inject_gaussian_noise(const PointCloud& cloud, double sigma,
                                        SplitMix64& rng) {
    if (sigma < 0.0) raise(ErrorKind::InvalidConfig, "noise sigma must be nonnegative");
    PointCloud out = cloud;
    if (sigma == 0.0) return out;
    for (auto& p : out.points) {
        p += rng.next_normal_vec3() * sigma;
    }
    return out;
}

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (const char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace detail

/// Point cloud CSV: header `x,y,z`, one point per row.
inline void save_cloud_csv(const PointCloud& cloud, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorKind::Io, "cannot write cloud file: " + path);
    out << "x,y,z\n";
    for (const auto& p : cloud.points) {
        out << detail::format_double(p.x) << ',' << detail::format_double(p.y) << ','
            << detail::format_double(p.z) << '\n';
    }
}

inline PointCloud load_cloud_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorKind::Io, "cannot open cloud file: " + path);
    PointCloud cloud;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        if (lineno == 1 && line.rfind("x,", 0) == 0) continue; // header
        const auto cols = detail::split_csv(line);
        if (cols.size() < 3) detail::parse_error(path, lineno, "expected x,y,z row");
        Vec3 p;
        for (int k = 0; k < 3; ++k) {
            if (!detail::parse_double(cols[k], p[k])) {
                detail::parse_error(path, lineno, "bad coordinate '" + cols[k] + "'");
            }
        }
        cloud.points.push_back(p);
    }
    return cloud;
}

/// Labels CSV: header `index,label`, label 0 = normal, 1 = anomalous.
inline void save_labels_csv(const std::vector<std::uint8_t>& labels,
                            const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorKind::Io, "cannot write labels file: " + path);
    out << "index,label\n";
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out << i << ',' << static_cast<int>(labels[i]) << '\n';
    }
}

inline std::vector<std::uint8_t> load_labels_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorKind::Io, "cannot open labels file: " + path);
    std::vector<std::pair<std::size_t, std::uint8_t>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        if (lineno == 1 && line.rfind("index,", 0) == 0) continue;
        const auto cols = detail::split_csv(line);
        if (cols.size() < 2) detail::parse_error(path, lineno, "expected index,label row");
        std::size_t index = 0;
        int label = 0;
        try {
            index = std::stoull(cols[0]);
            label = std::stoi(cols[1]);
        } catch (...) {
            detail::parse_error(path, lineno, "bad index/label row");
        }
        if (label != 0 && label != 1) {
            detail::parse_error(path, lineno, "label must be 0 or 1");
        }
        rows.emplace_back(index, static_cast<std::uint8_t>(label));
    }
    std::vector<std::uint8_t> labels(rows.size(), 0);
    for (const auto& [index, label] : rows) {
        if (index >= labels.size()) {
            raise(ErrorKind::Parse, path + ": label index out of range");
        }
        labels[index] = label;
    }
    return labels;
}

} // namespace sdfad
