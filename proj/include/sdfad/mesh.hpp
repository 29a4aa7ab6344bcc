// Copyright Contributors to the sdfad Project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sdfad/error.hpp"
#include "sdfad/vec3.hpp"

namespace sdfad {

/// Indexed triangle surface with the derived quantities every other module
/// needs: per-face areas and normals, angle-weighted vertex pseudonormals,
/// and per-edge averaged pseudonormals (the Baerentzen-Aanaes construction
/// used to sign point-to-mesh distances).
///
/// Zero-area faces are flagged degenerate and keep a zero normal; they stay
/// in the face list but are excluded from sampling and distance queries.
struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<std::int32_t, 3>> faces;

    // Derived by finalize().
    std::vector<double> face_areas;
    std::vector<Vec3> face_normals;
    std::vector<Vec3> vertex_pseudonormals;
    std::vector<Vec3> edge_pseudonormals;
    std::vector<std::array<std::int32_t, 3>> face_edges; // edge k joins corners k, k+1
    std::vector<std::uint8_t> face_degenerate;
    bool watertight = false;

    std::size_t vertex_count() const { return vertices.size(); }
    std::size_t face_count() const { return faces.size(); }

    void finalize();
};

/// Similarity transform taking source geometry into [-margin, margin]^3.
/// The training-time transform is persisted in the checkpoint and reapplied
/// verbatim to test clouds; inference never re-fits it.
struct NormalizationTransform {
    Vec3 center{};
    double scale = 1.0;
    double margin = 1.0;

    Vec3 apply(const Vec3& p) const { return (p - center) * scale; }
    Vec3 invert(const Vec3& p) const { return p / scale + center; }
};

inline void TriangleMesh::finalize() {
    const std::size_t nf = faces.size();
    const std::size_t nv = vertices.size();

    face_areas.assign(nf, 0.0);
    face_normals.assign(nf, Vec3{});
    face_degenerate.assign(nf, 0);
    vertex_pseudonormals.assign(nv, Vec3{});
    face_edges.assign(nf, {-1, -1, -1});
    edge_pseudonormals.clear();

    std::unordered_map<std::uint64_t, std::int32_t> edge_ids;
    edge_ids.reserve(nf * 2);
    std::vector<Vec3> edge_normal_sum;
    std::vector<std::int32_t> edge_face_count;

    auto edge_key = [nv](std::int32_t a, std::int32_t b) {
        if (a > b) std::swap(a, b);
        return static_cast<std::uint64_t>(a) * nv + static_cast<std::uint64_t>(b);
    };

    for (std::size_t f = 0; f < nf; ++f) {
        const auto& [i0, i1, i2] = faces[f];
        const Vec3& p0 = vertices[i0];
        const Vec3& p1 = vertices[i1];
        const Vec3& p2 = vertices[i2];
        const Vec3 c = cross(p1 - p0, p2 - p0);
        const double cn = norm(c);
        face_areas[f] = 0.5 * cn;
        if (cn > 0.0) {
            face_normals[f] = c / cn;
        } else {
            face_degenerate[f] = 1;
        }

        for (int k = 0; k < 3; ++k) {
            const std::int32_t a = faces[f][k];
            const std::int32_t b = faces[f][(k + 1) % 3];
            const std::uint64_t key = edge_key(a, b);
            auto it = edge_ids.find(key);
            std::int32_t id;
            if (it == edge_ids.end()) {
                id = static_cast<std::int32_t>(edge_normal_sum.size());
                edge_ids.emplace(key, id);
                edge_normal_sum.push_back(Vec3{});
                edge_face_count.push_back(0);
            } else {
                id = it->second;
            }
            face_edges[f][k] = id;
            if (!face_degenerate[f]) {
                edge_normal_sum[id] += face_normals[f];
            }
            edge_face_count[id] += 1;
        }

        if (face_degenerate[f]) continue;

        // Angle-weighted accumulation at each corner.
        const Vec3* p[3] = {&p0, &p1, &p2};
        for (int k = 0; k < 3; ++k) {
            const Vec3 e1 = *p[(k + 1) % 3] - *p[k];
            const Vec3 e2 = *p[(k + 2) % 3] - *p[k];
            const double angle = std::atan2(norm(cross(e1, e2)), dot(e1, e2));
            vertex_pseudonormals[faces[f][k]] += angle * face_normals[f];
        }
    }

    edge_pseudonormals.resize(edge_normal_sum.size());
    for (std::size_t e = 0; e < edge_normal_sum.size(); ++e) {
        edge_pseudonormals[e] = normalized(edge_normal_sum[e]);
    }
    for (auto& n : vertex_pseudonormals) {
        n = normalized(n);
    }

    watertight = !edge_face_count.empty();
    for (const auto c : edge_face_count) {
        if (c != 2) {
            watertight = false;
            break;
        }
    }
}

namespace detail {

[[noreturn]] inline void parse_error(const std::string& path, std::size_t line,
                                     const std::string& what) {
    raise(ErrorKind::Parse, path + ":" + std::to_string(line) + ": " + what);
}

inline bool parse_double(const std::string& tok, double& out) {
    try {
        std::size_t pos = 0;
        out = std::stod(tok, &pos);
        return pos == tok.size();
    } catch (...) {
        return false;
    }
}

inline std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(std::move(tok));
    return out;
}

inline TriangleMesh load_obj(std::istream& in, const std::string& path) {
    TriangleMesh mesh;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        const auto toks = split_ws(line);
        if (toks.empty()) continue;
        if (toks[0] == "v") {
            if (toks.size() < 4) parse_error(path, lineno, "vertex needs 3 coordinates");
            Vec3 v;
            for (int k = 0; k < 3; ++k) {
                if (!parse_double(toks[k + 1], v[k])) {
                    parse_error(path, lineno, "bad vertex coordinate '" + toks[k + 1] + "'");
                }
            }
            mesh.vertices.push_back(v);
        } else if (toks[0] == "f") {
            if (toks.size() < 4) parse_error(path, lineno, "face needs at least 3 indices");
            std::vector<std::int32_t> idx;
            idx.reserve(toks.size() - 1);
            for (std::size_t k = 1; k < toks.size(); ++k) {
                // Accept i, i/t, i//n, i/t/n; only the vertex index is used.
                const std::string head = toks[k].substr(0, toks[k].find('/'));
                long v = 0;
                try {
                    std::size_t pos = 0;
                    v = std::stol(head, &pos);
                    if (pos != head.size()) throw std::invalid_argument(head);
                } catch (...) {
                    parse_error(path, lineno, "bad face index '" + toks[k] + "'");
                }
                if (v < 0) v += static_cast<long>(mesh.vertices.size()) + 1;
                if (v < 1 || v > static_cast<long>(mesh.vertices.size())) {
                    parse_error(path, lineno, "face index out of range: " + head);
                }
                idx.push_back(static_cast<std::int32_t>(v - 1));
            }
            // Polygons are fan-triangulated around the first vertex.
            for (std::size_t k = 1; k + 1 < idx.size(); ++k) {
                mesh.faces.push_back({idx[0], idx[k], idx[k + 1]});
            }
        }
        // All other record types (vn, vt, g, o, s, usemtl, ...) are ignored.
    }
    return mesh;
}

struct PlyProperty {
    std::string name;
    std::string type;       // scalar type, or item type for lists
    std::string count_type; // nonempty for list properties
};

struct PlyElement {
    std::string name;
    std::size_t count = 0;
    std::vector<PlyProperty> properties;
};

inline std::size_t ply_type_size(const std::string& t, const std::string& path,
                                 std::size_t lineno) {
    if (t == "char" || t == "int8" || t == "uchar" || t == "uint8") return 1;
    if (t == "short" || t == "int16" || t == "ushort" || t == "uint16") return 2;
    if (t == "int" || t == "int32" || t == "uint" || t == "uint32" || t == "float" ||
        t == "float32") return 4;
    if (t == "double" || t == "float64" || t == "int64" || t == "uint64") return 8;
    parse_error(path, lineno, "unknown property type '" + t + "'");
}

inline double ply_read_binary_scalar(std::istream& in, const std::string& type,
                                     const std::string& path) {
    unsigned char buf[8];
    const std::size_t size = ply_type_size(type, path, 0);
    if (!in.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(size))) {
        raise(ErrorKind::Parse, path + ": truncated binary payload");
    }
    auto as = [&buf]<typename T>() {
        T v;
        std::memcpy(&v, buf, sizeof(T));
        return static_cast<double>(v);
    };
    if (type == "char" || type == "int8") return as.operator()<std::int8_t>();
    if (type == "uchar" || type == "uint8") return as.operator()<std::uint8_t>();
    if (type == "short" || type == "int16") return as.operator()<std::int16_t>();
    if (type == "ushort" || type == "uint16") return as.operator()<std::uint16_t>();
    if (type == "int" || type == "int32") return as.operator()<std::int32_t>();
    if (type == "uint" || type == "uint32") return as.operator()<std::uint32_t>();
    if (type == "float" || type == "float32") return as.operator()<float>();
    if (type == "int64") return as.operator()<std::int64_t>();
    if (type == "uint64") return static_cast<double>(as.operator()<std::uint64_t>());
    return as.operator()<double>();
}

inline TriangleMesh load_ply(std::istream& in, const std::string& path) {
    std::string line;
    std::size_t lineno = 0;
    auto next_line = [&]() {
        if (!std::getline(in, line)) parse_error(path, lineno, "unexpected end of header");
        if (!line.empty() && line.back() == '\r') line.pop_back();
        ++lineno;
    };

    next_line();
    if (line != "ply") parse_error(path, lineno, "missing 'ply' magic");

    bool binary = false;
    bool format_seen = false;
    std::vector<PlyElement> elements;
    for (;;) {
        next_line();
        const auto toks = split_ws(line);
        if (toks.empty()) continue;
        if (toks[0] == "comment" || toks[0] == "obj_info") continue;
        if (toks[0] == "format") {
            if (toks.size() < 2) parse_error(path, lineno, "bad format line");
            if (toks[1] == "ascii") binary = false;
            else if (toks[1] == "binary_little_endian") binary = true;
            else parse_error(path, lineno, "unsupported format '" + toks[1] + "'");
            format_seen = true;
        } else if (toks[0] == "element") {
            if (toks.size() != 3) parse_error(path, lineno, "bad element line");
            PlyElement e;
            e.name = toks[1];
            try {
                e.count = std::stoull(toks[2]);
            } catch (...) {
                parse_error(path, lineno, "bad element count '" + toks[2] + "'");
            }
            elements.push_back(std::move(e));
        } else if (toks[0] == "property") {
            if (elements.empty()) parse_error(path, lineno, "property before element");
            PlyProperty p;
            if (toks.size() == 5 && toks[1] == "list") {
                p.count_type = toks[2];
                p.type = toks[3];
                p.name = toks[4];
            } else if (toks.size() == 3) {
                p.type = toks[1];
                p.name = toks[2];
            } else {
                parse_error(path, lineno, "bad property line");
            }
            ply_type_size(p.type, path, lineno); // validate early
            elements.back().properties.push_back(std::move(p));
        } else if (toks[0] == "end_header") {
            break;
        } else {
            parse_error(path, lineno, "unknown header keyword '" + toks[0] + "'");
        }
    }
    if (!format_seen) parse_error(path, lineno, "missing format line");

    TriangleMesh mesh;
    std::vector<std::string> ascii_toks;
    std::size_t ascii_cursor = 0;
    auto ascii_next = [&]() -> const std::string& {
        while (ascii_cursor >= ascii_toks.size()) {
            if (!std::getline(in, line)) parse_error(path, lineno, "truncated ascii payload");
            ++lineno;
            ascii_toks = split_ws(line);
            ascii_cursor = 0;
        }
        return ascii_toks[ascii_cursor++];
    };
    auto read_scalar = [&](const std::string& type) -> double {
        if (binary) return ply_read_binary_scalar(in, type, path);
        const std::string& tok = ascii_next();
        double v = 0.0;
        if (!parse_double(tok, v)) parse_error(path, lineno, "bad number '" + tok + "'");
        return v;
    };

    for (const auto& elem : elements) {
        const bool is_vertex = elem.name == "vertex";
        const bool is_face = elem.name == "face";
        for (std::size_t row = 0; row < elem.count; ++row) {
            Vec3 v{};
            for (const auto& prop : elem.properties) {
                if (!prop.count_type.empty()) {
                    const auto n = static_cast<std::size_t>(read_scalar(prop.count_type));
                    std::vector<std::int32_t> idx(n);
                    for (std::size_t k = 0; k < n; ++k) {
                        idx[k] = static_cast<std::int32_t>(read_scalar(prop.type));
                    }
                    if (is_face &&
                        (prop.name == "vertex_indices" || prop.name == "vertex_index")) {
                        if (n < 3) parse_error(path, lineno, "face with fewer than 3 indices");
                        for (std::size_t k = 1; k + 1 < n; ++k) {
                            mesh.faces.push_back({idx[0], idx[k], idx[k + 1]});
                        }
                    }
                } else {
                    const double s = read_scalar(prop.type);
                    if (is_vertex) {
                        if (prop.name == "x") v.x = s;
                        else if (prop.name == "y") v.y = s;
                        else if (prop.name == "z") v.z = s;
                    }
                }
            }
            if (is_vertex) mesh.vertices.push_back(v);
        }
    }

    for (const auto& f : mesh.faces) {
        for (const auto i : f) {
            if (i < 0 || static_cast<std::size_t>(i) >= mesh.vertices.size()) {
                raise(ErrorKind::Parse, path + ": face index out of range: " + std::to_string(i));
            }
        }
    }
    return mesh;
}

} // namespace detail

/// Loads an OBJ or PLY mesh (dispatch by content: PLY starts with "ply").
/// Polygon records are fan-triangulated. Derived areas and pseudonormals
/// are computed before returning; degenerate faces are flagged, not dropped.
inline TriangleMesh load_mesh(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorKind::Io, "cannot open mesh file: " + path);

    char magic[3] = {0, 0, 0};
    in.read(magic, 3);
    in.seekg(0);
    TriangleMesh mesh;
    if (in.gcount() == 3 && magic[0] == 'p' && magic[1] == 'l' && magic[2] == 'y') {
        mesh = detail::load_ply(in, path);
    } else {
        mesh = detail::load_obj(in, path);
    }
    if (mesh.faces.empty()) raise(ErrorKind::EmptyMesh, path + ": mesh has no faces");
    mesh.finalize();
    return mesh;
}

/// Bounding box of a vertex set as (lo, hi).
inline std::pair<Vec3, Vec3> bounding_box(const std::vector<Vec3>& points) {
    Vec3 lo{1e300, 1e300, 1e300};
    Vec3 hi{-1e300, -1e300, -1e300};
    for (const auto& p : points) {
        lo = cwise_min(lo, p);
        hi = cwise_max(hi, p);
    }
    return {lo, hi};
}

/// Fits the transform that maps `points` into [-margin, margin]^3: centered
/// on the bounding box, uniformly scaled by margin / (largest half-extent).
inline NormalizationTransform fit_normalization(const std::vector<Vec3>& points,
                                                double margin) {
    if (points.empty()) raise(ErrorKind::EmptyMesh, "cannot normalize empty geometry");
    if (!(margin > 0.0 && margin <= 1.0)) {
        raise(ErrorKind::InvalidConfig, "margin must be in (0, 1]");
    }
    const auto [lo, hi] = bounding_box(points);
    const Vec3 extent = hi - lo;
    const double half = 0.5 * std::max(extent.x, std::max(extent.y, extent.z));
    if (half <= 0.0) raise(ErrorKind::DegenerateExtent, "bounding box has zero extent");
    NormalizationTransform t;
    t.center = (lo + hi) * 0.5;
    t.scale = margin / half;
    t.margin = margin;
    return t;
}

/// Returns the mesh normalized into [-margin, margin]^3 plus the transform
/// used, which callers persist so test clouds can reuse it.
inline std::pair<TriangleMesh, NormalizationTransform> normalize(const TriangleMesh& mesh,
                                                                 double margin = 0.9) {
    const NormalizationTransform t = fit_normalization(mesh.vertices, margin);
    TriangleMesh out;
    out.vertices.reserve(mesh.vertices.size());
    for (const auto& v : mesh.vertices) out.vertices.push_back(t.apply(v));
    out.faces = mesh.faces;
    out.finalize();
    return {std::move(out), t};
}

} // namespace sdfad
