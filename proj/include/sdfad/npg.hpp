// Copyright Contributors to the sdfad Project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "sdfad/cloud.hpp"
#include "sdfad/error.hpp"
#include "sdfad/mesh.hpp"
#include "sdfad/rng.hpp"
#include "sdfad/signed_distance.hpp"
#include "sdfad/vec3.hpp"

namespace sdfad {

enum class PointOrigin : std::uint8_t { Surface = 0, NearSurface = 1, Uniform = 2 };

inline const char* origin_name(PointOrigin o) {
    switch (o) {
        case PointOrigin::Surface: return "surface";
        case PointOrigin::NearSurface: return "near";
        case PointOrigin::Uniform: return "uniform";
    }
    return "?";
}

/// Inverse-CDF table over faces: each face carries probability mass
/// proportional to its area, degenerate faces carry zero.
struct SamplingTable {
    std::vector<double> cumulative_probability;
    double total_area = 0.0;
};

/// Knobs of the point generator. Per-class counts are anchored to the
/// surface class: class k receives round(base_surface_count * ratio[k] /
/// ratio[0]) points, matching the a:b:c ratio notation.
struct SamplingConfig {
    std::int64_t base_surface_count = 20000;
    std::array<std::int64_t, 3> ratio{2, 2, 1}; // surface : near : uniform
    double near_sigma = 0.05;
    std::uint64_t seed = 1;
};

/// Training points with ground-truth signed distances and origin tags.
/// Surface points carry d* = 0 exactly; noisy points carry the signed
/// mesh distance of their position.
struct GeneratedPointSet {
    std::vector<Vec3> points;
    std::vector<double> gt_signed_distance;
    std::vector<PointOrigin> origin;

    std::size_t size() const { return points.size(); }
};

inline SamplingTable build_sampling_table(const TriangleMesh& mesh) {
    double total = 0.0;
    for (std::size_t f = 0; f < mesh.face_count(); ++f) {
        if (!mesh.face_degenerate[f]) total += mesh.face_areas[f];
    }
    if (total <= 0.0) raise(ErrorKind::NoValidFaces, "mesh has no non-degenerate faces");
    SamplingTable table;
    table.total_area = total;
    table.cumulative_probability.resize(mesh.face_count());
    double acc = 0.0;
    for (std::size_t f = 0; f < mesh.face_count(); ++f) {
        if (!mesh.face_degenerate[f]) acc += mesh.face_areas[f] / total;
        table.cumulative_probability[f] = acc;
    }
    table.cumulative_probability.back() = 1.0;
    return table;
}

/// Uniform point on a triangle via the square-root reparameterization:
/// mu = 1 - sqrt(u1), nu = sqrt(u1) * (1 - sqrt(u2)).
inline Vec3 sample_surface_point(const Vec3& p1, const Vec3& p2, const Vec3& p3,
                                 double u1, double u2) {
    const double su1 = std::sqrt(u1);
    const double mu = 1.0 - su1;
    const double nu = su1 * (1.0 - std::sqrt(u2));
    return p1 * (1.0 - mu - nu) + p2 * mu + p3 * nu;
}

inline std::size_t pick_face(const SamplingTable& table, double u) {
    const auto& cdf = table.cumulative_probability;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return it == cdf.end() ? cdf.size() - 1
                           : static_cast<std::size_t>(it - cdf.begin());
}

/// Draw order per point: face selector u, then barycentric u1, u2.
inline std::vector<Vec3> sample_surface(const TriangleMesh& mesh, const SamplingTable& table,
                                        std::int64_t count, SplitMix64& rng) {
    std::vector<Vec3> out;
    out.reserve(static_cast<std::size_t>(count > 0 ? count : 0));
    for (std::int64_t i = 0; i < count; ++i) {
        const double u = rng.next_double();
        const std::size_t f = pick_face(table, u);
        const auto& [i0, i1, i2] = mesh.faces[f];
        const double u1 = rng.next_double();
        const double u2 = rng.next_double();
        out.push_back(sample_surface_point(mesh.vertices[i0], mesh.vertices[i1],
                                           mesh.vertices[i2], u1, u2));
    }
    return out;
}

inline std::vector<Vec3> sample_near_surface(const std::vector<Vec3>& surface_points,
                                             double sigma, SplitMix64& rng) {
    if (!(sigma > 0.0)) raise(ErrorKind::InvalidConfig, "near-surface sigma must be positive");
    std::vector<Vec3> out;
    out.reserve(surface_points.size());
    for (const auto& p : surface_points) {
        out.push_back(p + rng.next_normal_vec3() * sigma);
    }
    return out;
}

inline std::vector<Vec3> sample_uniform(std::int64_t count, SplitMix64& rng) {
    std::vector<Vec3> out;
    out.reserve(static_cast<std::size_t>(count > 0 ? count : 0));
    for (std::int64_t i = 0; i < count; ++i) {
        const double x = rng.next_uniform(-1.0, 1.0);
        const double y = rng.next_uniform(-1.0, 1.0);
        const double z = rng.next_uniform(-1.0, 1.0);
        out.push_back({x, y, z});
    }
    return out;
}

/// Builds the pooled training set for one mesh (already normalized into
/// [-1,1]^3): surface points with d* = 0, near-surface Gaussian offsets and
/// uniform points with d* from the BVH distance field. Points are laid out
/// as the three contiguous class blocks in that order.
///
/// RNG streams (split from config.seed): 0 surface, 1 near-surface base
/// points, 2 near-surface noise, 3 uniform. One stream per class keeps
/// every class reproducible independently of the other counts.
inline GeneratedPointSet generate_training_set(const TriangleMesh& mesh,
                                               const MeshBvh& bvh,
                                               const SamplingConfig& config) {
    if (config.ratio[0] <= 0) {
        raise(ErrorKind::InvalidConfig, "surface ratio component must be positive");
    }
    if (config.base_surface_count < 0) {
        raise(ErrorKind::InvalidConfig, "base surface count must be nonnegative");
    }
    const SamplingTable table = build_sampling_table(mesh);
    const double s = static_cast<double>(config.base_surface_count);
    const auto count_for = [&](std::int64_t alpha) {
        return static_cast<std::int64_t>(
            std::llround(s * static_cast<double>(alpha) / static_cast<double>(config.ratio[0])));
    };
    const std::int64_t n_surf = config.base_surface_count;
    const std::int64_t n_near = count_for(config.ratio[1]);
    const std::int64_t n_uni = count_for(config.ratio[2]);

    SplitMix64 root(config.seed);
    SplitMix64 rng_surf = root.split(0);
    SplitMix64 rng_near_base = root.split(1);
    SplitMix64 rng_near_noise = root.split(2);
    SplitMix64 rng_uni = root.split(3);

    GeneratedPointSet set;
    set.points = sample_surface(mesh, table, n_surf, rng_surf);
    set.gt_signed_distance.assign(set.points.size(), 0.0);
    set.origin.assign(set.points.size(), PointOrigin::Surface);

    if (n_near > 0) {
        const auto base = sample_surface(mesh, table, n_near, rng_near_base);
        const auto near = sample_near_surface(base, config.near_sigma, rng_near_noise);
        for (const auto& p : near) {
            set.points.push_back(p);
            set.gt_signed_distance.push_back(bvh.signed_distance(p));
            set.origin.push_back(PointOrigin::NearSurface);
        }
    }
    if (n_uni > 0) {
        const auto uni = sample_uniform(n_uni, rng_uni);
        for (const auto& p : uni) {
            set.points.push_back(p);
            set.gt_signed_distance.push_back(bvh.signed_distance(p));
            set.origin.push_back(PointOrigin::Uniform);
        }
    }
    return set;
}

inline GeneratedPointSet generate_training_set(const TriangleMesh& mesh,
                                               const SamplingConfig& config) {
    const MeshBvh bvh(mesh);
    return generate_training_set(mesh, bvh, config);
}

/// Inspection export, header `x,y,z,d,origin`.
inline void save_point_set_csv(const GeneratedPointSet& set, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorKind::Io, "cannot write point set file: " + path);
    out << "x,y,z,d,origin\n";
    for (std::size_t i = 0; i < set.size(); ++i) {
        const Vec3& p = set.points[i];
        out << detail::format_double(p.x) << ',' << detail::format_double(p.y) << ','
            << detail::format_double(p.z) << ',' << detail::format_double(set.gt_signed_distance[i])
            << ',' << origin_name(set.origin[i]) << '\n';
    }
}

} // namespace sdfad
