// Copyright Contributors to the sdfad Project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "sdfad/error.hpp"
#include "sdfad/mesh.hpp"
#include "sdfad/vec3.hpp"

namespace sdfad {

/// Closest feature of a triangle: the sign of a mesh distance comes from the
/// pseudonormal of this feature, so it must be classified exactly.
enum class TriFeature : std::uint8_t {
    Vertex0, Vertex1, Vertex2,
    Edge01, Edge12, Edge20,
    Face,
};

struct TriangleClosest {
    Vec3 point;
    TriFeature feature;
};

/// Closest point on triangle (a, b, c) to p, with the Voronoi-region feature.
/// Region tests use exact comparisons, no epsilons (Ericson's construction).
inline TriangleClosest closest_point_on_triangle(const Vec3& p, const Vec3& a,
                                                 const Vec3& b, const Vec3& c) {
    const Vec3 ab = b - a;
    const Vec3 ac = c - a;
    const Vec3 ap = p - a;
    const double d1 = dot(ab, ap);
    const double d2 = dot(ac, ap);
    if (d1 <= 0.0 && d2 <= 0.0) return {a, TriFeature::Vertex0};

    const Vec3 bp = p - b;
    const double d3 = dot(ab, bp);
    const double d4 = dot(ac, bp);
    if (d3 >= 0.0 && d4 <= d3) return {b, TriFeature::Vertex1};

    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        const double v = d1 / (d1 - d3);
        return {a + ab * v, TriFeature::Edge01};
    }

    const Vec3 cp = p - c;
    const double d5 = dot(ab, cp);
    const double d6 = dot(ac, cp);
    if (d6 >= 0.0 && d5 <= d6) return {c, TriFeature::Vertex2};

    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        const double w = d2 / (d2 - d6);
        return {a + ac * w, TriFeature::Edge20};
    }

    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return {b + (c - b) * w, TriFeature::Edge12};
    }

    const double denom = 1.0 / (va + vb + vc);
    const double v = vb * denom;
    const double w = vc * denom;
    return {a + ab * v + ac * w, TriFeature::Face};
}

struct SurfaceHit {
    double squared_distance = std::numeric_limits<double>::infinity();
    std::int32_t face = -1;
    Vec3 point{};
    TriFeature feature = TriFeature::Face;
};

namespace detail {

/// Ties between equidistant faces are broken toward the lower face index so
/// the brute-force path and the BVH path agree bit for bit.
inline bool hit_improves(const SurfaceHit& best, double d2, std::int32_t face) {
    return d2 < best.squared_distance ||
           (d2 == best.squared_distance && face < best.face);
}

inline void consider_face(const TriangleMesh& mesh, const Vec3& q, std::int32_t f,
                          SurfaceHit& best) {
    if (mesh.face_degenerate[f]) return;
    const auto& [i0, i1, i2] = mesh.faces[f];
    const TriangleClosest cp =
        closest_point_on_triangle(q, mesh.vertices[i0], mesh.vertices[i1], mesh.vertices[i2]);
    const double d2 = squared_norm(q - cp.point);
    if (hit_improves(best, d2, f)) {
        best = {d2, f, cp.point, cp.feature};
    }
}

inline Vec3 feature_pseudonormal(const TriangleMesh& mesh, const SurfaceHit& hit) {
    const auto f = hit.face;
    switch (hit.feature) {
        case TriFeature::Vertex0: return mesh.vertex_pseudonormals[mesh.faces[f][0]];
        case TriFeature::Vertex1: return mesh.vertex_pseudonormals[mesh.faces[f][1]];
        case TriFeature::Vertex2: return mesh.vertex_pseudonormals[mesh.faces[f][2]];
        case TriFeature::Edge01: return mesh.edge_pseudonormals[mesh.face_edges[f][0]];
        case TriFeature::Edge12: return mesh.edge_pseudonormals[mesh.face_edges[f][1]];
        case TriFeature::Edge20: return mesh.edge_pseudonormals[mesh.face_edges[f][2]];
        case TriFeature::Face: break;
    }
    return mesh.face_normals[f];
}

inline double sign_hit(const TriangleMesh& mesh, const Vec3& q, const SurfaceHit& hit) {
    const double d = std::sqrt(hit.squared_distance);
    if (d == 0.0) return 0.0;
    const Vec3 n = feature_pseudonormal(mesh, hit);
    return dot(q - hit.point, n) < 0.0 ? -d : d;
}

} // namespace detail

/// All-triangles signed distance. This is the test oracle: O(faces) per
/// query, shares the per-triangle routine with the BVH path.
inline double signed_distance_brute(const TriangleMesh& mesh, const Vec3& q) {
    SurfaceHit best;
    for (std::int32_t f = 0; f < static_cast<std::int32_t>(mesh.face_count()); ++f) {
        detail::consider_face(mesh, q, f, best);
    }
    if (best.face < 0) raise(ErrorKind::NoValidFaces, "mesh has no non-degenerate faces");
    return detail::sign_hit(mesh, q, best);
}

/// Axis-aligned bounding-volume hierarchy for nearest-triangle queries.
/// Construction is single-threaded; queries are pure reads and safe to run
/// from any number of threads concurrently.
class MeshBvh {
public:
    explicit MeshBvh(const TriangleMesh& mesh) : mesh_(&mesh) {
        for (std::int32_t f = 0; f < static_cast<std::int32_t>(mesh.face_count()); ++f) {
            if (!mesh.face_degenerate[f]) order_.push_back(f);
        }
        if (order_.empty()) raise(ErrorKind::NoValidFaces, "mesh has no non-degenerate faces");
        centroids_.resize(mesh.face_count());
        for (const auto f : order_) {
            const auto& [i0, i1, i2] = mesh.faces[f];
            centroids_[f] =
                (mesh.vertices[i0] + mesh.vertices[i1] + mesh.vertices[i2]) / 3.0;
        }
        nodes_.reserve(2 * order_.size());
        build(0, static_cast<std::int32_t>(order_.size()));
    }

    SurfaceHit closest(const Vec3& q) const {
        SurfaceHit best;
        std::int32_t stack[64];
        int top = 0;
        stack[top++] = 0;
        while (top > 0) {
            const Node& node = nodes_[stack[--top]];
            if (box_squared_distance(node, q) > best.squared_distance) continue;
            if (node.left < 0) {
                for (std::int32_t i = node.begin; i < node.end; ++i) {
                    detail::consider_face(*mesh_, q, order_[i], best);
                }
                continue;
            }
            const double dl = box_squared_distance(nodes_[node.left], q);
            const double dr = box_squared_distance(nodes_[node.right], q);
            // Visit the nearer child first; the farther one is pushed first
            // so it is popped second. Pruning is strict (>) so equidistant
            // faces are still visited and the index tie-break stays exact.
            if (dl <= dr) {
                if (dr <= best.squared_distance) stack[top++] = node.right;
                if (dl <= best.squared_distance) stack[top++] = node.left;
            } else {
                if (dl <= best.squared_distance) stack[top++] = node.left;
                if (dr <= best.squared_distance) stack[top++] = node.right;
            }
        }
        return best;
    }

    /// Signed point-to-mesh distance: unsigned distance to the closest
    /// triangle, sign from the angle-weighted pseudonormal of the closest
    /// feature (negative inside, positive outside).
    double signed_distance(const Vec3& q) const {
        return detail::sign_hit(*mesh_, q, closest(q));
    }

    const TriangleMesh& mesh() const { return *mesh_; }

private:
    struct Node {
        Vec3 lo, hi;
        std::int32_t left = -1, right = -1;
        std::int32_t begin = 0, end = 0;
    };

    static constexpr std::int32_t kLeafSize = 4;

    std::int32_t build(std::int32_t begin, std::int32_t end) {
        const auto id = static_cast<std::int32_t>(nodes_.size());
        nodes_.push_back({});
        Vec3 lo{1e300, 1e300, 1e300};
        Vec3 hi{-1e300, -1e300, -1e300};
        for (std::int32_t i = begin; i < end; ++i) {
            for (const auto vi : mesh_->faces[order_[i]]) {
                lo = cwise_min(lo, mesh_->vertices[vi]);
                hi = cwise_max(hi, mesh_->vertices[vi]);
            }
        }
        nodes_[id].lo = lo;
        nodes_[id].hi = hi;
        nodes_[id].begin = begin;
        nodes_[id].end = end;
        if (end - begin > kLeafSize) {
            const Vec3 extent = hi - lo;
            int axis = 0;
            if (extent.y > extent[axis]) axis = 1;
            if (extent.z > extent[axis]) axis = 2;
            const std::int32_t mid = (begin + end) / 2;
            std::nth_element(order_.begin() + begin, order_.begin() + mid,
                             order_.begin() + end,
                             [this, axis](std::int32_t a, std::int32_t b) {
                                 const double ca = centroids_[a][axis];
                                 const double cb = centroids_[b][axis];
                                 return ca < cb || (ca == cb && a < b);
                             });
            const std::int32_t left = build(begin, mid);
            const std::int32_t right = build(mid, end);
            nodes_[id].left = left;
            nodes_[id].right = right;
        }
        return id;
    }

    double box_squared_distance(const Node& n, const Vec3& q) const {
        double d2 = 0.0;
        for (int k = 0; k < 3; ++k) {
            const double v = std::clamp(q[k], n.lo[k], n.hi[k]) - q[k];
            d2 += v * v;
        }
        return d2;
    }

    const TriangleMesh* mesh_;
    std::vector<std::int32_t> order_;
    std::vector<Vec3> centroids_;
    std::vector<Node> nodes_;
};

} // namespace sdfad
