#pragma once

#include "sgr/camera.hpp"
#include "sgr/errors.hpp"
#include "sgr/geometry.hpp"
#include "sgr/scene_model.hpp"

#include <algorithm>
#include <optional>
#include <vector>

namespace sgr {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Thresholds for the pairwise relation predicates. Units are meters except
/// where noted; defaults target indoor proxemics.
struct RelationConfig {
    double close_max_m = 2.0;
    double medium_max_m = 5.0;
    double adjacency_max_m = 1.5;
    double occlusion_overlap_frac = 0.5;   // fraction of the far box's azimuth span
    double occlusion_depth_margin_m = 0.3;
    double outlier_trim_pct = 5.0;         // percent trimmed from each tail

    void validate() const {
        if (!(close_max_m > 0 && close_max_m < medium_max_m))
            throw SchemaError("require 0 < close_max_m < medium_max_m");
        if (!(adjacency_max_m > 0)) throw SchemaError("require adjacency_max_m > 0");
        if (!(occlusion_overlap_frac > 0 && occlusion_overlap_frac <= 1))
            throw SchemaError("require occlusion_overlap_frac in (0, 1]");
        if (occlusion_depth_margin_m < 0)
            throw SchemaError("require occlusion_depth_margin_m >= 0");
        if (!(outlier_trim_pct >= 0 && outlier_trim_pct < 50))
            throw SchemaError("require outlier_trim_pct in [0, 50)");
    }
};

// ---------------------------------------------------------------------------
// Point projection and association
// ---------------------------------------------------------------------------

struct Pixel {
    double u = 0, v = 0;
};

/// Project a robot-frame point to pixel coordinates, or nothing when the
/// point is degenerate for the model (at/behind the pinhole plane, or on the
/// cylinder axis). image_width fixes the panorama's angular scale; it is
/// unused by the pinhole model.
inline std::optional<Pixel> project_point(const CameraModel& cam, double image_width,
                                          const Vec3& p) {
    Vec3 pc = cam.rotation * p + cam.translation;
    if (cam.kind == CameraKind::pinhole) {
        if (pc.z <= 1e-9) return std::nullopt;
        return Pixel{cam.fx * (pc.x / pc.z) + cam.cx, cam.fy * (pc.y / pc.z) + cam.cy};
    }
    double rho = std::hypot(pc.x, pc.y);
    if (rho <= 1e-9) return std::nullopt;
    double phi = std::atan2(pc.y, pc.x);
    double two_pi = 2.0 * kPi;
    double m = std::fmod(deg_to_rad(cam.seam_azimuth_deg) - phi, two_pi);
    if (m < 0) m += two_pi;
    if (m >= two_pi) m -= two_pi;    // fmod rounding can land exactly on 2*pi
    return Pixel{image_width * (m / two_pi), cam.v_center - cam.fv * (pc.z / rho)};
}

/// Exactly the cloud points whose projection lies inside the (wrap-aware) box.
inline PointCloud points_in_box(const CameraModel& cam, double image_width,
                                const PointCloud& cloud, const Box2D& box) {
    PointCloud out;
    for (const Vec3& p : cloud) {
        auto px = project_point(cam, image_width, p);
        if (px && box.contains(px->u, px->v, image_width)) out.push_back(p);
    }
    return out;
}

/// One projection pass over the cloud, collecting each box's points. Boxes
/// are bucketed along u so a point only tests the few boxes whose u-interval
/// covers it; results match per-box points_in_box exactly.
inline std::vector<PointCloud> associate_points(const CameraModel& cam, double image_width,
                                                const PointCloud& cloud,
                                                const std::vector<Box2D>& boxes) {
    const int n_buckets = 1024;
    // Bucketing maps u through the same mod-W reduction as wrapped membership,
    // so pinhole pixels outside [0, W) land in the bucket their reduced value
    // would; such boxes are rare and the exact test decides anyway.
    std::vector<std::vector<int>> bucket_boxes(n_buckets);
    auto u_to_bucket = [&](double u) {
        double r = std::fmod(u, image_width);
        if (r < 0) r += image_width;
        int b = static_cast<int>(r / image_width * n_buckets);
        return std::clamp(b, 0, n_buckets - 1);
    };
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        const Box2D& b = boxes[i];
        int lo = u_to_bucket(b.x);
        int span = static_cast<int>(std::ceil(b.w / image_width * n_buckets)) + 1;
        for (int k = 0; k <= span && k < n_buckets; ++k)
            bucket_boxes[(lo + k) % n_buckets].push_back(static_cast<int>(i));
    }
    std::vector<PointCloud> out(boxes.size());
    for (const Vec3& p : cloud) {
        auto px = project_point(cam, image_width, p);
        if (!px) continue;
        for (int bi : bucket_boxes[u_to_bucket(px->u)])
            if (boxes[bi].contains(px->u, px->v, image_width)) out[bi].push_back(p);
    }
    return out;
}

// ---------------------------------------------------------------------------
// 3D center and box from an associated point set
// ---------------------------------------------------------------------------

namespace detail {

/// Number of samples dropped from each tail: floor(n * pct / 100).
inline std::size_t trim_count(std::size_t n, double trim_pct) {
    return static_cast<std::size_t>(static_cast<double>(n) * trim_pct / 100.0);
}

inline void sorted_axis(const PointCloud& pts, int axis, std::vector<double>& vals) {
    vals.clear();
    vals.reserve(pts.size());
    for (const Vec3& p : pts) vals.push_back(axis == 0 ? p.x : axis == 1 ? p.y : p.z);
    std::sort(vals.begin(), vals.end());
}

} // namespace detail

/// Per-axis trimmed mean of the associated points; trim = 0 is the plain
/// arithmetic mean of the set.
inline Vec3 entity_center(const PointCloud& points, double trim_pct = 0.0) {
    if (points.empty()) throw EmptyAssociation("entity has no associated points");
    std::size_t k = detail::trim_count(points.size(), trim_pct);
    double axes[3];
    std::vector<double> vals;
    for (int axis = 0; axis < 3; ++axis) {
        detail::sorted_axis(points, axis, vals);
        double sum = 0;
        for (std::size_t i = k; i + k < vals.size(); ++i) sum += vals[i];
        axes[axis] = sum / static_cast<double>(vals.size() - 2 * k);
    }
    return {axes[0], axes[1], axes[2]};
}

/// Axis-aligned box over the same trimmed order statistics the center uses:
/// the interval [v_(k), v_(n-1-k)] per axis, so the trimmed mean always lies
/// inside. Half-extents are floored at 0.01 m.
inline Box3D entity_box3d(const PointCloud& points, const RelationConfig& config) {
    if (points.empty()) throw EmptyAssociation("entity has no associated points");
    std::size_t k = detail::trim_count(points.size(), config.outlier_trim_pct);
    Box3D box;
    double* centers[3] = {&box.center.x, &box.center.y, &box.center.z};
    double* halves[3] = {&box.half_extents.x, &box.half_extents.y, &box.half_extents.z};
    std::vector<double> vals;
    for (int axis = 0; axis < 3; ++axis) {
        detail::sorted_axis(points, axis, vals);
        double lo = vals[k];
        double hi = vals[vals.size() - 1 - k];
        *centers[axis] = 0.5 * (lo + hi);
        *halves[axis] = std::max(0.5 * (hi - lo), 0.01);
    }
    return box;
}

// ---------------------------------------------------------------------------
// Relation predicates
// ---------------------------------------------------------------------------

inline DistanceBin distance_bin(double d, const RelationConfig& config) {
    if (d < config.close_max_m) return DistanceBin::close;
    if (d < config.medium_max_m) return DistanceBin::medium;
    return DistanceBin::far;
}

/// Sector of target as seen from ref_pos facing ref_heading_deg. The bearing
/// is 0 along the heading, positive toward +y (left); sectors are 45-degree
/// half-open intervals, with a boundary angle belonging to the sector
/// counterclockwise of it. Robot-relative sectors use ref = origin, heading 0.
inline Sector direction_sector(const Vec3& ref_pos, double ref_heading_deg,
                               const Vec3& target_pos) {
    double dx = target_pos.x - ref_pos.x;
    double dy = target_pos.y - ref_pos.y;
    if (std::hypot(dx, dy) <= 1e-9)
        throw CoincidentPositions("reference and target share a ground position");
    double h = deg_to_rad(ref_heading_deg);
    double fx = std::cos(h) * dx + std::sin(h) * dy;
    double fy = -std::sin(h) * dx + std::cos(h) * dy;
    double theta = rad_to_deg(std::atan2(fy, fx));
    int idx = static_cast<int>(std::floor((theta + 22.5) / 45.0));
    return static_cast<Sector>(((idx % 8) + 8) % 8);
}

namespace detail {

/// Azimuth arc [center + lo, center + hi] (degrees) covered by a 3D box's
/// ground footprint as seen from the origin. Degenerates to the full circle
/// when the origin is inside the footprint.
struct AzimuthArc {
    double center = 0;   // degrees
    double lo = 0, hi = 0; // offsets from center, lo <= 0 <= hi
    bool full = false;

    double width() const { return full ? 360.0 : hi - lo; }
};

inline AzimuthArc footprint_arc(const Box3D& box) {
    AzimuthArc arc;
    if (std::abs(box.center.x) <= box.half_extents.x && std::abs(box.center.y) <= box.half_extents.y) {
        arc.full = true;
        return arc;
    }
    arc.center = rad_to_deg(std::atan2(box.center.y, box.center.x));
    for (int sx = -1; sx <= 1; sx += 2) {
        for (int sy = -1; sy <= 1; sy += 2) {
            double cx = box.center.x + sx * box.half_extents.x;
            double cy = box.center.y + sy * box.half_extents.y;
            double off = wrap_deg(rad_to_deg(std::atan2(cy, cx)) - arc.center);
            arc.lo = std::min(arc.lo, off);
            arc.hi = std::max(arc.hi, off);
        }
    }
    return arc;
}

/// Length of the circular-arc intersection, in degrees.
inline double arc_overlap(const AzimuthArc& a, const AzimuthArc& b) {
    if (a.full) return b.width();
    if (b.full) return a.width();
    double overlap = 0;
    for (int k = -1; k <= 1; ++k) {
        double b_lo = b.center + b.lo + 360.0 * k;
        double b_hi = b.center + b.hi + 360.0 * k;
        double lo = std::max(a.center + a.lo, b_lo);
        double hi = std::min(a.center + a.hi, b_hi);
        if (hi > lo) overlap += hi - lo;
    }
    return std::min(overlap, b.width());
}

} // namespace detail

/// True iff a stands in front of b from the robot's viewpoint: a's footprint
/// covers at least occlusion_overlap_frac of b's azimuth span, and a is
/// nearer than b by more than the depth margin.
inline bool occludes(const GraphNode& a, const GraphNode& b, const RelationConfig& config) {
    double da = ground_distance({}, a.center3d);
    double db = ground_distance({}, b.center3d);
    if (!(da < db - config.occlusion_depth_margin_m)) return false;
    auto arc_a = detail::footprint_arc(a.box3d);
    auto arc_b = detail::footprint_arc(b.box3d);
    double need = config.occlusion_overlap_frac * arc_b.width();
    return detail::arc_overlap(arc_a, arc_b) >= need;
}

// ---------------------------------------------------------------------------
// Pairwise relation extraction
// ---------------------------------------------------------------------------

/// All relation edges between the given nodes: for every ordered pair one
/// distance edge, one robot-frame direction edge (the destination's sector
/// from the origin), a person-frame direction edge when the source has a
/// heading, an adjacency edge when within range, and an occlusion edge when
/// the source occludes the destination. Coincident ground positions yield no
/// direction edge. Output is sorted by (src, dst, kind, frame) and does not
/// depend on node input order.
inline std::vector<RelationEdge> compute_relations(const std::vector<GraphNode>& nodes,
                                                   const RelationConfig& config) {
    std::vector<RelationEdge> edges;
    Vec3 origin{};
    for (const GraphNode& a : nodes) {
        for (const GraphNode& b : nodes) {
            if (a.id == b.id) continue;
            double d = ground_distance(a.center3d, b.center3d);

            RelationEdge dist;
            dist.src = a.id;
            dist.dst = b.id;
            dist.kind = EdgeKind::distance;
            dist.distance_bin = distance_bin(d, config);
            dist.distance_m = d;
            edges.push_back(dist);

            if (ground_distance(origin, b.center3d) > 1e-9) {
                RelationEdge robot;
                robot.src = a.id;
                robot.dst = b.id;
                robot.kind = EdgeKind::direction;
                robot.frame = Frame::robot;
                robot.direction = direction_sector(origin, 0.0, b.center3d);
                robot.distance_m = d;
                edges.push_back(robot);
            }

            if (a.heading_deg && d > 1e-9) {
                RelationEdge person;
                person.src = a.id;
                person.dst = b.id;
                person.kind = EdgeKind::direction;
                person.frame = Frame::person;
                person.direction = direction_sector(a.center3d, *a.heading_deg, b.center3d);
                person.distance_m = d;
                edges.push_back(person);
            }

            if (d <= config.adjacency_max_m) {
                RelationEdge adj;
                adj.src = a.id;
                adj.dst = b.id;
                adj.kind = EdgeKind::adjacency;
                adj.distance_m = d;
                edges.push_back(adj);
            }

            if (occludes(a, b, config)) {
                RelationEdge occ;
                occ.src = a.id;
                occ.dst = b.id;
                occ.kind = EdgeKind::occlusion;
                occ.distance_m = d;
                edges.push_back(occ);
            }
        }
    }
    std::sort(edges.begin(), edges.end(),
              [](const RelationEdge& x, const RelationEdge& y) { return x.sort_key() < y.sort_key(); });
    return edges;
}

} // namespace sgr
