#pragma once

#include "sgr/camera.hpp"
#include "sgr/errors.hpp"
#include "sgr/geometry.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace sgr {

// ---------------------------------------------------------------------------
// Attributes
// ---------------------------------------------------------------------------

/// Single-label categorical attributes: lowercase underscore tokens, at most
/// one value per key (e.g. gender -> male, age -> young_adult).
using AttributeMap = std::map<std::string, std::string>;

/// Lowercase, trim, and replace internal whitespace runs with underscores.
/// Throws EmptyToken if the result is empty.
inline std::string canonical_token(const std::string& raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_sep = false;
    for (char ch : raw) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (std::isspace(c)) {
            if (!out.empty()) pending_sep = true;
            continue;
        }
        if (pending_sep) {
            out.push_back('_');
            pending_sep = false;
        }
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    if (out.empty()) throw EmptyToken("token is empty after trimming");
    return out;
}

inline AttributeMap canonicalize_attributes(const std::map<std::string, std::string>& raw) {
    AttributeMap out;
    for (const auto& [k, v] : raw) out[canonical_token(k)] = canonical_token(v);
    return out;
}

// ---------------------------------------------------------------------------
// Boxes
// ---------------------------------------------------------------------------

/// 2D pixel box [x, x+w) x [y, y+h), top-left origin. When wrap is set the
/// x-interval is taken modulo the image width (a panorama box crossing the
/// seam); a wrapped box must be narrower than the image.
struct Box2D {
    double x = 0, y = 0, w = 0, h = 0;
    bool wrap = false;

    bool operator==(const Box2D& o) const = default;

    void validate() const {
        if (!(w > 0) || !(h > 0)) throw BoxOutOfRange("box requires w > 0 and h > 0");
    }

    void validate_for_image(double image_width, double image_height) const {
        validate();
        if (wrap) {
            if (!(w < image_width))
                throw BoxOutOfRange("wrapped box must be narrower than the image");
        } else {
            if (x < 0 || x + w > image_width)
                throw BoxOutOfRange("box x-range exceeds image width");
        }
        if (y < 0 || y + h > image_height)
            throw BoxOutOfRange("box y-range exceeds image height");
    }

    /// Wrap-aware membership: left/top inclusive, right/bottom exclusive.
    bool contains(double u, double v, double image_width) const {
        if (v < y || v >= y + h) return false;
        if (!wrap) return u >= x && u < x + w;
        double x0 = std::fmod(x, image_width);
        if (x0 < 0) x0 += image_width;
        double rel = std::fmod(u - x0, image_width);
        if (rel < 0) rel += image_width;
        return rel < w;
    }
};

/// Axis-aligned 3D box in the robot frame.
struct Box3D {
    Vec3 center;
    Vec3 half_extents;

    bool operator==(const Box3D& o) const = default;

    void validate() const {
        if (!(half_extents.x > 0 && half_extents.y > 0 && half_extents.z > 0))
            throw SchemaError("box3d half_extents must be positive");
        if (!center.finite()) throw SchemaError("box3d center must be finite");
    }

    bool contains(const Vec3& p) const {
        return std::abs(p.x - center.x) <= half_extents.x &&
               std::abs(p.y - center.y) <= half_extents.y &&
               std::abs(p.z - center.z) <= half_extents.z;
    }
};

// ---------------------------------------------------------------------------
// Relation vocabulary
// ---------------------------------------------------------------------------

/// Eight 45-degree azimuth sectors around a reference pose, counterclockwise
/// from the forward axis.
enum class Sector { front, front_left, left, back_left, back, back_right, right, front_right };

inline constexpr std::array<const char*, 8> kSectorNames = {
    "front", "front_left", "left", "back_left", "back", "back_right", "right", "front_right"};

inline const char* to_string(Sector s) { return kSectorNames[static_cast<int>(s)]; }

inline std::optional<Sector> sector_from_string(const std::string& s) {
    for (int i = 0; i < 8; ++i)
        if (s == kSectorNames[i]) return static_cast<Sector>(i);
    return std::nullopt;
}

enum class DistanceBin { close, medium, far };

inline const char* to_string(DistanceBin b) {
    switch (b) {
        case DistanceBin::close: return "close";
        case DistanceBin::medium: return "medium";
        default: return "far";
    }
}

inline std::optional<DistanceBin> bin_from_string(const std::string& s) {
    if (s == "close") return DistanceBin::close;
    if (s == "medium") return DistanceBin::medium;
    if (s == "far") return DistanceBin::far;
    return std::nullopt;
}

enum class EdgeKind { direction, distance, adjacency, occlusion };

inline const char* to_string(EdgeKind k) {
    switch (k) {
        case EdgeKind::direction: return "direction";
        case EdgeKind::distance: return "distance";
        case EdgeKind::adjacency: return "adjacency";
        default: return "occlusion";
    }
}

inline std::optional<EdgeKind> edge_kind_from_string(const std::string& s) {
    if (s == "direction") return EdgeKind::direction;
    if (s == "distance") return EdgeKind::distance;
    if (s == "adjacency") return EdgeKind::adjacency;
    if (s == "occlusion") return EdgeKind::occlusion;
    return std::nullopt;
}

/// Frame a direction is measured in: the robot's forward axis at the origin,
/// or the source person's heading.
enum class Frame { robot, person };

inline const char* to_string(Frame f) { return f == Frame::robot ? "robot" : "person"; }

inline std::optional<Frame> frame_from_string(const std::string& s) {
    if (s == "robot") return Frame::robot;
    if (s == "person") return Frame::person;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Scene entities
// ---------------------------------------------------------------------------

/// One detected entity: 2D box plus categorical attributes, optionally a
/// facing yaw in the robot frame (0 = robot forward, degrees in [-180, 180)).
struct Detection {
    int id = 0;
    Box2D box;
    AttributeMap attributes;
    std::optional<double> heading_deg;

    bool operator==(const Detection& o) const = default;
};

/// A scene-graph node: the detection plus its derived 3D pose. The
/// robot-relative sector/bin are stored so robot-frame queries are a field
/// lookup; robot_sector is absent for a node on top of the origin.
struct GraphNode {
    int id = 0;
    Box2D box2d;
    AttributeMap attributes;
    Vec3 center3d;
    Box3D box3d;
    std::optional<double> heading_deg;
    int point_count = 0;

    std::optional<Sector> robot_sector;
    DistanceBin robot_bin = DistanceBin::far;
    double robot_distance_m = 0;

    bool operator==(const GraphNode& o) const = default;
};

/// Typed directed relation between two nodes. Every edge carries the
/// ground-plane distance between its endpoints; direction and distance_bin
/// are present for the corresponding kinds only.
struct RelationEdge {
    int src = 0;
    int dst = 0;
    EdgeKind kind = EdgeKind::distance;
    std::optional<Sector> direction;
    Frame frame = Frame::robot;
    std::optional<DistanceBin> distance_bin;
    double distance_m = 0;

    bool operator==(const RelationEdge& o) const = default;

    auto sort_key() const {
        return std::tuple(src, dst, static_cast<int>(kind), static_cast<int>(frame));
    }
};

// ---------------------------------------------------------------------------
// Scene bundle
// ---------------------------------------------------------------------------

/// The assembled inputs of one scene: image dimensions (pixels are never
/// read), validated detections, the point cloud, and the camera.
struct SceneBundle {
    double image_width = 0;
    double image_height = 0;
    std::vector<Detection> detections;
    PointCloud cloud;
    CameraModel camera;

    bool operator==(const SceneBundle& o) const = default;

    /// Validates dimensions, id uniqueness, and box ranges. Duplicate ids are
    /// a rejection, never a silent overwrite.
    static SceneBundle make(double image_width, double image_height,
                            std::vector<Detection> detections, PointCloud cloud,
                            CameraModel camera) {
        if (!(image_width > 0) || !(image_height > 0))
            throw SchemaError("image dimensions must be positive");
        camera.validate();
        std::set<int> seen;
        for (auto& d : detections) {
            if (d.id < 0) throw SchemaError("detection id must be >= 0");
            if (!seen.insert(d.id).second)
                throw DuplicateId("detection id " + std::to_string(d.id));
            d.box.validate_for_image(image_width, image_height);
            if (d.heading_deg) d.heading_deg = wrap_deg(*d.heading_deg);
        }
        for (std::size_t i = 0; i < cloud.size(); ++i)
            if (!cloud[i].finite())
                throw SchemaError("non-finite cloud point at index " + std::to_string(i));
        SceneBundle b;
        b.image_width = image_width;
        b.image_height = image_height;
        b.detections = std::move(detections);
        b.cloud = std::move(cloud);
        b.camera = camera;
        return b;
    }
};

} // namespace sgr
