#pragma once

#include "sgr/camera.hpp"
#include "sgr/errors.hpp"
#include "sgr/geometry.hpp"
#include "sgr/projection.hpp"
#include "sgr/scene_model.hpp"

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace sgr {

// ---------------------------------------------------------------------------
// Deterministic sampling (identical across platforms)
// ---------------------------------------------------------------------------

/// mt19937_64 with hand-rolled distributions; std:: distributions are
/// implementation-defined and would break byte-identical fixtures.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }   // [0, 1)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int uniform_int(int n) {   // [0, n)
        return static_cast<int>(uniform() * static_cast<double>(n)) % n;
    }
    template <typename T, std::size_t N>
    const T& pick(const std::array<T, N>& items) {
        return items[static_cast<std::size_t>(uniform_int(static_cast<int>(N)))];
    }

private:
    std::mt19937_64 eng_;
};

// ---------------------------------------------------------------------------
// Synthetic scenes
// ---------------------------------------------------------------------------

struct SynthEntity {
    int id = 0;
    Vec3 position;          // capsule center (z = body_height / 2)
    double heading_deg = 0;
    AttributeMap attributes;
    double body_radius = 0.25;
};

struct SynthScene {
    std::uint64_t seed = 0;
    std::vector<SynthEntity> entities;
    CameraModel camera;
    double image_width = 0;
    double image_height = 0;
};

/// Generator knobs. The margin fields keep every discrete relation verdict
/// (sector, bin, adjacency, occlusion) robust to the center error of the
/// point pipeline (~0.02 m with antithetic sampling; 0.05 m budgeted), so
/// engine and oracle answers can agree exactly. Sector margins adapt to
/// pair distance: lateral_slack_m of positional slack plus a fixed degree pad.
struct GenParams {
    int points_per_entity = 300;    // even; >= 50
    double clutter_frac = 0.08;     // clutter points as a fraction of entity points
    double body_radius = 0.25;
    double body_height = 1.7;
    double min_separation_m = 1.2;
    double distance_margin_m = 0.12;
    double lateral_slack_m = 0.08;
    double sector_margin_pad_deg = 1.0;
    double box_pad_px = 0.5;

    double sector_margin_deg(double distance) const {
        return rad_to_deg(std::asin(std::min(1.0, lateral_slack_m / distance))) +
               sector_margin_pad_deg;
    }
};

struct SynthResult {
    SynthScene scene;
    SceneBundle bundle;
};

namespace detail {

inline const std::array<const char*, 2> kGenders = {"male", "female"};
inline const std::array<const char*, 5> kAges = {"child", "adolescent", "young_adult", "adult",
                                                 "elderly"};
inline const std::array<const char*, 4> kRaces = {"white", "black", "asian", "other"};
inline const std::array<const char*, 3> kActions = {"sitting", "standing", "walking"};

inline double bearing_deg(const Vec3& from, const Vec3& to) {
    return rad_to_deg(std::atan2(to.y - from.y, to.x - from.x));
}

/// Distance in degrees from the nearest sector boundary (odd multiples of 22.5).
inline double sector_boundary_margin(double theta_deg) {
    double t = std::fmod(std::abs(theta_deg) + 22.5, 45.0);
    return std::min(t, 45.0 - t);
}

inline bool clear_of(double value, double threshold, double margin) {
    return std::abs(value - threshold) >= margin;
}

/// Widest possible azimuth half-width (degrees) of a square footprint of
/// half-extent r at ground distance d (corner-on orientation).
inline double footprint_halfwidth_hi_deg(double r, double d) {
    return rad_to_deg(std::asin(std::min(1.0, r * 1.4143 / d)));
}

/// Narrowest possible half-width (face-on orientation).
inline double footprint_halfwidth_lo_deg(double r, double d) {
    return rad_to_deg(std::asin(std::min(1.0, r / d)));
}

struct PlacedView {
    Vec3 pos;
    double heading_deg;
    double rho;           // ground distance from origin
    double azimuth_deg;   // bearing from origin
};

/// Samples an azimuth uniformly from the domain minus the blocked arcs, or
/// nothing when the domain is exhausted. The domain wraps for panoramas.
inline std::optional<double> sample_free_azimuth(
    Rng& rng, double dom_lo, double dom_hi, bool wrap,
    const std::vector<std::pair<double, double>>& blocked) {
    std::vector<std::pair<double, double>> segs;
    for (auto [lo, hi] : blocked) {
        double width = hi - lo;
        if (width >= dom_hi - dom_lo) return std::nullopt;
        if (wrap) {
            double lo_n = std::fmod(lo - dom_lo, 360.0);
            if (lo_n < 0) lo_n += 360.0;
            lo_n += dom_lo;
            double hi_n = lo_n + width;
            if (hi_n <= dom_hi) {
                segs.push_back({lo_n, hi_n});
            } else {
                segs.push_back({lo_n, dom_hi});
                segs.push_back({dom_lo, hi_n - 360.0});
            }
        } else {
            double lo_c = std::max(lo, dom_lo);
            double hi_c = std::min(hi, dom_hi);
            if (hi_c > lo_c) segs.push_back({lo_c, hi_c});
        }
    }
    std::sort(segs.begin(), segs.end());
    std::vector<std::pair<double, double>> free_segs;
    double cursor = dom_lo;
    for (auto [lo, hi] : segs) {
        if (lo > cursor) free_segs.push_back({cursor, lo});
        cursor = std::max(cursor, hi);
    }
    if (cursor < dom_hi) free_segs.push_back({cursor, dom_hi});
    double total = 0;
    for (auto [lo, hi] : free_segs) total += hi - lo;
    if (total <= 0) return std::nullopt;
    double pick = rng.uniform(0.0, total);
    for (auto [lo, hi] : free_segs) {
        if (pick <= hi - lo) return lo + pick;
        pick -= hi - lo;
    }
    return free_segs.back().second;
}

/// Occlusion robustness for the ordered pair (does a occlude b?): accept only
/// placements where the verdict is stable under the center-error and
/// footprint-extent slack of the point pipeline.
inline bool occlusion_pair_robust(const PlacedView& a, const PlacedView& b, double r,
                                  const RelationConfig& cfg, double depth_margin) {
    double depth_threshold = b.rho - cfg.occlusion_depth_margin_m;
    bool depth_true_robust = a.rho < depth_threshold - depth_margin;
    bool depth_false_robust = a.rho > depth_threshold + depth_margin;

    double eps = rad_to_deg(0.06 / a.rho + 0.06 / b.rho) + 0.5;
    double gap = std::abs(wrap_deg(a.azimuth_deg - b.azimuth_deg));
    bool disjoint_robust = gap >= footprint_halfwidth_hi_deg(r, a.rho) +
                                      footprint_halfwidth_hi_deg(r, b.rho) + eps;
    bool contained_robust = gap + footprint_halfwidth_hi_deg(r, b.rho) + eps <=
                            footprint_halfwidth_lo_deg(r, a.rho);

    if (depth_false_robust) return true;       // no occlusion either way
    if (depth_true_robust) return disjoint_robust || contained_robust;
    return disjoint_robust;                     // ambiguous depth needs zero overlap
}

} // namespace detail

/// Deterministic crowded-scene generator. Entities are placed by rejection
/// sampling so that no pairwise relation sits near a decision boundary and no
/// two 2D boxes overlap (azimuth-disjoint); the point cloud samples each
/// body's cylinder wall in antithetic pairs, which pins the trimmed centroid
/// to the true position.
inline SynthResult gen_scene(std::uint64_t seed, int n_entities, CameraKind camera_kind,
                             const GenParams& params = {},
                             const RelationConfig& config = {}) {
    if (n_entities < 1 || n_entities > 500)
        throw SchemaError("n_entities must be in [1, 500]");
    if (params.points_per_entity < 50 || params.points_per_entity % 2 != 0)
        throw SchemaError("points_per_entity must be even and >= 50");
    config.validate();

    Rng rng(seed);
    SynthScene scene;
    scene.seed = seed;

    if (camera_kind == CameraKind::cylindrical) {
        scene.image_width = 1600;
        scene.image_height = 480;
        scene.camera = CameraModel::make_cylindrical(180.0, 240.0, 200.0);
    } else {
        scene.image_width = 1280;
        scene.image_height = 720;
        Mat3 r;
        r.m = {0, -1, 0, 0, 0, -1, 1, 0, 0};   // robot x -> camera z (look along +x)
        scene.camera = CameraModel::make_pinhole(500.0, 500.0, 640.0, 360.0, r);
    }

    const double half_h = params.body_height / 2.0;
    const double r = params.body_radius;

    std::vector<detail::PlacedView> placed;
    for (int i = 0; i < n_entities; ++i) {
        bool ok = false;
        detail::PlacedView view{};
        const bool wrap_domain = camera_kind == CameraKind::cylindrical;
        const double dom_lo = wrap_domain ? -180.0 : -40.0;
        const double dom_hi = wrap_domain ? 180.0 : 40.0;
        for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
            double rho = wrap_domain ? rng.uniform(2.3, 9.3) : rng.uniform(3.0, 15.5);
            double w_new = detail::footprint_halfwidth_hi_deg(r, rho);
            // keep 2D boxes azimuth-disjoint (with occlusion-robustness slack)
            // by sampling only from the unblocked arcs
            std::vector<std::pair<double, double>> blocked;
            for (const auto& other : placed) {
                double eps = rad_to_deg(0.06 / rho + 0.06 / other.rho) + 0.5;
                double half = w_new + detail::footprint_halfwidth_hi_deg(r, other.rho) +
                              std::max(1.0, eps) + 0.25;
                blocked.push_back({other.azimuth_deg - half, other.azimuth_deg + half});
            }
            auto az = detail::sample_free_azimuth(rng, dom_lo, dom_hi, wrap_domain, blocked);
            if (!az) continue;
            double x = rho * std::cos(deg_to_rad(*az));
            double y = rho * std::sin(deg_to_rad(*az));
            view.pos = {x, y, half_h};
            view.rho = std::hypot(x, y);
            view.azimuth_deg = rad_to_deg(std::atan2(y, x));

            ok = true;
            // robot-relative margins
            if (!detail::clear_of(view.rho, config.close_max_m, params.distance_margin_m) ||
                !detail::clear_of(view.rho, config.medium_max_m, params.distance_margin_m) ||
                detail::sector_boundary_margin(view.azimuth_deg) <
                    params.sector_margin_deg(view.rho) + 1.0)
                ok = false;
            // full capsule must project inside the image with a pixel to spare
            if (ok) {
                for (int sx = -1; sx <= 1 && ok; sx += 2)
                    for (int sy = -1; sy <= 1 && ok; sy += 2)
                        for (int sz = 0; sz <= 1 && ok; ++sz) {
                            Vec3 corner{x + sx * r, y + sy * r, sz * params.body_height};
                            auto px = project_point(scene.camera, scene.image_width, corner);
                            if (!px || px->v < 2 || px->v > scene.image_height - 2) ok = false;
                            else if (camera_kind == CameraKind::pinhole &&
                                     (px->u < 2 || px->u > scene.image_width - 2))
                                ok = false;
                        }
            }
            for (const auto& other : placed) {
                if (!ok) break;
                double d = ground_distance(view.pos, other.pos);
                if (d < params.min_separation_m ||
                    !detail::clear_of(d, config.close_max_m, params.distance_margin_m) ||
                    !detail::clear_of(d, config.medium_max_m, params.distance_margin_m) ||
                    !detail::clear_of(d, config.adjacency_max_m, params.distance_margin_m)) {
                    ok = false;
                    break;
                }
                // the other entity's heading is fixed; this position must sit
                // clear of that person's sector boundaries
                double from_other = detail::bearing_deg(other.pos, view.pos);
                if (detail::sector_boundary_margin(from_other - other.heading_deg) <
                    params.sector_margin_deg(d)) {
                    ok = false;
                    break;
                }
                // boxes must stay azimuth-disjoint so each box captures only
                // its own body's points
                double gap = std::abs(wrap_deg(view.azimuth_deg - other.azimuth_deg));
                double need = detail::footprint_halfwidth_hi_deg(r, view.rho) +
                              detail::footprint_halfwidth_hi_deg(r, other.rho) + 1.0;
                if (gap < need) {
                    ok = false;
                    break;
                }
                if (!detail::occlusion_pair_robust(view, other, r, config,
                                                   params.distance_margin_m) ||
                    !detail::occlusion_pair_robust(other, view, r, config,
                                                   params.distance_margin_m)) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            // a viable position found; now find a heading whose outgoing
            // bearings all clear sector boundaries
            ok = false;
            for (int h_try = 0; h_try < 200 && !ok; ++h_try) {
                view.heading_deg = rng.uniform(-180.0, 180.0);
                ok = true;
                for (const auto& other : placed) {
                    double d = ground_distance(view.pos, other.pos);
                    double to_other = detail::bearing_deg(view.pos, other.pos);
                    if (detail::sector_boundary_margin(to_other - view.heading_deg) <
                        params.sector_margin_deg(d)) {
                        ok = false;
                        break;
                    }
                }
            }
        }
        if (!ok)
            throw PlacementFailure("could not place entity " + std::to_string(i) +
                                   " after 1000 attempts");
        placed.push_back(view);

        SynthEntity e;
        e.id = i;
        e.position = view.pos;
        e.heading_deg = view.heading_deg;
        e.body_radius = r;
        e.attributes["gender"] = rng.pick(detail::kGenders);
        e.attributes["age"] = rng.pick(detail::kAges);
        e.attributes["race"] = rng.pick(detail::kRaces);
        e.attributes["action"] = rng.pick(detail::kActions);
        scene.entities.push_back(std::move(e));
    }

    // Point synthesis: antithetic pairs on the cylinder wall. Mirroring each
    // sample through the capsule center makes every per-axis multiset
    // symmetric, so trimmed means reproduce the true center exactly.
    PointCloud cloud;
    cloud.reserve(static_cast<std::size_t>(n_entities) * params.points_per_entity);
    std::vector<PointCloud> entity_points(scene.entities.size());
    for (std::size_t i = 0; i < scene.entities.size(); ++i) {
        const SynthEntity& e = scene.entities[i];
        entity_points[i].reserve(params.points_per_entity);
        for (int p = 0; p < params.points_per_entity / 2; ++p) {
            double theta = rng.uniform(0.0, 2.0 * kPi);
            double z = rng.uniform(0.0, params.body_height);
            double dx = e.body_radius * std::cos(theta);
            double dy = e.body_radius * std::sin(theta);
            entity_points[i].push_back({e.position.x + dx, e.position.y + dy, z});
            entity_points[i].push_back(
                {e.position.x - dx, e.position.y - dy, params.body_height - z});
        }
        cloud.insert(cloud.end(), entity_points[i].begin(), entity_points[i].end());
    }
    // True 2D boxes: pixel bounds of each body's own points plus a small pad;
    // the pad stays far below the azimuth gap enforced above.
    std::vector<Detection> detections;
    for (std::size_t i = 0; i < scene.entities.size(); ++i) {
        const SynthEntity& e = scene.entities[i];
        auto center_px = project_point(scene.camera, scene.image_width, e.position);
        double min_du = 0, max_du = 0, min_v = 1e300, max_v = -1e300;
        bool first = true;
        for (const Vec3& p : entity_points[i]) {
            auto px = project_point(scene.camera, scene.image_width, p);
            double du = px->u - center_px->u;
            if (camera_kind == CameraKind::cylindrical) {
                du = std::fmod(du + scene.image_width * 1.5, scene.image_width) -
                     scene.image_width / 2.0;
            }
            if (first) {
                min_du = max_du = du;
                first = false;
            } else {
                min_du = std::min(min_du, du);
                max_du = std::max(max_du, du);
            }
            min_v = std::min(min_v, px->v);
            max_v = std::max(max_v, px->v);
        }
        Detection d;
        d.id = e.id;
        d.box.x = center_px->u + min_du - params.box_pad_px;
        d.box.w = (max_du - min_du) + 2 * params.box_pad_px;
        d.box.y = min_v - params.box_pad_px;
        d.box.h = (max_v - min_v) + 2 * params.box_pad_px;
        if (camera_kind == CameraKind::cylindrical &&
            (d.box.x < 0 || d.box.x + d.box.w > scene.image_width)) {
            d.box.wrap = true;
            if (d.box.x < 0) d.box.x += scene.image_width;
        }
        d.attributes = e.attributes;
        d.heading_deg = e.heading_deg;
        detections.push_back(std::move(d));
    }

    // Background clutter. Box bleed is the point of the trimmed estimators,
    // but each box's bleed must stay inside half the trim budget or the
    // fidelity bound cannot hold.
    int n_clutter = static_cast<int>(params.clutter_frac * static_cast<double>(cloud.size()));
    int bleed_cap = std::max(1, static_cast<int>(params.points_per_entity * 0.05) / 2);
    std::vector<int> bleed(detections.size(), 0);
    for (int c = 0, draws = 0; c < n_clutter && draws < 10 * n_clutter; ++draws) {
        Vec3 p{rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0),
               rng.uniform(0.0, params.body_height + 0.5)};
        auto px = project_point(scene.camera, scene.image_width, p);
        bool capped = false;
        std::vector<std::size_t> hits;
        if (px) {
            for (std::size_t b = 0; b < detections.size(); ++b) {
                if (!detections[b].box.contains(px->u, px->v, scene.image_width)) continue;
                hits.push_back(b);
                if (bleed[b] >= bleed_cap) capped = true;
            }
        }
        if (capped) continue;
        for (std::size_t b : hits) ++bleed[b];
        cloud.push_back(p);
        ++c;
    }

    SceneBundle bundle = SceneBundle::make(scene.image_width, scene.image_height,
                                           std::move(detections), std::move(cloud),
                                           scene.camera);
    return {std::move(scene), std::move(bundle)};
}

} // namespace sgr
