#pragma once

#include "sgr/projection.hpp"
#include "sgr/query.hpp"
#include "sgr/search.hpp"
#include "sgr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace sgr {

// Brute-force ground-truth evaluation. Shares threshold constants with
// RelationConfig but re-implements every predicate directly from true
// positions and headings, with no indices, phases, or projection code, so a
// pipeline bug cannot certify itself.

namespace oracle {

inline double norm_deg(double d) {
    double m = std::fmod(d + 180.0, 360.0);
    if (m < 0) m += 360.0;
    return m - 180.0;
}

inline Sector sector_of(double theta_deg) {
    double t = norm_deg(theta_deg);
    if (t >= -22.5 && t < 22.5) return Sector::front;
    if (t >= 22.5 && t < 67.5) return Sector::front_left;
    if (t >= 67.5 && t < 112.5) return Sector::left;
    if (t >= 112.5 && t < 157.5) return Sector::back_left;
    if (t >= 157.5 || t < -157.5) return Sector::back;
    if (t >= -157.5 && t < -112.5) return Sector::back_right;
    if (t >= -112.5 && t < -67.5) return Sector::right;
    return Sector::front_right;
}

inline double dist_xy(const Vec3& a, const Vec3& b) {
    double dx = a.x - b.x, dy = a.y - b.y;
    return std::sqrt(dx * dx + dy * dy);
}

inline DistanceBin bin_of(double d, const RelationConfig& cfg) {
    if (d < cfg.close_max_m) return DistanceBin::close;
    if (d < cfg.medium_max_m) return DistanceBin::medium;
    return DistanceBin::far;
}

inline double bearing_of(const Vec3& from, const Vec3& to) {
    return rad_to_deg(std::atan2(to.y - from.y, to.x - from.x));
}

/// Azimuth arc of the entity's square footprint (center +- radius) as seen
/// from the origin, as [center_deg + lo, center_deg + hi].
struct Arc {
    double center = 0, lo = 0, hi = 0;
    bool full = false;
};

inline Arc footprint_arc_of(const Vec3& pos, double radius) {
    Arc arc;
    if (std::abs(pos.x) <= radius && std::abs(pos.y) <= radius) {
        arc.full = true;
        return arc;
    }
    arc.center = rad_to_deg(std::atan2(pos.y, pos.x));
    for (double sx : {-1.0, 1.0})
        for (double sy : {-1.0, 1.0}) {
            double corner = rad_to_deg(std::atan2(pos.y + sy * radius, pos.x + sx * radius));
            double off = norm_deg(corner - arc.center);
            arc.lo = std::min(arc.lo, off);
            arc.hi = std::max(arc.hi, off);
        }
    return arc;
}

inline bool occludes_truth(const SynthEntity& a, const SynthEntity& b,
                           const RelationConfig& cfg) {
    double da = std::hypot(a.position.x, a.position.y);
    double db = std::hypot(b.position.x, b.position.y);
    if (!(da < db - cfg.occlusion_depth_margin_m)) return false;
    Arc arc_a = footprint_arc_of(a.position, a.body_radius);
    Arc arc_b = footprint_arc_of(b.position, b.body_radius);
    double width_b = arc_b.full ? 360.0 : arc_b.hi - arc_b.lo;
    if (arc_a.full) return true;
    if (arc_b.full) return (arc_a.hi - arc_a.lo) >= cfg.occlusion_overlap_frac * width_b;
    double overlap = 0;
    for (int k = -1; k <= 1; ++k) {
        double lo = std::max(arc_a.center + arc_a.lo, arc_b.center + arc_b.lo + 360.0 * k);
        double hi = std::min(arc_a.center + arc_a.hi, arc_b.center + arc_b.hi + 360.0 * k);
        if (hi > lo) overlap += hi - lo;
    }
    overlap = std::min(overlap, width_b);
    return overlap >= cfg.occlusion_overlap_frac * width_b;
}

} // namespace oracle

/// Relation edges recomputed from true entity poses (the oracle side of the
/// compute_relations agreement check).
inline std::vector<RelationEdge> oracle_relations(const SynthScene& scene,
                                                  const RelationConfig& config) {
    std::vector<RelationEdge> edges;
    for (const SynthEntity& a : scene.entities) {
        for (const SynthEntity& b : scene.entities) {
            if (a.id == b.id) continue;
            double d = oracle::dist_xy(a.position, b.position);

            RelationEdge dist;
            dist.src = a.id;
            dist.dst = b.id;
            dist.kind = EdgeKind::distance;
            dist.distance_bin = oracle::bin_of(d, config);
            dist.distance_m = d;
            edges.push_back(dist);

            double rho_b = std::hypot(b.position.x, b.position.y);
            if (rho_b > 1e-9) {
                RelationEdge robot;
                robot.src = a.id;
                robot.dst = b.id;
                robot.kind = EdgeKind::direction;
                robot.frame = Frame::robot;
                robot.direction = oracle::sector_of(oracle::bearing_of({}, b.position));
                robot.distance_m = d;
                edges.push_back(robot);
            }

            if (d > 1e-9) {
                RelationEdge person;
                person.src = a.id;
                person.dst = b.id;
                person.kind = EdgeKind::direction;
                person.frame = Frame::person;
                person.direction =
                    oracle::sector_of(oracle::bearing_of(a.position, b.position) - a.heading_deg);
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

            if (oracle::occludes_truth(a, b, config)) {
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

namespace oracle {

inline bool attrs_majority(const AttributeMap& attrs,
                           const std::vector<AttributeConstraint>& constraints,
                           long long* matched_out = nullptr) {
    if (constraints.empty()) {
        if (matched_out) *matched_out = 0;
        return true;
    }
    long long matched = 0;
    for (const auto& c : constraints) {
        auto it = attrs.find(c.key);
        if (it != attrs.end() && it->second == c.value) ++matched;
    }
    if (matched_out) *matched_out = matched;
    return 2 * matched > static_cast<long long>(constraints.size());
}

inline bool relation_witnessed(const SynthScene& scene, const SynthEntity& cand,
                               const RelationalConstraint& r, const RelationConfig& cfg) {
    if (r.frame == Frame::robot) {
        double rho = std::hypot(cand.position.x, cand.position.y);
        if (r.direction) {
            if (rho <= 1e-9) return false;
            if (sector_of(bearing_of({}, cand.position)) != *r.direction) return false;
        }
        if (r.distance_bin && bin_of(rho, cfg) != *r.distance_bin) return false;
        return true;
    }
    for (const SynthEntity& y : scene.entities) {
        if (y.id == cand.id) continue;
        if (!attrs_majority(y.attributes, r.related_attrs)) continue;
        double d = dist_xy(cand.position, y.position);
        if (r.distance_bin && bin_of(d, cfg) != *r.distance_bin) continue;
        if (r.adjacency && !(d <= cfg.adjacency_max_m)) continue;
        if (r.direction) {
            if (d <= 1e-9) continue;
            if (r.inverse) {
                if (sector_of(bearing_of(y.position, cand.position) - y.heading_deg) !=
                    *r.direction)
                    continue;
            } else {
                if (sector_of(bearing_of(cand.position, y.position) - cand.heading_deg) !=
                    *r.direction)
                    continue;
            }
        }
        if (r.occlusion) {
            bool occ = r.inverse ? occludes_truth(y, cand, cfg) : occludes_truth(cand, y, cfg);
            if (!occ) continue;
        }
        return true;
    }
    return false;
}

} // namespace oracle

/// Ground-truth answer by exhaustive enumeration over all entities and all
/// relation witnesses. Output ordering matches the engine's rule (score
/// descending, id ascending); boxes are left to the caller, which knows the
/// fixture's 2D boxes.
inline Answer oracle_query(const SynthScene& scene, const StructuredQuery& q,
                           const RelationConfig& config) {
    struct Hit {
        int id;
        Fraction score;
    };
    std::vector<Hit> hits;
    for (const SynthEntity& e : scene.entities) {
        long long matched = 0;
        if (!oracle::attrs_majority(e.attributes, q.anchor_attrs, &matched)) continue;
        bool all = true;
        for (const auto& r : q.relations)
            if (!oracle::relation_witnessed(scene, e, r, config)) {
                all = false;
                break;
            }
        if (!all) continue;
        Fraction f = q.anchor_attrs.empty()
                         ? Fraction{1, 1}
                         : Fraction{matched, static_cast<long long>(q.anchor_attrs.size())};
        hits.push_back({e.id, f});
    }
    std::stable_sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
        if (a.score == b.score) return a.id < b.id;
        return b.score < a.score;
    });

    Answer ans;
    ans.task = q.task;
    for (const auto& h : hits) {
        ans.node_ids.push_back(h.id);
        ans.scores.push_back(h.score);
    }
    switch (q.task) {
        case Task::vg:
            break;
        case Task::vqa_exists:
            ans.text = hits.empty() ? "no" : "yes";
            ans.scores.clear();
            break;
        case Task::vqa_count:
            ans.text = std::to_string(hits.size());
            ans.scores.clear();
            break;
        case Task::vqa_attribute: {
            ans.scores.clear();
            if (hits.empty()) {
                ans.text = "none";
            } else if (hits.size() > 1) {
                std::vector<int> ids = ans.node_ids;
                std::sort(ids.begin(), ids.end());
                std::string t = "ambiguous:";
                for (std::size_t i = 0; i < ids.size(); ++i)
                    t += (i ? "," : "") + std::to_string(ids[i]);
                ans.text = t;
            } else {
                for (const SynthEntity& e : scene.entities)
                    if (e.id == hits[0].id) {
                        auto it = e.attributes.find(*q.vqa_attribute_key);
                        ans.text = it == e.attributes.end() ? "unknown" : it->second;
                    }
            }
            break;
        }
    }
    return ans;
}

/// Attach the fixture's true 2D boxes to a VG oracle answer.
inline void fill_answer_boxes(Answer& ans, const std::vector<Detection>& detections) {
    ans.boxes.clear();
    if (ans.task != Task::vg) return;
    for (int id : ans.node_ids)
        for (const Detection& d : detections)
            if (d.id == id) ans.boxes.push_back(d.box);
}

} // namespace sgr
