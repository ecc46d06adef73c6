#pragma once

// Shared test utilities: temp directories, hand-built scenes, and the
// independent reference implementations the tests check against.

#include "sgr/oracle.hpp"
#include "sgr/projection.hpp"
#include "sgr/query.hpp"
#include "sgr/scene_graph.hpp"
#include "sgr/synth.hpp"

#include <algorithm>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace test {

struct TempDir {
    std::filesystem::path path;

    TempDir() {
        auto base = std::filesystem::temp_directory_path();
        for (int i = 0; i < 10000; ++i) {
            auto candidate = base / ("sgr_test_" + std::to_string(std::random_device{}()));
            if (std::filesystem::create_directories(candidate)) {
                path = candidate;
                return;
            }
        }
        throw std::runtime_error("cannot create temp dir");
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
};

// --------------------------------------------------------------------------
// Hand-built scenes: the same entity list as both a SynthScene (for the
// oracle) and a SceneGraph (for the engine), bypassing the point pipeline.
// --------------------------------------------------------------------------

struct EntitySpec {
    int id = 0;
    double x = 0, y = 0;
    double heading_deg = 0;
    sgr::AttributeMap attributes;
    double radius = 0.25;
    double height = 1.7;
};

inline sgr::SynthScene scene_from(const std::vector<EntitySpec>& specs) {
    sgr::SynthScene scene;
    for (const auto& s : specs) {
        sgr::SynthEntity e;
        e.id = s.id;
        e.position = {s.x, s.y, s.height / 2};
        e.heading_deg = s.heading_deg;
        e.attributes = s.attributes;
        e.body_radius = s.radius;
        scene.entities.push_back(e);
    }
    return scene;
}

inline sgr::GraphNode node_from(const EntitySpec& s) {
    sgr::GraphNode n;
    n.id = s.id;
    n.box2d = {0, 0, 10, 10, false};
    n.attributes = s.attributes;
    n.center3d = {s.x, s.y, s.height / 2};
    n.box3d.center = n.center3d;
    n.box3d.half_extents = {s.radius, s.radius, s.height / 2};
    n.heading_deg = s.heading_deg;
    n.point_count = 1;
    n.robot_distance_m = sgr::ground_distance({}, n.center3d);
    return n;
}

inline sgr::SceneGraph graph_from(const std::vector<EntitySpec>& specs,
                                  const sgr::RelationConfig& config = {}) {
    sgr::SceneGraph g;
    for (const auto& s : specs) {
        sgr::GraphNode n = node_from(s);
        n.robot_bin = sgr::distance_bin(n.robot_distance_m, config);
        if (n.robot_distance_m > 1e-9) n.robot_sector = sgr::direction_sector({}, 0, n.center3d);
        g.nodes.push_back(std::move(n));
    }
    std::sort(g.nodes.begin(), g.nodes.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });
    g.edges = sgr::compute_relations(g.nodes, config);
    g.build_indices();
    return g;
}

// --------------------------------------------------------------------------
// Reference implementations (kept deliberately naive)
// --------------------------------------------------------------------------

/// Trimmed mean by explicit sort-and-slice.
inline double trimmed_mean_ref(std::vector<double> vals, double trim_pct) {
    std::sort(vals.begin(), vals.end());
    std::size_t k = static_cast<std::size_t>(vals.size() * trim_pct / 100.0);
    double sum = 0;
    std::size_t count = 0;
    for (std::size_t i = k; i + k < vals.size(); ++i) {
        sum += vals[i];
        ++count;
    }
    return sum / static_cast<double>(count);
}

/// Order-statistic percentile interval used by the box estimator.
inline std::pair<double, double> trim_interval_ref(std::vector<double> vals, double trim_pct) {
    std::sort(vals.begin(), vals.end());
    std::size_t k = static_cast<std::size_t>(vals.size() * trim_pct / 100.0);
    return {vals[k], vals[vals.size() - 1 - k]};
}

/// Wrap-aware interval membership by explicit shift enumeration.
inline bool in_mod_interval_ref(double u, double x, double w, double period) {
    for (int k = -2; k <= 2; ++k) {
        double lo = x + k * period;
        if (u >= lo && u < lo + w) return true;
    }
    return false;
}

// --------------------------------------------------------------------------
// Random structured queries spanning the full grammar
// --------------------------------------------------------------------------

inline sgr::AttributeConstraint random_attr(std::mt19937& rng) {
    static const std::vector<sgr::AttributeConstraint> pool = {
        {"gender", "male"},   {"gender", "female"},  {"age", "child"},
        {"age", "adolescent"}, {"age", "young_adult"}, {"age", "adult"},
        {"age", "elderly"},   {"race", "white"},     {"race", "black"},
        {"race", "asian"},    {"race", "other"},     {"action", "sitting"},
        {"action", "standing"}, {"action", "walking"}};
    return pool[rng() % pool.size()];
}

inline std::vector<sgr::AttributeConstraint> random_attrs(std::mt19937& rng, int max_n) {
    std::vector<sgr::AttributeConstraint> out;
    int n = static_cast<int>(rng() % static_cast<unsigned>(max_n + 1));
    for (int i = 0; i < n; ++i) out.push_back(random_attr(rng));
    return out;
}

inline sgr::RelationalConstraint random_relation(std::mt19937& rng) {
    sgr::RelationalConstraint r;
    switch (rng() % 5) {
        case 0:   // robot frame
            r.frame = sgr::Frame::robot;
            switch (rng() % 3) {
                case 0: r.direction = static_cast<sgr::Sector>(rng() % 8); break;
                case 1: r.distance_bin = static_cast<sgr::DistanceBin>(rng() % 3); break;
                default:
                    r.direction = static_cast<sgr::Sector>(rng() % 8);
                    r.distance_bin = static_cast<sgr::DistanceBin>(rng() % 3);
            }
            break;
        case 1:   // person-frame direction ("who has ...")
            r.frame = sgr::Frame::person;
            r.direction = static_cast<sgr::Sector>(rng() % 8);
            if (rng() % 2) r.distance_bin = static_cast<sgr::DistanceBin>(rng() % 3);
            r.related_attrs = random_attrs(rng, 2);
            break;
        case 2:   // inverse direction ("to the left of ...")
            r.frame = sgr::Frame::person;
            r.direction = static_cast<sgr::Sector>(rng() % 8);
            r.inverse = true;
            if (rng() % 2) r.distance_bin = static_cast<sgr::DistanceBin>(rng() % 3);
            r.related_attrs = random_attrs(rng, 2);
            break;
        case 3:
            r.frame = sgr::Frame::person;
            r.adjacency = true;
            r.related_attrs = random_attrs(rng, 2);
            break;
        default:
            r.frame = sgr::Frame::person;
            r.occlusion = true;
            r.inverse = true;
            r.related_attrs = random_attrs(rng, 2);
    }
    return r;
}

inline sgr::StructuredQuery random_query(std::mt19937& rng) {
    sgr::StructuredQuery q;
    switch (rng() % 4) {
        case 0: q.task = sgr::Task::vg; break;
        case 1: q.task = sgr::Task::vqa_exists; break;
        case 2: q.task = sgr::Task::vqa_count; break;
        default:
            q.task = sgr::Task::vqa_attribute;
            q.vqa_attribute_key = (rng() % 2) ? "age" : "action";
    }
    q.anchor_attrs = random_attrs(rng, 3);
    int n_rel = static_cast<int>(rng() % 3);
    for (int i = 0; i < n_rel; ++i) q.relations.push_back(random_relation(rng));
    q.canonicalize();
    return q;
}

} // namespace test
