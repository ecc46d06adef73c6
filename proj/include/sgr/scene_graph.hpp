#pragma once

#include "sgr/projection.hpp"
#include "sgr/scene_model.hpp"

#include <json.hpp>

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace sgr {

using json = nlohmann::ordered_json;

/// Immutable scene graph G = (V, E) with attribute and outgoing-edge indices.
/// Detections whose 2D box captured no cloud points are dropped at build time
/// and recorded in dropped_detections.
struct SceneGraph {
    std::vector<GraphNode> nodes;               // sorted by id
    std::vector<RelationEdge> edges;            // canonical (src, dst, kind, frame) order
    std::vector<int> dropped_detections;        // ids with empty point association

    std::map<std::pair<std::string, std::string>, std::set<int>> attr_index;
    std::map<std::pair<int, EdgeKind>, std::vector<int>> edge_index;  // indices into edges

    const GraphNode* find_node(int id) const {
        for (const auto& n : nodes)
            if (n.id == id) return &n;
        return nullptr;
    }

    void build_indices() {
        attr_index.clear();
        edge_index.clear();
        for (const auto& n : nodes)
            for (const auto& [k, v] : n.attributes) attr_index[{k, v}].insert(n.id);
        for (std::size_t i = 0; i < edges.size(); ++i)
            edge_index[{edges[i].src, edges[i].kind}].push_back(static_cast<int>(i));
    }
};

inline SceneGraph build_graph(const SceneBundle& bundle, const RelationConfig& config) {
    config.validate();
    std::vector<Box2D> boxes;
    boxes.reserve(bundle.detections.size());
    for (const auto& d : bundle.detections) boxes.push_back(d.box);
    auto assoc = associate_points(bundle.camera, bundle.image_width, bundle.cloud, boxes);

    SceneGraph g;
    for (std::size_t i = 0; i < bundle.detections.size(); ++i) {
        const Detection& det = bundle.detections[i];
        if (assoc[i].empty()) {
            g.dropped_detections.push_back(det.id);
            continue;
        }
        GraphNode n;
        n.id = det.id;
        n.box2d = det.box;
        n.attributes = det.attributes;
        n.heading_deg = det.heading_deg;
        n.center3d = entity_center(assoc[i], config.outlier_trim_pct);
        n.box3d = entity_box3d(assoc[i], config);
        n.point_count = static_cast<int>(assoc[i].size());
        n.robot_distance_m = ground_distance({}, n.center3d);
        n.robot_bin = distance_bin(n.robot_distance_m, config);
        if (n.robot_distance_m > 1e-9) n.robot_sector = direction_sector({}, 0.0, n.center3d);
        g.nodes.push_back(std::move(n));
    }
    std::sort(g.nodes.begin(), g.nodes.end(),
              [](const GraphNode& a, const GraphNode& b) { return a.id < b.id; });
    std::sort(g.dropped_detections.begin(), g.dropped_detections.end());
    g.edges = compute_relations(g.nodes, config);
    g.build_indices();
    return g;
}

/// Exact set of node ids whose attributes map key to value.
inline std::set<int> nodes_with_attribute(const SceneGraph& g, const std::string& key,
                                          const std::string& value) {
    auto it = g.attr_index.find({key, value});
    return it == g.attr_index.end() ? std::set<int>{} : it->second;
}

/// Destination ids of src's outgoing edges of the given kind matching every
/// provided filter; omitted filters match anything.
inline std::set<int> related_nodes(const SceneGraph& g, int src, EdgeKind kind,
                                   std::optional<Sector> direction = std::nullopt,
                                   std::optional<Frame> frame = std::nullopt,
                                   std::optional<DistanceBin> bin = std::nullopt) {
    if (!g.find_node(src)) throw UnknownNode(src);
    std::set<int> out;
    auto it = g.edge_index.find({src, kind});
    if (it == g.edge_index.end()) return out;
    for (int ei : it->second) {
        const RelationEdge& e = g.edges[ei];
        if (direction && e.direction != direction) continue;
        if (frame && e.frame != *frame) continue;
        if (bin && e.distance_bin != bin) continue;
        out.insert(e.dst);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Serialization (stable field order; byte-identical round trips)
// ---------------------------------------------------------------------------

namespace detail {

inline json vec3_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

inline Vec3 vec3_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3) throw SchemaError("expected a 3-number array");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline json box2d_to_json(const Box2D& b) {
    json j;
    j["box"] = json::array({b.x, b.y, b.w, b.h});
    if (b.wrap) j["wrap"] = true;
    return j;
}

inline Box2D box2d_from_json(const json& j) {
    if (!j.contains("box") || !j["box"].is_array() || j["box"].size() != 4)
        throw SchemaError("expected box: [x, y, w, h]");
    Box2D b;
    b.x = j["box"][0].get<double>();
    b.y = j["box"][1].get<double>();
    b.w = j["box"][2].get<double>();
    b.h = j["box"][3].get<double>();
    b.wrap = j.value("wrap", false);
    return b;
}

} // namespace detail

inline json graph_to_json(const SceneGraph& g) {
    json j;
    j["nodes"] = json::array();
    for (const auto& n : g.nodes) {
        json nj;
        nj["id"] = n.id;
        nj["box"] = json::array({n.box2d.x, n.box2d.y, n.box2d.w, n.box2d.h});
        if (n.box2d.wrap) nj["wrap"] = true;
        nj["attributes"] = json::object();
        for (const auto& [k, v] : n.attributes) nj["attributes"][k] = v;
        if (n.heading_deg) nj["heading_deg"] = *n.heading_deg;
        nj["center3d"] = detail::vec3_to_json(n.center3d);
        nj["box3d_center"] = detail::vec3_to_json(n.box3d.center);
        nj["box3d_half_extents"] = detail::vec3_to_json(n.box3d.half_extents);
        nj["point_count"] = n.point_count;
        if (n.robot_sector) nj["robot_sector"] = to_string(*n.robot_sector);
        nj["robot_bin"] = to_string(n.robot_bin);
        nj["robot_distance_m"] = n.robot_distance_m;
        j["nodes"].push_back(std::move(nj));
    }
    j["edges"] = json::array();
    for (const auto& e : g.edges) {
        json ej;
        ej["src"] = e.src;
        ej["dst"] = e.dst;
        ej["kind"] = to_string(e.kind);
        if (e.kind == EdgeKind::direction) {
            ej["frame"] = to_string(e.frame);
            ej["direction"] = to_string(*e.direction);
        }
        if (e.distance_bin) ej["distance_bin"] = to_string(*e.distance_bin);
        ej["distance_m"] = e.distance_m;
        j["edges"].push_back(std::move(ej));
    }
    j["diagnostics"] = g.dropped_detections;
    return j;
}

inline SceneGraph graph_from_json(const json& j) {
    if (!j.contains("nodes") || !j.contains("edges"))
        throw SchemaError("graph document requires nodes and edges");
    SceneGraph g;
    for (const auto& nj : j["nodes"]) {
        GraphNode n;
        n.id = nj.at("id").get<int>();
        Box2D b = detail::box2d_from_json(nj);
        b.validate();
        n.box2d = b;
        for (const auto& [k, v] : nj.at("attributes").items())
            n.attributes[k] = v.get<std::string>();
        if (nj.contains("heading_deg")) n.heading_deg = nj["heading_deg"].get<double>();
        n.center3d = detail::vec3_from_json(nj.at("center3d"));
        n.box3d.center = detail::vec3_from_json(nj.at("box3d_center"));
        n.box3d.half_extents = detail::vec3_from_json(nj.at("box3d_half_extents"));
        n.box3d.validate();
        n.point_count = nj.at("point_count").get<int>();
        if (nj.contains("robot_sector")) {
            auto s = sector_from_string(nj["robot_sector"].get<std::string>());
            if (!s) throw SchemaError("unknown sector label");
            n.robot_sector = s;
        }
        auto bin = bin_from_string(nj.at("robot_bin").get<std::string>());
        if (!bin) throw SchemaError("unknown distance bin label");
        n.robot_bin = *bin;
        n.robot_distance_m = nj.at("robot_distance_m").get<double>();
        g.nodes.push_back(std::move(n));
    }
    for (const auto& ej : j["edges"]) {
        RelationEdge e;
        e.src = ej.at("src").get<int>();
        e.dst = ej.at("dst").get<int>();
        auto kind = edge_kind_from_string(ej.at("kind").get<std::string>());
        if (!kind) throw SchemaError("unknown edge kind");
        e.kind = *kind;
        if (e.kind == EdgeKind::direction) {
            auto frame = frame_from_string(ej.at("frame").get<std::string>());
            auto dir = sector_from_string(ej.at("direction").get<std::string>());
            if (!frame || !dir) throw SchemaError("direction edge requires frame and direction");
            e.frame = *frame;
            e.direction = dir;
        }
        if (ej.contains("distance_bin")) {
            auto bin = bin_from_string(ej["distance_bin"].get<std::string>());
            if (!bin) throw SchemaError("unknown distance bin label");
            e.distance_bin = bin;
        }
        e.distance_m = ej.at("distance_m").get<double>();
        if (!g.find_node(e.src) || !g.find_node(e.dst))
            throw SchemaError("edge references a missing node");
        g.edges.push_back(std::move(e));
    }
    if (j.contains("diagnostics"))
        g.dropped_detections = j["diagnostics"].get<std::vector<int>>();
    g.build_indices();
    return g;
}

} // namespace sgr
