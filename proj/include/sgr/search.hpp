#pragma once

#include "sgr/query.hpp"
#include "sgr/scene_graph.hpp"

#include <json.hpp>

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

namespace sgr {

/// Exact rational in [0, 1]; avoids floating-point ambiguity at the
/// strict-majority boundary.
struct Fraction {
    long long num = 0;
    long long den = 1;

    bool operator==(const Fraction& o) const { return num * o.den == o.num * den; }
    bool operator<(const Fraction& o) const { return num * o.den < o.num * den; }

    /// Strictly more than half.
    bool majority() const { return 2 * num > den; }
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

struct Candidate {
    int node_id = 0;
    Fraction match_fraction;
    bool relation_ok = false;
};

struct MatchResult {
    bool retained = false;
    Fraction fraction;
};

/// Phase-1 rule: fraction of constraints exactly satisfied; retained iff the
/// fraction is a strict majority (2*matched > total). An empty constraint
/// list matches everything with fraction 1. A constraint on a key the node
/// lacks counts as unmatched.
inline MatchResult majority_match(const AttributeMap& attrs,
                                  const std::vector<AttributeConstraint>& constraints) {
    if (constraints.empty()) return {true, {1, 1}};
    long long matched = 0;
    for (const auto& c : constraints) {
        auto it = attrs.find(c.key);
        if (it != attrs.end() && it->second == c.value) ++matched;
    }
    Fraction f{matched, static_cast<long long>(constraints.size())};
    return {f.majority(), f};
}

/// All nodes passing the majority rule, in ascending node-id order.
inline std::vector<Candidate> phase1_filter(const SceneGraph& graph,
                                            const std::vector<AttributeConstraint>& anchor_attrs) {
    std::vector<Candidate> out;
    for (const auto& n : graph.nodes) {
        auto m = majority_match(n.attributes, anchor_attrs);
        if (m.retained) out.push_back({n.id, m.fraction, false});
    }
    return out;
}

namespace detail {

/// Does an edge src -> dst of this kind (and filters) exist?
inline bool has_edge(const SceneGraph& g, int src, int dst, EdgeKind kind,
                     std::optional<Sector> direction = std::nullopt,
                     std::optional<Frame> frame = std::nullopt,
                     std::optional<DistanceBin> bin = std::nullopt) {
    auto it = g.edge_index.find({src, kind});
    if (it == g.edge_index.end()) return false;
    for (int ei : it->second) {
        const RelationEdge& e = g.edges[ei];
        if (e.dst != dst) continue;
        if (direction && e.direction != direction) continue;
        if (frame && e.frame != *frame) continue;
        if (bin && e.distance_bin != bin) continue;
        return true;
    }
    return false;
}

/// One relational constraint against one candidate. All required edge kinds
/// must be witnessed by the same related node.
inline bool constraint_holds(const SceneGraph& g, const GraphNode& cand,
                             const RelationalConstraint& r, bool* heading_missing) {
    if (r.frame == Frame::robot) {
        if (r.direction && cand.robot_sector != r.direction) return false;
        if (r.distance_bin && cand.robot_bin != *r.distance_bin) return false;
        return true;
    }
    if (!r.inverse && r.direction && !cand.heading_deg) {
        if (heading_missing) *heading_missing = true;
        return false;
    }
    for (const auto& y : g.nodes) {
        if (y.id == cand.id) continue;
        if (!majority_match(y.attributes, r.related_attrs).retained) continue;
        int src = r.inverse ? y.id : cand.id;
        int dst = r.inverse ? cand.id : y.id;
        if (r.direction &&
            !has_edge(g, src, dst, EdgeKind::direction, r.direction, Frame::person))
            continue;
        if (r.distance_bin &&
            !has_edge(g, src, dst, EdgeKind::distance, std::nullopt, std::nullopt, r.distance_bin))
            continue;
        if (r.adjacency && !has_edge(g, src, dst, EdgeKind::adjacency)) continue;
        if (r.occlusion && !has_edge(g, src, dst, EdgeKind::occlusion)) continue;
        return true;
    }
    return false;
}

} // namespace detail

/// Phase-2 rule: every relational constraint must be witnessed. Candidates
/// lacking a heading fail (not error) person-frame direction constraints;
/// when heading_missing is given it is set for such candidates.
inline bool phase2_validate(const SceneGraph& graph, int candidate,
                            const std::vector<RelationalConstraint>& relations,
                            bool* heading_missing = nullptr) {
    const GraphNode* node = graph.find_node(candidate);
    if (!node) throw UnknownNode(candidate);
    bool ok = true;
    for (const auto& r : relations)
        if (!detail::constraint_holds(graph, *node, r, heading_missing)) ok = false;
    return ok;
}

/// Query result: grounded boxes for VG, textual answer for VQA. Boxes,
/// node_ids, and scores are aligned and ordered by score descending then
/// node id ascending.
struct Answer {
    Task task = Task::vg;
    std::vector<Box2D> boxes;
    std::vector<int> node_ids;
    std::vector<Fraction> scores;
    std::optional<std::string> text;
    int heading_missing = 0;
};

inline Answer execute(const SceneGraph& graph, const StructuredQuery& q) {
    Answer ans;
    ans.task = q.task;

    std::vector<Candidate> survivors;
    for (Candidate c : phase1_filter(graph, q.anchor_attrs)) {
        bool missing = false;
        c.relation_ok = phase2_validate(graph, c.node_id, q.relations, &missing);
        if (missing) ++ans.heading_missing;
        if (c.relation_ok) survivors.push_back(c);
    }
    std::stable_sort(survivors.begin(), survivors.end(), [](const Candidate& a, const Candidate& b) {
        if (a.match_fraction == b.match_fraction) return a.node_id < b.node_id;
        return b.match_fraction < a.match_fraction;
    });

    for (const auto& c : survivors) {
        ans.node_ids.push_back(c.node_id);
        ans.scores.push_back(c.match_fraction);
    }
    switch (q.task) {
        case Task::vg:
            for (const auto& c : survivors) ans.boxes.push_back(graph.find_node(c.node_id)->box2d);
            break;
        case Task::vqa_exists:
            ans.text = survivors.empty() ? "no" : "yes";
            ans.scores.clear();
            break;
        case Task::vqa_count:
            ans.text = std::to_string(survivors.size());
            ans.scores.clear();
            break;
        case Task::vqa_attribute: {
            ans.scores.clear();
            if (survivors.empty()) {
                ans.text = "none";
            } else if (survivors.size() > 1) {
                std::string ids = "ambiguous:";
                std::vector<int> sorted_ids = ans.node_ids;
                std::sort(sorted_ids.begin(), sorted_ids.end());
                for (std::size_t i = 0; i < sorted_ids.size(); ++i)
                    ids += (i ? "," : "") + std::to_string(sorted_ids[i]);
                ans.text = ids;
            } else {
                const GraphNode* n = graph.find_node(survivors[0].node_id);
                auto it = n->attributes.find(*q.vqa_attribute_key);
                ans.text = it == n->attributes.end() ? "unknown" : it->second;
            }
            break;
        }
    }
    return ans;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json answer_to_json(const Answer& a) {
    nlohmann::ordered_json j;
    j["task"] = to_string(a.task);
    j["boxes"] = nlohmann::ordered_json::array();
    for (const auto& b : a.boxes)
        j["boxes"].push_back(nlohmann::ordered_json::array({b.x, b.y, b.w, b.h, b.wrap}));
    j["node_ids"] = a.node_ids;
    j["scores"] = nlohmann::ordered_json::array();
    for (const auto& s : a.scores) j["scores"].push_back(s.value());
    if (a.text) j["text"] = *a.text;
    j["diagnostics"] = {{"heading_missing", a.heading_missing}};
    return j;
}

} // namespace sgr
