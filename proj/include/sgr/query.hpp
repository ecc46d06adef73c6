#pragma once

#include "sgr/errors.hpp"
#include "sgr/scene_model.hpp"

#include <json.hpp>

#include <algorithm>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace sgr {

enum class Task { vg, vqa_exists, vqa_count, vqa_attribute };

inline const char* to_string(Task t) {
    switch (t) {
        case Task::vg: return "vg";
        case Task::vqa_exists: return "vqa_exists";
        case Task::vqa_count: return "vqa_count";
        default: return "vqa_attribute";
    }
}

inline std::optional<Task> task_from_string(const std::string& s) {
    if (s == "vg") return Task::vg;
    if (s == "vqa_exists") return Task::vqa_exists;
    if (s == "vqa_count") return Task::vqa_count;
    if (s == "vqa_attribute") return Task::vqa_attribute;
    return std::nullopt;
}

struct AttributeConstraint {
    std::string key;
    std::string value;

    bool operator==(const AttributeConstraint&) const = default;
};

/// Rendering/sorting priority of attribute keys: the common person attributes
/// first, anything else alphabetically after them.
inline int attr_key_rank(const std::string& key) {
    if (key == "gender") return 0;
    if (key == "age") return 1;
    if (key == "race") return 2;
    if (key == "action") return 3;
    return 4;
}

inline void canonicalize_constraints(std::vector<AttributeConstraint>& attrs) {
    for (auto& a : attrs) {
        a.key = canonical_token(a.key);
        a.value = canonical_token(a.value);
    }
    std::sort(attrs.begin(), attrs.end(), [](const auto& a, const auto& b) {
        return std::tuple(attr_key_rank(a.key), a.key, a.value) <
               std::tuple(attr_key_rank(b.key), b.key, b.value);
    });
    attrs.erase(std::unique(attrs.begin(), attrs.end()), attrs.end());
}

/// One relational requirement on the anchor. Exactly one mode:
///   - robot frame: direction and/or distance_bin relative to the robot
///   - person direction: direction (+ optional bin) to a related person;
///     inverse means the anchor sits in the related person's sector rather
///     than the other way around
///   - person distance: distance_bin to a related person
///   - adjacency / occlusion ("next to" / "occluded by" a related person)
struct RelationalConstraint {
    Frame frame = Frame::person;
    std::optional<Sector> direction;
    std::optional<DistanceBin> distance_bin;
    std::vector<AttributeConstraint> related_attrs;
    bool adjacency = false;
    bool occlusion = false;
    bool inverse = false;

    bool operator==(const RelationalConstraint&) const = default;

    void canonicalize() {
        canonicalize_constraints(related_attrs);
        if (occlusion) inverse = true;             // "occluded by" is the only reading
        if (inverse && !direction && !occlusion) inverse = false;  // distance/adjacency are symmetric
        validate();
    }

    void validate() const {
        int modes = (direction || distance_bin ? 1 : 0) + (adjacency ? 1 : 0) + (occlusion ? 1 : 0);
        if (modes != 1)
            throw SchemaError("relational constraint must use exactly one of "
                              "direction/distance, adjacency, occlusion");
        if (frame == Frame::robot) {
            if (!related_attrs.empty() || adjacency || occlusion || inverse)
                throw SchemaError("robot-frame constraints carry only direction/distance");
            if (!direction && !distance_bin)
                throw SchemaError("robot-frame constraint requires direction or distance bin");
        }
        if (inverse && !direction && !occlusion)
            throw SchemaError("inverse applies to direction or occlusion constraints");
    }

    auto sort_key() const {
        auto part = [](const auto& opt) { return opt ? static_cast<int>(*opt) + 1 : 0; };
        std::string attrs;
        for (const auto& a : related_attrs) attrs += a.key + "=" + a.value + ";";
        return std::tuple(static_cast<int>(frame), adjacency, occlusion, inverse,
                          part(direction), part(distance_bin), attrs);
    }
};

/// Parsed query: anchor attribute constraints plus relational constraints.
/// An empty anchor list is the universal "person" query.
struct StructuredQuery {
    Task task = Task::vg;
    std::vector<AttributeConstraint> anchor_attrs;
    std::vector<RelationalConstraint> relations;
    std::optional<std::string> vqa_attribute_key;

    bool operator==(const StructuredQuery&) const = default;

    void canonicalize() {
        canonicalize_constraints(anchor_attrs);
        for (auto& r : relations) r.canonicalize();
        std::sort(relations.begin(), relations.end(),
                  [](const auto& a, const auto& b) { return a.sort_key() < b.sort_key(); });
        relations.erase(std::unique(relations.begin(), relations.end()), relations.end());
        if (vqa_attribute_key) vqa_attribute_key = canonical_token(*vqa_attribute_key);
        if ((task == Task::vqa_attribute) != vqa_attribute_key.has_value())
            throw SchemaError("vqa_attribute_key is required exactly for vqa_attribute queries");
    }
};

// ---------------------------------------------------------------------------
// Structured document form (mirrors the query field-for-field)
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json query_to_json(const StructuredQuery& q) {
    nlohmann::ordered_json j;
    j["task"] = to_string(q.task);
    j["anchor_attrs"] = nlohmann::ordered_json::array();
    for (const auto& a : q.anchor_attrs)
        j["anchor_attrs"].push_back({{"key", a.key}, {"value", a.value}});
    j["relations"] = nlohmann::ordered_json::array();
    for (const auto& r : q.relations) {
        nlohmann::ordered_json rj;
        rj["frame"] = to_string(r.frame);
        if (r.direction) rj["direction"] = to_string(*r.direction);
        if (r.distance_bin) rj["distance_bin"] = to_string(*r.distance_bin);
        rj["related_attrs"] = nlohmann::ordered_json::array();
        for (const auto& a : r.related_attrs)
            rj["related_attrs"].push_back({{"key", a.key}, {"value", a.value}});
        if (r.adjacency) rj["adjacency"] = true;
        if (r.occlusion) rj["occlusion"] = true;
        if (r.inverse) rj["inverse"] = true;
        j["relations"].push_back(std::move(rj));
    }
    if (q.vqa_attribute_key) j["vqa_attribute_key"] = *q.vqa_attribute_key;
    return j;
}

inline StructuredQuery parse_structured(const nlohmann::ordered_json& j) {
    StructuredQuery q;
    if (!j.contains("task")) throw SchemaError("query document requires task");
    auto task = task_from_string(j["task"].get<std::string>());
    if (!task) throw SchemaError("unknown task");
    q.task = *task;
    auto read_attrs = [](const nlohmann::ordered_json& arr) {
        std::vector<AttributeConstraint> out;
        for (const auto& aj : arr) {
            if (!aj.contains("key") || !aj.contains("value"))
                throw SchemaError("attribute constraint requires key and value");
            out.push_back({aj["key"].get<std::string>(), aj["value"].get<std::string>()});
        }
        return out;
    };
    if (j.contains("anchor_attrs")) q.anchor_attrs = read_attrs(j["anchor_attrs"]);
    if (j.contains("relations")) {
        for (const auto& rj : j["relations"]) {
            RelationalConstraint r;
            if (rj.contains("frame")) {
                auto f = frame_from_string(rj["frame"].get<std::string>());
                if (!f) throw SchemaError("unknown frame");
                r.frame = *f;
            }
            if (rj.contains("direction")) {
                auto s = sector_from_string(rj["direction"].get<std::string>());
                if (!s) throw SchemaError("unknown direction sector");
                r.direction = s;
            }
            if (rj.contains("distance_bin")) {
                auto b = bin_from_string(rj["distance_bin"].get<std::string>());
                if (!b) throw SchemaError("unknown distance bin");
                r.distance_bin = b;
            }
            if (rj.contains("related_attrs")) r.related_attrs = read_attrs(rj["related_attrs"]);
            r.adjacency = rj.value("adjacency", false);
            r.occlusion = rj.value("occlusion", false);
            r.inverse = rj.value("inverse", false);
            q.relations.push_back(std::move(r));
        }
    }
    if (j.contains("vqa_attribute_key"))
        q.vqa_attribute_key = j["vqa_attribute_key"].get<std::string>();
    q.canonicalize();
    return q;
}

} // namespace sgr
