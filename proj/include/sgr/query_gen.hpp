#pragma once

#include "sgr/oracle.hpp"
#include "sgr/query.hpp"
#include "sgr/query_parser.hpp"
#include "sgr/synth.hpp"

#include <string>
#include <vector>

namespace sgr {

/// The benchmark's query families: attribute-only levels, robot-relative
/// distance and spatial relations, and human-human geometry, plus the three
/// VQA surface forms.
enum class QueryFamily {
    human,
    age,
    gender_age,
    gender_age_race,
    gar_distance,
    gar_distance_sr_robot,
    gar_hhg,
    vqa_exists,
    vqa_count,
    vqa_attribute,
};

inline constexpr std::array<const char*, 10> kQueryFamilyNames = {
    "human",         "age",          "gender-age",
    "gender-age-race", "gender-age-race-distance", "gender-age-race-distance-SR/robot",
    "gender-age-race-HHG", "vqa-exists", "vqa-count", "vqa-attribute"};

inline const char* to_string(QueryFamily f) {
    return kQueryFamilyNames[static_cast<int>(f)];
}

struct GeneratedQuery {
    QueryFamily family = QueryFamily::human;
    std::string text;
    StructuredQuery query;
    Answer answer;   // oracle ground truth
};

namespace detail {

inline std::vector<AttributeConstraint> describe(const SynthEntity& e,
                                                 std::initializer_list<const char*> keys) {
    std::vector<AttributeConstraint> out;
    for (const char* k : keys) out.push_back({k, e.attributes.at(k)});
    return out;
}

} // namespace detail

/// Deterministic query battery over all families. Queries are built in
/// hindsight from a sampled target entity, so each family has a nonempty
/// answer whenever the scene permits one; oracle answers ride along.
inline std::vector<GeneratedQuery> gen_queries(const SynthScene& scene, std::uint64_t seed,
                                               int k, const RelationConfig& config = {}) {
    if (k < 1) throw SchemaError("k must be >= 1");
    Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
    std::vector<GeneratedQuery> out;
    const int n = static_cast<int>(scene.entities.size());

    for (int i = 0; i < k; ++i) {
        auto family = static_cast<QueryFamily>(i % 10);
        const SynthEntity& target = scene.entities[static_cast<std::size_t>(rng.uniform_int(n))];
        StructuredQuery q;
        q.task = Task::vg;

        auto robot_bin_of = [&](const SynthEntity& e) {
            return oracle::bin_of(std::hypot(e.position.x, e.position.y), config);
        };
        auto attach_hhg = [&](StructuredQuery& query) {
            if (n < 2) return;                     // single-person scene: attribute query only
            const SynthEntity* partner = nullptr;
            int pick = rng.uniform_int(n - 1);
            for (const auto& e : scene.entities)
                if (e.id != target.id && pick-- == 0) partner = &e;
            if (!partner) return;
            RelationalConstraint r;
            r.frame = Frame::person;
            r.direction = oracle::sector_of(
                oracle::bearing_of(target.position, partner->position) - target.heading_deg);
            if (rng.uniform() < 0.5)
                r.distance_bin =
                    oracle::bin_of(oracle::dist_xy(target.position, partner->position), config);
            r.related_attrs = detail::describe(*partner, {"gender"});
            if (rng.uniform() < 0.4) {
                r.related_attrs = detail::describe(*partner, {"gender", "age"});
                // phrase it from the partner's side now and then
                if (rng.uniform() < 0.5) {
                    r.direction = oracle::sector_of(
                        oracle::bearing_of(partner->position, target.position) -
                        partner->heading_deg);
                    r.inverse = true;
                }
            }
            query.relations.push_back(std::move(r));
        };

        switch (family) {
            case QueryFamily::human:
                break;
            case QueryFamily::age:
                q.anchor_attrs = detail::describe(target, {"age"});
                break;
            case QueryFamily::gender_age:
                q.anchor_attrs = detail::describe(target, {"gender", "age"});
                break;
            case QueryFamily::gender_age_race:
                q.anchor_attrs = detail::describe(target, {"gender", "age", "race"});
                break;
            case QueryFamily::gar_distance: {
                q.anchor_attrs = detail::describe(target, {"gender", "age", "race"});
                RelationalConstraint r;
                r.frame = Frame::robot;
                r.distance_bin = robot_bin_of(target);
                q.relations.push_back(std::move(r));
                break;
            }
            case QueryFamily::gar_distance_sr_robot: {
                q.anchor_attrs = detail::describe(target, {"gender", "age", "race"});
                RelationalConstraint r;
                r.frame = Frame::robot;
                r.distance_bin = robot_bin_of(target);
                double rho = std::hypot(target.position.x, target.position.y);
                if (rho > 1e-9)
                    r.direction = oracle::sector_of(oracle::bearing_of({}, target.position));
                q.relations.push_back(std::move(r));
                break;
            }
            case QueryFamily::gar_hhg:
                q.anchor_attrs = detail::describe(target, {"gender", "age", "race"});
                attach_hhg(q);
                break;
            case QueryFamily::vqa_exists:
                q.task = Task::vqa_exists;
                q.anchor_attrs = detail::describe(target, {"gender", "age"});
                if (rng.uniform() < 0.5) {
                    RelationalConstraint r;
                    r.frame = Frame::robot;
                    r.distance_bin = robot_bin_of(target);
                    q.relations.push_back(std::move(r));
                }
                // some genuinely negative existence checks
                if (rng.uniform() < 0.3) q.anchor_attrs = {{"gender", "male"}, {"age", "child"},
                                                           {"race", "other"}};
                break;
            case QueryFamily::vqa_count:
                q.task = Task::vqa_count;
                q.anchor_attrs = rng.uniform() < 0.5 ? detail::describe(target, {"gender"})
                                                     : detail::describe(target, {"age"});
                break;
            case QueryFamily::vqa_attribute: {
                q.task = Task::vqa_attribute;
                static const std::array<const char*, 3> keys = {"race", "action", "age"};
                q.vqa_attribute_key = rng.pick(keys);
                q.anchor_attrs = detail::describe(target, {"gender", "age"});
                if (*q.vqa_attribute_key == std::string("age"))
                    q.anchor_attrs = detail::describe(target, {"gender", "race"});
                break;
            }
        }
        q.canonicalize();

        GeneratedQuery g;
        g.family = family;
        g.query = q;
        g.text = render_query(q);
        g.answer = oracle_query(scene, q, config);
        out.push_back(std::move(g));
    }
    return out;
}

} // namespace sgr
