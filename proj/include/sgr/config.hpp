#pragma once

#include "sgr/errors.hpp"
#include "sgr/projection.hpp"

#include <json.hpp>

#include <string>

namespace sgr {

enum class OutputFormat { json, text };

/// Engine-wide settings: relation thresholds, parser strictness, and output
/// formatting. Loadable from a JSON config file; every threshold is also a
/// CLI flag.
struct EngineConfig {
    RelationConfig relation;
    bool grammar_strict = true;
    OutputFormat output_format = OutputFormat::json;
};

inline EngineConfig engine_config_from_json(const nlohmann::ordered_json& j) {
    EngineConfig cfg;
    if (j.contains("relation")) {
        const auto& r = j["relation"];
        auto get = [&](const char* field, double& into) {
            if (r.contains(field)) into = r[field].get<double>();
        };
        get("close_max_m", cfg.relation.close_max_m);
        get("medium_max_m", cfg.relation.medium_max_m);
        get("adjacency_max_m", cfg.relation.adjacency_max_m);
        get("occlusion_overlap_frac", cfg.relation.occlusion_overlap_frac);
        get("occlusion_depth_margin_m", cfg.relation.occlusion_depth_margin_m);
        get("outlier_trim_pct", cfg.relation.outlier_trim_pct);
    }
    if (j.contains("grammar_strict")) cfg.grammar_strict = j["grammar_strict"].get<bool>();
    if (j.contains("output_format")) {
        std::string f = j["output_format"].get<std::string>();
        if (f == "json") cfg.output_format = OutputFormat::json;
        else if (f == "text") cfg.output_format = OutputFormat::text;
        else throw SchemaError("output_format must be json or text");
    }
    cfg.relation.validate();
    return cfg;
}

} // namespace sgr
