// Command-line driver: fixture generation, graph building, query execution,
// and metric evaluation over the scene-graph reasoning engine.
//
// Exit codes: 0 success, 2 input error, 3 query parse error.

#include "sgr/config.hpp"
#include "sgr/eval.hpp"
#include "sgr/oracle.hpp"
#include "sgr/perception_io.hpp"
#include "sgr/query_gen.hpp"
#include "sgr/query_parser.hpp"
#include "sgr/scene_graph.hpp"
#include "sgr/search.hpp"
#include "sgr/synth.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitQueryParse = 3;

struct ConfigFlags {
    std::string config_path;
    double close = -1, medium = -1, adjacency = -1, trim = -1;
    double occlusion_overlap = -1, occlusion_depth = -1;
    std::string format;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "engine config file (JSON)");
        cmd->add_option("--close", close, "close-distance threshold (m)");
        cmd->add_option("--medium", medium, "medium-distance threshold (m)");
        cmd->add_option("--adjacency", adjacency, "adjacency threshold (m)");
        cmd->add_option("--trim", trim, "outlier trim percentage [0, 50)");
        cmd->add_option("--occlusion-overlap", occlusion_overlap,
                        "occlusion overlap fraction (0, 1]");
        cmd->add_option("--occlusion-depth", occlusion_depth, "occlusion depth margin (m)");
        cmd->add_option("--format", format, "output format: json or text");
    }

    sgr::EngineConfig resolve() const {
        sgr::EngineConfig cfg;
        std::string path = config_path;
        if (path.empty())
            if (const char* env = std::getenv("SGR_CONFIG")) path = env;
        if (!path.empty())
            cfg = sgr::engine_config_from_json(
                sgr::detail::parse_json(sgr::detail::read_file(path), "config file"));
        if (close >= 0) cfg.relation.close_max_m = close;
        if (medium >= 0) cfg.relation.medium_max_m = medium;
        if (adjacency >= 0) cfg.relation.adjacency_max_m = adjacency;
        if (trim >= 0) cfg.relation.outlier_trim_pct = trim;
        if (occlusion_overlap >= 0) cfg.relation.occlusion_overlap_frac = occlusion_overlap;
        if (occlusion_depth >= 0) cfg.relation.occlusion_depth_margin_m = occlusion_depth;
        if (format == "json") cfg.output_format = sgr::OutputFormat::json;
        else if (format == "text") cfg.output_format = sgr::OutputFormat::text;
        else if (!format.empty()) throw sgr::SchemaError("--format must be json or text");
        cfg.relation.validate();
        return cfg;
    }
};

std::string format6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

void print_answer(const sgr::Answer& ans, const sgr::EngineConfig& cfg) {
    if (cfg.output_format == sgr::OutputFormat::json) {
        std::cout << sgr::answer_to_json(ans).dump() << "\n";
        return;
    }
    std::cout << "task " << sgr::to_string(ans.task) << "\n";
    for (std::size_t i = 0; i < ans.node_ids.size(); ++i) {
        std::cout << "node " << ans.node_ids[i];
        if (i < ans.scores.size()) std::cout << " score " << format6(ans.scores[i].value());
        if (i < ans.boxes.size()) {
            const auto& b = ans.boxes[i];
            std::cout << " box " << sgr::dtos(b.x) << " " << sgr::dtos(b.y) << " "
                      << sgr::dtos(b.w) << " " << sgr::dtos(b.h) << (b.wrap ? " wrap" : "");
        }
        std::cout << "\n";
    }
    if (ans.text) std::cout << "answer " << *ans.text << "\n";
    if (ans.heading_missing > 0) std::cout << "heading_missing " << ans.heading_missing << "\n";
}

int cmd_gen(std::uint64_t seed, int entities, const std::string& camera,
            const std::string& out_dir, int query_count, const sgr::EngineConfig& cfg) {
    sgr::CameraKind kind;
    if (camera == "pinhole") kind = sgr::CameraKind::pinhole;
    else if (camera == "cylindrical") kind = sgr::CameraKind::cylindrical;
    else throw sgr::SchemaError("--camera must be pinhole or cylindrical");

    auto result = sgr::gen_scene(seed, entities, kind, {}, cfg.relation);
    sgr::save_scene_bundle(result.bundle, out_dir);

    auto queries = sgr::gen_queries(result.scene, seed, query_count, cfg.relation);
    std::string lines;
    for (auto& q : queries) {
        sgr::fill_answer_boxes(q.answer, result.bundle.detections);
        nlohmann::ordered_json j;
        j["family"] = sgr::to_string(q.family);
        j["text"] = q.text;
        j["query"] = sgr::query_to_json(q.query);
        j["answer"] = sgr::answer_to_json(q.answer);
        lines += j.dump() + "\n";
    }
    sgr::detail::write_file(std::filesystem::path(out_dir) / "queries.jsonl", lines);
    std::cerr << "wrote " << entities << "-entity " << camera << " fixture to " << out_dir
              << " (" << queries.size() << " queries)\n";
    return kExitOk;
}

int cmd_build(const std::string& manifest, const std::string& out_graph,
              const sgr::EngineConfig& cfg) {
    sgr::SceneBundle bundle = sgr::load_scene_bundle(manifest);
    sgr::SceneGraph graph = sgr::build_graph(bundle, cfg.relation);
    sgr::detail::write_file(out_graph, sgr::graph_to_json(graph).dump() + "\n");
    if (!graph.dropped_detections.empty()) {
        std::cerr << "dropped " << graph.dropped_detections.size()
                  << " detection(s) with empty point association:";
        for (int id : graph.dropped_detections) std::cerr << " " << id;
        std::cerr << "\n";
    }
    std::cerr << "graph: " << graph.nodes.size() << " nodes, " << graph.edges.size()
              << " edges -> " << out_graph << "\n";
    return kExitOk;
}

int cmd_query(const std::string& graph_path, const std::string& query_text,
              const std::string& structured_path, const std::string& queries_path,
              unsigned jobs, const sgr::EngineConfig& cfg) {
    sgr::SceneGraph graph = sgr::graph_from_json(
        sgr::detail::parse_json(sgr::detail::read_file(graph_path), "graph file"));

    std::vector<std::string> texts;
    std::vector<sgr::StructuredQuery> queries;
    if (!queries_path.empty()) {
        std::istringstream in(sgr::detail::read_file(queries_path));
        std::string line;
        while (std::getline(in, line))
            if (!line.empty()) texts.push_back(line);
        for (const auto& t : texts) queries.push_back(sgr::parse_query(t, cfg.grammar_strict));
    } else if (!structured_path.empty()) {
        queries.push_back(sgr::parse_structured(
            sgr::detail::parse_json(sgr::detail::read_file(structured_path), "query document")));
    } else if (!query_text.empty()) {
        queries.push_back(sgr::parse_query(query_text, cfg.grammar_strict));
    } else {
        throw sgr::SchemaError("provide a query string, --structured, or --queries");
    }

    std::vector<sgr::Answer> answers(queries.size());
    unsigned n_jobs = std::max(1u, jobs);
    if (n_jobs == 1 || queries.size() < 2) {
        for (std::size_t i = 0; i < queries.size(); ++i) answers[i] = execute(graph, queries[i]);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (unsigned t = 0; t < n_jobs; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < queries.size(); i = next++)
                    answers[i] = execute(graph, queries[i]);
            });
        for (auto& th : pool) th.join();
    }
    for (const auto& ans : answers) print_answer(ans, cfg);
    return kExitOk;
}

int cmd_eval(const std::string& records_path) {
    std::istringstream in(sgr::detail::read_file(records_path));
    std::string line;
    std::size_t lineno = 0;
    std::vector<sgr::EvalRecord> records;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto j = nlohmann::ordered_json::parse(line, nullptr, false);
        if (j.is_discarded()) throw sgr::ParseError(lineno, "malformed JSON record");
        try {
            records.push_back(sgr::eval_record_from_json(j));
        } catch (const sgr::Error& e) {
            throw sgr::ParseError(lineno, e.what());
        }
    }
    sgr::EvalReport rep = sgr::evaluate_records(records);
    std::string out = "{\"miou\":";
    out += rep.miou ? format6(*rep.miou) : "null";
    out += ",\"map\":";
    out += rep.map ? format6(*rep.map) : "null";
    out += ",\"per_threshold_ap\":[";
    for (int i = 0; i < sgr::kNumApThresholds; ++i)
        out += (i ? "," : "") + (rep.n_queries ? format6(rep.per_threshold_ap[i]) : std::string("null"));
    out += "],\"n_queries\":" + std::to_string(rep.n_queries) + "}";
    std::cout << out << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"scene-graph spatial reasoning engine"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("gen", "generate a synthetic scene fixture");
    std::uint64_t seed = 1;
    int entities = 10;
    std::string camera = "cylindrical";
    std::string out_dir = "fixture";
    int query_count = 20;
    ConfigFlags gen_flags;
    gen->add_option("--seed", seed, "generator seed");
    gen->add_option("--entities", entities, "number of people (1..500)");
    gen->add_option("--camera", camera, "pinhole or cylindrical");
    gen->add_option("--out", out_dir, "output fixture directory")->required();
    gen->add_option("--query-count", query_count, "queries to emit with oracle answers");
    gen_flags.add_to(gen);

    auto* build = app.add_subcommand("build", "build a scene graph from a fixture");
    std::string manifest;
    std::string out_graph = "graph.json";
    ConfigFlags build_flags;
    build->add_option("manifest", manifest, "manifest path or fixture directory")->required();
    build->add_option("--out", out_graph, "output graph file");
    build_flags.add_to(build);

    auto* query = app.add_subcommand("query", "run queries against a built graph");
    std::string graph_path, query_text, structured_path, queries_path;
    unsigned jobs = 1;
    ConfigFlags query_flags;
    query->add_option("graph", graph_path, "graph file from `build`")->required();
    query->add_option("text", query_text, "query sentence");
    query->add_option("--structured", structured_path, "structured query document (JSON)");
    query->add_option("--queries", queries_path, "batch file, one query per line");
    query->add_option("--jobs", jobs, "concurrent query workers");
    query_flags.add_to(query);

    auto* eval = app.add_subcommand("eval", "score predictions against ground truth");
    std::string records_path;
    eval->add_option("records", records_path, "JSONL eval records")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "UsageError: " << e.what() << "\n";
        return kExitInput;
    }

    try {
        if (gen->parsed()) return cmd_gen(seed, entities, camera, out_dir, query_count,
                                          gen_flags.resolve());
        if (build->parsed()) return cmd_build(manifest, out_graph, build_flags.resolve());
        if (query->parsed())
            return cmd_query(graph_path, query_text, structured_path, queries_path, jobs,
                             query_flags.resolve());
        if (eval->parsed()) return cmd_eval(records_path);
    } catch (const sgr::SyntaxError& e) {
        std::cerr << e.what() << "\n";
        return kExitQueryParse;
    } catch (const sgr::UnknownAttributeWord& e) {
        std::cerr << e.what() << "\n";
        return kExitQueryParse;
    } catch (const sgr::Error& e) {
        std::cerr << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "InternalError: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitOk;
}
