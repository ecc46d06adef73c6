#pragma once

#include "sgr/camera.hpp"
#include "sgr/errors.hpp"
#include "sgr/geometry.hpp"
#include "sgr/scene_model.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace sgr {

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingInput("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw MissingInput("cannot write " + path.string());
    out << content;
}

inline nlohmann::ordered_json parse_json(const std::string& text, const std::string& what) {
    auto j = nlohmann::ordered_json::parse(text, nullptr, false);
    if (j.is_discarded()) throw SchemaError(what + " is not valid JSON");
    return j;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Point clouds: plain-text XYZ and ASCII PCD
// ---------------------------------------------------------------------------

inline PointCloud parse_xyz(const std::string& text) {
    PointCloud cloud;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        std::istringstream ls(line);
        Vec3 p;
        if (!(ls >> p.x >> p.y >> p.z)) throw ParseError(lineno, "expected 3 coordinates");
        std::string extra;
        if (ls >> extra) throw ParseError(lineno, "expected 3 coordinates");
        if (!p.finite()) throw ParseError(lineno, "non-finite coordinate");
        cloud.push_back(p);
    }
    return cloud;
}

inline PointCloud parse_pcd(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    bool in_data = false;
    std::vector<std::string> fields;
    PointCloud cloud;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        if (!in_data) {
            std::string key;
            ls >> key;
            if (key == "FIELDS") {
                std::string f;
                while (ls >> f) fields.push_back(f);
            } else if (key == "DATA") {
                std::string mode;
                ls >> mode;
                if (mode != "ascii") throw UnsupportedFormat("only ASCII PCD data is supported");
                if (fields.size() < 3 || fields[0] != "x" || fields[1] != "y" || fields[2] != "z")
                    throw SchemaError("PCD requires FIELDS x y z");
                in_data = true;
            }
            continue;
        }
        Vec3 p;
        if (!(ls >> p.x >> p.y >> p.z)) throw ParseError(lineno, "expected 3 coordinates");
        if (!p.finite()) throw ParseError(lineno, "non-finite coordinate");
        // extra columns beyond xyz are permitted by the FIELDS header
        for (std::size_t i = 3; i < fields.size(); ++i) {
            double skip;
            if (!(ls >> skip)) throw ParseError(lineno, "row shorter than FIELDS");
        }
        cloud.push_back(p);
    }
    if (!in_data) throw SchemaError("PCD file has no DATA section");
    return cloud;
}

inline PointCloud load_point_cloud(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    std::string text = detail::read_file(path);
    if (ext == ".xyz") return parse_xyz(text);
    if (ext == ".pcd") return parse_pcd(text);
    throw UnsupportedFormat("unknown point cloud extension \"" + ext + "\"");
}

inline std::string format_xyz(const PointCloud& cloud) {
    std::string out;
    for (const Vec3& p : cloud) {
        out += dtos(p.x);
        out += ' ';
        out += dtos(p.y);
        out += ' ';
        out += dtos(p.z);
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Camera calibration
// ---------------------------------------------------------------------------

inline CameraModel camera_from_json(const nlohmann::ordered_json& j) {
    if (!j.contains("kind")) throw SchemaError("calibration requires kind");
    CameraModel cam;
    std::string kind = j["kind"].get<std::string>();
    if (kind == "pinhole") cam.kind = CameraKind::pinhole;
    else if (kind == "cylindrical") cam.kind = CameraKind::cylindrical;
    else throw SchemaError("kind must be pinhole or cylindrical");

    auto need = [&](const char* field) -> double {
        if (!j.contains(field)) throw SchemaError(std::string("calibration missing ") + field);
        return j[field].get<double>();
    };
    if (cam.kind == CameraKind::pinhole) {
        cam.fx = need("fx");
        cam.fy = need("fy");
        cam.cx = need("cx");
        cam.cy = need("cy");
    } else {
        cam.seam_azimuth_deg = need("seam_azimuth_deg");
        cam.v_center = need("v_center");
        cam.fv = need("fv");
    }
    if (!j.contains("R") || !j["R"].is_array() || j["R"].size() != 9)
        throw SchemaError("calibration requires R: [9 numbers row-major]");
    if (!j.contains("t") || !j["t"].is_array() || j["t"].size() != 3)
        throw SchemaError("calibration requires t: [3 numbers]");
    for (int i = 0; i < 9; ++i) cam.rotation.m[i] = j["R"][i].get<double>();
    cam.translation = {j["t"][0].get<double>(), j["t"][1].get<double>(), j["t"][2].get<double>()};
    cam.validate();
    return cam;
}

inline nlohmann::ordered_json camera_to_json(const CameraModel& cam) {
    nlohmann::ordered_json j;
    if (cam.kind == CameraKind::pinhole) {
        j["kind"] = "pinhole";
        j["fx"] = cam.fx;
        j["fy"] = cam.fy;
        j["cx"] = cam.cx;
        j["cy"] = cam.cy;
    } else {
        j["kind"] = "cylindrical";
        j["seam_azimuth_deg"] = cam.seam_azimuth_deg;
        j["v_center"] = cam.v_center;
        j["fv"] = cam.fv;
    }
    j["R"] = cam.rotation.m;
    j["t"] = nlohmann::ordered_json::array({cam.translation.x, cam.translation.y, cam.translation.z});
    return j;
}

inline CameraModel load_camera(const std::filesystem::path& path) {
    return camera_from_json(detail::parse_json(detail::read_file(path), "calibration file"));
}

// ---------------------------------------------------------------------------
// Detections
// ---------------------------------------------------------------------------

struct DetectionsDoc {
    double image_width = 0;
    double image_height = 0;
    std::vector<Detection> detections;
};

inline DetectionsDoc detections_from_json(const nlohmann::ordered_json& j) {
    DetectionsDoc doc;
    if (!j.contains("image_width") || !j.contains("image_height") || !j.contains("detections"))
        throw SchemaError("detections document requires image_width, image_height, detections");
    doc.image_width = j["image_width"].get<double>();
    doc.image_height = j["image_height"].get<double>();
    if (!(doc.image_width > 0) || !(doc.image_height > 0))
        throw SchemaError("image dimensions must be positive");
    std::set<int> seen;
    for (const auto& dj : j["detections"]) {
        Detection d;
        if (!dj.contains("id") || !dj.contains("box"))
            throw SchemaError("detection requires id and box");
        d.id = dj["id"].get<int>();
        if (d.id < 0) throw SchemaError("detection id must be >= 0");
        if (!seen.insert(d.id).second) throw DuplicateId("detection id " + std::to_string(d.id));
        if (!dj["box"].is_array() || dj["box"].size() != 4)
            throw SchemaError("box must be [x, y, w, h]");
        d.box.x = dj["box"][0].get<double>();
        d.box.y = dj["box"][1].get<double>();
        d.box.w = dj["box"][2].get<double>();
        d.box.h = dj["box"][3].get<double>();
        d.box.wrap = dj.value("wrap", false);
        d.box.validate_for_image(doc.image_width, doc.image_height);
        if (dj.contains("attributes")) {
            std::map<std::string, std::string> raw;
            for (const auto& [k, v] : dj["attributes"].items()) {
                if (!v.is_string()) throw SchemaError("attribute values must be strings");
                raw[k] = v.get<std::string>();
            }
            d.attributes = canonicalize_attributes(raw);
        }
        if (dj.contains("heading_deg")) d.heading_deg = wrap_deg(dj["heading_deg"].get<double>());
        doc.detections.push_back(std::move(d));
    }
    return doc;
}

inline nlohmann::ordered_json detections_to_json(const DetectionsDoc& doc) {
    nlohmann::ordered_json j;
    j["image_width"] = doc.image_width;
    j["image_height"] = doc.image_height;
    j["detections"] = nlohmann::ordered_json::array();
    for (const auto& d : doc.detections) {
        nlohmann::ordered_json dj;
        dj["id"] = d.id;
        dj["box"] = nlohmann::ordered_json::array({d.box.x, d.box.y, d.box.w, d.box.h});
        if (d.box.wrap) dj["wrap"] = true;
        dj["attributes"] = nlohmann::ordered_json::object();
        for (const auto& [k, v] : d.attributes) dj["attributes"][k] = v;
        if (d.heading_deg) dj["heading_deg"] = *d.heading_deg;
        j["detections"].push_back(std::move(dj));
    }
    return j;
}

inline std::vector<Detection> load_detections(const std::filesystem::path& path) {
    return detections_from_json(detail::parse_json(detail::read_file(path), "detections file"))
        .detections;
}

// ---------------------------------------------------------------------------
// Scene bundle: manifest of the three inputs
// ---------------------------------------------------------------------------

inline SceneBundle load_scene_bundle(const std::filesystem::path& dir_or_manifest) {
    namespace fs = std::filesystem;
    fs::path manifest_path = dir_or_manifest;
    if (fs::is_directory(manifest_path)) manifest_path /= "manifest.json";
    if (!fs::exists(manifest_path)) throw MissingInput("manifest " + manifest_path.string());
    auto j = detail::parse_json(detail::read_file(manifest_path), "manifest");
    for (const char* field : {"detections", "calibration", "cloud"})
        if (!j.contains(field)) throw MissingInput(field);
    fs::path base = manifest_path.parent_path();

    auto det_doc = detections_from_json(
        detail::parse_json(detail::read_file(base / j["detections"].get<std::string>()),
                           "detections file"));
    CameraModel cam = load_camera(base / j["calibration"].get<std::string>());
    PointCloud cloud = load_point_cloud(base / j["cloud"].get<std::string>());
    return SceneBundle::make(det_doc.image_width, det_doc.image_height,
                             std::move(det_doc.detections), std::move(cloud), cam);
}

/// Writes the bundle as manifest.json + detections.json + calibration.json +
/// cloud.xyz under dir, in canonical form.
inline void save_scene_bundle(const SceneBundle& bundle, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    DetectionsDoc doc{bundle.image_width, bundle.image_height, bundle.detections};
    detail::write_file(dir / "detections.json", detections_to_json(doc).dump() + "\n");
    detail::write_file(dir / "calibration.json", camera_to_json(bundle.camera).dump() + "\n");
    detail::write_file(dir / "cloud.xyz", format_xyz(bundle.cloud));
    nlohmann::ordered_json manifest;
    manifest["detections"] = "detections.json";
    manifest["calibration"] = "calibration.json";
    manifest["cloud"] = "cloud.xyz";
    detail::write_file(dir / "manifest.json", manifest.dump() + "\n");
}

} // namespace sgr
