#pragma once

#include "sgr/errors.hpp"
#include "sgr/scene_model.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace sgr {

// ---------------------------------------------------------------------------
// Wrap-aware IoU
// ---------------------------------------------------------------------------

namespace detail {

/// A box's x-extent as up to two linear intervals in [0, W).
inline int x_pieces(const Box2D& b, double image_width, double out[2][2]) {
    if (!b.wrap) {
        out[0][0] = b.x;
        out[0][1] = b.x + b.w;
        return 1;
    }
    double x0 = std::fmod(b.x, image_width);
    if (x0 < 0) x0 += image_width;
    if (x0 + b.w <= image_width) {
        out[0][0] = x0;
        out[0][1] = x0 + b.w;
        return 1;
    }
    out[0][0] = x0;
    out[0][1] = image_width;
    out[1][0] = 0;
    out[1][1] = x0 + b.w - image_width;
    return 2;
}

} // namespace detail

/// Intersection-over-union; x-intervals are modular intervals of period
/// image_width for wrapped boxes. Symmetric, in [0, 1]; identical boxes give
/// exactly 1 because areas are derived from the same interval arithmetic as
/// the overlap.
inline double iou(const Box2D& a, const Box2D& b, double image_width) {
    double ay1 = std::max(a.y, b.y);
    double ay2 = std::min(a.y + a.h, b.y + b.h);
    double overlap_y = std::max(0.0, ay2 - ay1);

    double pa[2][2], pb[2][2];
    int na = detail::x_pieces(a, image_width, pa);
    int nb = detail::x_pieces(b, image_width, pb);
    // accumulate piece overlaps in sorted order so iou(a,b) == iou(b,a) exactly
    double terms[4];
    int n_terms = 0;
    for (int i = 0; i < na; ++i) {
        for (int j = 0; j < nb; ++j) {
            double lo = std::max(pa[i][0], pb[j][0]);
            double hi = std::min(pa[i][1], pb[j][1]);
            if (hi > lo) terms[n_terms++] = hi - lo;
        }
    }
    std::sort(terms, terms + n_terms);
    double overlap_x = 0;
    for (int i = 0; i < n_terms; ++i) overlap_x += terms[i];
    double inter = overlap_x * overlap_y;

    auto area = [](double p[2][2], int n, const Box2D& box) {
        double width = 0;
        for (int i = 0; i < n; ++i) width += p[i][1] - p[i][0];
        return width * ((box.y + box.h) - box.y);
    };
    double uni = area(pa, na, a) + area(pb, nb, b) - inter;
    return uni > 0 ? inter / uni : 0.0;
}

// ---------------------------------------------------------------------------
// Prediction <-> ground-truth matching
// ---------------------------------------------------------------------------

struct EvalRecord {
    int query_id = 0;
    std::vector<std::pair<Box2D, double>> predictions;   // (box, score in [0,1])
    std::vector<Box2D> ground_truth;
    double image_width = 0;
};

struct MiouResult {
    double mean_iou = 0;
    bool hit = false;
};

/// Greedy one-to-one matching by IoU descending; unmatched ground truth
/// contributes 0. hit means every ground-truth box matched above 0.5.
inline MiouResult match_and_miou(const EvalRecord& rec) {
    const std::size_t ng = rec.ground_truth.size();
    const std::size_t np = rec.predictions.size();
    if (ng == 0) return {0.0, np == 0};

    std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;   // (iou, gt, pred)
    for (std::size_t g = 0; g < ng; ++g)
        for (std::size_t p = 0; p < np; ++p) {
            double v = iou(rec.ground_truth[g], rec.predictions[p].first, rec.image_width);
            if (v > 0) pairs.emplace_back(v, g, p);
        }
    std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
        if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
        if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
        return std::get<2>(a) < std::get<2>(b);
    });

    std::vector<bool> gt_used(ng, false), pred_used(np, false);
    double sum = 0;
    std::size_t matched = 0, matched_above_half = 0;
    for (const auto& [v, g, p] : pairs) {
        if (gt_used[g] || pred_used[p]) continue;
        gt_used[g] = pred_used[p] = true;
        sum += v;
        ++matched;
        if (v > 0.5) ++matched_above_half;
    }
    return {sum / static_cast<double>(ng), matched_above_half == ng};
}

// ---------------------------------------------------------------------------
// Average precision
// ---------------------------------------------------------------------------

/// Pool all predictions, rank by score, mark TP/FP against unconsumed ground
/// truth at the IoU threshold, and integrate the precision envelope over
/// recall (all-point interpolation).
inline double average_precision(const std::vector<EvalRecord>& records, double iou_threshold) {
    std::size_t total_gt = 0;
    for (const auto& r : records) total_gt += r.ground_truth.size();
    if (total_gt == 0) return 0.0;

    struct Pooled {
        double score;
        int query_id;
        std::size_t rec, prd;
    };
    std::vector<Pooled> pool;
    for (std::size_t ri = 0; ri < records.size(); ++ri)
        for (std::size_t pi = 0; pi < records[ri].predictions.size(); ++pi)
            pool.push_back({records[ri].predictions[pi].second, records[ri].query_id, ri, pi});
    std::sort(pool.begin(), pool.end(), [](const Pooled& a, const Pooled& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.query_id != b.query_id) return a.query_id < b.query_id;
        if (a.rec != b.rec) return a.rec < b.rec;
        return a.prd < b.prd;
    });

    std::vector<std::vector<bool>> gt_used(records.size());
    for (std::size_t ri = 0; ri < records.size(); ++ri)
        gt_used[ri].assign(records[ri].ground_truth.size(), false);

    std::vector<double> precision;
    std::vector<bool> is_tp;
    std::size_t tp = 0, seen = 0;
    for (const auto& p : pool) {
        const EvalRecord& rec = records[p.rec];
        const Box2D& box = rec.predictions[p.prd].first;
        double best = -1;
        std::size_t best_g = 0;
        for (std::size_t g = 0; g < rec.ground_truth.size(); ++g) {
            if (gt_used[p.rec][g]) continue;
            double v = iou(rec.ground_truth[g], box, rec.image_width);
            if (v >= iou_threshold && v > best) {
                best = v;
                best_g = g;
            }
        }
        ++seen;
        if (best >= 0) {
            gt_used[p.rec][best_g] = true;
            ++tp;
        }
        precision.push_back(static_cast<double>(tp) / static_cast<double>(seen));
        is_tp.push_back(best >= 0);
    }

    // Each true positive raises recall by exactly 1/total_gt, so the area
    // under the precision envelope is the mean envelope value over hits.
    double env = 0, env_sum = 0;
    std::vector<double> envelope(precision.size());
    for (std::size_t i = precision.size(); i-- > 0;) {
        env = std::max(env, precision[i]);
        envelope[i] = env;
    }
    for (std::size_t i = 0; i < precision.size(); ++i)
        if (is_tp[i]) env_sum += envelope[i];
    return env_sum / static_cast<double>(total_gt);
}

inline constexpr int kNumApThresholds = 10;

inline std::array<double, kNumApThresholds> ap_thresholds() {
    std::array<double, kNumApThresholds> t{};
    for (int k = 0; k < kNumApThresholds; ++k) t[k] = static_cast<double>(10 + k) / 20.0;
    return t;
}

/// mAP@[.50:.95]: mean AP over thresholds 0.50, 0.55, ..., 0.95.
inline double map_metric(const std::vector<EvalRecord>& records) {
    double sum = 0;
    for (double t : ap_thresholds()) sum += average_precision(records, t);
    return sum / kNumApThresholds;
}

// ---------------------------------------------------------------------------
// Record and report serialization
// ---------------------------------------------------------------------------

struct EvalReport {
    std::optional<double> miou;
    std::optional<double> map;
    std::array<double, kNumApThresholds> per_threshold_ap{};
    int n_queries = 0;
};

/// Macro-averaged mIoU over queries plus pooled mAP.
inline EvalReport evaluate_records(const std::vector<EvalRecord>& records) {
    EvalReport rep;
    rep.n_queries = static_cast<int>(records.size());
    if (records.empty()) return rep;
    double sum = 0;
    for (const auto& r : records) sum += match_and_miou(r).mean_iou;
    rep.miou = sum / static_cast<double>(records.size());
    auto thresholds = ap_thresholds();
    double ap_sum = 0;
    for (int k = 0; k < kNumApThresholds; ++k) {
        rep.per_threshold_ap[k] = average_precision(records, thresholds[k]);
        ap_sum += rep.per_threshold_ap[k];
    }
    rep.map = ap_sum / kNumApThresholds;
    return rep;
}

inline EvalRecord eval_record_from_json(const nlohmann::ordered_json& j) {
    EvalRecord rec;
    if (!j.contains("query_id") || !j.contains("image_width"))
        throw SchemaError("record requires query_id and image_width");
    rec.query_id = j["query_id"].get<int>();
    rec.image_width = j["image_width"].get<double>();
    if (!(rec.image_width > 0)) throw SchemaError("image_width must be positive");
    auto read_box = [&](const nlohmann::ordered_json& bj) {
        if (!bj.contains("box") || !bj["box"].is_array() || bj["box"].size() != 4)
            throw SchemaError("expected box: [x, y, w, h]");
        Box2D b;
        b.x = bj["box"][0].get<double>();
        b.y = bj["box"][1].get<double>();
        b.w = bj["box"][2].get<double>();
        b.h = bj["box"][3].get<double>();
        b.wrap = bj.value("wrap", false);
        b.validate();
        return b;
    };
    if (j.contains("predictions"))
        for (const auto& pj : j["predictions"]) {
            double score = pj.value("score", 1.0);
            if (score < 0 || score > 1) throw SchemaError("score must be in [0, 1]");
            rec.predictions.emplace_back(read_box(pj), score);
        }
    if (j.contains("ground_truth"))
        for (const auto& gj : j["ground_truth"]) rec.ground_truth.push_back(read_box(gj));
    return rec;
}

inline nlohmann::ordered_json eval_record_to_json(const EvalRecord& rec) {
    nlohmann::ordered_json j;
    j["query_id"] = rec.query_id;
    j["image_width"] = rec.image_width;
    j["predictions"] = nlohmann::ordered_json::array();
    for (const auto& [b, s] : rec.predictions) {
        nlohmann::ordered_json bj;
        bj["box"] = nlohmann::ordered_json::array({b.x, b.y, b.w, b.h});
        if (b.wrap) bj["wrap"] = true;
        bj["score"] = s;
        j["predictions"].push_back(std::move(bj));
    }
    j["ground_truth"] = nlohmann::ordered_json::array();
    for (const auto& b : rec.ground_truth) {
        nlohmann::ordered_json bj;
        bj["box"] = nlohmann::ordered_json::array({b.x, b.y, b.w, b.h});
        if (b.wrap) bj["wrap"] = true;
        j["ground_truth"].push_back(std::move(bj));
    }
    return j;
}

} // namespace sgr
