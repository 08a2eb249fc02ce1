// Copyright 2026 The hoiseg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hoiseg/metrics.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "hoiseg/errors.hpp"

namespace hoiseg {

namespace {

using ordered_json = nlohmann::ordered_json;

bool all_labeled(const StepSegmentation& s) {
    return std::all_of(s.segments.begin(), s.segments.end(), [](const StepSegment& x) { return x.label.has_value(); });
}

double ratio(std::int64_t num, std::int64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

// Greedy one-to-one matching by descending IOU. Returns, per prediction, the
// index of its matched truth box or -1.
std::vector<int> match_boxes(const std::vector<const Detection*>& pred, const std::vector<const Detection*>& truth,
                             double iou_match) {
    struct Edge {
        double iou;
        std::size_t p;
        std::size_t t;
    };
    std::vector<Edge> edges;
    for (std::size_t p = 0; p < pred.size(); ++p) {
        for (std::size_t t = 0; t < truth.size(); ++t) {
            if (pred[p]->cls != truth[t]->cls) {
                continue;
            }
            const double v = iou(pred[p]->box, truth[t]->box);
            if (v >= iou_match) {
                edges.push_back({v, p, t});
            }
        }
    }
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        if (a.iou != b.iou) {
            return a.iou > b.iou;
        }
        return std::tie(a.p, a.t) < std::tie(b.p, b.t);
    });
    std::vector<int> match(pred.size(), -1);
    std::vector<bool> taken(truth.size(), false);
    for (const auto& e : edges) {
        if (match[e.p] < 0 && !taken[e.t]) {
            match[e.p] = static_cast<int>(e.t);
            taken[e.t] = true;
        }
    }
    return match;
}

bool is_active_hand(DetectionClass c) {
    return c == DetectionClass::ActiveLeftHand || c == DetectionClass::ActiveRightHand;
}

struct FrameBoxes {
    std::vector<const Detection*> hands;
    std::vector<const Detection*> objects;
};

FrameBoxes collect(const FrameDetections* frame) {
    FrameBoxes out;
    if (frame == nullptr) {
        return out;
    }
    for (const auto& d : frame->detections) {
        if (is_active_hand(d.cls)) {
            out.hands.push_back(&d);
        } else if (d.cls == DetectionClass::ActiveObject) {
            out.objects.push_back(&d);
        }
    }
    return out;
}

bool touches_any(const Detection& hand, const std::vector<const Detection*>& objects) {
    return std::any_of(objects.begin(), objects.end(),
                       [&](const Detection* o) { return iou(hand.box, o->box) > 0.0; });
}

void finish_row(DetectionEvalRow& row) {
    row.tpr_defined = row.instances > 0;
    row.precision_defined = row.tp + row.fp > 0;
    row.tpr = ratio(row.tp, row.instances);
    row.precision = ratio(row.tp, row.tp + row.fp);
}

std::string percent_or_flag(double v, bool defined) {
    return defined ? fmt::format("{:.2f}%", 100.0 * v) : std::string("undefined");
}

}  // namespace

double temporal_iou(FrameInterval a, FrameInterval b) noexcept {
    const std::int64_t inter = overlap_frames(a, b);
    if (inter == 0) {
        return 0.0;
    }
    const std::int64_t uni = a.length() + b.length() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

SegmentalScore segmental_f1(const StepSegmentation& predicted, const StepSegmentation& truth, double k,
                            LabelMatching labels) {
    if (predicted.video_id != truth.video_id) {
        throw ValidationError("video_id mismatch: '" + predicted.video_id + "' vs '" + truth.video_id + "'");
    }
    if (predicted.fps != truth.fps) {
        throw ValidationError("fps mismatch between prediction and ground truth");
    }
    if (!(k > 0.0 && k <= 1.0)) {
        throw ValidationError("overlap threshold k must lie in (0, 1]");
    }
    bool use_labels = labels == LabelMatching::Require;
    if (labels == LabelMatching::Auto) {
        use_labels = all_labeled(predicted) && all_labeled(truth) && !predicted.segments.empty() &&
                     !truth.segments.empty();
    }

    std::vector<const StepSegment*> preds;
    for (const auto& s : predicted.segments) {
        preds.push_back(&s);
    }
    std::stable_sort(preds.begin(), preds.end(),
                     [](const StepSegment* a, const StepSegment* b) { return a->start_frame < b->start_frame; });

    SegmentalScore score;
    score.k = k;
    std::vector<bool> used(truth.segments.size(), false);
    for (const StepSegment* p : preds) {
        double best = -1.0;
        std::size_t best_idx = 0;
        for (std::size_t t = 0; t < truth.segments.size(); ++t) {
            if (used[t]) {
                continue;
            }
            if (use_labels && p->label != truth.segments[t].label) {
                continue;
            }
            const double v = temporal_iou(p->interval(), truth.segments[t].interval());
            if (v > best) {
                best = v;
                best_idx = t;
            }
        }
        if (best >= k) {
            used[best_idx] = true;
            ++score.tp;
        } else {
            ++score.fp;
        }
    }
    score.fn = static_cast<std::int64_t>(truth.segments.size()) - score.tp;
    score.precision_defined = !predicted.segments.empty();
    score.recall_defined = !truth.segments.empty();
    score.precision = ratio(score.tp, score.tp + score.fp);
    score.recall = ratio(score.tp, score.tp + score.fn);
    const double pr = score.precision + score.recall;
    score.f1 = pr > 0.0 ? 2.0 * score.precision * score.recall / pr : 0.0;
    return score;
}

std::array<SegmentalScore, 3> f1_report(const StepSegmentation& predicted, const StepSegmentation& truth,
                                        LabelMatching labels) {
    std::array<SegmentalScore, 3> out;
    for (std::size_t i = 0; i < kReportThresholds.size(); ++i) {
        out[i] = segmental_f1(predicted, truth, kReportThresholds[i], labels);
    }
    return out;
}

std::string format_f1_table(const std::array<SegmentalScore, 3>& scores) {
    std::string out;
    out += fmt::format("{:<10}", "");
    for (const auto& s : scores) {
        out += fmt::format("{:>12}", fmt::format("F1@{:.0f}%", 100.0 * s.k));
    }
    out += '\n';
    out += fmt::format("{:<10}", "predicted");
    for (const auto& s : scores) {
        out += fmt::format("{:>12}", fmt::format("{:.2f}", 100.0 * s.f1));
    }
    out += '\n';
    for (const auto& s : scores) {
        out += fmt::format("k={:.2f}  tp={} fp={} fn={}  precision={}  recall={}\n", s.k, s.tp, s.fp, s.fn,
                           percent_or_flag(s.precision, s.precision_defined),
                           percent_or_flag(s.recall, s.recall_defined));
    }
    return out;
}

std::string f1_report_json(const std::array<SegmentalScore, 3>& scores) {
    ordered_json doc = ordered_json::array();
    for (const auto& s : scores) {
        ordered_json j;
        j["k"] = s.k;
        j["precision"] = s.precision;
        j["recall"] = s.recall;
        j["f1"] = s.f1;
        j["tp"] = s.tp;
        j["fp"] = s.fp;
        j["fn"] = s.fn;
        j["precision_defined"] = s.precision_defined;
        j["recall_defined"] = s.recall_defined;
        doc.push_back(std::move(j));
    }
    return doc.dump(2) + "\n";
}

std::string_view to_string(DetectionCategory c) noexcept {
    switch (c) {
        case DetectionCategory::ActiveHand:
            return "AH";
        case DetectionCategory::ActiveObject:
            return "AO";
        case DetectionCategory::Hoi:
            break;
    }
    return "HOI";
}

std::vector<DetectionEvalRow> detection_eval(const VideoTrace& predicted, const VideoTrace& truth, double iou_match) {
    if (predicted.frame_count != truth.frame_count) {
        throw ValidationError("frame_count mismatch: " + std::to_string(predicted.frame_count) + " vs " +
                              std::to_string(truth.frame_count));
    }
    if (!(iou_match > 0.0 && iou_match <= 1.0)) {
        throw ValidationError("iou_match must lie in (0, 1]");
    }
    DetectionEvalRow ah{DetectionCategory::ActiveHand};
    DetectionEvalRow ao{DetectionCategory::ActiveObject};
    DetectionEvalRow hoi{DetectionCategory::Hoi};

    std::set<std::int64_t> indices;
    for (const auto& f : predicted.frames) {
        indices.insert(f.frame_index);
    }
    for (const auto& f : truth.frames) {
        indices.insert(f.frame_index);
    }

    for (std::int64_t idx : indices) {
        const FrameBoxes p = collect(predicted.find_frame(idx));
        const FrameBoxes t = collect(truth.find_frame(idx));
        const auto hand_match = match_boxes(p.hands, t.hands, iou_match);
        const auto obj_match = match_boxes(p.objects, t.objects, iou_match);

        const auto matched_hands = std::count_if(hand_match.begin(), hand_match.end(), [](int m) { return m >= 0; });
        const auto matched_objs = std::count_if(obj_match.begin(), obj_match.end(), [](int m) { return m >= 0; });
        ah.instances += static_cast<std::int64_t>(t.hands.size());
        ah.tp += matched_hands;
        ah.fp += static_cast<std::int64_t>(p.hands.size()) - matched_hands;
        ao.instances += static_cast<std::int64_t>(t.objects.size());
        ao.tp += matched_objs;
        ao.fp += static_cast<std::int64_t>(p.objects.size()) - matched_objs;

        for (const Detection* th : t.hands) {
            if (touches_any(*th, t.objects)) {
                ++hoi.instances;
            }
        }
        for (std::size_t ph = 0; ph < p.hands.size(); ++ph) {
            if (!touches_any(*p.hands[ph], p.objects)) {
                continue;
            }
            bool hit = false;
            if (hand_match[ph] >= 0) {
                const Detection& th = *t.hands[static_cast<std::size_t>(hand_match[ph])];
                for (std::size_t po = 0; po < p.objects.size() && !hit; ++po) {
                    if (obj_match[po] < 0 || iou(p.hands[ph]->box, p.objects[po]->box) <= 0.0) {
                        continue;
                    }
                    const Detection& to = *t.objects[static_cast<std::size_t>(obj_match[po])];
                    hit = iou(th.box, to.box) > 0.0;
                }
            }
            (hit ? hoi.tp : hoi.fp) += 1;
        }
    }
    finish_row(ah);
    finish_row(ao);
    finish_row(hoi);
    return {ah, ao, hoi};
}

std::string format_detection_table(const std::vector<DetectionEvalRow>& rows) {
    std::string out = fmt::format("{:<10}{:>10}{:>8}{:>8}{:>12}{:>12}\n", "Category", "Instances", "TP", "FP",
                                  "TPR", "Precision");
    for (const auto& r : rows) {
        out += fmt::format("{:<10}{:>10}{:>8}{:>8}{:>12}{:>12}\n", to_string(r.category), r.instances, r.tp, r.fp,
                           percent_or_flag(r.tpr, r.tpr_defined), percent_or_flag(r.precision, r.precision_defined));
    }
    return out;
}

std::string detection_report_json(const std::vector<DetectionEvalRow>& rows) {
    ordered_json doc = ordered_json::array();
    for (const auto& r : rows) {
        ordered_json j;
        j["category"] = std::string(to_string(r.category));
        j["instances"] = r.instances;
        j["tp"] = r.tp;
        j["fp"] = r.fp;
        j["tpr"] = r.tpr;
        j["precision"] = r.precision;
        j["tpr_defined"] = r.tpr_defined;
        j["precision_defined"] = r.precision_defined;
        doc.push_back(std::move(j));
    }
    return doc.dump(2) + "\n";
}

}  // namespace hoiseg
