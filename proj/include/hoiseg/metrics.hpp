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

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "hoiseg/fusion.hpp"
#include "hoiseg/trace_model.hpp"

namespace hoiseg {

/// Temporal intersection over union of inclusive frame intervals.
double temporal_iou(FrameInterval a, FrameInterval b) noexcept;

struct SegmentalScore {
    double k = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    bool precision_defined = true;  // false when there were no predictions
    bool recall_defined = true;     // false when there was no ground truth
};

enum class LabelMatching : std::uint8_t {
    Auto,    // label-aware only if every segment on both sides carries a label
    Ignore,
    Require,
};

/// Segmental F1 at overlap threshold `k`. Predictions are visited in temporal
/// order; each takes the still-unmatched truth segment of highest IOU, and
/// counts as a hit iff that IOU >= k.
SegmentalScore segmental_f1(const StepSegmentation& predicted, const StepSegmentation& truth, double k,
                            LabelMatching labels = LabelMatching::Auto);

inline constexpr std::array<double, 3> kReportThresholds = {0.10, 0.30, 0.50};

std::array<SegmentalScore, 3> f1_report(const StepSegmentation& predicted, const StepSegmentation& truth,
                                        LabelMatching labels = LabelMatching::Auto);

std::string format_f1_table(const std::array<SegmentalScore, 3>& scores);
std::string f1_report_json(const std::array<SegmentalScore, 3>& scores);

enum class DetectionCategory : std::uint8_t { ActiveHand, ActiveObject, Hoi };

std::string_view to_string(DetectionCategory c) noexcept;

struct DetectionEvalRow {
    DetectionCategory category = DetectionCategory::ActiveHand;
    std::int64_t instances = 0;
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    double tpr = 0.0;
    double precision = 0.0;
    bool tpr_defined = true;
    bool precision_defined = true;
};

inline constexpr double kDefaultDetectionIou = 0.5;

/// Per-frame greedy one-to-one box matching (highest IOU first, IOU >= iou_match,
/// same class). A predicted hand-object pair is a true HOI when its hand and an
/// object it touches both match truth boxes that touch each other.
/// Throws ValidationError when frame counts differ.
std::vector<DetectionEvalRow> detection_eval(const VideoTrace& predicted, const VideoTrace& truth,
                                             double iou_match = kDefaultDetectionIou);

std::string format_detection_table(const std::vector<DetectionEvalRow>& rows);
std::string detection_report_json(const std::vector<DetectionEvalRow>& rows);

}  // namespace hoiseg
