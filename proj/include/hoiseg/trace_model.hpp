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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hoiseg {

/// Axis-aligned box in image pixel coordinates, y growing downward.
struct BoundingBox {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    double width() const noexcept { return x_max - x_min; }
    double height() const noexcept { return y_max - y_min; }
    double area() const noexcept { return width() * height(); }
    double center_x() const noexcept { return 0.5 * (x_min + x_max); }
    double center_y() const noexcept { return 0.5 * (y_min + y_max); }

    /// Finite, non-negative coordinates and strictly positive area.
    bool valid() const noexcept;

    bool operator==(const BoundingBox&) const = default;
};

enum class DetectionClass : std::uint8_t {
    NormalObject,
    ActiveObject,
    IdleLeftHand,
    IdleRightHand,
    ActiveLeftHand,
    ActiveRightHand,
};

inline constexpr std::array<DetectionClass, 6> kAllDetectionClasses = {
    DetectionClass::NormalObject,  DetectionClass::ActiveObject,   DetectionClass::IdleLeftHand,
    DetectionClass::IdleRightHand, DetectionClass::ActiveLeftHand, DetectionClass::ActiveRightHand,
};

/// Stable wire name, e.g. "active_left_hand".
std::string_view to_string(DetectionClass cls) noexcept;
std::optional<DetectionClass> detection_class_from_string(std::string_view name) noexcept;

bool is_left_hand(DetectionClass cls) noexcept;
bool is_right_hand(DetectionClass cls) noexcept;
inline bool is_hand(DetectionClass cls) noexcept { return is_left_hand(cls) || is_right_hand(cls); }

struct Detection {
    BoundingBox box;
    DetectionClass cls = DetectionClass::NormalObject;
    double score = 0.0;
    std::optional<std::string> crop_ref;

    bool operator==(const Detection&) const = default;
};

struct FrameDetections {
    std::int64_t frame_index = 0;
    std::vector<Detection> detections;

    bool operator==(const FrameDetections&) const = default;
};

struct VideoTrace {
    std::string video_id;
    double fps = 0.0;
    std::int64_t frame_count = 0;
    std::vector<FrameDetections> frames;  // sorted by frame_index, indices unique

    /// Frame record for `index`, or nullptr when the frame had no record.
    const FrameDetections* find_frame(std::int64_t index) const noexcept;

    bool operator==(const VideoTrace&) const = default;
};

struct ParseOptions {
    // Ground-truth annotation traces usually carry no crops.
    bool require_active_object_crops = true;
};

/// Reads the JSON Lines trace format. Frames come back sorted by index with
/// detections untouched. Throws TraceParseError naming the offending line.
VideoTrace parse_trace(std::istream& in, const ParseOptions& options = {});

/// Writes the JSON Lines trace format; parse_trace(serialize_trace(t)) == t.
void serialize_trace(const VideoTrace& trace, std::ostream& out);

inline constexpr double kDefaultMinScore = 0.8;

/// Drops detections below `min_score`, keeps the best detection per hand side
/// and the two best active objects. Equal scores prefer the smaller x_min.
/// Relative order of surviving detections is preserved.
FrameDetections canonicalize_frame(const FrameDetections& frame, double min_score = kDefaultMinScore);

VideoTrace canonicalize_trace(const VideoTrace& trace, double min_score = kDefaultMinScore);

/// Intersection over union; 0 for disjoint boxes.
double iou(const BoundingBox& a, const BoundingBox& b) noexcept;

}  // namespace hoiseg
