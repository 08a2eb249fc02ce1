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

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hoiseg/hand_fsm.hpp"
#include "hoiseg/segmentation.hpp"
#include "hoiseg/trace_model.hpp"

namespace hoiseg {

/// Inclusive frame interval.
struct FrameInterval {
    std::int64_t start = 0;
    std::int64_t end = 0;

    std::int64_t length() const noexcept { return end - start + 1; }
    bool operator==(const FrameInterval&) const = default;
};

/// Frames shared by both intervals, 0 when disjoint.
std::int64_t overlap_frames(FrameInterval a, FrameInterval b) noexcept;

/// Intersection over the shorter interval's length.
double temporal_iosa(FrameInterval a, FrameInterval b) noexcept;

enum class SourceHand : std::uint8_t { Left, Right, Both };

std::string_view to_string(SourceHand s) noexcept;
std::optional<SourceHand> source_hand_from_string(std::string_view name) noexcept;

struct StepSegment {
    std::int64_t start_frame = 0;
    std::int64_t end_frame = 0;
    SourceHand source_hand = SourceHand::Both;
    std::optional<std::string> label;

    FrameInterval interval() const noexcept { return {start_frame, end_frame}; }
    bool operator==(const StepSegment&) const = default;
};

struct StepSegmentation {
    std::string video_id;
    double fps = 0.0;
    std::optional<std::int64_t> frame_count;
    std::vector<StepSegment> segments;  // sorted, pairwise disjoint

    /// Throws InvariantViolation when segments are inverted, unsorted or overlap.
    void check_invariants() const;

    bool operator==(const StepSegmentation&) const = default;
};

struct AttentionVerdict {
    HandSide principal = HandSide::Right;
    double confidence = 0.0;
    bool used_fallback = false;
};

inline constexpr double kDefaultIosaThreshold = 0.5;
inline constexpr HandSide kDefaultAttentionFallback = HandSide::Right;

/// Decides which of two temporally overlapping clips of different hands
/// carries the attention. On each overlap frame where both hands are seen the
/// hand whose box centre is higher in the image (smaller y) gets a vote; the
/// majority wins and confidence is its share of those frames. Ties and
/// overlaps without co-detections resolve to `fallback`.
///
/// `trace` must be canonical (one detection per hand side per frame).
AttentionVerdict predict_attention(const VideoTrace& trace, const Clip& a, const Clip& b,
                                   HandSide fallback = kDefaultAttentionFallback);

/// Combines both hands' clips into one step list.
///
/// Overlapping left/right pairs with IOSA >= `iosa_threshold` are merged,
/// highest IOSA first: the merged step takes the principal clip's interval.
/// Remaining overlaps are split at the overlap midpoint, with the midpoint
/// frame going to the principal side; a segment lying strictly inside another
/// is carved out of it.
StepSegmentation fuse_streams(const ClipSet& left, const ClipSet& right, const VideoTrace& trace,
                              double iosa_threshold = kDefaultIosaThreshold,
                              HandSide fallback = kDefaultAttentionFallback);

void write_step_segmentation(const StepSegmentation& steps, std::ostream& out);

/// Reads predictions or ground truth. `source_hand` and `label` are optional.
StepSegmentation parse_step_segmentation(std::istream& in);

}  // namespace hoiseg
