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
#include <optional>
#include <string_view>
#include <vector>

#include "hoiseg/trace_model.hpp"

namespace hoiseg {

enum class HandSide : std::uint8_t { Left, Right };

enum class HandState : std::uint8_t { Idle, Active };

std::string_view to_string(HandSide side) noexcept;
std::optional<HandSide> hand_side_from_string(std::string_view name) noexcept;

inline HandSide opposite(HandSide side) noexcept {
    return side == HandSide::Left ? HandSide::Right : HandSide::Left;
}

/// Per-frame binary interaction evidence for one hand.
struct ScoreSeries {
    HandSide hand = HandSide::Left;
    std::vector<std::uint8_t> scores;
};

struct HandStateTrace {
    HandSide hand = HandSide::Left;
    std::vector<HandState> states;
    int window_len = 1;
    int threshold = 1;
};

struct WindowParams {
    int window_len = 1;
    int threshold = 1;

    bool operator==(const WindowParams&) const = default;
};

enum class WindowComparison : std::uint8_t {
    AtLeast,      // active when window sum >= threshold
    GreaterThan,  // active when window sum > threshold
};

/// The active hand detection of `hand` in a canonical frame, if any.
const Detection* active_hand(const FrameDetections& frame, HandSide hand) noexcept;

/// Any hand detection (idle or active) of `hand` in a canonical frame.
const Detection* any_hand(const FrameDetections& frame, HandSide hand) noexcept;

/// 1 when the frame has an active hand of this side touching (IOU > 0) at
/// least one active object, else 0.
int frame_score(const FrameDetections& frame, HandSide hand) noexcept;

/// Scores for frames [0, frame_count); frames without a record score 0.
ScoreSeries score_series(const VideoTrace& trace, HandSide hand);

/// Window length fps/6 and threshold fps/10, rounded half up and clamped to >= 1.
WindowParams default_window_params(double fps);

/// Sliding-window state decision over the last `window_len` scores (fewer at
/// the start of the sequence). Throws ValidationError unless
/// 1 <= threshold <= window_len.
HandStateTrace run_fsm(const ScoreSeries& scores, int window_len, int threshold,
                       WindowComparison comparison = WindowComparison::AtLeast);

}  // namespace hoiseg
