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

#include "hoiseg/hand_fsm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hoiseg/errors.hpp"

namespace hoiseg {

namespace {

int round_half_up(double v) {
    return static_cast<int>(std::floor(v + 0.5));
}

}  // namespace

std::string_view to_string(HandSide side) noexcept {
    return side == HandSide::Left ? "left" : "right";
}

std::optional<HandSide> hand_side_from_string(std::string_view name) noexcept {
    if (name == "left") {
        return HandSide::Left;
    }
    if (name == "right") {
        return HandSide::Right;
    }
    return std::nullopt;
}

const Detection* active_hand(const FrameDetections& frame, HandSide hand) noexcept {
    const DetectionClass wanted =
        hand == HandSide::Left ? DetectionClass::ActiveLeftHand : DetectionClass::ActiveRightHand;
    for (const auto& d : frame.detections) {
        if (d.cls == wanted) {
            return &d;
        }
    }
    return nullptr;
}

const Detection* any_hand(const FrameDetections& frame, HandSide hand) noexcept {
    for (const auto& d : frame.detections) {
        if (hand == HandSide::Left ? is_left_hand(d.cls) : is_right_hand(d.cls)) {
            return &d;
        }
    }
    return nullptr;
}

int frame_score(const FrameDetections& frame, HandSide hand) noexcept {
    const Detection* h = active_hand(frame, hand);
    if (h == nullptr) {
        return 0;
    }
    for (const auto& d : frame.detections) {
        if (d.cls == DetectionClass::ActiveObject && iou(h->box, d.box) > 0.0) {
            return 1;
        }
    }
    return 0;
}

ScoreSeries score_series(const VideoTrace& trace, HandSide hand) {
    ScoreSeries series;
    series.hand = hand;
    series.scores.assign(static_cast<std::size_t>(trace.frame_count), 0);
    for (const auto& f : trace.frames) {
        series.scores[static_cast<std::size_t>(f.frame_index)] = static_cast<std::uint8_t>(frame_score(f, hand));
    }
    return series;
}

WindowParams default_window_params(double fps) {
    if (!(fps > 0.0) || !std::isfinite(fps)) {
        throw ValidationError("fps must be positive");
    }
    WindowParams p;
    p.window_len = std::max(1, round_half_up(fps / 6.0));
    p.threshold = std::max(1, round_half_up(fps / 10.0));
    p.threshold = std::min(p.threshold, p.window_len);
    return p;
}

HandStateTrace run_fsm(const ScoreSeries& scores, int window_len, int threshold, WindowComparison comparison) {
    if (window_len < 1 || threshold < 1 || threshold > window_len) {
        throw ValidationError("window parameters need 1 <= threshold <= window_len (got window_len=" +
                              std::to_string(window_len) + ", threshold=" + std::to_string(threshold) + ")");
    }
    HandStateTrace out;
    out.hand = scores.hand;
    out.window_len = window_len;
    out.threshold = threshold;
    out.states.reserve(scores.scores.size());

    const auto& s = scores.scores;
    const auto n = static_cast<std::size_t>(window_len);
    int sum = 0;
    for (std::size_t t = 0; t < s.size(); ++t) {
        sum += s[t] != 0 ? 1 : 0;
        if (t >= n) {
            sum -= s[t - n] != 0 ? 1 : 0;
        }
        const bool active = comparison == WindowComparison::AtLeast ? sum >= threshold : sum > threshold;
        out.states.push_back(active ? HandState::Active : HandState::Idle);
    }
    return out;
}

}  // namespace hoiseg
