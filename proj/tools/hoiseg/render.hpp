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
#include <string>
#include <vector>

#include "hoiseg/fusion.hpp"
#include "hoiseg/similarity.hpp"

namespace hoiseg::cli {

struct TimelineTrack {
    std::string name;
    StepSegmentation steps;
};

/// Frame span drawn for the tracks: the largest frame_count, or one past the
/// last segment end when no track carries a frame count.
std::int64_t timeline_frames(const std::vector<TimelineTrack>& tracks);

/// Human-readable notes about tracks that do not share a video or duration.
std::vector<std::string> timeline_mismatches(const std::vector<TimelineTrack>& tracks);

/// One horizontal track per input, frame axis on top of a seconds axis.
/// Output depends only on the inputs.
std::string render_timeline_svg(const std::vector<TimelineTrack>& tracks, int width = 960);

/// Text rendering, one character per column: L, R, B or '.'.
std::string render_timeline_ascii(const std::vector<TimelineTrack>& tracks, int columns = 80);

std::string roc_curve_csv(const std::vector<RocPoint>& curve);
std::string render_roc_svg(const std::vector<RocPoint>& curve, double selected_threshold, double auc);

}  // namespace hoiseg::cli
