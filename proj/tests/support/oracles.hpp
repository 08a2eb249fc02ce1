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

// Brute-force reference computations used to check the library. None of
// these call into the code paths they verify.

#include <cstdint>
#include <utility>
#include <vector>

#include "hoiseg/fusion.hpp"
#include "hoiseg/hand_fsm.hpp"

namespace hoiseg::testing {

/// Recomputes every window sum from scratch: O(T * n).
std::vector<HandState> naive_window_states(const std::vector<std::uint8_t>& scores, int window_len, int threshold);

/// Maximal runs of Active states as inclusive (start, end) pairs.
std::vector<std::pair<std::int64_t, std::int64_t>> active_runs(const std::vector<HandState>& states);

/// IOU of integer-aligned boxes by counting unit lattice cells.
double cell_counting_iou(int ax0, int ay0, int ax1, int ay1, int bx0, int by0, int bx1, int by1);

/// Shared frames counted one by one.
std::int64_t enumerate_overlap(FrameInterval a, FrameInterval b);
double enumerate_iosa(FrameInterval a, FrameInterval b);
double enumerate_iou(FrameInterval a, FrameInterval b);

/// Maximum number of one-to-one prediction/truth pairs with IOU >= k
/// (exhaustive over truth subsets; intended for <= 12 truth segments).
std::int64_t optimal_match_count(const std::vector<FrameInterval>& predicted, const std::vector<FrameInterval>& truth,
                                 double k);

/// Spans produced by joining neighbours whose link flag is set, via
/// union-find over the adjacency chain. links[i] joins spans[i] and spans[i+1].
std::vector<std::pair<std::int64_t, std::int64_t>> union_find_merge(
    const std::vector<std::pair<std::int64_t, std::int64_t>>& spans, const std::vector<bool>& links);

}  // namespace hoiseg::testing
