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
#include <string>
#include <vector>

#include "hoiseg/hand_fsm.hpp"
#include "hoiseg/similarity.hpp"
#include "hoiseg/trace_model.hpp"

namespace hoiseg {

/// Maximal run of one hand's Active state, inclusive frame bounds.
struct Clip {
    HandSide hand = HandSide::Left;
    std::int64_t start_frame = 0;
    std::int64_t end_frame = 0;
    // One crop per frame where an active object touched this hand, in frame order.
    std::vector<std::string> object_crops;

    std::int64_t length() const noexcept { return end_frame - start_frame + 1; }

    bool operator==(const Clip&) const = default;
};

struct ClipSet {
    HandSide hand = HandSide::Left;
    double fps = 0.0;
    std::vector<Clip> clips;  // sorted, pairwise disjoint

    /// Throws InvariantViolation if clips are unsorted, overlapping or inverted.
    void check_invariants() const;

    bool operator==(const ClipSet&) const = default;
};

enum class SimilarityPolarity : std::uint8_t {
    Similarity,  // merge when mean >= threshold
    Distance,    // merge when mean < threshold
};

inline constexpr double kDefaultMinDurationSeconds = 0.5;
inline constexpr double kDefaultBoundaryFraction = 0.2;
inline constexpr double kDefaultSimilarityThreshold = 0.5;

/// One clip per run of Active frames. Clips carry no crops.
ClipSet extract_clips(const HandStateTrace& states, double fps);

/// As above, then attaches the crop_ref of the touched active object for each
/// scoring frame inside a clip (largest IOU wins when two objects touch).
ClipSet extract_clips(const HandStateTrace& states, const VideoTrace& canonical_trace);

/// Removes clips shorter than `min_duration_s` seconds at the set's fps.
ClipSet filter_short_clips(const ClipSet& clips, double min_duration_s);

/// Mean pairwise similarity between the trailing crops of `a` and the leading
/// crops of `b`; each side contributes ceil(boundary_fraction * n) crops.
/// Throws NoCropsError when either clip has no crops.
double clip_pair_similarity(const Clip& a, const Clip& b, const SimilarityProvider& provider,
                            double boundary_fraction = kDefaultBoundaryFraction);

bool same_object_verdict(double mean_similarity, double sim_threshold, SimilarityPolarity polarity) noexcept;

/// Merges runs of adjacent clips judged to show the same object. Each pair of
/// neighbouring input clips is compared on its own boundary crops; a merged
/// clip spans the gap between its parts and concatenates their crops.
ClipSet reconnect_clips(const ClipSet& clips, const SimilarityProvider& provider,
                        double sim_threshold = kDefaultSimilarityThreshold,
                        double boundary_fraction = kDefaultBoundaryFraction,
                        SimilarityPolarity polarity = SimilarityPolarity::Similarity);

struct ClipSetDocument {
    ClipSet clip_set;
    std::string config_hash;
};

void write_clip_set(const ClipSet& clips, std::ostream& out, const std::string& config_hash = {});
ClipSetDocument parse_clip_set(std::istream& in);

}  // namespace hoiseg
