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

#include "hoiseg/fusion.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <queue>
#include <tuple>

#include <nlohmann/json.hpp>

#include "hoiseg/errors.hpp"

namespace hoiseg {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

FrameInterval interval_of(const Clip& c) {
    return {c.start_frame, c.end_frame};
}

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    // Returns the surviving root.
    std::size_t unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        parent_[b] = a;
        return a;
    }

private:
    std::vector<std::size_t> parent_;
};

struct CandidatePair {
    std::size_t left = 0;
    std::size_t right = 0;
    double iosa = 0.0;
    std::int64_t first_start = 0;
    std::int64_t second_start = 0;
};

// A pending output segment; `rep` indexes the clip whose interval it came from.
struct Piece {
    std::int64_t start = 0;
    std::int64_t end = 0;
    SourceHand source = SourceHand::Both;
    std::size_t rep = 0;
};

struct LaterPiece {
    bool operator()(const Piece& a, const Piece& b) const {
        // min-heap on (start, -end, rep)
        return std::tie(a.start, b.end, a.rep) > std::tie(b.start, a.end, b.rep);
    }
};

}  // namespace

std::int64_t overlap_frames(FrameInterval a, FrameInterval b) noexcept {
    const std::int64_t lo = std::max(a.start, b.start);
    const std::int64_t hi = std::min(a.end, b.end);
    return hi >= lo ? hi - lo + 1 : 0;
}

double temporal_iosa(FrameInterval a, FrameInterval b) noexcept {
    const std::int64_t inter = overlap_frames(a, b);
    if (inter == 0) {
        return 0.0;
    }
    return static_cast<double>(inter) / static_cast<double>(std::min(a.length(), b.length()));
}

std::string_view to_string(SourceHand s) noexcept {
    switch (s) {
        case SourceHand::Left:
            return "left";
        case SourceHand::Right:
            return "right";
        case SourceHand::Both:
            break;
    }
    return "both";
}

std::optional<SourceHand> source_hand_from_string(std::string_view name) noexcept {
    if (name == "left") {
        return SourceHand::Left;
    }
    if (name == "right") {
        return SourceHand::Right;
    }
    if (name == "both") {
        return SourceHand::Both;
    }
    return std::nullopt;
}

void StepSegmentation::check_invariants() const {
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (segments[i].start_frame > segments[i].end_frame) {
            throw InvariantViolation("step segment with start after end");
        }
        if (i > 0 && segments[i - 1].end_frame >= segments[i].start_frame) {
            throw InvariantViolation("step segments overlap or are out of order");
        }
    }
}

AttentionVerdict predict_attention(const VideoTrace& trace, const Clip& a, const Clip& b, HandSide fallback) {
    if (a.hand == b.hand) {
        throw ValidationError("attention needs clips from different hands");
    }
    const std::int64_t lo = std::max(a.start_frame, b.start_frame);
    const std::int64_t hi = std::min(a.end_frame, b.end_frame);
    if (hi < lo) {
        throw ValidationError("attention needs temporally overlapping clips");
    }

    std::int64_t co_detected = 0;
    std::int64_t left_votes = 0;
    std::int64_t right_votes = 0;
    auto it = std::lower_bound(trace.frames.begin(), trace.frames.end(), lo,
                               [](const FrameDetections& f, std::int64_t i) { return f.frame_index < i; });
    for (; it != trace.frames.end() && it->frame_index <= hi; ++it) {
        const Detection* l = any_hand(*it, HandSide::Left);
        const Detection* r = any_hand(*it, HandSide::Right);
        if (l == nullptr || r == nullptr) {
            continue;
        }
        ++co_detected;
        if (l->box.center_y() < r->box.center_y()) {
            ++left_votes;
        } else if (r->box.center_y() < l->box.center_y()) {
            ++right_votes;
        }
    }

    AttentionVerdict v;
    if (co_detected == 0 || left_votes == right_votes) {
        v.principal = fallback;
        v.used_fallback = true;
        const std::int64_t votes = fallback == HandSide::Left ? left_votes : right_votes;
        v.confidence = co_detected == 0 ? 0.0 : static_cast<double>(votes) / static_cast<double>(co_detected);
        return v;
    }
    v.principal = left_votes > right_votes ? HandSide::Left : HandSide::Right;
    v.confidence = static_cast<double>(std::max(left_votes, right_votes)) / static_cast<double>(co_detected);
    return v;
}

StepSegmentation fuse_streams(const ClipSet& left, const ClipSet& right, const VideoTrace& trace,
                              double iosa_threshold, HandSide fallback) {
    if (!(iosa_threshold >= 0.0)) {
        throw ValidationError("iosa_threshold must be non-negative");
    }
    left.check_invariants();
    right.check_invariants();

    // Clips are addressed by one index space: lefts first, then rights.
    const std::size_t n_left = left.clips.size();
    std::vector<const Clip*> clips;
    clips.reserve(n_left + right.clips.size());
    for (const auto& c : left.clips) {
        clips.push_back(&c);
    }
    for (const auto& c : right.clips) {
        clips.push_back(&c);
    }

    std::vector<CandidatePair> candidates;
    for (std::size_t i = 0; i < n_left; ++i) {
        const Clip& l = left.clips[i];
        auto first = std::lower_bound(right.clips.begin(), right.clips.end(), l.start_frame,
                                      [](const Clip& c, std::int64_t s) { return c.end_frame < s; });
        for (auto r = first; r != right.clips.end() && r->start_frame <= l.end_frame; ++r) {
            const double v = temporal_iosa(interval_of(l), interval_of(*r));
            if (v >= iosa_threshold) {
                candidates.push_back({i, static_cast<std::size_t>(r - right.clips.begin()), v,
                                      std::min(l.start_frame, r->start_frame),
                                      std::max(l.start_frame, r->start_frame)});
            }
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const CandidatePair& a, const CandidatePair& b) {
        if (a.iosa != b.iosa) {
            return a.iosa > b.iosa;
        }
        return std::tie(a.first_start, a.second_start, a.left, a.right) <
               std::tie(b.first_start, b.second_start, b.left, b.right);
    });

    DisjointSets groups(clips.size());
    std::vector<std::size_t> rep(clips.size());
    std::iota(rep.begin(), rep.end(), 0);
    std::vector<std::size_t> group_size(clips.size(), 1);

    for (const auto& cand : candidates) {
        const std::size_t li = cand.left;
        const std::size_t ri = n_left + cand.right;
        const std::size_t gl = groups.find(li);
        const std::size_t gr = groups.find(ri);
        if (gl == gr) {
            continue;
        }
        const AttentionVerdict v = predict_attention(trace, *clips[li], *clips[ri], fallback);
        const std::size_t winner_rep = v.principal == HandSide::Left ? rep[gl] : rep[gr];
        const std::size_t size = group_size[gl] + group_size[gr];
        const std::size_t root = groups.unite(gl, gr);
        rep[root] = winner_rep;
        group_size[root] = size;
    }

    std::priority_queue<Piece, std::vector<Piece>, LaterPiece> pending;
    for (std::size_t i = 0; i < clips.size(); ++i) {
        if (groups.find(i) != i) {
            continue;
        }
        const Clip& r = *clips[rep[i]];
        const SourceHand source =
            group_size[i] > 1 ? SourceHand::Both : (r.hand == HandSide::Left ? SourceHand::Left : SourceHand::Right);
        pending.push({r.start_frame, r.end_frame, source, rep[i]});
    }

    auto principal_rep = [&](std::size_t a, std::size_t b) {
        const AttentionVerdict v = predict_attention(trace, *clips[a], *clips[b], fallback);
        return clips[a]->hand == v.principal ? a : b;
    };
    auto push_if_nonempty = [&](Piece p) {
        if (p.start <= p.end) {
            pending.push(p);
        }
    };

    StepSegmentation out;
    out.video_id = trace.video_id;
    out.fps = trace.fps;
    out.frame_count = trace.frame_count;

    while (!pending.empty()) {
        const Piece a = pending.top();
        pending.pop();
        if (pending.empty() || pending.top().start > a.end) {
            out.segments.push_back({a.start, a.end, a.source, std::nullopt});
            continue;
        }
        const Piece b = pending.top();
        pending.pop();
        if (clips[a.rep]->hand == clips[b.rep]->hand) {
            throw InvariantViolation("same-hand segments overlap during fusion");
        }

        if (b.end <= a.end) {
            if (a.start == b.start && a.end == b.end) {
                pending.push(principal_rep(a.rep, b.rep) == a.rep ? a : b);
                continue;
            }
            // b lies inside a: carve it out.
            push_if_nonempty({a.start, b.start - 1, a.source, a.rep});
            pending.push(b);
            push_if_nonempty({b.end + 1, a.end, a.source, a.rep});
            continue;
        }

        const std::int64_t mid = b.start + (a.end - b.start) / 2;
        if (principal_rep(a.rep, b.rep) == a.rep) {
            push_if_nonempty({a.start, mid, a.source, a.rep});
            push_if_nonempty({mid + 1, b.end, b.source, b.rep});
        } else {
            push_if_nonempty({a.start, mid - 1, a.source, a.rep});
            push_if_nonempty({mid, b.end, b.source, b.rep});
        }
    }

    out.check_invariants();
    return out;
}

void write_step_segmentation(const StepSegmentation& steps, std::ostream& out) {
    ordered_json doc;
    doc["video_id"] = steps.video_id;
    doc["fps"] = steps.fps;
    if (steps.frame_count) {
        doc["frame_count"] = *steps.frame_count;
    }
    doc["segments"] = ordered_json::array();
    for (const auto& s : steps.segments) {
        ordered_json js;
        js["start_frame"] = s.start_frame;
        js["end_frame"] = s.end_frame;
        js["source_hand"] = std::string(to_string(s.source_hand));
        js["label"] = s.label ? ordered_json(*s.label) : ordered_json(nullptr);
        doc["segments"].push_back(std::move(js));
    }
    out << doc.dump(2) << '\n';
}

StepSegmentation parse_step_segmentation(std::istream& in) {
    StepSegmentation steps;
    try {
        const json doc = json::parse(in);
        steps.video_id = doc.value("video_id", std::string{});
        steps.fps = doc.at("fps").get<double>();
        if (!(steps.fps > 0.0)) {
            throw ValidationError("step segmentation fps must be positive");
        }
        if (auto fc = doc.find("frame_count"); fc != doc.end() && !fc->is_null()) {
            steps.frame_count = fc->get<std::int64_t>();
        }
        for (const auto& js : doc.at("segments")) {
            StepSegment s;
            s.start_frame = js.at("start_frame").get<std::int64_t>();
            s.end_frame = js.at("end_frame").get<std::int64_t>();
            if (auto h = js.find("source_hand"); h != js.end() && !h->is_null()) {
                auto parsed = source_hand_from_string(h->get<std::string>());
                if (!parsed) {
                    throw ValidationError("unknown source_hand '" + h->get<std::string>() + "'");
                }
                s.source_hand = *parsed;
            }
            if (auto l = js.find("label"); l != js.end() && !l->is_null()) {
                s.label = l->get<std::string>();
            }
            steps.segments.push_back(std::move(s));
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed step segmentation JSON: ") + e.what());
    }
    try {
        steps.check_invariants();
    } catch (const InvariantViolation& e) {
        throw ValidationError(std::string("invalid step segmentation: ") + e.what());
    }
    return steps;
}

}  // namespace hoiseg
