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

#include "hoiseg/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "hoiseg/errors.hpp"

namespace hoiseg {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::size_t boundary_count(double fraction, std::size_t n) {
    // Slack absorbs products like 0.2 * 15 landing a hair above an integer.
    auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
    return std::clamp<std::size_t>(k, 1, n);
}

const std::string* touched_object_crop(const FrameDetections& frame, HandSide hand) {
    const Detection* h = active_hand(frame, hand);
    if (h == nullptr) {
        return nullptr;
    }
    const Detection* best = nullptr;
    double best_iou = 0.0;
    for (const auto& d : frame.detections) {
        if (d.cls != DetectionClass::ActiveObject || !d.crop_ref) {
            continue;
        }
        const double v = iou(h->box, d.box);
        if (v > best_iou) {
            best_iou = v;
            best = &d;
        }
    }
    return best != nullptr ? &*best->crop_ref : nullptr;
}

}  // namespace

void ClipSet::check_invariants() const {
    for (std::size_t i = 0; i < clips.size(); ++i) {
        if (clips[i].start_frame > clips[i].end_frame) {
            throw InvariantViolation("clip with start after end");
        }
        if (clips[i].hand != hand) {
            throw InvariantViolation("clip hand differs from its clip set");
        }
        if (i > 0 && clips[i - 1].end_frame >= clips[i].start_frame) {
            throw InvariantViolation("clips overlap or are out of order");
        }
    }
}

ClipSet extract_clips(const HandStateTrace& states, double fps) {
    ClipSet out;
    out.hand = states.hand;
    out.fps = fps;
    const auto n = static_cast<std::int64_t>(states.states.size());
    std::int64_t t = 0;
    while (t < n) {
        if (states.states[static_cast<std::size_t>(t)] != HandState::Active) {
            ++t;
            continue;
        }
        const std::int64_t start = t;
        while (t < n && states.states[static_cast<std::size_t>(t)] == HandState::Active) {
            ++t;
        }
        out.clips.push_back({states.hand, start, t - 1, {}});
    }
    return out;
}

ClipSet extract_clips(const HandStateTrace& states, const VideoTrace& canonical_trace) {
    ClipSet out = extract_clips(states, canonical_trace.fps);
    for (auto& clip : out.clips) {
        auto it = std::lower_bound(
            canonical_trace.frames.begin(), canonical_trace.frames.end(), clip.start_frame,
            [](const FrameDetections& f, std::int64_t i) { return f.frame_index < i; });
        for (; it != canonical_trace.frames.end() && it->frame_index <= clip.end_frame; ++it) {
            if (const std::string* crop = touched_object_crop(*it, clip.hand)) {
                clip.object_crops.push_back(*crop);
            }
        }
        if (clip.object_crops.empty()) {
            spdlog::warn("{} hand clip [{}, {}] has no active-object crops", to_string(clip.hand),
                         clip.start_frame, clip.end_frame);
        }
    }
    return out;
}

ClipSet filter_short_clips(const ClipSet& clips, double min_duration_s) {
    if (!(min_duration_s >= 0.0)) {
        throw ValidationError("min_duration_s must be non-negative");
    }
    ClipSet out;
    out.hand = clips.hand;
    out.fps = clips.fps;
    for (const auto& c : clips.clips) {
        const double seconds = static_cast<double>(c.length()) / clips.fps;
        if (!(seconds < min_duration_s)) {
            out.clips.push_back(c);
        }
    }
    return out;
}

double clip_pair_similarity(const Clip& a, const Clip& b, const SimilarityProvider& provider,
                            double boundary_fraction) {
    if (!(boundary_fraction > 0.0 && boundary_fraction <= 1.0)) {
        throw ValidationError("boundary_fraction must lie in (0, 1]");
    }
    if (a.object_crops.empty() || b.object_crops.empty()) {
        throw NoCropsError("clip pair lacks active-object crops");
    }
    const std::size_t x = boundary_count(boundary_fraction, a.object_crops.size());
    const std::size_t y = boundary_count(boundary_fraction, b.object_crops.size());
    const std::size_t a_begin = a.object_crops.size() - x;

    double sum = 0.0;
    for (std::size_t i = 0; i < x; ++i) {
        for (std::size_t j = 0; j < y; ++j) {
            sum += provider.query(a.object_crops[a_begin + i], b.object_crops[j]);
        }
    }
    return sum / static_cast<double>(x * y);
}

bool same_object_verdict(double mean_similarity, double sim_threshold, SimilarityPolarity polarity) noexcept {
    return polarity == SimilarityPolarity::Similarity ? mean_similarity >= sim_threshold
                                                      : mean_similarity < sim_threshold;
}

ClipSet reconnect_clips(const ClipSet& clips, const SimilarityProvider& provider, double sim_threshold,
                        double boundary_fraction, SimilarityPolarity polarity) {
    ClipSet out;
    out.hand = clips.hand;
    out.fps = clips.fps;
    if (clips.clips.empty()) {
        return out;
    }
    Clip current = clips.clips.front();
    for (std::size_t i = 1; i < clips.clips.size(); ++i) {
        const Clip& prev = clips.clips[i - 1];
        const Clip& next = clips.clips[i];
        bool merge = false;
        try {
            merge = same_object_verdict(clip_pair_similarity(prev, next, provider, boundary_fraction),
                                        sim_threshold, polarity);
        } catch (const NoCropsError&) {
            merge = false;
        }
        if (merge) {
            current.end_frame = next.end_frame;
            current.object_crops.insert(current.object_crops.end(), next.object_crops.begin(),
                                        next.object_crops.end());
        } else {
            out.clips.push_back(std::move(current));
            current = next;
        }
    }
    out.clips.push_back(std::move(current));
    return out;
}

void write_clip_set(const ClipSet& clips, std::ostream& out, const std::string& config_hash) {
    ordered_json doc;
    doc["hand"] = std::string(to_string(clips.hand));
    doc["fps"] = clips.fps;
    doc["provenance"] = {{"config_hash", config_hash}};
    doc["clips"] = ordered_json::array();
    for (const auto& c : clips.clips) {
        ordered_json jc;
        jc["hand"] = std::string(to_string(c.hand));
        jc["start_frame"] = c.start_frame;
        jc["end_frame"] = c.end_frame;
        jc["crop_refs"] = c.object_crops;
        doc["clips"].push_back(std::move(jc));
    }
    out << doc.dump(2) << '\n';
}

ClipSetDocument parse_clip_set(std::istream& in) {
    ClipSetDocument result;
    try {
        const json doc = json::parse(in);
        auto hand = hand_side_from_string(doc.at("hand").get<std::string>());
        if (!hand) {
            throw ValidationError("clip set 'hand' must be left or right");
        }
        result.clip_set.hand = *hand;
        result.clip_set.fps = doc.at("fps").get<double>();
        if (!(result.clip_set.fps > 0.0)) {
            throw ValidationError("clip set fps must be positive");
        }
        if (auto p = doc.find("provenance"); p != doc.end() && p->contains("config_hash")) {
            result.config_hash = p->at("config_hash").get<std::string>();
        }
        for (const auto& jc : doc.at("clips")) {
            Clip c;
            auto ch = hand_side_from_string(jc.at("hand").get<std::string>());
            if (!ch || *ch != *hand) {
                throw ValidationError("clip hand does not match clip set hand");
            }
            c.hand = *ch;
            c.start_frame = jc.at("start_frame").get<std::int64_t>();
            c.end_frame = jc.at("end_frame").get<std::int64_t>();
            c.object_crops = jc.at("crop_refs").get<std::vector<std::string>>();
            result.clip_set.clips.push_back(std::move(c));
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed clip set JSON: ") + e.what());
    }
    try {
        result.clip_set.check_invariants();
    } catch (const InvariantViolation& e) {
        throw ValidationError(std::string("invalid clip set: ") + e.what());
    }
    return result;
}

}  // namespace hoiseg
