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

#include "hoiseg/trace_model.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>

#include "hoiseg/errors.hpp"

namespace hoiseg {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr std::array<std::string_view, 6> kClassNames = {
    "normal_object",  "active_object",    "idle_left_hand",
    "idle_right_hand", "active_left_hand", "active_right_hand",
};

double require_number(const json& obj, const char* key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_number()) {
        throw TraceParseError(line, std::string("missing or non-numeric '") + key + "'");
    }
    return it->get<double>();
}

std::int64_t require_integer(const json& obj, const char* key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end() || !(it->is_number_integer() || it->is_number_unsigned())) {
        throw TraceParseError(line, std::string("missing or non-integer '") + key + "'");
    }
    return it->get<std::int64_t>();
}

Detection parse_detection(const json& obj, std::size_t line, const ParseOptions& options) {
    if (!obj.is_object()) {
        throw TraceParseError(line, "detection is not an object");
    }
    Detection det;

    auto cls_it = obj.find("class");
    if (cls_it == obj.end() || !cls_it->is_string()) {
        throw TraceParseError(line, "detection lacks a 'class' string");
    }
    auto cls = detection_class_from_string(cls_it->get_ref<const std::string&>());
    if (!cls) {
        throw TraceParseError(line, "unknown detection class '" + cls_it->get<std::string>() + "'");
    }
    det.cls = *cls;

    det.score = require_number(obj, "score", line);
    if (!(det.score >= 0.0 && det.score <= 1.0)) {
        throw TraceParseError(line, "score outside [0,1]");
    }

    auto box_it = obj.find("box");
    if (box_it == obj.end() || !box_it->is_array() || box_it->size() != 4) {
        throw TraceParseError(line, "'box' must be [x_min, y_min, x_max, y_max]");
    }
    for (const auto& v : *box_it) {
        if (!v.is_number()) {
            throw TraceParseError(line, "non-numeric box coordinate");
        }
    }
    det.box = {(*box_it)[0].get<double>(), (*box_it)[1].get<double>(), (*box_it)[2].get<double>(),
               (*box_it)[3].get<double>()};
    if (!det.box.valid()) {
        throw TraceParseError(line, "invalid box (need 0 <= min < max, finite)");
    }

    auto crop_it = obj.find("crop_ref");
    if (crop_it != obj.end() && !crop_it->is_null()) {
        if (!crop_it->is_string()) {
            throw TraceParseError(line, "'crop_ref' must be a string or null");
        }
        det.crop_ref = crop_it->get<std::string>();
    }
    if (options.require_active_object_crops && det.cls == DetectionClass::ActiveObject && !det.crop_ref) {
        throw TraceParseError(line, "active_object detection without crop_ref");
    }
    return det;
}

// Descending score, then ascending x_min, then original position.
bool better_detection(const Detection& a, std::size_t ia, const Detection& b, std::size_t ib) {
    if (a.score != b.score) {
        return a.score > b.score;
    }
    if (a.box.x_min != b.box.x_min) {
        return a.box.x_min < b.box.x_min;
    }
    return ia < ib;
}

}  // namespace

bool BoundingBox::valid() const noexcept {
    const bool finite = std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) && std::isfinite(y_max);
    return finite && x_min >= 0.0 && y_min >= 0.0 && x_min < x_max && y_min < y_max;
}

std::string_view to_string(DetectionClass cls) noexcept {
    return kClassNames[static_cast<std::size_t>(cls)];
}

std::optional<DetectionClass> detection_class_from_string(std::string_view name) noexcept {
    for (std::size_t i = 0; i < kClassNames.size(); ++i) {
        if (kClassNames[i] == name) {
            return static_cast<DetectionClass>(i);
        }
    }
    return std::nullopt;
}

bool is_left_hand(DetectionClass cls) noexcept {
    return cls == DetectionClass::IdleLeftHand || cls == DetectionClass::ActiveLeftHand;
}

bool is_right_hand(DetectionClass cls) noexcept {
    return cls == DetectionClass::IdleRightHand || cls == DetectionClass::ActiveRightHand;
}

const FrameDetections* VideoTrace::find_frame(std::int64_t index) const noexcept {
    auto it = std::lower_bound(frames.begin(), frames.end(), index,
                               [](const FrameDetections& f, std::int64_t i) { return f.frame_index < i; });
    if (it == frames.end() || it->frame_index != index) {
        return nullptr;
    }
    return &*it;
}

VideoTrace parse_trace(std::istream& in, const ParseOptions& options) {
    VideoTrace trace;
    std::string text;
    std::size_t line_no = 0;
    bool have_header = false;
    std::set<std::int64_t> seen;

    while (std::getline(in, text)) {
        ++line_no;
        if (!text.empty() && text.back() == '\r') {
            text.pop_back();
        }
        if (text.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        json record;
        try {
            record = json::parse(text);
        } catch (const json::parse_error& e) {
            throw TraceParseError(line_no, std::string("malformed JSON: ") + e.what());
        }
        if (!record.is_object()) {
            throw TraceParseError(line_no, "record is not a JSON object");
        }

        if (!have_header) {
            auto id = record.find("video_id");
            if (id != record.end()) {
                if (!id->is_string()) {
                    throw TraceParseError(line_no, "'video_id' must be a string");
                }
                trace.video_id = id->get<std::string>();
            }
            trace.fps = require_number(record, "fps", line_no);
            if (!(trace.fps > 0.0) || !std::isfinite(trace.fps)) {
                throw TraceParseError(line_no, "fps must be positive");
            }
            trace.frame_count = require_integer(record, "frame_count", line_no);
            if (trace.frame_count < 0) {
                throw TraceParseError(line_no, "frame_count must be non-negative");
            }
            have_header = true;
            continue;
        }

        FrameDetections frame;
        frame.frame_index = require_integer(record, "frame", line_no);
        if (frame.frame_index < 0 || frame.frame_index >= trace.frame_count) {
            throw TraceParseError(line_no, "frame index " + std::to_string(frame.frame_index) +
                                               " outside [0, frame_count)");
        }
        if (!seen.insert(frame.frame_index).second) {
            throw TraceParseError(line_no, "duplicate frame index " + std::to_string(frame.frame_index));
        }
        auto dets = record.find("detections");
        if (dets == record.end() || !dets->is_array()) {
            throw TraceParseError(line_no, "missing 'detections' array");
        }
        frame.detections.reserve(dets->size());
        for (const auto& d : *dets) {
            frame.detections.push_back(parse_detection(d, line_no, options));
        }
        trace.frames.push_back(std::move(frame));
    }
    if (in.bad()) {
        throw IoError("read failure while parsing trace");
    }
    if (!have_header) {
        throw TraceParseError(line_no, "missing header record");
    }

    std::sort(trace.frames.begin(), trace.frames.end(),
              [](const FrameDetections& a, const FrameDetections& b) { return a.frame_index < b.frame_index; });
    return trace;
}

void serialize_trace(const VideoTrace& trace, std::ostream& out) {
    ordered_json header;
    header["video_id"] = trace.video_id;
    header["fps"] = trace.fps;
    header["frame_count"] = trace.frame_count;
    out << header.dump() << '\n';

    for (const auto& frame : trace.frames) {
        ordered_json rec;
        rec["frame"] = frame.frame_index;
        rec["detections"] = ordered_json::array();
        for (const auto& det : frame.detections) {
            ordered_json d;
            d["class"] = std::string(to_string(det.cls));
            d["score"] = det.score;
            d["box"] = {det.box.x_min, det.box.y_min, det.box.x_max, det.box.y_max};
            d["crop_ref"] = det.crop_ref ? ordered_json(*det.crop_ref) : ordered_json(nullptr);
            rec["detections"].push_back(std::move(d));
        }
        out << rec.dump() << '\n';
    }
}

FrameDetections canonicalize_frame(const FrameDetections& frame, double min_score) {
    const auto& dets = frame.detections;
    constexpr std::size_t kNone = static_cast<std::size_t>(-1);
    std::size_t best_left = kNone;
    std::size_t best_right = kNone;
    std::vector<std::size_t> objects;

    for (std::size_t i = 0; i < dets.size(); ++i) {
        const Detection& d = dets[i];
        if (d.score < min_score) {
            continue;
        }
        if (is_left_hand(d.cls)) {
            if (best_left == kNone || better_detection(d, i, dets[best_left], best_left)) {
                best_left = i;
            }
        } else if (is_right_hand(d.cls)) {
            if (best_right == kNone || better_detection(d, i, dets[best_right], best_right)) {
                best_right = i;
            }
        } else if (d.cls == DetectionClass::ActiveObject) {
            objects.push_back(i);
        }
    }
    std::sort(objects.begin(), objects.end(),
              [&](std::size_t a, std::size_t b) { return better_detection(dets[a], a, dets[b], b); });
    if (objects.size() > 2) {
        objects.resize(2);
    }

    FrameDetections out;
    out.frame_index = frame.frame_index;
    for (std::size_t i = 0; i < dets.size(); ++i) {
        const Detection& d = dets[i];
        if (d.score < min_score) {
            continue;
        }
        bool keep = false;
        if (is_left_hand(d.cls)) {
            keep = i == best_left;
        } else if (is_right_hand(d.cls)) {
            keep = i == best_right;
        } else if (d.cls == DetectionClass::ActiveObject) {
            keep = std::find(objects.begin(), objects.end(), i) != objects.end();
        } else {
            keep = true;
        }
        if (keep) {
            out.detections.push_back(d);
        }
    }
    return out;
}

VideoTrace canonicalize_trace(const VideoTrace& trace, double min_score) {
    VideoTrace out;
    out.video_id = trace.video_id;
    out.fps = trace.fps;
    out.frame_count = trace.frame_count;
    out.frames.reserve(trace.frames.size());
    for (const auto& f : trace.frames) {
        out.frames.push_back(canonicalize_frame(f, min_score));
    }
    return out;
}

double iou(const BoundingBox& a, const BoundingBox& b) noexcept {
    const double ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    const double iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    if (ix <= 0.0 || iy <= 0.0) {
        return 0.0;
    }
    const double inter = ix * iy;
    return inter / (a.area() + b.area() - inter);
}

}  // namespace hoiseg
