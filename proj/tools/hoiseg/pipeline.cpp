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

#include "pipeline.hpp"

#include <fstream>
#include <sstream>
#include <system_error>

#include <fmt/format.h>
#include <spdlog/spdlog.h>
#include <spdlog/version.h>

#include "hoiseg/errors.hpp"
#include "hoiseg/hand_fsm.hpp"
#include "render.hpp"

#ifndef HOISEG_VERSION
#define HOISEG_VERSION "0.0.0"
#endif

namespace hoiseg::cli {

namespace {

std::ifstream open_input(const std::filesystem::path& path, std::string_view what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(fmt::format("cannot open {} {}", what, path.string()));
    }
    return in;
}

}  // namespace

std::unique_ptr<SimilarityProvider> make_provider(const PipelineConfig& config) {
    const ProviderConfig& p = config.provider;
    switch (p.kind) {
        case ProviderKind::Constant:
            return std::make_unique<ConstantSimilarityProvider>(p.value);
        case ProviderKind::Matrix:
            return matrix_provider(load_similarity_matrix(config.resolve(p.path)));
        case ProviderKind::Histogram:
            return histogram_provider(config.resolve(p.crop_root), p.bins);
        case ProviderKind::None:
            break;
    }
    return nullptr;
}

double resolve_sim_threshold(const PipelineConfig& config, const SimilarityProvider* provider) {
    if (config.sim_threshold_pairs.empty()) {
        return config.sim_threshold;
    }
    if (provider == nullptr) {
        throw ValidationError("sim_threshold \"roc:...\" needs a similarity provider");
    }
    const auto pairs = load_labeled_pairs(config.resolve(config.sim_threshold_pairs));
    const double theta = select_threshold_roc(roc_curve(*provider, pairs));
    spdlog::info("calibrated sim_threshold {} from {} labeled pairs", theta, pairs.size());
    return theta;
}

ClipSet segment_hand(const VideoTrace& canonical, HandSide hand, const PipelineConfig& config,
                     const SimilarityProvider* provider, double sim_threshold) {
    const WindowParams w = config.window_params(canonical.fps);
    const auto states = run_fsm(score_series(canonical, hand), w.window_len, w.threshold,
                                config.strict_window ? WindowComparison::GreaterThan : WindowComparison::AtLeast);
    ClipSet clips = filter_short_clips(extract_clips(states, canonical), config.min_duration_s);
    if (provider != nullptr) {
        clips = reconnect_clips(clips, *provider, sim_threshold, config.boundary_fraction, config.polarity);
    }
    clips.check_invariants();
    return clips;
}

SegmentResult segment_trace(const VideoTrace& trace, const PipelineConfig& config,
                            const SimilarityProvider* provider, double sim_threshold) {
    const VideoTrace canonical = canonicalize_trace(trace, config.min_score);
    SegmentResult r;
    r.window = config.window_params(canonical.fps);
    r.sim_threshold = sim_threshold;
    r.left = segment_hand(canonical, HandSide::Left, config, provider, sim_threshold);
    r.right = segment_hand(canonical, HandSide::Right, config, provider, sim_threshold);
    return r;
}

StepSegmentation fuse_trace(const ClipSet& left, const ClipSet& right, const VideoTrace& trace,
                            const PipelineConfig& config) {
    if (left.hand != HandSide::Left || right.hand != HandSide::Right) {
        throw ValidationError("fuse expects a left-hand and a right-hand clip set, in that order");
    }
    if (left.fps != trace.fps || right.fps != trace.fps) {
        throw ValidationError(fmt::format("clip sets ({} / {} fps) do not match the trace ({} fps)", left.fps,
                                          right.fps, trace.fps));
    }
    const VideoTrace canonical = canonicalize_trace(trace, config.min_score);
    return fuse_streams(left, right, canonical, config.iosa_threshold, config.attention_fallback);
}

VideoTrace read_trace_file(const std::filesystem::path& path, bool require_crops) {
    auto in = open_input(path, "trace");
    try {
        return parse_trace(in, ParseOptions{require_crops});
    } catch (const TraceParseError& e) {
        throw ValidationError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

ClipSet read_clip_set_file(const std::filesystem::path& path, std::string* config_hash) {
    auto in = open_input(path, "clip set");
    auto doc = parse_clip_set(in);
    if (config_hash != nullptr) {
        *config_hash = doc.config_hash;
    }
    return std::move(doc.clip_set);
}

StepSegmentation read_steps_file(const std::filesystem::path& path) {
    auto in = open_input(path, "step segmentation");
    return parse_step_segmentation(in);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) {
            throw IoError(fmt::format("cannot create directory {}: {}", path.parent_path().string(), ec.message()));
        }
    }
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot write " + tmp.string());
        }
        out << content;
        out.flush();
        if (!out) {
            std::filesystem::remove(tmp, ec);
            throw IoError("write failed for " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot move output into place at " + path.string());
    }
}

std::string clip_set_text(const ClipSet& clips, const std::string& config_hash) {
    std::ostringstream out;
    write_clip_set(clips, out, config_hash);
    return out.str();
}

std::string steps_text(const StepSegmentation& steps) {
    std::ostringstream out;
    write_step_segmentation(steps, out);
    return out.str();
}

std::string tool_version() {
    return HOISEG_VERSION;
}

nlohmann::ordered_json make_manifest(std::string_view command, const std::vector<std::string>& inputs,
                                     const PipelineConfig& config) {
    nlohmann::ordered_json m;
    m["tool"] = "hoiseg";
    m["version"] = tool_version();
    m["command"] = std::string(command);
    m["inputs"] = inputs;
    m["config"] = config.to_json();
    m["config_hash"] = config.hash();
    m["libraries"] = {
        {"nlohmann_json", fmt::format("{}.{}.{}", NLOHMANN_JSON_VERSION_MAJOR, NLOHMANN_JSON_VERSION_MINOR,
                                      NLOHMANN_JSON_VERSION_PATCH)},
        {"fmt", fmt::format("{}.{}.{}", FMT_VERSION / 10000, FMT_VERSION / 100 % 100, FMT_VERSION % 100)},
        {"spdlog", fmt::format("{}.{}.{}", SPDLOG_VER_MAJOR, SPDLOG_VER_MINOR, SPDLOG_VER_PATCH)},
    };
    return m;
}

PipelineOutputs run_pipeline(const std::filesystem::path& trace_path, const PipelineConfig& config) {
    const VideoTrace trace = read_trace_file(trace_path, config.require_crops);
    const auto provider = make_provider(config);
    const double theta = resolve_sim_threshold(config, provider.get());
    const SegmentResult seg = segment_trace(trace, config, provider.get(), theta);
    const std::string hash = config.hash();

    PipelineOutputs out;
    out.steps = fuse_trace(seg.left, seg.right, trace, config);

    auto manifest = make_manifest("pipeline", {trace_path.string()}, config);
    manifest["resolved"] = {{"window_len", seg.window.window_len},
                            {"window_threshold", seg.window.threshold},
                            {"sim_threshold", seg.sim_threshold}};
    manifest["summary"] = {{"left_clips", seg.left.clips.size()},
                           {"right_clips", seg.right.clips.size()},
                           {"steps", out.steps.segments.size()}};

    const std::string name = trace.video_id.empty() ? trace_path.stem().string() : trace.video_id;
    out.files.emplace_back("left_clips.json", clip_set_text(seg.left, hash));
    out.files.emplace_back("right_clips.json", clip_set_text(seg.right, hash));
    out.files.emplace_back("steps.json", steps_text(out.steps));
    out.files.emplace_back("timeline.svg", render_timeline_svg({{name, out.steps}}));
    out.files.emplace_back("manifest.json", manifest.dump(2) + "\n");
    return out;
}

}  // namespace hoiseg::cli
