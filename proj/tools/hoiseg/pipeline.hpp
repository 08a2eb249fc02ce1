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

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hoiseg/fusion.hpp"
#include "hoiseg/segmentation.hpp"
#include "hoiseg/similarity.hpp"
#include "hoiseg/trace_model.hpp"
#include "pipeline_config.hpp"

namespace hoiseg::cli {

/// Provider selected by the config, or nullptr for "none".
std::unique_ptr<SimilarityProvider> make_provider(const PipelineConfig& config);

/// The configured threshold, or the ROC-selected one when calibration pairs
/// are configured.
double resolve_sim_threshold(const PipelineConfig& config, const SimilarityProvider* provider);

struct SegmentResult {
    ClipSet left;
    ClipSet right;
    WindowParams window;
    double sim_threshold = 0.0;
};

/// FSM, clip extraction, short-clip filter and (with a provider) reconnection
/// for one hand of a canonical trace.
ClipSet segment_hand(const VideoTrace& canonical, HandSide hand, const PipelineConfig& config,
                     const SimilarityProvider* provider, double sim_threshold);

/// Canonicalizes `trace` and segments both hands.
SegmentResult segment_trace(const VideoTrace& trace, const PipelineConfig& config,
                            const SimilarityProvider* provider, double sim_threshold);

/// Canonicalizes `trace` and fuses the two clip streams.
StepSegmentation fuse_trace(const ClipSet& left, const ClipSet& right, const VideoTrace& trace,
                            const PipelineConfig& config);

VideoTrace read_trace_file(const std::filesystem::path& path, bool require_crops);
ClipSet read_clip_set_file(const std::filesystem::path& path, std::string* config_hash = nullptr);
StepSegmentation read_steps_file(const std::filesystem::path& path);

/// Writes through a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string clip_set_text(const ClipSet& clips, const std::string& config_hash);
std::string steps_text(const StepSegmentation& steps);

/// Run record: command, inputs, effective config and its hash, resolved
/// parameters and tool versions. Contains nothing time- or host-dependent.
nlohmann::ordered_json make_manifest(std::string_view command, const std::vector<std::string>& inputs,
                                     const PipelineConfig& config);

std::string tool_version();

/// Everything `pipeline` writes for one trace, keyed by file name.
struct PipelineOutputs {
    std::vector<std::pair<std::string, std::string>> files;
    StepSegmentation steps;
};

/// segment + fuse + render for one trace file, without touching the disk
/// beyond reading inputs.
PipelineOutputs run_pipeline(const std::filesystem::path& trace_path, const PipelineConfig& config);

}  // namespace hoiseg::cli
