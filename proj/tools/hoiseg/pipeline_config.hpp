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
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "hoiseg/fusion.hpp"
#include "hoiseg/hand_fsm.hpp"
#include "hoiseg/segmentation.hpp"
#include "hoiseg/similarity.hpp"
#include "hoiseg/trace_model.hpp"

namespace hoiseg::cli {

enum class ProviderKind { None, Constant, Matrix, Histogram };

std::string_view to_string(ProviderKind kind) noexcept;

struct ProviderConfig {
    ProviderKind kind = ProviderKind::None;
    double value = 1.0;     // constant
    std::string path;       // matrix JSON
    std::string crop_root;  // histogram
    int bins = kDefaultHistogramBins;

    bool operator==(const ProviderConfig&) const = default;
};

/// Every knob of a segment/fuse run. Loaded from a JSON file, then patched by
/// command-line flags; the effective value is embedded in output manifests.
struct PipelineConfig {
    double min_score = kDefaultMinScore;
    std::optional<int> window_len;        // unset: derived from fps
    std::optional<int> window_threshold;  // unset: derived from fps
    bool strict_window = false;
    bool require_crops = true;
    double min_duration_s = kDefaultMinDurationSeconds;
    double boundary_fraction = kDefaultBoundaryFraction;
    double sim_threshold = kDefaultSimilarityThreshold;
    std::string sim_threshold_pairs;  // non-empty: calibrate from this pairs CSV
    SimilarityPolarity polarity = SimilarityPolarity::Similarity;
    ProviderConfig provider;
    double iosa_threshold = kDefaultIosaThreshold;
    HandSide attention_fallback = kDefaultAttentionFallback;

    // Relative paths inside the config resolve against this directory.
    std::filesystem::path base_dir;

    /// Throws ValidationError naming the first offending key.
    void validate() const;

    nlohmann::ordered_json to_json() const;

    /// Hex SHA-256 of the compact serialized config.
    std::string hash() const;

    /// Explicit overrides, falling back to the fps-derived defaults.
    WindowParams window_params(double fps) const;

    std::filesystem::path resolve(const std::string& path) const;

    bool operator==(const PipelineConfig& other) const;
};

/// Overlays the keys present in `patch`. Unknown keys and ill-typed values
/// raise ValidationError. Does not validate ranges.
void apply_config_json(PipelineConfig& config, const nlohmann::json& patch);

/// Reads a JSON config file; relative paths in it resolve against its directory.
PipelineConfig load_config_file(const std::filesystem::path& path);

/// Environment variable naming a config file when --config is absent.
inline constexpr const char* kConfigEnvVar = "HOISEG_CONFIG";

}  // namespace hoiseg::cli
