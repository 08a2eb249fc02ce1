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

#include "pipeline_config.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "hoiseg/errors.hpp"

namespace hoiseg::cli {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr std::string_view kRocPrefix = "roc:";

[[noreturn]] void bad_value(std::string_view key, std::string_view expected) {
    throw ValidationError(fmt::format("config key '{}' must be {}", key, expected));
}

double number_of(const json& v, std::string_view key) {
    if (!v.is_number()) {
        bad_value(key, "a number");
    }
    return v.get<double>();
}

int integer_of(const json& v, std::string_view key) {
    if (!v.is_number_integer()) {
        bad_value(key, "an integer");
    }
    const auto i = v.get<std::int64_t>();
    if (i < -1000000 || i > 1000000) {
        bad_value(key, "a reasonable integer");
    }
    return static_cast<int>(i);
}

bool bool_of(const json& v, std::string_view key) {
    if (!v.is_boolean()) {
        bad_value(key, "true or false");
    }
    return v.get<bool>();
}

std::string string_of(const json& v, std::string_view key) {
    if (!v.is_string()) {
        bad_value(key, "a string");
    }
    return v.get<std::string>();
}

std::optional<int> auto_or_int(const json& v, std::string_view key) {
    if (v.is_string() && v.get<std::string>() == "auto") {
        return std::nullopt;
    }
    if (!v.is_number_integer()) {
        bad_value(key, "\"auto\" or an integer");
    }
    return integer_of(v, key);
}

ProviderKind provider_kind_from(const std::string& name) {
    if (name == "none") return ProviderKind::None;
    if (name == "constant") return ProviderKind::Constant;
    if (name == "matrix") return ProviderKind::Matrix;
    if (name == "histogram") return ProviderKind::Histogram;
    bad_value("provider.kind", "one of none, constant, matrix, histogram");
}

void apply_provider(ProviderConfig& p, const json& patch) {
    if (!patch.is_object()) {
        bad_value("provider", "an object");
    }
    for (const auto& [key, v] : patch.items()) {
        if (key == "kind") {
            p.kind = provider_kind_from(string_of(v, "provider.kind"));
        } else if (key == "value") {
            p.value = number_of(v, "provider.value");
        } else if (key == "path") {
            p.path = string_of(v, "provider.path");
        } else if (key == "crop_root") {
            p.crop_root = string_of(v, "provider.crop_root");
        } else if (key == "bins") {
            p.bins = integer_of(v, "provider.bins");
        } else {
            throw ValidationError("unknown config key 'provider." + key + "'");
        }
    }
}

void check_range(bool ok, std::string_view key, std::string_view range) {
    if (!ok) {
        throw ValidationError(fmt::format("config key '{}' out of range: must be {}", key, range));
    }
}

}  // namespace

std::string_view to_string(ProviderKind kind) noexcept {
    switch (kind) {
        case ProviderKind::Constant:
            return "constant";
        case ProviderKind::Matrix:
            return "matrix";
        case ProviderKind::Histogram:
            return "histogram";
        case ProviderKind::None:
            break;
    }
    return "none";
}

void apply_config_json(PipelineConfig& c, const json& patch) {
    if (!patch.is_object()) {
        throw ValidationError("config must be a JSON object");
    }
    for (const auto& [key, v] : patch.items()) {
        if (key == "min_score") {
            c.min_score = number_of(v, key);
        } else if (key == "window_len") {
            c.window_len = auto_or_int(v, key);
        } else if (key == "window_threshold") {
            c.window_threshold = auto_or_int(v, key);
        } else if (key == "strict_window") {
            c.strict_window = bool_of(v, key);
        } else if (key == "require_crops") {
            c.require_crops = bool_of(v, key);
        } else if (key == "min_duration_s") {
            c.min_duration_s = number_of(v, key);
        } else if (key == "boundary_fraction") {
            c.boundary_fraction = number_of(v, key);
        } else if (key == "sim_threshold") {
            if (v.is_string()) {
                const auto s = v.get<std::string>();
                if (s.rfind(kRocPrefix, 0) != 0 || s.size() == kRocPrefix.size()) {
                    bad_value(key, "a number or \"roc:<pairs.csv>\"");
                }
                c.sim_threshold_pairs = s.substr(kRocPrefix.size());
            } else {
                c.sim_threshold = number_of(v, key);
                c.sim_threshold_pairs.clear();
            }
        } else if (key == "similarity_polarity") {
            const auto s = string_of(v, key);
            if (s == "similarity") {
                c.polarity = SimilarityPolarity::Similarity;
            } else if (s == "distance") {
                c.polarity = SimilarityPolarity::Distance;
            } else {
                bad_value(key, "\"similarity\" or \"distance\"");
            }
        } else if (key == "provider") {
            apply_provider(c.provider, v);
        } else if (key == "iosa_threshold") {
            c.iosa_threshold = number_of(v, key);
        } else if (key == "attention_fallback") {
            const auto side = hand_side_from_string(string_of(v, key));
            if (!side) {
                bad_value(key, "\"left\" or \"right\"");
            }
            c.attention_fallback = *side;
        } else {
            throw ValidationError("unknown config key '" + key + "'");
        }
    }
}

void PipelineConfig::validate() const {
    const auto finite = [](double v) { return std::isfinite(v); };
    check_range(finite(min_score) && min_score >= 0.0 && min_score <= 1.0, "min_score", "in [0, 1]");
    if (window_len) {
        check_range(*window_len >= 1, "window_len", ">= 1");
    }
    if (window_threshold) {
        check_range(*window_threshold >= 1, "window_threshold", ">= 1");
    }
    if (window_len && window_threshold) {
        check_range(*window_threshold <= *window_len, "window_threshold", "<= window_len");
    }
    check_range(finite(min_duration_s) && min_duration_s >= 0.0, "min_duration_s", ">= 0");
    check_range(finite(boundary_fraction) && boundary_fraction > 0.0 && boundary_fraction <= 1.0,
                "boundary_fraction", "in (0, 1]");
    check_range(finite(sim_threshold) && sim_threshold >= 0.0 && sim_threshold <= 1.0, "sim_threshold",
                "in [0, 1]");
    check_range(finite(iosa_threshold) && iosa_threshold >= 0.0, "iosa_threshold", ">= 0 (above 1 disables merging)");
    switch (provider.kind) {
        case ProviderKind::None:
            break;
        case ProviderKind::Constant:
            check_range(finite(provider.value) && provider.value >= 0.0 && provider.value <= 1.0, "provider.value",
                        "in [0, 1]");
            break;
        case ProviderKind::Matrix:
            check_range(!provider.path.empty(), "provider.path", "set for the matrix provider");
            break;
        case ProviderKind::Histogram:
            check_range(!provider.crop_root.empty(), "provider.crop_root", "set for the histogram provider");
            check_range(provider.bins >= 2 && provider.bins <= 256, "provider.bins", "in [2, 256]");
            break;
    }
    if (!sim_threshold_pairs.empty() && provider.kind == ProviderKind::None) {
        throw ValidationError("sim_threshold \"roc:...\" needs a similarity provider");
    }
}

ordered_json PipelineConfig::to_json() const {
    ordered_json j;
    j["min_score"] = min_score;
    j["window_len"] = window_len ? ordered_json(*window_len) : ordered_json("auto");
    j["window_threshold"] = window_threshold ? ordered_json(*window_threshold) : ordered_json("auto");
    j["strict_window"] = strict_window;
    j["require_crops"] = require_crops;
    j["min_duration_s"] = min_duration_s;
    j["boundary_fraction"] = boundary_fraction;
    if (sim_threshold_pairs.empty()) {
        j["sim_threshold"] = sim_threshold;
    } else {
        j["sim_threshold"] = std::string(kRocPrefix) + sim_threshold_pairs;
    }
    j["similarity_polarity"] = polarity == SimilarityPolarity::Similarity ? "similarity" : "distance";
    ordered_json p;
    p["kind"] = std::string(cli::to_string(provider.kind));
    switch (provider.kind) {
        case ProviderKind::None:
            break;
        case ProviderKind::Constant:
            p["value"] = provider.value;
            break;
        case ProviderKind::Matrix:
            p["path"] = provider.path;
            break;
        case ProviderKind::Histogram:
            p["crop_root"] = provider.crop_root;
            p["bins"] = provider.bins;
            break;
    }
    j["provider"] = std::move(p);
    j["iosa_threshold"] = iosa_threshold;
    j["attention_fallback"] = std::string(hoiseg::to_string(attention_fallback));
    return j;
}

std::string PipelineConfig::hash() const {
    const std::string text = to_json().dump();
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw InvariantViolation("SHA-256 digest failed");
    }
    std::string hex;
    hex.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        hex += fmt::format("{:02x}", digest[i]);
    }
    return hex;
}

WindowParams PipelineConfig::window_params(double fps) const {
    WindowParams p = default_window_params(fps);
    if (window_len) {
        p.window_len = *window_len;
        if (!window_threshold) {
            p.threshold = std::min(p.threshold, p.window_len);
        }
    }
    if (window_threshold) {
        p.threshold = *window_threshold;
    }
    if (p.threshold > p.window_len) {
        throw ValidationError(fmt::format("window_threshold {} exceeds window_len {} at {} fps", p.threshold,
                                          p.window_len, fps));
    }
    return p;
}

std::filesystem::path PipelineConfig::resolve(const std::string& path) const {
    const std::filesystem::path p(path);
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

bool PipelineConfig::operator==(const PipelineConfig& other) const {
    return to_json() == other.to_json();
}

PipelineConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config file " + path.string());
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError("malformed config file " + path.string() + ": " + e.what());
    }
    PipelineConfig c;
    apply_config_json(c, doc);
    c.base_dir = path.parent_path();
    return c;
}

}  // namespace hoiseg::cli
