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

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"
#include "hoiseg/errors.hpp"
#include "pipeline.hpp"
#include "pipeline_config.hpp"

namespace {

namespace fs = std::filesystem;
using hoiseg::ValidationError;
using hoiseg::cli::PipelineConfig;

struct ConfigFlags {
    std::string config_path;
    std::optional<double> min_score;
    std::optional<std::string> window_len;
    std::optional<std::string> window_threshold;
    bool strict_window = false;
    bool no_require_crops = false;
    std::optional<double> min_duration_s;
    std::optional<double> boundary_fraction;
    std::optional<std::string> sim_threshold;
    std::optional<std::string> polarity;
    std::optional<std::string> provider;
    std::optional<double> provider_value;
    std::optional<std::string> matrix;
    std::optional<std::string> crop_root;
    std::optional<int> bins;
    std::optional<double> iosa_threshold;
    std::optional<std::string> attention_fallback;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& f) {
    cmd->add_option("--config", f.config_path, "JSON config file (default: $HOISEG_CONFIG)");
    cmd->add_option("--min-score", f.min_score, "Detection score floor");
    cmd->add_option("--window-len", f.window_len, "FSM window length in frames, or auto");
    cmd->add_option("--window-threshold", f.window_threshold, "FSM activation threshold, or auto");
    cmd->add_flag("--strict-window", f.strict_window, "Activate only when the window sum exceeds the threshold");
    cmd->add_flag("--no-require-crops", f.no_require_crops, "Accept active objects without crop_ref");
    cmd->add_option("--min-duration", f.min_duration_s, "Drop clips shorter than this many seconds");
    cmd->add_option("--boundary-fraction", f.boundary_fraction, "Share of crops compared at clip boundaries");
    cmd->add_option("--sim-threshold", f.sim_threshold, "Reconnection threshold, or roc:<pairs.csv>");
    cmd->add_option("--polarity", f.polarity, "similarity or distance");
    cmd->add_option("--provider", f.provider, "none, constant, matrix or histogram");
    cmd->add_option("--provider-value", f.provider_value, "Value of the constant provider");
    cmd->add_option("--similarity-matrix", f.matrix, "Matrix provider JSON file");
    cmd->add_option("--crop-root", f.crop_root, "Directory crop_refs are relative to");
    cmd->add_option("--bins", f.bins, "Histogram bins per channel");
    cmd->add_option("--iosa-threshold", f.iosa_threshold, "Two-hand merge threshold");
    cmd->add_option("--attention-fallback", f.attention_fallback, "Principal hand on attention ties: left or right");
}

nlohmann::json parse_auto_or_int(const std::string& flag, const std::string& v) {
    if (v == "auto") {
        return v;
    }
    try {
        std::size_t used = 0;
        const int i = std::stoi(v, &used);
        if (used == v.size()) {
            return i;
        }
    } catch (const std::exception&) {
    }
    throw ValidationError(flag + " must be auto or an integer");
}

// Paths given on the command line are relative to the working directory;
// rewrite them relative to the config file they are merged into.
std::string rebase(const PipelineConfig& c, const std::string& path) {
    if (c.base_dir.empty() || fs::path(path).is_absolute()) {
        return path;
    }
    return fs::absolute(path).lexically_proximate(fs::absolute(c.base_dir)).string();
}

PipelineConfig effective_config(const ConfigFlags& f) {
    PipelineConfig c;
    std::string path = f.config_path;
    if (path.empty()) {
        if (const char* env = std::getenv(hoiseg::cli::kConfigEnvVar); env != nullptr) {
            path = env;
        }
    }
    if (!path.empty()) {
        c = hoiseg::cli::load_config_file(path);
    }

    nlohmann::json patch = nlohmann::json::object();
    nlohmann::json provider = nlohmann::json::object();
    if (f.min_score) patch["min_score"] = *f.min_score;
    if (f.window_len) patch["window_len"] = parse_auto_or_int("--window-len", *f.window_len);
    if (f.window_threshold) patch["window_threshold"] = parse_auto_or_int("--window-threshold", *f.window_threshold);
    if (f.strict_window) patch["strict_window"] = true;
    if (f.no_require_crops) patch["require_crops"] = false;
    if (f.min_duration_s) patch["min_duration_s"] = *f.min_duration_s;
    if (f.boundary_fraction) patch["boundary_fraction"] = *f.boundary_fraction;
    if (f.sim_threshold) {
        const std::string& v = *f.sim_threshold;
        if (v.rfind("roc:", 0) == 0) {
            patch["sim_threshold"] = "roc:" + rebase(c, v.substr(4));
        } else {
            try {
                std::size_t used = 0;
                const double d = std::stod(v, &used);
                if (used != v.size()) {
                    throw std::invalid_argument(v);
                }
                patch["sim_threshold"] = d;
            } catch (const std::exception&) {
                throw ValidationError("--sim-threshold must be a number or roc:<pairs.csv>");
            }
        }
    }
    if (f.polarity) patch["similarity_polarity"] = *f.polarity;
    if (f.provider) provider["kind"] = *f.provider;
    if (f.provider_value) provider["value"] = *f.provider_value;
    if (f.matrix) provider["path"] = rebase(c, *f.matrix);
    if (f.crop_root) provider["crop_root"] = rebase(c, *f.crop_root);
    if (f.bins) provider["bins"] = *f.bins;
    if (!provider.empty()) patch["provider"] = provider;
    if (f.iosa_threshold) patch["iosa_threshold"] = *f.iosa_threshold;
    if (f.attention_fallback) patch["attention_fallback"] = *f.attention_fallback;

    hoiseg::cli::apply_config_json(c, patch);
    c.validate();
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    spdlog::set_default_logger(spdlog::stderr_color_mt("hoiseg"));
    spdlog::set_pattern("hoiseg: %^%l%$: %v");
    spdlog::set_level(spdlog::level::warn);

    CLI::App app{"Hand-object interaction step segmentation for egocentric video traces"};
    app.set_version_flag("--version", hoiseg::cli::tool_version());
    app.require_subcommand(1);
    bool verbose = false;
    bool quiet = false;
    app.add_flag("-v,--verbose", verbose, "Log progress");
    app.add_flag("-q,--quiet", quiet, "Log errors only");

    ConfigFlags flags;

    hoiseg::cli::SegmentArgs segment;
    auto* seg_cmd = app.add_subcommand("segment", "Detect per-hand interaction clips in a trace");
    seg_cmd->add_option("trace", segment.trace, "Detection trace (JSONL)")->required();
    seg_cmd->add_option("-o,--out-dir", segment.out_dir, "Output directory")->required();
    add_config_flags(seg_cmd, flags);

    hoiseg::cli::FuseArgs fuse;
    auto* fuse_cmd = app.add_subcommand("fuse", "Fuse left and right clip sets into steps");
    fuse_cmd->add_option("left", fuse.left, "Left-hand clip set")->required();
    fuse_cmd->add_option("right", fuse.right, "Right-hand clip set")->required();
    fuse_cmd->add_option("trace", fuse.trace, "Detection trace the clips came from")->required();
    fuse_cmd->add_option("-o,--output", fuse.output, "Step segmentation JSON")->required();
    add_config_flags(fuse_cmd, flags);

    hoiseg::cli::EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "Score predictions against ground truth");
    eval_cmd->add_option("predicted", eval.predicted, "Predicted steps (JSON) or detections (JSONL)")->required();
    eval_cmd->add_option("truth", eval.truth, "Ground truth in the same format")->required();
    eval_cmd->add_option("--mode", eval.mode, "steps or detections")->capture_default_str();
    eval_cmd->add_option("--labels", eval.labels, "Step label matching: auto, ignore or require")
        ->capture_default_str();
    eval_cmd->add_option("--iou", eval.iou_match, "Box IOU needed for a detection match")->capture_default_str();
    eval_cmd->add_option("--json", eval.json_out, "Also write the report as JSON");

    hoiseg::cli::RocArgs roc;
    auto* roc_cmd = app.add_subcommand("roc", "Calibrate the similarity threshold from labeled crop pairs");
    roc_cmd->add_option("pairs", roc.pairs, "CSV with header crop_a,crop_b,same")->required();
    roc_cmd->add_option("-o,--out-dir", roc.out_dir, "Output directory")->required();
    add_config_flags(roc_cmd, flags);

    hoiseg::cli::RenderArgs render;
    auto* render_cmd = app.add_subcommand("render", "Draw step segmentations as a timeline");
    render_cmd->add_option("inputs", render.inputs, "Step segmentation files, one track each")->required();
    render_cmd->add_option("-o,--output", render.output, "SVG file");
    render_cmd->add_flag("--ascii", render.ascii, "Print a text timeline to stdout");
    render_cmd->add_option("--width", render.width, "SVG width in pixels")->capture_default_str();
    render_cmd->add_option("--columns", render.columns, "Text timeline width")->capture_default_str();

    hoiseg::cli::PipelineArgs pipeline;
    auto* pipe_cmd = app.add_subcommand("pipeline", "segment, fuse and render each trace");
    pipe_cmd->add_option("traces", pipeline.traces, "Detection traces (JSONL)")->required();
    pipe_cmd->add_option("-o,--out-dir", pipeline.out_dir, "Output root; one directory per trace")->required();
    pipe_cmd->add_option("-j,--jobs", pipeline.jobs, "Traces processed concurrently")->capture_default_str();
    add_config_flags(pipe_cmd, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? hoiseg::cli::kExitOk : hoiseg::cli::kExitValidation;
    }
    if (verbose) {
        spdlog::set_level(spdlog::level::info);
    }
    if (quiet) {
        spdlog::set_level(spdlog::level::err);
    }

    try {
        if (*eval_cmd) {
            hoiseg::cli::cmd_eval(eval, std::cout);
        } else if (*render_cmd) {
            hoiseg::cli::cmd_render(render, std::cout);
        } else {
            const PipelineConfig config = effective_config(flags);
            if (*seg_cmd) {
                hoiseg::cli::cmd_segment(segment, config);
            } else if (*fuse_cmd) {
                hoiseg::cli::cmd_fuse(fuse, config);
            } else if (*roc_cmd) {
                hoiseg::cli::cmd_roc(roc, config, std::cout);
            } else {
                hoiseg::cli::cmd_pipeline(pipeline, config);
            }
        }
    } catch (...) {
        return hoiseg::cli::exit_code_for(std::current_exception());
    }
    return hoiseg::cli::kExitOk;
}
