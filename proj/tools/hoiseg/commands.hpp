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

#include <exception>
#include <iosfwd>
#include <string>
#include <vector>

#include "hoiseg/metrics.hpp"
#include "pipeline_config.hpp"

namespace hoiseg::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitValidation = 1,
    kExitIo = 2,
    kExitInvariant = 3,
};

/// Exit code for an exception escaping a command; logs it.
int exit_code_for(std::exception_ptr error);

struct SegmentArgs {
    std::string trace;
    std::string out_dir;
};

/// Writes left_clips.json, right_clips.json and manifest.json into out_dir.
void cmd_segment(const SegmentArgs& args, const PipelineConfig& config);

struct FuseArgs {
    std::string left;
    std::string right;
    std::string trace;
    std::string output;
};

void cmd_fuse(const FuseArgs& args, const PipelineConfig& config);

struct EvalArgs {
    std::string predicted;
    std::string truth;
    std::string mode = "steps";  // steps | detections
    std::string labels = "auto";
    double iou_match = kDefaultDetectionIou;
    std::string json_out;
};

/// Prints the report table to `out` and optionally writes it as JSON.
void cmd_eval(const EvalArgs& args, std::ostream& out);

struct RocArgs {
    std::string pairs;
    std::string out_dir;
};

/// Writes roc_curve.csv, roc.svg and roc.json; prints the chosen threshold.
void cmd_roc(const RocArgs& args, const PipelineConfig& config, std::ostream& out);

struct RenderArgs {
    std::vector<std::string> inputs;
    std::string output;
    bool ascii = false;
    int width = 960;
    int columns = 80;
};

void cmd_render(const RenderArgs& args, std::ostream& out);

struct PipelineArgs {
    std::vector<std::string> traces;
    std::string out_dir;
    int jobs = 1;
};

/// segment + fuse + render per trace into out_dir/<trace stem>/, up to
/// `jobs` traces at a time.
void cmd_pipeline(const PipelineArgs& args, const PipelineConfig& config);

}  // namespace hoiseg::cli
