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

#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "hoiseg/errors.hpp"
#include "hoiseg/metrics.hpp"
#include "pipeline.hpp"
#include "render.hpp"

namespace hoiseg::cli {

namespace fs = std::filesystem;

int exit_code_for(std::exception_ptr error) {
    try {
        std::rethrow_exception(error);
    } catch (const ValidationError& e) {
        spdlog::error("{}", e.what());
        return kExitValidation;
    } catch (const IoError& e) {
        spdlog::error("{}", e.what());
        return kExitIo;
    } catch (const fs::filesystem_error& e) {
        spdlog::error("{}", e.what());
        return kExitIo;
    } catch (const InvariantViolation& e) {
        spdlog::error("internal invariant violated: {}", e.what());
        return kExitInvariant;
    } catch (const std::exception& e) {
        spdlog::error("internal error: {}", e.what());
        return kExitInvariant;
    }
}

void cmd_segment(const SegmentArgs& args, const PipelineConfig& config) {
    const VideoTrace trace = read_trace_file(args.trace, config.require_crops);
    const auto provider = make_provider(config);
    const double theta = resolve_sim_threshold(config, provider.get());
    const SegmentResult seg = segment_trace(trace, config, provider.get(), theta);

    auto manifest = make_manifest("segment", {args.trace}, config);
    manifest["resolved"] = {{"window_len", seg.window.window_len},
                            {"window_threshold", seg.window.threshold},
                            {"sim_threshold", seg.sim_threshold}};
    manifest["summary"] = {{"left_clips", seg.left.clips.size()}, {"right_clips", seg.right.clips.size()}};

    const std::string hash = config.hash();
    const std::string left = clip_set_text(seg.left, hash);
    const std::string right = clip_set_text(seg.right, hash);
    const fs::path dir(args.out_dir);
    write_file_atomic(dir / "left_clips.json", left);
    write_file_atomic(dir / "right_clips.json", right);
    write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
    spdlog::info("{}: {} left and {} right clips", trace.video_id, seg.left.clips.size(), seg.right.clips.size());
}

void cmd_fuse(const FuseArgs& args, const PipelineConfig& config) {
    std::string left_hash;
    std::string right_hash;
    const ClipSet left = read_clip_set_file(args.left, &left_hash);
    const ClipSet right = read_clip_set_file(args.right, &right_hash);
    const VideoTrace trace = read_trace_file(args.trace, false);
    const std::string hash = config.hash();
    for (const auto* h : {&left_hash, &right_hash}) {
        if (!h->empty() && *h != hash) {
            spdlog::warn("clip set was produced under a different config ({}...)", h->substr(0, 12));
        }
    }
    const StepSegmentation steps = fuse_trace(left, right, trace, config);
    write_file_atomic(args.output, steps_text(steps));
    spdlog::info("{}: {} steps", steps.video_id, steps.segments.size());
}

void cmd_eval(const EvalArgs& args, std::ostream& out) {
    LabelMatching labels = LabelMatching::Auto;
    if (args.labels == "ignore") {
        labels = LabelMatching::Ignore;
    } else if (args.labels == "require") {
        labels = LabelMatching::Require;
    } else if (args.labels != "auto") {
        throw ValidationError("--labels must be auto, ignore or require");
    }

    std::string table;
    std::string json;
    if (args.mode == "steps") {
        const auto report = f1_report(read_steps_file(args.predicted), read_steps_file(args.truth), labels);
        table = format_f1_table(report);
        json = f1_report_json(report);
    } else if (args.mode == "detections") {
        const auto rows = detection_eval(read_trace_file(args.predicted, false), read_trace_file(args.truth, false),
                                         args.iou_match);
        table = format_detection_table(rows);
        json = detection_report_json(rows);
    } else {
        throw ValidationError("--mode must be steps or detections");
    }
    out << table;
    if (!args.json_out.empty()) {
        write_file_atomic(args.json_out, json);
    }
}

void cmd_roc(const RocArgs& args, const PipelineConfig& config, std::ostream& out) {
    const auto provider = make_provider(config);
    if (provider == nullptr) {
        throw ValidationError("roc needs a similarity provider (set provider.kind)");
    }
    const auto pairs = load_labeled_pairs(args.pairs);
    const auto curve = roc_curve(*provider, pairs);
    const double theta = select_threshold_roc(curve);
    const double auc = roc_auc(*provider, pairs);
    const auto chosen = std::find_if(curve.begin(), curve.end(), [&](const RocPoint& p) { return p.threshold == theta; });

    nlohmann::ordered_json summary;
    summary["threshold"] = theta;
    summary["youden"] = chosen->youden();
    summary["tpr"] = chosen->tpr;
    summary["fpr"] = chosen->fpr;
    summary["auc"] = auc;
    summary["pairs"] = pairs.size();
    summary["positives"] = std::count_if(pairs.begin(), pairs.end(), [](const LabeledPair& p) { return p.same_object; });
    summary["provider"] = config.to_json()["provider"];

    const std::string csv = roc_curve_csv(curve);
    const std::string svg = render_roc_svg(curve, theta, auc);
    const fs::path dir(args.out_dir);
    write_file_atomic(dir / "roc_curve.csv", csv);
    write_file_atomic(dir / "roc.svg", svg);
    write_file_atomic(dir / "roc.json", summary.dump(2) + "\n");
    out << fmt::format("threshold {}  youden {:.4f}  tpr {:.4f}  fpr {:.4f}  auc {:.4f}\n", theta, chosen->youden(),
                       chosen->tpr, chosen->fpr, auc);
}

void cmd_render(const RenderArgs& args, std::ostream& out) {
    if (args.inputs.empty()) {
        throw ValidationError("render needs at least one step segmentation");
    }
    if (args.output.empty() && !args.ascii) {
        throw ValidationError("render needs --output, --ascii or both");
    }
    std::vector<TimelineTrack> tracks;
    for (const auto& path : args.inputs) {
        tracks.push_back({fs::path(path).stem().string(), read_steps_file(path)});
    }
    for (const auto& note : timeline_mismatches(tracks)) {
        spdlog::warn("{}", note);
    }
    if (!args.output.empty()) {
        write_file_atomic(args.output, render_timeline_svg(tracks, args.width));
    }
    if (args.ascii) {
        out << render_timeline_ascii(tracks, args.columns);
    }
}

void cmd_pipeline(const PipelineArgs& args, const PipelineConfig& config) {
    if (args.traces.empty()) {
        throw ValidationError("pipeline needs at least one trace");
    }
    if (args.jobs < 1) {
        throw ValidationError("--jobs must be >= 1");
    }
    std::set<std::string> stems;
    for (const auto& t : args.traces) {
        if (!stems.insert(fs::path(t).stem().string()).second) {
            throw ValidationError("two traces share the output name '" + fs::path(t).stem().string() + "'");
        }
    }

    std::vector<std::exception_ptr> errors(args.traces.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < args.traces.size(); i = next++) {
            try {
                const fs::path trace(args.traces[i]);
                const PipelineOutputs outputs = run_pipeline(trace, config);
                const fs::path dir = fs::path(args.out_dir) / trace.stem();
                for (const auto& [name, content] : outputs.files) {
                    write_file_atomic(dir / name, content);
                }
                spdlog::info("{}: {} steps", trace.string(), outputs.steps.segments.size());
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(args.jobs), args.traces.size());
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& t : pool) {
        t.join();
    }

    std::exception_ptr first;
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!errors[i]) {
            continue;
        }
        if (!first) {
            first = errors[i];
        } else {
            spdlog::error("{} also failed:", args.traces[i]);
            exit_code_for(errors[i]);
        }
    }
    if (first) {
        std::rethrow_exception(first);
    }
}

}  // namespace hoiseg::cli
