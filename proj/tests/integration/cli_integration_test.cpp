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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "../support/scripted_trace.hpp"
#include "hoiseg/fusion.hpp"
#include "hoiseg/segmentation.hpp"

namespace hoiseg {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("hoiseg_it_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    RunResult run(const std::string& args, const std::string& env = {}) {
        const fs::path out = dir_ / "stdout.txt";
        const fs::path err = dir_ / "stderr.txt";
        const std::string cmd = "cd '" + dir_.string() + "' && " + env + (env.empty() ? "" : " ") + HOISEG_BIN + " " +
                                args + " >'" + out.string() + "' 2>'" + err.string() + "'";
        const int status = std::system(cmd.c_str());
        RunResult r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = slurp(out);
        r.err = slurp(err);
        return r;
    }

    fs::path write(const std::string& name, const std::string& text) {
        const fs::path p = dir_ / name;
        fs::create_directories(p.parent_path());
        std::ofstream(p, std::ios::binary) << text;
        return p;
    }

    fs::path write_trace(const std::string& name, const VideoTrace& trace) {
        std::ostringstream s;
        serialize_trace(trace, s);
        return write(name, s.str());
    }

    static std::string slurp(const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    }

    ClipSet clips(const std::string& name) {
        std::ifstream in(dir_ / name);
        return parse_clip_set(in).clip_set;
    }

    // Six-step scenario plus an object-keyed similarity matrix, on disk.
    void write_scenario() {
        const auto scenario = testing::six_step_scenario();
        write_trace("six.jsonl", scenario.trace);
        std::ostringstream m;
        write_similarity_matrix(testing::object_keyed_matrix(scenario.trace, 0.9, 0.1), m);
        write("sim.json", m.str());
        expected_ = scenario.expected_steps;
    }

    fs::path dir_;
    std::vector<StepSegment> expected_;
};

VideoTrace one_left_interaction(std::int64_t frames) {
    testing::ScriptOptions opts;
    opts.video_id = "one";
    opts.frame_count = frames;
    return testing::build_scripted_trace(opts, {{HandSide::Left, 20, 79, "cup", 200.0, {}}});
}

TEST_F(CliTest, MissingTraceIsAnIoError) {
    const auto r = run("segment missing.jsonl -o out");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("missing.jsonl"), std::string::npos);
    EXPECT_FALSE(fs::exists(dir_ / "out"));
}

TEST_F(CliTest, MalformedTraceIsAValidationError) {
    write("bad.jsonl", "{\"fps\": 30, \"frame_count\": 3}\n{\"frame\": 9, \"detections\": []}\n");
    const auto r = run("segment bad.jsonl -o out");
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
}

TEST_F(CliTest, AllIdleTraceGivesTwoEmptyClipSets) {
    testing::ScriptOptions opts;
    opts.frame_count = 90;
    write_trace("idle.jsonl", testing::build_scripted_trace(opts, {}));
    const auto r = run("segment idle.jsonl -o out");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(clips("out/left_clips.json").clips.empty());
    EXPECT_TRUE(clips("out/right_clips.json").clips.empty());
    EXPECT_EQ(clips("out/right_clips.json").hand, HandSide::Right);
    EXPECT_TRUE(fs::exists(dir_ / "out" / "manifest.json"));
}

TEST_F(CliTest, OneLeftInteractionGivesOneLeftClip) {
    write_trace("one.jsonl", one_left_interaction(120));
    const auto r = run("segment one.jsonl -o out");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto left = clips("out/left_clips.json");
    ASSERT_EQ(left.clips.size(), 1u);
    EXPECT_EQ(left.clips[0].start_frame, 22);
    EXPECT_EQ(left.clips[0].end_frame, 81);
    EXPECT_EQ(left.clips[0].object_crops.size(), 58u);  // contact frames 22..79
    EXPECT_TRUE(clips("out/right_clips.json").clips.empty());

    const auto manifest = json::parse(slurp(dir_ / "out" / "manifest.json"));
    EXPECT_EQ(manifest["command"], "segment");
    EXPECT_EQ(manifest["resolved"]["window_len"], 5);
    EXPECT_EQ(manifest["resolved"]["window_threshold"], 3);
    std::ifstream in(dir_ / "out" / "left_clips.json");
    EXPECT_EQ(parse_clip_set(in).config_hash, manifest["config_hash"]);
}

TEST_F(CliTest, InvalidConfigWritesNothing) {
    write_trace("one.jsonl", one_left_interaction(120));
    EXPECT_EQ(run("segment one.jsonl -o out --boundary-fraction 0").code, 1);
    write("typo.json", R"({"min_scor": 0.5})");
    EXPECT_EQ(run("segment one.jsonl -o out --config typo.json").code, 1);
    EXPECT_EQ(run("segment one.jsonl -o out --config nowhere.json").code, 2);
    EXPECT_EQ(run("segment one.jsonl -o out --window-len soon").code, 1);
    EXPECT_EQ(run("segment one.jsonl -o out --bogus-flag").code, 1);
    EXPECT_FALSE(fs::exists(dir_ / "out"));
}

TEST_F(CliTest, FlagsOverrideConfigFileAndEnvironment) {
    write_trace("one.jsonl", one_left_interaction(120));
    write("conf.json", R"({"min_duration_s": 5.0})");
    // 60-frame clip is shorter than 5 s: filtered.
    ASSERT_EQ(run("segment one.jsonl -o a --config conf.json").code, 0);
    EXPECT_TRUE(clips("a/left_clips.json").clips.empty());
    ASSERT_EQ(run("segment one.jsonl -o b", "HOISEG_CONFIG=conf.json").code, 0);
    EXPECT_TRUE(clips("b/left_clips.json").clips.empty());
    ASSERT_EQ(run("segment one.jsonl -o c --min-duration 1", "HOISEG_CONFIG=conf.json").code, 0);
    EXPECT_EQ(clips("c/left_clips.json").clips.size(), 1u);
    const auto manifest = json::parse(slurp(dir_ / "c" / "manifest.json"));
    EXPECT_EQ(manifest["config"]["min_duration_s"], 1.0);
}

TEST_F(CliTest, SegmentFuseEvalIsByteIdenticalAcrossRuns) {
    write_scenario();
    for (const char* run_dir : {"r1", "r2"}) {
        const std::string d = run_dir;
        ASSERT_EQ(run("segment six.jsonl -o " + d + " --provider matrix --similarity-matrix sim.json").code, 0);
        ASSERT_EQ(run("fuse " + d + "/left_clips.json " + d + "/right_clips.json six.jsonl -o " + d +
                      "/steps.json --provider matrix --similarity-matrix sim.json")
                      .code,
                  0);
        ASSERT_EQ(run("eval " + d + "/steps.json " + d + "/steps.json --json " + d + "/eval.json").code, 0);
    }
    for (const char* f : {"left_clips.json", "right_clips.json", "manifest.json", "steps.json", "eval.json"}) {
        EXPECT_EQ(slurp(dir_ / "r1" / f), slurp(dir_ / "r2" / f)) << f;
    }
    std::ifstream in(dir_ / "r1" / "steps.json");
    EXPECT_EQ(parse_step_segmentation(in).segments, expected_);
}

TEST_F(CliTest, FuseRejectsSwappedHands) {
    write_trace("one.jsonl", one_left_interaction(120));
    ASSERT_EQ(run("segment one.jsonl -o out").code, 0);
    EXPECT_EQ(run("fuse out/right_clips.json out/left_clips.json one.jsonl -o steps.json").code, 1);
    EXPECT_FALSE(fs::exists(dir_ / "steps.json"));
}

TEST_F(CliTest, EvalReportsStepsAndDetections) {
    write("pred.json", R"({"video_id":"v","fps":30,"segments":[{"start_frame":0,"end_frame":99}]})");
    write("truth.json", R"({"video_id":"v","fps":30,"segments":[{"start_frame":0,"end_frame":49}]})");
    const auto r = run("eval pred.json truth.json --json report.json");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("F1@50%"), std::string::npos);
    const auto report = json::parse(slurp(dir_ / "report.json"));
    EXPECT_EQ(report[2]["tp"], 1);

    write("other.json", R"({"video_id":"w","fps":30,"segments":[]})");
    EXPECT_EQ(run("eval pred.json other.json").code, 1);
    EXPECT_EQ(run("eval pred.json truth.json --mode frames").code, 1);

    write_trace("det.jsonl", one_left_interaction(100));
    const auto d = run("eval det.jsonl det.jsonl --mode detections");
    ASSERT_EQ(d.code, 0) << d.err;
    EXPECT_NE(d.out.find("HOI"), std::string::npos);
    EXPECT_NE(d.out.find("100.00%"), std::string::npos);
}

TEST_F(CliTest, RenderIsDeterministicWithAsciiFallback) {
    write("a.json", R"({"video_id":"v","fps":30,"frame_count":300,"segments":[{"start_frame":0,"end_frame":299}]})");
    write("b.json", R"({"video_id":"v","fps":30,"frame_count":250,"segments":[]})");
    ASSERT_EQ(run("render a.json -o one.svg").code, 0);
    ASSERT_EQ(run("render a.json -o two.svg").code, 0);
    EXPECT_EQ(slurp(dir_ / "one.svg"), slurp(dir_ / "two.svg"));
    EXPECT_NE(slurp(dir_ / "one.svg").find("width=\"786.00\" height=\"24\" fill=\"#59a14f\""), std::string::npos);

    const auto r = run("render a.json b.json --ascii --columns 20");
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("a     |BBBBBBBBBBBBBBBBBBBB|"), std::string::npos) << r.out;
    EXPECT_NE(r.err.find("250 frames"), std::string::npos) << r.err;
    EXPECT_EQ(run("render a.json").code, 1);
}

void write_pairs(const fs::path& path, const std::vector<LabeledPair>& pairs) {
    std::ofstream out(path);
    out << "crop_a,crop_b,same\n";
    for (const auto& p : pairs) {
        out << p.crop_a << ',' << p.crop_b << ',' << (p.same_object ? 1 : 0) << '\n';
    }
}

TEST_F(CliTest, RocOnSeparablePairs) {
    const auto scenario = testing::six_step_scenario();
    const auto matrix = testing::jittered_object_matrix(scenario.trace, 0.9, 0.1, 0.05, 7);
    std::ostringstream m;
    write_similarity_matrix(matrix, m);
    write("sim.json", m.str());
    write_pairs(dir_ / "pairs.csv", testing::sample_labeled_pairs(matrix, 200, 8));

    const auto r = run("roc pairs.csv -o roc --provider matrix --similarity-matrix sim.json");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto summary = json::parse(slurp(dir_ / "roc" / "roc.json"));
    EXPECT_GT(summary["threshold"].get<double>(), 0.1);
    EXPECT_LT(summary["threshold"].get<double>(), 0.9);
    EXPECT_EQ(summary["youden"], 1.0);
    EXPECT_EQ(summary["auc"], 1.0);
    EXPECT_TRUE(fs::exists(dir_ / "roc" / "roc.svg"));
    EXPECT_EQ(slurp(dir_ / "roc" / "roc_curve.csv").substr(0, 24), "threshold,tpr,fpr,youden");
}

TEST_F(CliTest, RocOnRandomScoresIsNearChance) {
    // Scores unrelated to the labels.
    const auto scenario = testing::six_step_scenario();
    auto matrix = testing::object_keyed_matrix(scenario.trace, 0.5, 0.5);
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t i = 0; i < matrix.crop_refs.size(); ++i) {
        for (std::size_t j = i + 1; j < matrix.crop_refs.size(); ++j) {
            matrix.matrix[i][j] = matrix.matrix[j][i] = unit(rng);
        }
    }
    std::ostringstream m;
    write_similarity_matrix(matrix, m);
    write("sim.json", m.str());
    write_pairs(dir_ / "pairs.csv", testing::sample_labeled_pairs(matrix, 2000, 12));
    ASSERT_EQ(run("roc pairs.csv -o roc --provider matrix --similarity-matrix sim.json").code, 0);
    const double auc = json::parse(slurp(dir_ / "roc" / "roc.json"))["auc"];
    EXPECT_NEAR(auc, 0.5, 0.1);
}

TEST_F(CliTest, RocNeedsBothClassesAndAProvider) {
    write("one.csv", "crop_a,crop_b,same\nx,y,1\n");
    write("sim.json", R"({"crop_refs":["x","y"],"matrix":[[1,0.5],[0.5,1]]})");
    EXPECT_EQ(run("roc one.csv -o roc --provider matrix --similarity-matrix sim.json").code, 1);
    EXPECT_EQ(run("roc one.csv -o roc").code, 1);
    EXPECT_FALSE(fs::exists(dir_ / "roc"));
}

TEST_F(CliTest, SegmentCalibratesThresholdFromPairs) {
    write_scenario();
    const auto matrix = testing::jittered_object_matrix(testing::six_step_scenario().trace, 0.9, 0.1, 0.05, 3);
    std::ostringstream m;
    write_similarity_matrix(matrix, m);
    write("noisy.json", m.str());
    write_pairs(dir_ / "pairs.csv", testing::sample_labeled_pairs(matrix, 100, 4));
    const auto r = run("pipeline six.jsonl -o out --provider matrix --similarity-matrix noisy.json "
                       "--sim-threshold roc:pairs.csv");
    ASSERT_EQ(r.code, 0) << r.err;
    std::ifstream in(dir_ / "out" / "six" / "steps.json");
    EXPECT_EQ(parse_step_segmentation(in).segments, expected_);
    const auto manifest = json::parse(slurp(dir_ / "out" / "six" / "manifest.json"));
    const double theta = manifest["resolved"]["sim_threshold"];
    EXPECT_GT(theta, 0.1);
    EXPECT_LT(theta, 0.9);
}

TEST_F(CliTest, PipelineJobsMatchSequentialOutput) {
    write_scenario();
    write_trace("one.jsonl", one_left_interaction(120));
    testing::ScriptOptions opts;
    opts.frame_count = 60;
    write_trace("idle.jsonl", testing::build_scripted_trace(opts, {}));
    const std::string common = " --provider matrix --similarity-matrix sim.json --no-require-crops";
    ASSERT_EQ(run("pipeline six.jsonl one.jsonl idle.jsonl -o seq -j 1" + common).code, 0);
    ASSERT_EQ(run("pipeline six.jsonl one.jsonl idle.jsonl -o par -j 3" + common).code, 0);
    for (const char* t : {"six", "one", "idle"}) {
        for (const char* f : {"left_clips.json", "right_clips.json", "steps.json", "timeline.svg"}) {
            EXPECT_EQ(slurp(dir_ / "seq" / t / f), slurp(dir_ / "par" / t / f)) << t << "/" << f;
        }
    }
    // A bad trace fails the batch without stopping the others.
    const auto r = run("pipeline six.jsonl missing.jsonl -o mixed -j 2" + common);
    EXPECT_EQ(r.code, 2);
    EXPECT_TRUE(fs::exists(dir_ / "mixed" / "six" / "steps.json"));
}

}  // namespace
}  // namespace hoiseg
