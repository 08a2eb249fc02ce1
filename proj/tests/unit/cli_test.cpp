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

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "../support/scripted_trace.hpp"
#include "hoiseg/errors.hpp"
#include "pipeline.hpp"
#include "pipeline_config.hpp"
#include "render.hpp"

namespace hoiseg::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

TEST(PipelineConfigTest, DefaultsAreValid) {
    const PipelineConfig c;
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.window_params(30.0), (WindowParams{5, 3}));
    EXPECT_EQ(c.window_params(60.0), (WindowParams{10, 6}));
}

TEST(PipelineConfigTest, SerializationRoundTrips) {
    PipelineConfig c;
    apply_config_json(c, json::parse(R"({
        "min_score": 0.7, "window_len": 7, "window_threshold": "auto", "strict_window": true,
        "require_crops": false, "min_duration_s": 0.25, "boundary_fraction": 0.5,
        "sim_threshold": "roc:pairs.csv", "similarity_polarity": "distance",
        "provider": {"kind": "histogram", "crop_root": "crops", "bins": 16},
        "iosa_threshold": 0.8, "attention_fallback": "left"})"));
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.window_len, 7);
    EXPECT_FALSE(c.window_threshold.has_value());
    EXPECT_EQ(c.sim_threshold_pairs, "pairs.csv");

    PipelineConfig back;
    apply_config_json(back, json::parse(c.to_json().dump()));
    EXPECT_EQ(back, c);
    EXPECT_EQ(back.to_json().dump(), c.to_json().dump());
    EXPECT_EQ(back.hash(), c.hash());
}

TEST(PipelineConfigTest, HashTracksEveryChange) {
    const PipelineConfig base;
    EXPECT_EQ(base.hash().size(), 64u);
    EXPECT_EQ(base.hash(), PipelineConfig{}.hash());
    PipelineConfig other;
    other.iosa_threshold = 0.6;
    EXPECT_NE(other.hash(), base.hash());
    other = base;
    other.provider.kind = ProviderKind::Constant;
    EXPECT_NE(other.hash(), base.hash());
}

TEST(PipelineConfigTest, RejectsUnknownKeysAndWrongTypes) {
    PipelineConfig c;
    EXPECT_THROW(apply_config_json(c, json::parse(R"({"min_scor": 0.8})")), ValidationError);
    EXPECT_THROW(apply_config_json(c, json::parse(R"({"min_score": "high"})")), ValidationError);
    EXPECT_THROW(apply_config_json(c, json::parse(R"({"window_len": 2.5})")), ValidationError);
    EXPECT_THROW(apply_config_json(c, json::parse(R"({"sim_threshold": "roc:"})")), ValidationError);
    EXPECT_THROW(apply_config_json(c, json::parse(R"({"provider": {"kind": "magic"}})")), ValidationError);
    EXPECT_THROW(apply_config_json(c, json::parse(R"({"provider": {"colour": 1}})")), ValidationError);
    EXPECT_THROW(apply_config_json(c, json::parse(R"({"attention_fallback": "up"})")), ValidationError);
    EXPECT_THROW(apply_config_json(c, json::parse("[1, 2]")), ValidationError);
}

TEST(PipelineConfigTest, RangeChecks) {
    const auto invalid = [](const char* patch) {
        PipelineConfig c;
        apply_config_json(c, json::parse(patch));
        return [c] { c.validate(); };
    };
    EXPECT_THROW(invalid(R"({"min_score": 1.5})")(), ValidationError);
    EXPECT_THROW(invalid(R"({"window_len": 0})")(), ValidationError);
    EXPECT_THROW(invalid(R"({"window_len": 3, "window_threshold": 4})")(), ValidationError);
    EXPECT_THROW(invalid(R"({"min_duration_s": -1})")(), ValidationError);
    EXPECT_THROW(invalid(R"({"boundary_fraction": 0})")(), ValidationError);
    EXPECT_THROW(invalid(R"({"sim_threshold": 1.2})")(), ValidationError);
    EXPECT_THROW(invalid(R"({"iosa_threshold": -0.1})")(), ValidationError);
    EXPECT_THROW(invalid(R"({"provider": {"kind": "matrix"}})")(), ValidationError);
    EXPECT_THROW(invalid(R"({"provider": {"kind": "histogram", "crop_root": "c", "bins": 1}})")(), ValidationError);
    EXPECT_THROW(invalid(R"({"provider": {"kind": "constant", "value": 2}})")(), ValidationError);
    EXPECT_THROW(invalid(R"({"sim_threshold": "roc:p.csv"})")(), ValidationError);
    EXPECT_NO_THROW(invalid(R"({"iosa_threshold": 1.01})")());
}

TEST(PipelineConfigTest, WindowOverrides) {
    PipelineConfig c;
    c.window_len = 2;
    // Derived threshold 3 is clamped to the shorter window.
    EXPECT_EQ(c.window_params(30.0), (WindowParams{2, 2}));
    c.window_threshold = 1;
    EXPECT_EQ(c.window_params(30.0), (WindowParams{2, 1}));
    PipelineConfig t;
    t.window_threshold = 9;
    EXPECT_THROW(t.window_params(30.0), ValidationError);
}

class TempDir : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("hoiseg_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path write(const std::string& name, const std::string& text) {
        const fs::path p = dir_ / name;
        fs::create_directories(p.parent_path());
        std::ofstream(p) << text;
        return p;
    }

    static std::string slurp(const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    }

    fs::path dir_;
};

TEST_F(TempDir, ConfigFilePathsResolveAgainstItsDirectory) {
    const auto path = write("conf/run.json", R"({"provider": {"kind": "matrix", "path": "m.json"}})");
    const auto c = load_config_file(path);
    EXPECT_EQ(c.resolve(c.provider.path), dir_ / "conf" / "m.json");
    EXPECT_EQ(c.resolve("/abs/x"), fs::path("/abs/x"));
    EXPECT_THROW(load_config_file(dir_ / "none.json"), IoError);
    EXPECT_THROW(load_config_file(write("bad.json", "{oops")), ValidationError);
}

TEST_F(TempDir, AtomicWriteLeavesNoTemporaries) {
    write_file_atomic(dir_ / "a" / "b.txt", "hello");
    write_file_atomic(dir_ / "a" / "b.txt", "again");
    EXPECT_EQ(slurp(dir_ / "a" / "b.txt"), "again");
    EXPECT_EQ(std::distance(fs::directory_iterator(dir_ / "a"), fs::directory_iterator()), 1);
}

TEST_F(TempDir, PipelineRecoversTheScriptedSteps) {
    const auto scenario = testing::six_step_scenario();
    std::ostringstream trace_text;
    serialize_trace(scenario.trace, trace_text);
    const auto trace_path = write("six.jsonl", trace_text.str());
    std::ostringstream matrix_text;
    write_similarity_matrix(testing::object_keyed_matrix(scenario.trace, 0.9, 0.1), matrix_text);
    write("sim.json", matrix_text.str());

    PipelineConfig c;
    c.provider.kind = ProviderKind::Matrix;
    c.provider.path = "sim.json";
    c.base_dir = dir_;
    const auto out = run_pipeline(trace_path, c);
    EXPECT_EQ(out.steps.segments, scenario.expected_steps);
    ASSERT_EQ(out.files.size(), 5u);
    EXPECT_EQ(out.files.back().first, "manifest.json");
    const auto manifest = json::parse(out.files.back().second);
    EXPECT_EQ(manifest["config_hash"], c.hash());
    EXPECT_EQ(manifest["resolved"]["window_len"], 5);

    // Without reconnection the interrupted step stays split in two.
    PipelineConfig plain = c;
    plain.provider.kind = ProviderKind::None;
    EXPECT_EQ(run_pipeline(trace_path, plain).steps.segments.size(), scenario.expected_steps.size() + 1);
}

TEST(SegmentHandTest, ScriptedLeftInteractionGivesOneLeftClip) {
    testing::ScriptOptions opts;
    opts.frame_count = 120;
    const auto trace = canonicalize_trace(
        testing::build_scripted_trace(opts, {{HandSide::Left, 20, 79, "cup", 200.0, {}}}));
    const PipelineConfig c;
    const auto left = segment_hand(trace, HandSide::Left, c, nullptr, 0.5);
    const auto right = segment_hand(trace, HandSide::Right, c, nullptr, 0.5);
    ASSERT_EQ(left.clips.size(), 1u);
    EXPECT_EQ(left.clips[0].start_frame, 22);
    EXPECT_EQ(left.clips[0].end_frame, 81);
    EXPECT_TRUE(right.clips.empty());
}

StepSegmentation one_step(std::int64_t frames, std::int64_t a, std::int64_t b) {
    return {"vid", 30.0, frames, {{a, b, SourceHand::Left, std::nullopt}}};
}

TEST(RenderTest, FullSpanSegmentFillsTheTrack) {
    const auto svg = render_timeline_svg({{"only", one_step(300, 0, 299)}});
    EXPECT_NE(svg.find("<rect x=\"150.00\" y=\"40\" width=\"786.00\""), std::string::npos) << svg;
    EXPECT_EQ(svg, render_timeline_svg({{"only", one_step(300, 0, 299)}}));
}

TEST(RenderTest, IdenticalInputsGiveIdenticalTracks) {
    const auto steps = one_step(300, 30, 89);
    const auto svg = render_timeline_svg({{"a", steps}, {"a", steps}});
    const auto first = svg.find("<g>");
    const auto second = svg.find("<g>", first + 1);
    const auto end1 = svg.find("</g>", first);
    const auto end2 = svg.find("</g>", second);
    ASSERT_NE(second, std::string::npos);
    auto track1 = svg.substr(first, end1 - first);
    auto track2 = svg.substr(second, end2 - second);
    // Same content, shifted down by one track pitch.
    EXPECT_EQ(std::count(track1.begin(), track1.end(), '\n'), std::count(track2.begin(), track2.end(), '\n'));
    EXPECT_NE(track2.find("x=\"228.60\" y=\"76\" width=\"157.20\""), std::string::npos) << track2;
    EXPECT_NE(track1.find("x=\"228.60\" y=\"40\" width=\"157.20\""), std::string::npos) << track1;

    const auto ascii = render_timeline_ascii({{"a", steps}, {"b", steps}}, 30);
    std::istringstream lines(ascii);
    std::string l1;
    std::string l2;
    std::getline(lines, l1);
    std::getline(lines, l2);
    EXPECT_EQ(l1.substr(1), l2.substr(1));
    EXPECT_EQ(l1, "a     |...LLLLLL.....................|");
}

TEST(RenderTest, MismatchesAreReported) {
    auto other = one_step(200, 0, 10);
    other.video_id = "other";
    const auto notes = timeline_mismatches({{"a", one_step(300, 0, 10)}, {"b", other}});
    EXPECT_EQ(notes.size(), 2u);
    EXPECT_TRUE(timeline_mismatches({{"a", one_step(300, 0, 10)}, {"b", one_step(300, 5, 10)}}).empty());
    EXPECT_THROW(render_timeline_svg({}), ValidationError);
}

TEST(RenderTest, RocOutputs) {
    const std::vector<RocPoint> curve = {{0.0, 1.0, 1.0}, {0.5, 1.0, 0.0}, {1.0, 0.0, 0.0}};
    EXPECT_EQ(roc_curve_csv(curve), "threshold,tpr,fpr,youden\n0,1,1,0\n0.5,1,0,1\n1,0,0,0\n");
    const auto svg = render_roc_svg(curve, 0.5, 1.0);
    EXPECT_NE(svg.find("<polyline points=\"48.00,372.00 48.00,48.00 372.00,48.00\""), std::string::npos) << svg;
    EXPECT_NE(svg.find("<circle cx=\"48.00\" cy=\"48.00\""), std::string::npos);
}

}  // namespace
}  // namespace hoiseg::cli
