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

#include <random>

#include <gtest/gtest.h>

#include "../support/oracles.hpp"
#include "hoiseg/errors.hpp"
#include "hoiseg/hand_fsm.hpp"

namespace hoiseg {
namespace {

using S = HandState;

ScoreSeries series(std::vector<std::uint8_t> s) {
    return {HandSide::Left, std::move(s)};
}

std::vector<std::uint8_t> random_scores(std::mt19937& rng, std::size_t n, double p_one) {
    std::bernoulli_distribution one(p_one);
    std::vector<std::uint8_t> s(n);
    for (auto& v : s) {
        v = one(rng) ? 1 : 0;
    }
    return s;
}

FrameDetections frame_with(std::vector<Detection> dets) {
    return {0, std::move(dets)};
}

TEST(FrameScoreTest, ActiveHandTouchingActiveObjectScoresOne) {
    const auto f = frame_with({{{10, 10, 50, 50}, DetectionClass::ActiveLeftHand, 0.9, std::nullopt},
                               {{40, 40, 80, 80}, DetectionClass::ActiveObject, 0.9, "cup"}});
    EXPECT_EQ(frame_score(f, HandSide::Left), 1);
    EXPECT_EQ(frame_score(f, HandSide::Right), 0);
}

TEST(FrameScoreTest, IdleHandScoresZero) {
    const auto f = frame_with({{{10, 10, 50, 50}, DetectionClass::IdleLeftHand, 0.9, std::nullopt},
                               {{40, 40, 80, 80}, DetectionClass::ActiveObject, 0.9, "cup"}});
    EXPECT_EQ(frame_score(f, HandSide::Left), 0);
}

TEST(FrameScoreTest, DisjointObjectScoresZero) {
    const auto f = frame_with({{{10, 10, 50, 50}, DetectionClass::ActiveLeftHand, 0.9, std::nullopt},
                               {{60, 60, 80, 80}, DetectionClass::ActiveObject, 0.9, "cup"}});
    EXPECT_EQ(frame_score(f, HandSide::Left), 0);
}

TEST(FrameScoreTest, AnyOfTwoObjectsMayTouch) {
    const auto f = frame_with({{{300, 10, 350, 50}, DetectionClass::ActiveRightHand, 0.9, std::nullopt},
                               {{0, 0, 20, 20}, DetectionClass::ActiveObject, 0.9, "far"},
                               {{340, 40, 400, 90}, DetectionClass::ActiveObject, 0.9, "near"}});
    EXPECT_EQ(frame_score(f, HandSide::Right), 1);
}

TEST(ScoreSeriesTest, MissingFramesScoreZero) {
    VideoTrace t;
    t.fps = 30;
    t.frame_count = 4;
    t.frames.push_back(frame_with({{{10, 10, 50, 50}, DetectionClass::ActiveLeftHand, 0.9, std::nullopt},
                                   {{40, 40, 80, 80}, DetectionClass::ActiveObject, 0.9, "cup"}}));
    t.frames[0].frame_index = 2;
    const auto s = score_series(t, HandSide::Left);
    EXPECT_EQ(s.scores, (std::vector<std::uint8_t>{0, 0, 1, 0}));
}

TEST(DefaultWindowParamsTest, DerivedFromFps) {
    EXPECT_EQ(default_window_params(30), (WindowParams{5, 3}));
    EXPECT_EQ(default_window_params(60), (WindowParams{10, 6}));
    EXPECT_EQ(default_window_params(6), (WindowParams{1, 1}));
    EXPECT_EQ(default_window_params(1), (WindowParams{1, 1}));
    // 25/6 = 4.17 -> 4, 25/10 = 2.5 -> 3 (half up)
    EXPECT_EQ(default_window_params(25), (WindowParams{4, 3}));
    EXPECT_THROW(default_window_params(0), ValidationError);
    EXPECT_THROW(default_window_params(-30), ValidationError);
}

TEST(DefaultWindowParamsTest, ThresholdNeverExceedsWindow) {
    for (double fps = 0.25; fps < 500; fps += 0.25) {
        const auto p = default_window_params(fps);
        EXPECT_GE(p.threshold, 1);
        EXPECT_LE(p.threshold, p.window_len) << fps;
    }
}

TEST(RunFsmTest, AllZeroStaysIdle) {
    const auto out = run_fsm(series(std::vector<std::uint8_t>(20, 0)), 5, 3);
    EXPECT_EQ(out.states, std::vector<S>(20, S::Idle));
}

TEST(RunFsmTest, AllOnesActivateAtThirdFrame) {
    // Frozen from testing::naive_window_states.
    const std::vector<S> expected = {S::Idle, S::Idle, S::Active, S::Active, S::Active, S::Active, S::Active};
    const std::vector<std::uint8_t> ones(7, 1);
    ASSERT_EQ(testing::naive_window_states(ones, 5, 3), expected);
    EXPECT_EQ(run_fsm(series(ones), 5, 3).states, expected);
}

TEST(RunFsmTest, ShortBurstBelowThresholdStaysIdle) {
    const std::vector<std::uint8_t> s = {1, 1, 0, 0, 0, 0, 0};
    ASSERT_EQ(testing::naive_window_states(s, 5, 3), std::vector<S>(7, S::Idle));
    EXPECT_EQ(run_fsm(series(s), 5, 3).states, std::vector<S>(7, S::Idle));
}

TEST(RunFsmTest, RejectsInconsistentParameters) {
    EXPECT_THROW(run_fsm(series({1, 0}), 3, 4), ValidationError);
    EXPECT_THROW(run_fsm(series({1, 0}), 0, 0), ValidationError);
    EXPECT_THROW(run_fsm(series({1, 0}), 3, 0), ValidationError);
}

TEST(RunFsmTest, CarriesParametersAndLength) {
    const auto out = run_fsm({HandSide::Right, {1, 1, 1}}, 4, 2);
    EXPECT_EQ(out.hand, HandSide::Right);
    EXPECT_EQ(out.window_len, 4);
    EXPECT_EQ(out.threshold, 2);
    EXPECT_EQ(out.states.size(), 3u);
    EXPECT_TRUE(run_fsm(series({}), 5, 3).states.empty());
}

TEST(RunFsmTest, StrictComparisonNeedsOneMore) {
    const std::vector<std::uint8_t> s = {1, 1, 1, 0, 1, 1, 1, 1};
    const auto strict = run_fsm(series(s), 5, 3, WindowComparison::GreaterThan);
    for (std::size_t t = 0; t < s.size(); ++t) {
        int sum = 0;
        for (std::size_t u = (t >= 4 ? t - 4 : 0); u <= t; ++u) {
            sum += s[u];
        }
        EXPECT_EQ(strict.states[t] == S::Active, sum > 3) << t;
    }
}

TEST(RunFsmProperty, MatchesNaiveRecomputation) {
    std::mt19937 rng(2024);
    std::uniform_int_distribution<std::size_t> len(1, 200);
    std::uniform_real_distribution<double> density(0.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        const auto s = random_scores(rng, len(rng), density(rng));
        for (int n = 1; n <= 10; ++n) {
            for (int thr = 1; thr <= n; ++thr) {
                ASSERT_EQ(run_fsm(series(s), n, thr).states, testing::naive_window_states(s, n, thr));
            }
        }
    }
}

TEST(RunFsmProperty, RaisingAScoreNeverDeactivatesAFrame) {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 300; ++trial) {
        auto s = random_scores(rng, 80, 0.4);
        const int n = 1 + trial % 10;
        const int thr = 1 + trial % n;
        const auto before = run_fsm(series(s), n, thr).states;
        std::vector<std::size_t> zeros;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == 0) {
                zeros.push_back(i);
            }
        }
        if (zeros.empty()) {
            continue;
        }
        s[zeros[rng() % zeros.size()]] = 1;
        const auto after = run_fsm(series(s), n, thr).states;
        for (std::size_t t = 0; t < s.size(); ++t) {
            EXPECT_FALSE(before[t] == S::Active && after[t] == S::Idle);
        }
    }
}

TEST(RunFsmProperty, FullThresholdNeedsAFullWindowOfOnes) {
    std::mt19937 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        const auto s = random_scores(rng, 100, 0.8);
        const int n = 1 + trial % 10;
        const auto out = run_fsm(series(s), n, n).states;
        for (std::size_t t = 0; t < s.size(); ++t) {
            bool all_ones = t + 1 >= static_cast<std::size_t>(n);
            for (std::size_t u = t + 1 - std::min<std::size_t>(t + 1, n); u <= t; ++u) {
                all_ones = all_ones && s[u] == 1;
            }
            EXPECT_EQ(out[t] == S::Active, all_ones);
        }
    }
}

TEST(RunFsmProperty, StateChangesExactlyWhereWindowSumCrossesThreshold) {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const auto s = random_scores(rng, 120, 0.5);
        const int n = 2 + trial % 9;
        const int thr = 1 + trial % n;
        const auto out = run_fsm(series(s), n, thr).states;
        int prev_sum = 0;
        for (std::size_t t = 0; t < s.size(); ++t) {
            int sum = 0;
            for (std::size_t u = t + 1 - std::min<std::size_t>(t + 1, n); u <= t; ++u) {
                sum += s[u];
            }
            const S prev = t == 0 ? S::Idle : out[t - 1];
            if (prev == S::Idle && out[t] == S::Active) {
                // Sums move by at most one per frame, so activation lands on sum == thr.
                EXPECT_EQ(sum, thr);
                EXPECT_EQ(prev_sum, thr - 1);
            }
            if (prev == S::Active && out[t] == S::Idle) {
                EXPECT_EQ(sum, thr - 1);
            }
            prev_sum = sum;
        }
    }
}

}  // namespace
}  // namespace hoiseg
