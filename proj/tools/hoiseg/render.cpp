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

#include "render.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "hoiseg/errors.hpp"

namespace hoiseg::cli {

namespace {

constexpr int kMarginLeft = 150;
constexpr int kMarginRight = 24;
constexpr int kMarginTop = 40;
constexpr int kTrackHeight = 24;
constexpr int kTrackGap = 12;
constexpr int kAxisHeight = 64;

std::string_view color_of(SourceHand h) {
    switch (h) {
        case SourceHand::Left:
            return "#4e79a7";
        case SourceHand::Right:
            return "#f28e2b";
        case SourceHand::Both:
            break;
    }
    return "#59a14f";
}

char glyph_of(SourceHand h) {
    switch (h) {
        case SourceHand::Left:
            return 'L';
        case SourceHand::Right:
            return 'R';
        case SourceHand::Both:
            break;
    }
    return 'B';
}

std::string xml_escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&':
                out += "&amp;";
                break;
            case '<':
                out += "&lt;";
                break;
            case '>':
                out += "&gt;";
                break;
            case '"':
                out += "&quot;";
                break;
            default:
                out += c;
        }
    }
    return out;
}

// Smallest of 1, 2, 5 x 10^k that splits `range` into at most `target` ticks.
double nice_step(double range, int target) {
    const double raw = range / target;
    double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (m * mag >= raw) {
            return m * mag;
        }
    }
    return 10.0 * mag;
}

}  // namespace

std::int64_t timeline_frames(const std::vector<TimelineTrack>& tracks) {
    std::int64_t frames = 0;
    for (const auto& t : tracks) {
        if (t.steps.frame_count) {
            frames = std::max(frames, *t.steps.frame_count);
        }
        if (!t.steps.segments.empty()) {
            frames = std::max(frames, t.steps.segments.back().end_frame + 1);
        }
    }
    return std::max<std::int64_t>(frames, 1);
}

std::vector<std::string> timeline_mismatches(const std::vector<TimelineTrack>& tracks) {
    std::vector<std::string> notes;
    if (tracks.empty()) {
        return notes;
    }
    const auto& first = tracks.front();
    for (std::size_t i = 1; i < tracks.size(); ++i) {
        const auto& t = tracks[i];
        if (t.steps.video_id != first.steps.video_id) {
            notes.push_back(fmt::format("'{}' is video '{}' but '{}' is video '{}'", t.name, t.steps.video_id,
                                        first.name, first.steps.video_id));
        }
        if (t.steps.fps != first.steps.fps) {
            notes.push_back(fmt::format("'{}' runs at {} fps but '{}' at {} fps", t.name, t.steps.fps, first.name,
                                        first.steps.fps));
        }
        if (t.steps.frame_count && first.steps.frame_count && *t.steps.frame_count != *first.steps.frame_count) {
            notes.push_back(fmt::format("'{}' has {} frames but '{}' has {}", t.name, *t.steps.frame_count,
                                        first.name, *first.steps.frame_count));
        }
    }
    return notes;
}

std::string render_timeline_svg(const std::vector<TimelineTrack>& tracks, int width) {
    if (tracks.empty()) {
        throw ValidationError("nothing to render");
    }
    if (width < kMarginLeft + kMarginRight + 100) {
        throw ValidationError("timeline width too small");
    }
    const std::int64_t frames = timeline_frames(tracks);
    const double fps = tracks.front().steps.fps;
    const double plot_w = width - kMarginLeft - kMarginRight;
    const int tracks_h = static_cast<int>(tracks.size()) * (kTrackHeight + kTrackGap);
    const int height = kMarginTop + tracks_h + kAxisHeight;
    const auto x_of = [&](double frame) { return kMarginLeft + frame * plot_w / static_cast<double>(frames); };

    std::string svg;
    svg += fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
        "font-family=\"sans-serif\" font-size=\"11\">\n",
        width, height);
    svg += fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n", width, height);
    svg += fmt::format("<text x=\"{}\" y=\"18\" font-size=\"13\">{}: {} frames at {} fps</text>\n", kMarginLeft,
                       xml_escape(tracks.front().steps.video_id), frames, fps);

    int legend_x = width - kMarginRight - 210;
    for (SourceHand h : {SourceHand::Left, SourceHand::Right, SourceHand::Both}) {
        svg += fmt::format("<rect x=\"{}\" y=\"9\" width=\"12\" height=\"12\" fill=\"{}\"/>", legend_x, color_of(h));
        svg += fmt::format("<text x=\"{}\" y=\"19\">{}</text>\n", legend_x + 16, to_string(h));
        legend_x += 70;
    }

    for (std::size_t i = 0; i < tracks.size(); ++i) {
        const int y = kMarginTop + static_cast<int>(i) * (kTrackHeight + kTrackGap);
        svg += "<g>\n";
        svg += fmt::format("<text x=\"8\" y=\"{}\">{}</text>\n", y + kTrackHeight / 2 + 4, xml_escape(tracks[i].name));
        svg += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{:.2f}\" height=\"{}\" fill=\"#eeeeee\"/>\n", kMarginLeft,
                           y, plot_w, kTrackHeight);
        for (const auto& s : tracks[i].steps.segments) {
            const double x0 = x_of(static_cast<double>(s.start_frame));
            const double x1 = x_of(static_cast<double>(s.end_frame + 1));
            std::string title = fmt::format("[{}, {}] {}", s.start_frame, s.end_frame, to_string(s.source_hand));
            if (s.label) {
                title += " " + *s.label;
            }
            svg += fmt::format(
                "<rect x=\"{:.2f}\" y=\"{}\" width=\"{:.2f}\" height=\"{}\" fill=\"{}\" stroke=\"#ffffff\" "
                "stroke-width=\"0.5\"><title>{}</title></rect>\n",
                x0, y, x1 - x0, kTrackHeight, color_of(s.source_hand), xml_escape(title));
        }
        svg += "</g>\n";
    }

    const int axis_y = kMarginTop + tracks_h;
    svg += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{:.2f}\" y2=\"{}\" stroke=\"#333333\"/>\n", kMarginLeft, axis_y,
                       kMarginLeft + plot_w, axis_y);
    svg += fmt::format("<text x=\"8\" y=\"{}\">frame</text>\n", axis_y + 16);
    const auto frame_step = static_cast<std::int64_t>(std::max(1.0, nice_step(static_cast<double>(frames), 10)));
    for (std::int64_t f = 0; f <= frames; f += frame_step) {
        const double x = x_of(static_cast<double>(f));
        svg += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1}\" x2=\"{0:.2f}\" y2=\"{2}\" stroke=\"#333333\"/>", x, axis_y,
                           axis_y + 4);
        svg += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", x, axis_y + 16, f);
    }
    if (fps > 0.0) {
        const int sec_y = axis_y + 34;
        const double seconds = static_cast<double>(frames) / fps;
        svg += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{:.2f}\" y2=\"{}\" stroke=\"#333333\"/>\n", kMarginLeft,
                           sec_y, kMarginLeft + plot_w, sec_y);
        svg += fmt::format("<text x=\"8\" y=\"{}\">seconds</text>\n", sec_y + 16);
        const double sec_step = nice_step(seconds, 10);
        for (int k = 0; k * sec_step <= seconds + 1e-9; ++k) {
            const double s = k * sec_step;
            const double x = x_of(s * fps);
            svg += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1}\" x2=\"{0:.2f}\" y2=\"{2}\" stroke=\"#333333\"/>", x,
                               sec_y, sec_y + 4);
            svg += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{:g}</text>\n", x, sec_y + 16, s);
        }
    }
    svg += "</svg>\n";
    return svg;
}

std::string render_timeline_ascii(const std::vector<TimelineTrack>& tracks, int columns) {
    if (tracks.empty()) {
        throw ValidationError("nothing to render");
    }
    const std::int64_t frames = timeline_frames(tracks);
    const std::int64_t cols = std::clamp<std::int64_t>(columns, 1, frames);
    std::size_t name_w = 5;
    for (const auto& t : tracks) {
        name_w = std::max(name_w, t.name.size());
    }

    std::string out;
    for (const auto& t : tracks) {
        std::string row(static_cast<std::size_t>(cols), '.');
        for (std::int64_t c = 0; c < cols; ++c) {
            const std::int64_t lo = c * frames / cols;
            const std::int64_t hi = (c + 1) * frames / cols - 1;
            std::int64_t best = 0;
            for (const auto& s : t.steps.segments) {
                const std::int64_t shared = overlap_frames({lo, hi}, s.interval());
                if (shared > best) {
                    best = shared;
                    row[static_cast<std::size_t>(c)] = glyph_of(s.source_hand);
                }
            }
        }
        out += fmt::format("{:<{}} |{}|\n", t.name, name_w, row);
    }
    const std::string last = std::to_string(frames - 1);
    const std::int64_t pad = std::max<std::int64_t>(1, cols + 1 - static_cast<std::int64_t>(last.size()));
    out += fmt::format("{:<{}} 0{:>{}}\n", "frame", name_w, last, pad);
    out += "L left  R right  B both  . no step\n";
    return out;
}

std::string roc_curve_csv(const std::vector<RocPoint>& curve) {
    std::string out = "threshold,tpr,fpr,youden\n";
    for (const auto& p : curve) {
        out += fmt::format("{},{},{},{}\n", p.threshold, p.tpr, p.fpr, p.youden());
    }
    return out;
}

std::string render_roc_svg(const std::vector<RocPoint>& curve, double selected_threshold, double auc) {
    constexpr int kSize = 420;
    constexpr int kPad = 48;
    constexpr double kPlot = kSize - 2 * kPad;
    const auto px = [](double fpr) { return kPad + fpr * kPlot; };
    const auto py = [](double tpr) { return kPad + (1.0 - tpr) * kPlot; };

    std::set<std::pair<double, double>> points = {{0.0, 0.0}, {1.0, 1.0}};
    for (const auto& p : curve) {
        points.insert({p.fpr, p.tpr});
    }

    std::string svg = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" viewBox=\"0 0 {0} {0}\" "
        "font-family=\"sans-serif\" font-size=\"11\">\n",
        kSize);
    svg += fmt::format("<rect width=\"{0}\" height=\"{0}\" fill=\"#ffffff\"/>\n", kSize);
    svg += fmt::format("<rect x=\"{0}\" y=\"{0}\" width=\"{1:.2f}\" height=\"{1:.2f}\" fill=\"none\" stroke=\"#333333\"/>\n",
                       kPad, kPlot);
    svg += fmt::format(
        "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#999999\" stroke-dasharray=\"4 4\"/>\n",
        px(0), py(0), px(1), py(1));
    for (int i = 0; i <= 10; i += 2) {
        const double v = i / 10.0;
        svg += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{:g}</text>", px(v), kSize - kPad + 16, v);
        svg += fmt::format("<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">{:g}</text>\n", kPad - 6, py(v) + 4, v);
    }
    svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">false positive rate</text>\n", kSize / 2,
                       kSize - 10);
    svg += fmt::format(
        "<text x=\"14\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {0})\">true positive rate</text>\n",
        kSize / 2);

    std::string pts;
    for (const auto& [fpr, tpr] : points) {
        pts += fmt::format("{}{:.2f},{:.2f}", pts.empty() ? "" : " ", px(fpr), py(tpr));
    }
    svg += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"#4e79a7\" stroke-width=\"2\"/>\n", pts);

    for (const auto& p : curve) {
        if (p.threshold == selected_threshold) {
            svg += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"4\" fill=\"#e15759\"/>\n", px(p.fpr), py(p.tpr));
        }
    }
    svg += fmt::format("<text x=\"{}\" y=\"28\" font-size=\"13\">AUC {:.4f}, threshold {:g}</text>\n", kPad, auc,
                       selected_threshold);
    svg += "</svg>\n";
    return svg;
}

}  // namespace hoiseg::cli
