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

#include "hoiseg/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "hoiseg/errors.hpp"

namespace hoiseg {

namespace {

using json = nlohmann::json;

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        out.push_back(trim(field));
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

}  // namespace

ConstantSimilarityProvider::ConstantSimilarityProvider(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw ValidationError("constant similarity must lie in [0,1]");
    }
}

double ConstantSimilarityProvider::query(std::string_view crop_a, std::string_view crop_b) const {
    return crop_a == crop_b ? 1.0 : value_;
}

void SimilarityMatrix::validate() const {
    const std::size_t n = crop_refs.size();
    if (matrix.size() != n) {
        throw ValidationError("similarity matrix has " + std::to_string(matrix.size()) + " rows for " +
                              std::to_string(n) + " crop_refs");
    }
    std::vector<std::string> sorted = crop_refs;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw ValidationError("similarity matrix lists a crop_ref twice");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (matrix[i].size() != n) {
            throw ValidationError("similarity matrix row " + std::to_string(i) + " has wrong length");
        }
        for (std::size_t j = 0; j < n; ++j) {
            const double v = matrix[i][j];
            if (!(v >= 0.0 && v <= 1.0)) {
                throw ValidationError("similarity matrix entry outside [0,1]");
            }
            if (std::abs(v - matrix[j][i]) > 1e-6) {
                throw ValidationError("similarity matrix is not symmetric");
            }
        }
        if (std::abs(matrix[i][i] - 1.0) > 1e-6) {
            throw ValidationError("similarity matrix diagonal must be 1");
        }
    }
}

SimilarityMatrix parse_similarity_matrix(std::istream& in) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed similarity matrix JSON: ") + e.what());
    }
    SimilarityMatrix m;
    try {
        m.crop_refs = doc.at("crop_refs").get<std::vector<std::string>>();
        m.matrix = doc.at("matrix").get<std::vector<std::vector<double>>>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("similarity matrix needs 'crop_refs' and 'matrix': ") + e.what());
    }
    m.validate();
    return m;
}

SimilarityMatrix load_similarity_matrix(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open similarity matrix " + path.string());
    }
    return parse_similarity_matrix(in);
}

void write_similarity_matrix(const SimilarityMatrix& m, std::ostream& out) {
    nlohmann::ordered_json doc;
    doc["crop_refs"] = m.crop_refs;
    doc["matrix"] = m.matrix;
    out << doc.dump() << '\n';
}

MatrixSimilarityProvider::MatrixSimilarityProvider(SimilarityMatrix matrix) : matrix_(std::move(matrix)) {
    matrix_.validate();
    for (std::size_t i = 0; i < matrix_.crop_refs.size(); ++i) {
        index_.emplace(matrix_.crop_refs[i], i);
    }
}

std::size_t MatrixSimilarityProvider::index_of(std::string_view ref) const {
    auto it = index_.find(std::string(ref));
    if (it == index_.end()) {
        throw UnknownCropRef(std::string(ref));
    }
    return it->second;
}

double MatrixSimilarityProvider::query(std::string_view crop_a, std::string_view crop_b) const {
    const std::size_t i = index_of(crop_a);
    const std::size_t j = index_of(crop_b);
    if (i == j) {
        return 1.0;
    }
    // Average the two triangles so tiny asymmetries cannot break symmetry.
    return 0.5 * (matrix_.matrix[i][j] + matrix_.matrix[j][i]);
}

std::unique_ptr<SimilarityProvider> matrix_provider(SimilarityMatrix matrix) {
    return std::make_unique<MatrixSimilarityProvider>(std::move(matrix));
}

double histogram_intersection(const ColorHistogram& a, const ColorHistogram& b) {
    if (a.counts.size() != b.counts.size()) {
        throw ValidationError("histograms with different bin layouts");
    }
    if (a.total == 0 || b.total == 0) {
        return 0.0;
    }
    // sum_k min(a_k / A, b_k / B) == sum_k min(a_k * B, b_k * A) / (A * B), exact
    // in integers while A * B fits; crops are far below that size.
    if (a.total > std::numeric_limits<std::uint64_t>::max() / b.total) {
        double acc = 0.0;
        for (std::size_t k = 0; k < a.counts.size(); ++k) {
            acc += std::min(static_cast<double>(a.counts[k]) / static_cast<double>(a.total),
                            static_cast<double>(b.counts[k]) / static_cast<double>(b.total));
        }
        return std::clamp(acc, 0.0, 1.0);
    }
    std::uint64_t acc = 0;
    for (std::size_t k = 0; k < a.counts.size(); ++k) {
        acc += std::min(a.counts[k] * b.total, b.counts[k] * a.total);
    }
    const std::uint64_t denom = a.total * b.total;
    if (acc == denom) {
        return 1.0;
    }
    return static_cast<double>(acc) / static_cast<double>(denom);
}

HistogramSimilarityProvider::HistogramSimilarityProvider(std::filesystem::path crop_root, int bins)
    : root_(std::move(crop_root)), bins_(bins) {
    if (bins_ < 2 || bins_ > 256) {
        throw ValidationError("histogram bins must lie in [2, 256]");
    }
}

ColorHistogram HistogramSimilarityProvider::compute_histogram(const std::uint8_t* bgr, std::size_t pixel_count,
                                                              int bins) {
    ColorHistogram h;
    h.bins = bins;
    const auto nb = static_cast<std::size_t>(bins);
    h.counts.assign(nb * nb * nb, 0);
    for (std::size_t p = 0; p < pixel_count; ++p) {
        const std::uint8_t* px = bgr + 3 * p;
        const std::size_t b = px[0] * nb / 256;
        const std::size_t g = px[1] * nb / 256;
        const std::size_t r = px[2] * nb / 256;
        ++h.counts[(r * nb + g) * nb + b];
    }
    h.total = pixel_count;
    return h;
}

std::shared_ptr<const ColorHistogram> HistogramSimilarityProvider::histogram_for(std::string_view ref) const {
    const std::string key(ref);
    {
        std::lock_guard lock(mutex_);
        if (auto it = cache_.find(key); it != cache_.end()) {
            return it->second;
        }
    }
    const std::filesystem::path path = root_ / key;
    cv::Mat img = cv::imread(path.string(), cv::IMREAD_COLOR);
    if (img.empty()) {
        throw IoError("cannot read or decode crop image " + path.string());
    }
    if (!img.isContinuous()) {
        img = img.clone();
    }
    auto hist = std::make_shared<const ColorHistogram>(
        compute_histogram(img.ptr<std::uint8_t>(0), img.total(), bins_));

    std::lock_guard lock(mutex_);
    // A concurrent caller may have filled the slot first; both values are identical.
    auto [it, inserted] = cache_.emplace(key, std::move(hist));
    return it->second;
}

double HistogramSimilarityProvider::query(std::string_view crop_a, std::string_view crop_b) const {
    if (crop_a == crop_b) {
        return 1.0;
    }
    return histogram_intersection(*histogram_for(crop_a), *histogram_for(crop_b));
}

std::unique_ptr<SimilarityProvider> histogram_provider(std::filesystem::path crop_root, int bins) {
    return std::make_unique<HistogramSimilarityProvider>(std::move(crop_root), bins);
}

std::vector<LabeledPair> parse_labeled_pairs(std::istream& in) {
    std::vector<LabeledPair> pairs;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split_csv_line(line);
        if (!header_seen) {
            header_seen = true;
            if (fields.size() != 3 || fields[0] != "crop_a" || fields[1] != "crop_b" || fields[2] != "same") {
                throw ValidationError("labeled pairs CSV must start with header 'crop_a,crop_b,same'");
            }
            continue;
        }
        if (fields.size() != 3 || fields[0].empty() || fields[1].empty() || (fields[2] != "0" && fields[2] != "1")) {
            throw ValidationError("labeled pairs CSV line " + std::to_string(line_no) +
                                  ": expected crop_a,crop_b,0|1");
        }
        pairs.push_back({fields[0], fields[1], fields[2] == "1"});
    }
    if (pairs.empty()) {
        throw ValidationError("labeled pairs CSV has no pairs");
    }
    return pairs;
}

std::vector<LabeledPair> load_labeled_pairs(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open labeled pairs file " + path.string());
    }
    return parse_labeled_pairs(in);
}

std::vector<double> default_threshold_grid() {
    std::vector<double> grid;
    grid.reserve(101);
    for (int i = 0; i <= 100; ++i) {
        grid.push_back(i / 100.0);
    }
    return grid;
}

std::vector<RocPoint> roc_curve(const SimilarityProvider& provider, const std::vector<LabeledPair>& pairs,
                                std::vector<double> thresholds) {
    std::vector<double> pos;
    std::vector<double> neg;
    for (const auto& p : pairs) {
        (p.same_object ? pos : neg).push_back(provider.query(p.crop_a, p.crop_b));
    }
    if (pos.empty() || neg.empty()) {
        throw ValidationError("ROC analysis needs at least one positive and one negative pair");
    }
    std::sort(thresholds.begin(), thresholds.end());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    std::vector<RocPoint> curve;
    curve.reserve(thresholds.size());
    for (double theta : thresholds) {
        const auto tp = std::count_if(pos.begin(), pos.end(), [&](double s) { return s >= theta; });
        const auto fp = std::count_if(neg.begin(), neg.end(), [&](double s) { return s >= theta; });
        curve.push_back({theta, static_cast<double>(tp) / static_cast<double>(pos.size()),
                         static_cast<double>(fp) / static_cast<double>(neg.size())});
    }
    return curve;
}

double select_threshold_roc(const std::vector<RocPoint>& curve) {
    if (curve.empty()) {
        throw ValidationError("empty ROC curve");
    }
    const RocPoint* best = &curve.front();
    for (const auto& p : curve) {
        const double j = p.youden();
        if (j > best->youden() || (j == best->youden() && p.threshold > best->threshold)) {
            best = &p;
        }
    }
    return best->threshold;
}

double roc_auc(const SimilarityProvider& provider, const std::vector<LabeledPair>& pairs) {
    std::vector<double> pos;
    std::vector<double> neg;
    for (const auto& p : pairs) {
        (p.same_object ? pos : neg).push_back(provider.query(p.crop_a, p.crop_b));
    }
    if (pos.empty() || neg.empty()) {
        throw ValidationError("AUC needs at least one positive and one negative pair");
    }
    std::sort(neg.begin(), neg.end());
    double wins = 0.0;
    for (double s : pos) {
        const auto below = std::lower_bound(neg.begin(), neg.end(), s) - neg.begin();
        const auto equal = std::upper_bound(neg.begin(), neg.end(), s) - neg.begin() - below;
        wins += static_cast<double>(below) + 0.5 * static_cast<double>(equal);
    }
    return wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

}  // namespace hoiseg
