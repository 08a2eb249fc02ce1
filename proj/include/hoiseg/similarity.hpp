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

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hoiseg {

/// Pairwise similarity between two active-object crops, in [0, 1].
///
/// Implementations must be symmetric, return 1 for a crop compared with
/// itself, be deterministic, and tolerate concurrent queries.
class SimilarityProvider {
public:
    virtual ~SimilarityProvider() = default;
    virtual double query(std::string_view crop_a, std::string_view crop_b) const = 0;
};

/// Returns `value` for every pair of distinct refs.
class ConstantSimilarityProvider final : public SimilarityProvider {
public:
    explicit ConstantSimilarityProvider(double value);
    double query(std::string_view crop_a, std::string_view crop_b) const override;

private:
    double value_;
};

/// Dense precomputed similarities, e.g. exported from a learned model.
struct SimilarityMatrix {
    std::vector<std::string> crop_refs;
    std::vector<std::vector<double>> matrix;

    /// Throws ValidationError on bad dimensions, duplicate refs, values
    /// outside [0,1], asymmetry beyond 1e-6 or a non-unit diagonal.
    void validate() const;
};

SimilarityMatrix parse_similarity_matrix(std::istream& in);
SimilarityMatrix load_similarity_matrix(const std::filesystem::path& path);
void write_similarity_matrix(const SimilarityMatrix& m, std::ostream& out);

class MatrixSimilarityProvider final : public SimilarityProvider {
public:
    explicit MatrixSimilarityProvider(SimilarityMatrix matrix);

    /// Throws UnknownCropRef for refs absent from the matrix.
    double query(std::string_view crop_a, std::string_view crop_b) const override;

private:
    std::size_t index_of(std::string_view ref) const;

    SimilarityMatrix matrix_;
    std::unordered_map<std::string, std::size_t> index_;
};

std::unique_ptr<SimilarityProvider> matrix_provider(SimilarityMatrix matrix);

inline constexpr int kDefaultHistogramBins = 8;

/// Joint RGB colour histogram of one crop, `bins` levels per channel.
struct ColorHistogram {
    int bins = kDefaultHistogramBins;
    std::vector<std::uint64_t> counts;  // bins^3 cells
    std::uint64_t total = 0;
};

/// Histogram intersection of two normalised histograms, computed exactly in
/// integer arithmetic. Result lies in [0,1].
double histogram_intersection(const ColorHistogram& a, const ColorHistogram& b);

/// Baseline provider comparing colour histograms of crop images stored under
/// a root directory (crop_ref is a path relative to the root). Histograms are
/// computed once per ref and cached.
class HistogramSimilarityProvider final : public SimilarityProvider {
public:
    HistogramSimilarityProvider(std::filesystem::path crop_root, int bins = kDefaultHistogramBins);

    /// Throws IoError when a crop cannot be read or decoded.
    double query(std::string_view crop_a, std::string_view crop_b) const override;

    /// Histogram of a decoded 8-bit, 3-channel BGR pixel buffer.
    static ColorHistogram compute_histogram(const std::uint8_t* bgr, std::size_t pixel_count, int bins);

private:
    std::shared_ptr<const ColorHistogram> histogram_for(std::string_view ref) const;

    std::filesystem::path root_;
    int bins_;
    mutable std::mutex mutex_;
    mutable std::unordered_map<std::string, std::shared_ptr<const ColorHistogram>> cache_;
};

std::unique_ptr<SimilarityProvider> histogram_provider(std::filesystem::path crop_root,
                                                       int bins = kDefaultHistogramBins);

struct LabeledPair {
    std::string crop_a;
    std::string crop_b;
    bool same_object = false;
};

/// CSV with header `crop_a,crop_b,same` and same in {0,1}.
std::vector<LabeledPair> parse_labeled_pairs(std::istream& in);
std::vector<LabeledPair> load_labeled_pairs(const std::filesystem::path& path);

struct RocPoint {
    double threshold = 0.0;
    double tpr = 0.0;
    double fpr = 0.0;

    double youden() const noexcept { return tpr - fpr; }
};

/// 0, 0.01, ..., 1.0.
std::vector<double> default_threshold_grid();

/// A pair is predicted "same" iff similarity >= threshold. Points come back
/// in ascending threshold order. Throws ValidationError unless `pairs` has
/// both classes.
std::vector<RocPoint> roc_curve(const SimilarityProvider& provider, const std::vector<LabeledPair>& pairs,
                                std::vector<double> thresholds = default_threshold_grid());

/// Threshold with the largest Youden J = TPR - FPR, larger threshold on ties.
double select_threshold_roc(const std::vector<RocPoint>& curve);

/// Area under the ROC curve as the Mann-Whitney statistic (ties count half).
double roc_auc(const SimilarityProvider& provider, const std::vector<LabeledPair>& pairs);

}  // namespace hoiseg
