#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "splitperf/dataset.hpp"
#include "splitperf/depmodel.hpp"

namespace splitperf::gbt {

struct TrainConfig {
    int n_trees = 300;
    int max_depth = 6;
    double learning_rate = 0.1;
    int min_samples_leaf = 2;
    double subsample_fraction = 1.0;
    std::uint64_t seed = 0;
};

void validate(const TrainConfig& cfg);

// Axis-aligned split node; feature < 0 marks a leaf. Rows with a missing
// (NaN) feature value follow default_left, learned during training.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    bool default_left = true;
    int left = -1;
    int right = -1;
    double leaf_value = 0.0;

    bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
    std::vector<TreeNode> nodes;
    double predict(std::span<const double> features) const;
};

// Where the training rows came from, so evaluation can rebuild the exact
// train/test partition.
struct SplitProvenance {
    std::uint64_t split_seed = 0;
    double train_fraction = 0.8;
};

struct GbtModel {
    std::vector<std::string> feature_names;
    std::vector<RegressionTree> trees;
    double learning_rate = 0.1;
    double base_score = 0.0;
    std::vector<double> feature_importances;   // gain share per feature, sums to 1
    TrainConfig train_config;
    double training_max_abs_error = 0.0;
    double training_rmse = 0.0;
    std::optional<SplitProvenance> provenance;

    // base_score + learning_rate * sum of leaf values.
    double predict_raw(std::span<const double> features) const;
};

using FeatureMatrix = std::vector<std::vector<double>>;

// Squared-error gradient boosting with exact greedy splits. Deterministic
// for a given config (ties resolve to the lowest feature index, then the
// lowest threshold). Targets must lie in [0, 1]; needs at least 5 rows.
GbtModel train(const FeatureMatrix& x, const std::vector<double>& y, const TrainConfig& cfg,
               const std::vector<std::string>& feature_names);

// Raw prediction clamped to the ratio's [0, 1] range.
double predict_ratio(const GbtModel& model, std::span<const double> features);

// Predicted ratio pushed through the analytical cycle accounting.
double predict_gflops(const GbtModel& model, const kernel::KernelSpec& spec,
                      const kernel::SplitConfig& cfg, const hw::HardwareDescriptor& desc);

// 100 * mean(|pred - truth| / truth); every truth entry must be > 0.
double mape(std::span<const double> pred, std::span<const double> truth);

struct SearchSpace {
    std::pair<int, int> n_trees{100, 800};
    std::pair<int, int> max_depth{2, 8};
    std::pair<double, double> learning_rate{0.02, 0.3};   // sampled log-uniform
    std::pair<double, double> subsample_fraction{0.6, 1.0};
    std::pair<int, int> min_samples_leaf{2, 2};
};

struct SearchCandidate {
    TrainConfig config;
    double cv_mape = 0.0;
};

struct SearchResult {
    TrainConfig best;
    double best_cv_mape = 0.0;
    std::vector<SearchCandidate> evaluated;
};

// Uniform sampling from the space, scored by k-fold cross-validated MAPE on
// the ratio target (denominators floored at 1e-6 since ratios approach 0).
SearchResult random_search(const FeatureMatrix& x, const std::vector<double>& y,
                           const SearchSpace& space, int n_candidates, int k_folds,
                           std::uint64_t seed);

void save_model(const GbtModel& model, const std::filesystem::path& path);
GbtModel load_model(const std::filesystem::path& path);
std::string model_to_json(const GbtModel& model);
GbtModel model_from_json(const std::string& text, const std::string& origin);

}  // namespace splitperf::gbt
