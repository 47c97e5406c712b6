#include "splitperf/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "splitperf/rng.hpp"

namespace splitperf::gbt {

using json = nlohmann::ordered_json;

void validate(const TrainConfig& cfg) {
    auto fail = [](const std::string& what) {
        throw std::invalid_argument("train config: " + what);
    };
    if (cfg.n_trees < 1) fail("n_trees >= 1");
    if (cfg.max_depth < 1) fail("max_depth >= 1");
    if (!(cfg.learning_rate > 0.0 && cfg.learning_rate <= 1.0)) fail("learning_rate in (0, 1]");
    if (cfg.min_samples_leaf < 1) fail("min_samples_leaf >= 1");
    if (!(cfg.subsample_fraction > 0.0 && cfg.subsample_fraction <= 1.0))
        fail("subsample_fraction in (0, 1]");
}

double RegressionTree::predict(std::span<const double> features) const {
    int at = 0;
    while (!nodes[at].is_leaf()) {
        const TreeNode& node = nodes[at];
        double v = features[node.feature];
        bool left = std::isnan(v) ? node.default_left : (v < node.threshold);
        at = left ? node.left : node.right;
    }
    return nodes[at].leaf_value;
}

double GbtModel::predict_raw(std::span<const double> features) const {
    if (features.size() != feature_names.size())
        throw std::invalid_argument("predict: feature vector has " +
                                    std::to_string(features.size()) + " entries, model expects " +
                                    std::to_string(feature_names.size()));
    double sum = 0.0;
    for (const auto& tree : trees) sum += tree.predict(features);
    return base_score + learning_rate * sum;
}

namespace {

struct SplitChoice {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
    bool default_left = true;
};

// Pre-sorted column layout: for every feature, the node's rows with a value,
// in ascending value order (ties by row index), plus the rows whose value is
// missing. Sorting happens once per fit; descending the tree only stably
// partitions these arrays.
struct Columns {
    std::vector<std::vector<int>> order;
    std::vector<std::vector<int>> missing;
    long long count = 0;
};

struct TreeBuilder {
    const FeatureMatrix& x;
    const std::vector<double>& residual;
    const TrainConfig& cfg;
    std::vector<double>& importance_gain;
    RegressionTree tree;

    std::vector<int> mark;  // epoch per row: rows routed left this split
    int epoch = 0;

    TreeBuilder(const FeatureMatrix& x_, const std::vector<double>& residual_,
                const TrainConfig& cfg_, std::vector<double>& importance_gain_)
        : x(x_), residual(residual_), cfg(cfg_), importance_gain(importance_gain_) {
        mark.assign(x.size(), 0);
    }

    static double score(double sum, long long count) {
        return count > 0 ? sum * sum / static_cast<double>(count) : 0.0;
    }

    SplitChoice best_split(const Columns& node, double total_sum) {
        const double parent_score = score(total_sum, node.count);
        const int n_features = static_cast<int>(node.order.size());

        SplitChoice best;
        for (int f = 0; f < n_features; ++f) {
            const auto& order = node.order[f];
            const long long n_present = static_cast<long long>(order.size());
            if (n_present < 2) continue;
            const long long n_missing = node.count - n_present;
            double missing_sum = 0.0;
            for (int r : node.missing[f]) missing_sum += residual[r];

            double left_sum = 0.0;
            long long left_count = 0;
            for (long long i = 0; i + 1 < n_present; ++i) {
                left_sum += residual[order[i]];
                ++left_count;
                double value = x[order[i]][f];
                double next_value = x[order[i + 1]][f];
                if (value == next_value) continue;
                double threshold = value / 2.0 + next_value / 2.0;
                double right_sum = total_sum - missing_sum - left_sum;
                long long right_count = n_present - left_count;

                // Route missing rows to whichever side gains more.
                for (int side = 0; side < (n_missing > 0 ? 2 : 1); ++side) {
                    bool to_left = (side == 0);
                    double ls = left_sum + (to_left ? missing_sum : 0.0);
                    long long lc = left_count + (to_left ? n_missing : 0);
                    double rs = right_sum + (to_left ? 0.0 : missing_sum);
                    long long rc = right_count + (to_left ? 0 : n_missing);
                    if (lc < cfg.min_samples_leaf || rc < cfg.min_samples_leaf) continue;
                    double gain = score(ls, lc) + score(rs, rc) - parent_score;
                    if (gain > best.gain) best = {gain, f, threshold, to_left};
                }
            }
        }
        return best;
    }

    int build(Columns&& node, int depth) {
        double sum = 0.0;
        for (int r : node.order[0]) sum += residual[r];
        for (int r : node.missing[0]) sum += residual[r];

        int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({});
        tree.nodes.back().leaf_value = sum / static_cast<double>(node.count);
        if (depth >= cfg.max_depth || node.count < 2 * cfg.min_samples_leaf) return node_id;

        SplitChoice choice = best_split(node, sum);
        if (choice.feature < 0 || !(choice.gain > 0.0)) return node_id;
        importance_gain[choice.feature] += choice.gain;

        // Mark rows going left, then stably partition every column.
        ++epoch;
        long long left_count = 0;
        auto route = [&](int r) {
            double v = x[r][choice.feature];
            bool left = std::isnan(v) ? choice.default_left : (v < choice.threshold);
            if (left) {
                mark[r] = epoch;
                ++left_count;
            }
        };
        for (int r : node.order[choice.feature]) route(r);
        for (int r : node.missing[choice.feature]) route(r);

        const int n_features = static_cast<int>(node.order.size());
        Columns left, right;
        left.order.resize(n_features);
        left.missing.resize(n_features);
        right.order.resize(n_features);
        right.missing.resize(n_features);
        left.count = left_count;
        right.count = node.count - left_count;
        const int split_epoch = epoch;  // recursion reuses the scratch
        for (int f = 0; f < n_features; ++f) {
            for (int r : node.order[f])
                (mark[r] == split_epoch ? left.order[f] : right.order[f]).push_back(r);
            for (int r : node.missing[f])
                (mark[r] == split_epoch ? left.missing[f] : right.missing[f]).push_back(r);
        }
        node = Columns{};  // free before recursing

        int left_id = build(std::move(left), depth + 1);
        int right_id = build(std::move(right), depth + 1);
        TreeNode& out = tree.nodes[node_id];
        out.feature = choice.feature;
        out.threshold = choice.threshold;
        out.default_left = choice.default_left;
        out.left = left_id;
        out.right = right_id;
        out.leaf_value = 0.0;
        return node_id;
    }
};

}  // namespace

GbtModel train(const FeatureMatrix& x, const std::vector<double>& y, const TrainConfig& cfg,
               const std::vector<std::string>& feature_names) {
    validate(cfg);
    if (x.size() != y.size()) throw std::invalid_argument("train: |x| != |y|");
    if (x.size() < 5) throw std::invalid_argument("train: need at least 5 rows");
    for (const auto& row : x)
        if (row.size() != feature_names.size())
            throw std::invalid_argument("train: feature row arity mismatch");
    for (double t : y)
        if (!(t >= 0.0 && t <= 1.0))
            throw std::invalid_argument("train: targets must lie in [0, 1]; got " +
                                        std::to_string(t));

    const int n = static_cast<int>(x.size());
    const int n_features = static_cast<int>(feature_names.size());
    GbtModel model;
    model.feature_names = feature_names;
    model.learning_rate = cfg.learning_rate;
    model.train_config = cfg;
    model.base_score = std::accumulate(y.begin(), y.end(), 0.0) / n;
    model.feature_importances.assign(feature_names.size(), 0.0);

    std::vector<double> prediction(n, model.base_score);
    std::vector<double> residual(n, 0.0);
    std::vector<double> gain(feature_names.size(), 0.0);

    // One sort per feature for the whole fit; trees partition these arrays.
    Columns root;
    root.order.resize(n_features);
    root.missing.resize(n_features);
    root.count = n;
    for (int f = 0; f < n_features; ++f) {
        for (int r = 0; r < n; ++r)
            (std::isnan(x[r][f]) ? root.missing[f] : root.order[f]).push_back(r);
        std::stable_sort(root.order[f].begin(), root.order[f].end(),
                         [&](int a, int b) { return x[a][f] < x[b][f]; });
    }

    Rng subsample_rng = Rng::substream(cfg.seed, 0x5b5a3);
    std::vector<int> all_rows(n);
    std::iota(all_rows.begin(), all_rows.end(), 0);
    std::vector<char> sampled(n, 1);

    for (int t = 0; t < cfg.n_trees; ++t) {
        for (int i = 0; i < n; ++i) residual[i] = y[i] - prediction[i];

        Columns tree_root;
        if (cfg.subsample_fraction < 1.0) {
            std::vector<int> rows = all_rows;
            subsample_rng.shuffle(rows);
            size_t keep = std::max<size_t>(
                2 * cfg.min_samples_leaf,
                static_cast<size_t>(cfg.subsample_fraction * static_cast<double>(n)));
            keep = std::min(keep, rows.size());
            std::fill(sampled.begin(), sampled.end(), 0);
            for (size_t i = 0; i < keep; ++i) sampled[rows[i]] = 1;

            tree_root.order.resize(n_features);
            tree_root.missing.resize(n_features);
            tree_root.count = static_cast<long long>(keep);
            for (int f = 0; f < n_features; ++f) {
                for (int r : root.order[f])
                    if (sampled[r]) tree_root.order[f].push_back(r);
                for (int r : root.missing[f])
                    if (sampled[r]) tree_root.missing[f].push_back(r);
            }
        } else {
            tree_root = root;
        }

        TreeBuilder builder(x, residual, cfg, gain);
        builder.build(std::move(tree_root), 0);
        RegressionTree tree = std::move(builder.tree);

        bool dead_stump = tree.nodes.size() == 1 && tree.nodes[0].leaf_value == 0.0;
        if (!dead_stump) {
            for (int i = 0; i < n; ++i)
                prediction[i] += cfg.learning_rate * tree.predict(x[i]);
            model.trees.push_back(std::move(tree));
        }
        if (dead_stump && cfg.subsample_fraction >= 1.0) break;  // residuals exhausted
    }

    double total_gain = std::accumulate(gain.begin(), gain.end(), 0.0);
    if (total_gain > 0.0)
        for (size_t f = 0; f < gain.size(); ++f)
            model.feature_importances[f] = gain[f] / total_gain;

    double sq = 0.0, worst = 0.0;
    for (int i = 0; i < n; ++i) {
        double err = std::abs(prediction[i] - y[i]);
        worst = std::max(worst, err);
        sq += err * err;
    }
    model.training_max_abs_error = worst;
    model.training_rmse = std::sqrt(sq / n);
    return model;
}

double predict_ratio(const GbtModel& model, std::span<const double> features) {
    return std::clamp(model.predict_raw(features), 0.0, 1.0);
}

double predict_gflops(const GbtModel& model, const kernel::KernelSpec& spec,
                      const kernel::SplitConfig& cfg, const hw::HardwareDescriptor& desc) {
    std::vector<double> features = dataset::make_features(spec, cfg, desc);
    double ratio = predict_ratio(model, features);
    return depmodel::estimate_from_ratio(ratio, spec, desc).gflops_per_core;
}

double mape(std::span<const double> pred, std::span<const double> truth) {
    if (pred.size() != truth.size())
        throw std::invalid_argument("mape: prediction and truth sizes differ");
    if (pred.empty()) throw std::invalid_argument("mape: empty input");
    double sum = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
        if (!(truth[i] > 0.0))
            throw std::invalid_argument("mape: truth entries must be > 0");
        sum += std::abs(pred[i] - truth[i]) / truth[i];
    }
    return 100.0 * sum / static_cast<double>(pred.size());
}

SearchResult random_search(const FeatureMatrix& x, const std::vector<double>& y,
                           const SearchSpace& space, int n_candidates, int k_folds,
                           std::uint64_t seed) {
    if (n_candidates < 1) throw std::invalid_argument("random_search: n_candidates >= 1");
    if (k_folds < 2) throw std::invalid_argument("random_search: k_folds >= 2");
    const int n = static_cast<int>(x.size());
    if (n < k_folds * 2)
        throw std::invalid_argument("random_search: need at least 2 rows per fold, got " +
                                    std::to_string(n) + " rows for " + std::to_string(k_folds) +
                                    " folds");

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng fold_rng = Rng::substream(seed, 0xf01d5);
    fold_rng.shuffle(order);

    constexpr double kDenomFloor = 1e-6;
    std::vector<std::string> cv_names(x.empty() ? 0 : x[0].size());
    for (size_t f = 0; f < cv_names.size(); ++f) cv_names[f] = "f" + std::to_string(f);

    SearchResult result;
    double best_score = std::numeric_limits<double>::infinity();

    for (int c = 0; c < n_candidates; ++c) {
        Rng draw = Rng::substream(seed, 0xca9d1da7e + static_cast<std::uint64_t>(c));
        TrainConfig cfg;
        cfg.n_trees = static_cast<int>(draw.uniform_int(space.n_trees.first, space.n_trees.second));
        cfg.max_depth =
            static_cast<int>(draw.uniform_int(space.max_depth.first, space.max_depth.second));
        cfg.learning_rate = std::exp(draw.uniform(std::log(space.learning_rate.first),
                                                  std::log(space.learning_rate.second)));
        cfg.subsample_fraction =
            draw.uniform(space.subsample_fraction.first, space.subsample_fraction.second);
        cfg.min_samples_leaf = static_cast<int>(
            draw.uniform_int(space.min_samples_leaf.first, space.min_samples_leaf.second));
        cfg.seed = draw.next_u64();

        double abs_pct_sum = 0.0;
        long long abs_pct_count = 0;
        for (int fold = 0; fold < k_folds; ++fold) {
            FeatureMatrix train_x;
            std::vector<double> train_y;
            std::vector<int> val_rows;
            for (int i = 0; i < n; ++i) {
                if (i % k_folds == fold)
                    val_rows.push_back(order[i]);
                else {
                    train_x.push_back(x[order[i]]);
                    train_y.push_back(y[order[i]]);
                }
            }
            GbtModel model = train(train_x, train_y, cfg, cv_names);
            for (int r : val_rows) {
                double pred = predict_ratio(model, x[r]);
                abs_pct_sum += std::abs(pred - y[r]) / std::max(y[r], kDenomFloor);
                ++abs_pct_count;
            }
        }
        double score = 100.0 * abs_pct_sum / static_cast<double>(abs_pct_count);
        result.evaluated.push_back({cfg, score});
        if (score < best_score) {
            best_score = score;
            result.best = cfg;
            result.best_cv_mape = score;
        }
    }
    return result;
}

namespace {

json tree_to_json(const RegressionTree& tree) {
    json nodes = json::array();
    for (const auto& n : tree.nodes) {
        if (n.is_leaf())
            nodes.push_back({{"v", n.leaf_value}});
        else
            nodes.push_back({{"f", n.feature},
                             {"t", n.threshold},
                             {"dl", n.default_left},
                             {"l", n.left},
                             {"r", n.right}});
    }
    return json{{"nodes", nodes}};
}

RegressionTree tree_from_json(const json& j) {
    RegressionTree tree;
    for (const auto& n : j.at("nodes")) {
        TreeNode node;
        if (n.contains("f")) {
            node.feature = n.at("f").get<int>();
            node.threshold = n.at("t").get<double>();
            node.default_left = n.at("dl").get<bool>();
            node.left = n.at("l").get<int>();
            node.right = n.at("r").get<int>();
        } else {
            node.leaf_value = n.at("v").get<double>();
        }
        tree.nodes.push_back(node);
    }
    if (tree.nodes.empty()) throw std::runtime_error("model tree has no nodes");
    return tree;
}

}  // namespace

std::string model_to_json(const GbtModel& model) {
    json j;
    j["format_version"] = 1;
    j["kind"] = "splitperf-gbt";
    j["base_score"] = model.base_score;
    j["learning_rate"] = model.learning_rate;
    j["feature_names"] = model.feature_names;
    j["feature_importances"] = model.feature_importances;
    j["train_config"] = {{"n_trees", model.train_config.n_trees},
                         {"max_depth", model.train_config.max_depth},
                         {"learning_rate", model.train_config.learning_rate},
                         {"min_samples_leaf", model.train_config.min_samples_leaf},
                         {"subsample_fraction", model.train_config.subsample_fraction},
                         {"seed", model.train_config.seed}};
    j["training_max_abs_error"] = model.training_max_abs_error;
    j["training_rmse"] = model.training_rmse;
    if (model.provenance)
        j["provenance"] = {{"split_seed", model.provenance->split_seed},
                           {"train_fraction", model.provenance->train_fraction}};
    json trees = json::array();
    for (const auto& tree : model.trees) trees.push_back(tree_to_json(tree));
    j["trees"] = std::move(trees);
    return j.dump();
}

GbtModel model_from_json(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(origin + ": not valid JSON: " + e.what());
    }
    if (!j.contains("format_version") || j["format_version"].get<int>() != 1)
        throw std::runtime_error(origin + ": unsupported model format_version");
    if (j.value("kind", "") != std::string("splitperf-gbt"))
        throw std::runtime_error(origin + ": not a splitperf-gbt model file");

    GbtModel model;
    model.base_score = j.at("base_score").get<double>();
    model.learning_rate = j.at("learning_rate").get<double>();
    model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    model.feature_importances = j.at("feature_importances").get<std::vector<double>>();
    const auto& tc = j.at("train_config");
    model.train_config.n_trees = tc.at("n_trees").get<int>();
    model.train_config.max_depth = tc.at("max_depth").get<int>();
    model.train_config.learning_rate = tc.at("learning_rate").get<double>();
    model.train_config.min_samples_leaf = tc.at("min_samples_leaf").get<int>();
    model.train_config.subsample_fraction = tc.at("subsample_fraction").get<double>();
    model.train_config.seed = tc.at("seed").get<std::uint64_t>();
    model.training_max_abs_error = j.value("training_max_abs_error", 0.0);
    model.training_rmse = j.value("training_rmse", 0.0);
    if (j.contains("provenance")) {
        SplitProvenance prov;
        prov.split_seed = j["provenance"].at("split_seed").get<std::uint64_t>();
        prov.train_fraction = j["provenance"].at("train_fraction").get<double>();
        model.provenance = prov;
    }
    for (const auto& tree : j.at("trees")) model.trees.push_back(tree_from_json(tree));
    return model;
}

void save_model(const GbtModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model file: " + path.string());
    out << model_to_json(model) << "\n";
}

GbtModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return model_from_json(buf.str(), path.string());
}

}  // namespace splitperf::gbt
