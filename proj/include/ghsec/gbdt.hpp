#pragma once

#include "ghsec/util.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace ghsec::gbdt {

/// Dense row-major n x d matrix.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);
    FeatureMatrix(std::size_t rows, std::size_t cols) : FeatureMatrix(rows, cols, std::vector<double>(rows * cols)) {}

    static FeatureMatrix from_rows(const std::vector<std::vector<double>>& rows, std::size_t cols);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct GbdtParams {
    int n_rounds = 200;
    int max_depth = 4;
    double learning_rate = 0.1;
    int min_samples_leaf = 5;
    double subsample = 1.0;
    std::uint64_t seed = 0;
    double lambda = 1.0;      ///< L2 penalty on leaf values
    double leaf_clamp = 10.0; ///< |leaf value| bound

    void validate() const;
    bool operator==(const GbdtParams&) const = default;
};

struct TreeNode {
    int feature = -1; ///< -1 marks a leaf
    double threshold = 0.0;
    int left = -1;  ///< taken when x[feature] < threshold
    int right = -1;
    double value = 0.0;

    bool is_leaf() const noexcept { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

struct Tree {
    std::vector<TreeNode> nodes; ///< nodes[0] is the root

    double predict(std::span<const double> x) const;
    bool operator==(const Tree&) const = default;
};

struct GbdtModel {
    std::vector<Tree> trees;
    double base_score = 0.0; ///< log-odds of the training positive rate
    GbdtParams params;
    std::size_t feature_dim = 0;

    bool operator==(const GbdtModel&) const = default;
};

class TrainingError : public Error {
public:
    using Error::Error;
};

class ModelLoadError : public Error {
public:
    using Error::Error;
};

struct TrainingReport {
    /// Mean training log-loss before round 1 and after each round.
    std::vector<double> loss_history;
};

/// Newton boosting on logistic loss with exact greedy splits.
GbdtModel train(const FeatureMatrix& features, const std::vector<bool>& labels, const GbdtParams& params,
                TrainingReport* report = nullptr);

std::vector<double> predict_proba(const GbdtModel& model, const FeatureMatrix& features);
std::vector<bool> predict(const GbdtModel& model, const FeatureMatrix& features, double threshold = 0.5);

/// Raw margin (log-odds) for one row.
double predict_margin(const GbdtModel& model, std::span<const double> x);

// Split search, exposed so it can be checked against brute force --------------

struct SplitCandidate {
    bool valid = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

/// Newton gain of splitting a node into (left, right) gradient/hessian sums.
double split_gain(double g_left, double h_left, double g_right, double h_right, double lambda);

/// Best split of the node holding `samples`: maximal gain over every feature
/// and every midpoint between consecutive distinct values, subject to
/// min_samples_leaf on both sides and gain > 0. Ties go to the lowest
/// feature, then the lowest threshold.
SplitCandidate find_best_split(const FeatureMatrix& features, std::span<const std::size_t> samples,
                               std::span<const double> grad, std::span<const double> hess, const GbdtParams& params);

double leaf_value(double g, double h, const GbdtParams& params);

// Persistence ---------------------------------------------------------------

inline constexpr int kModelFormatVersion = 1;

std::string model_to_json(const GbdtModel& model);
GbdtModel model_from_json(std::string_view text);
void save_model(const GbdtModel& model, const std::filesystem::path& path);
GbdtModel load_model(const std::filesystem::path& path);

} // namespace ghsec::gbdt
