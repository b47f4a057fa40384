#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "arkan/kan.hpp"
#include "arkan/series.hpp"

namespace arkan {

/// Fully connected ReLU network with a linear output layer.
///
/// Layer l maps a_l to W_l a_l + b_l, where W_l is (widths[l+1] x widths[l]);
/// ReLU follows every layer but the last. Parameters are flattened layer by
/// layer as W_l (row-major) followed by b_l.
class MlpNetwork {
public:
    /// All-zero parameters.
    explicit MlpNetwork(std::vector<std::size_t> widths);

    /// Weights and biases ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), drawn layer by layer.
    [[nodiscard]] static MlpNetwork random(std::vector<std::size_t> widths, std::uint64_t seed);

    [[nodiscard]] const std::vector<std::size_t>& widths() const noexcept { return widths_; }
    [[nodiscard]] std::size_t num_layers() const noexcept { return widths_.size() - 1; }
    [[nodiscard]] std::size_t input_size() const noexcept { return widths_.front(); }
    [[nodiscard]] std::size_t output_size() const noexcept { return widths_.back(); }

    [[nodiscard]] std::span<const double> parameters() const noexcept { return params_; }
    [[nodiscard]] std::span<double> parameters() noexcept { return params_; }
    [[nodiscard]] std::size_t num_parameters() const noexcept { return params_.size(); }

    /// Row-major view of W_l.
    [[nodiscard]] Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
    weight(std::size_t layer) const;
    [[nodiscard]] Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
    weight(std::size_t layer);
    [[nodiscard]] Eigen::Map<const Eigen::VectorXd> bias(std::size_t layer) const;
    [[nodiscard]] Eigen::Map<Eigen::VectorXd> bias(std::size_t layer);

    /// Index of W_l's first entry in parameters(); b_l follows W_l directly.
    [[nodiscard]] std::size_t layer_offset(std::size_t layer) const { return offsets_.at(layer); }

    void validate() const;

private:
    std::vector<std::size_t> widths_;
    std::vector<double> params_;
    std::vector<std::size_t> offsets_;
};

struct MlpCache {
    std::vector<Eigen::MatrixXd> activations;     // layer inputs, batch x widths[l]
    std::vector<Eigen::MatrixXd> pre_activations; // batch x widths[l+1]
};

struct MlpForward {
    Eigen::MatrixXd output;
    MlpCache cache;
};

struct MlpGradients {
    std::vector<double> params;
    Eigen::MatrixXd input_grad;
};

[[nodiscard]] MlpForward mlp_forward(const MlpNetwork& net, const Eigen::MatrixXd& inputs);
[[nodiscard]] MlpForward mlp_forward(const MlpNetwork& net, std::span<const double> input);

/// Gradients of sum(upstream .* output); the ReLU subgradient at 0 is 0.
/// input_grad is left empty when `want_input_grad` is false.
[[nodiscard]] MlpGradients mlp_backward(const MlpNetwork& net, const MlpCache& cache,
                                        const Eigen::MatrixXd& upstream, bool want_input_grad = true);

struct MseResult {
    double loss = 0.0;
    std::vector<double> grad;
};

/// Mean squared error and its gradient 2 (pred - target) / n.
[[nodiscard]] MseResult mse_loss(std::span<const double> pred, std::span<const double> target);

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t max_epochs = 3000;
    std::size_t patience = 200;
    double val_fraction = 0.2;
    std::uint64_t seed = 0;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;

    void validate() const;

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
};

/// One bias-corrected Adam update of `params` in place; `step` counts from 1.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const TrainConfig& config, std::size_t step);

struct TrainHistory {
    std::vector<double> train_loss;
    std::vector<double> val_loss;
    std::size_t best_epoch = 0;
    double best_val_loss = 0.0;

    [[nodiscard]] std::size_t epochs() const noexcept { return train_loss.size(); }

    friend bool operator==(const TrainHistory&, const TrainHistory&) = default;
};

/// Writes `epoch,train_loss,val_loss` rows.
void write_history_csv(const TrainHistory& history, const std::filesystem::path& path);

struct LossAndGradient {
    double loss = 0.0;
    std::vector<double> grad;
};

/// Mean squared error of the network's single output against `targets`, and its parameter gradient.
[[nodiscard]] LossAndGradient loss_and_gradient(const KanNetwork& net, const Eigen::MatrixXd& inputs,
                                                const Eigen::VectorXd& targets);
[[nodiscard]] LossAndGradient loss_and_gradient(const MlpNetwork& net, const Eigen::MatrixXd& inputs,
                                                const Eigen::VectorXd& targets);
[[nodiscard]] double evaluate_loss(const KanNetwork& net, const Eigen::MatrixXd& inputs,
                                   const Eigen::VectorXd& targets);
[[nodiscard]] double evaluate_loss(const MlpNetwork& net, const Eigen::MatrixXd& inputs,
                                   const Eigen::VectorXd& targets);

/// Full-batch Adam training with chronological validation split and early stopping.
///
/// The last floor(val_fraction * M) windows (at least one) form the validation
/// set. Epoch e records the training and validation loss of the current
/// parameters, then takes one Adam step. Training stops after `patience`
/// epochs without a strict improvement of the validation loss, or after
/// `max_epochs`; the parameters of the best validation epoch are returned.
/// A non-finite loss raises NumericError naming the epoch.
[[nodiscard]] std::pair<KanNetwork, TrainHistory> train(KanNetwork net, const WindowDataset& data,
                                                        const TrainConfig& config);
[[nodiscard]] std::pair<MlpNetwork, TrainHistory> train(MlpNetwork net, const WindowDataset& data,
                                                        const TrainConfig& config);

}  // namespace arkan
