#include "arkan/nn.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "arkan/error.hpp"
#include "arkan/random.hpp"

namespace arkan {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

MlpNetwork::MlpNetwork(std::vector<std::size_t> widths) : widths_(std::move(widths)) {
    if (widths_.size() < 2) {
        throw InvalidArgument("MLP needs at least an input and an output width");
    }
    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
        if (widths_[l] == 0 || widths_[l + 1] == 0) {
            throw InvalidArgument("MLP layer widths must be positive");
        }
        offsets_.push_back(offset);
        offset += widths_[l + 1] * widths_[l] + widths_[l + 1];
    }
    params_.assign(offset, 0.0);
}

MlpNetwork MlpNetwork::random(std::vector<std::size_t> widths, std::uint64_t seed) {
    MlpNetwork net(std::move(widths));
    NormalSampler rng(seed);
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(net.widths_[l]));
        const std::size_t count = net.widths_[l + 1] * net.widths_[l] + net.widths_[l + 1];
        for (std::size_t k = 0; k < count; ++k) {
            net.params_[net.offsets_[l] + k] = bound * (2.0 * rng.uniform() - 1.0);
        }
    }
    return net;
}

Eigen::Map<const RowMajorMatrix> MlpNetwork::weight(std::size_t layer) const {
    return {params_.data() + offsets_[layer], static_cast<Eigen::Index>(widths_[layer + 1]),
            static_cast<Eigen::Index>(widths_[layer])};
}

Eigen::Map<RowMajorMatrix> MlpNetwork::weight(std::size_t layer) {
    return {params_.data() + offsets_[layer], static_cast<Eigen::Index>(widths_[layer + 1]),
            static_cast<Eigen::Index>(widths_[layer])};
}

Eigen::Map<const Eigen::VectorXd> MlpNetwork::bias(std::size_t layer) const {
    return {params_.data() + offsets_[layer] + widths_[layer + 1] * widths_[layer],
            static_cast<Eigen::Index>(widths_[layer + 1])};
}

Eigen::Map<Eigen::VectorXd> MlpNetwork::bias(std::size_t layer) {
    return {params_.data() + offsets_[layer] + widths_[layer + 1] * widths_[layer],
            static_cast<Eigen::Index>(widths_[layer + 1])};
}

void MlpNetwork::validate() const {
    for (double v : params_) {
        if (!std::isfinite(v)) {
            throw InvalidArgument("MLP parameter is not finite");
        }
    }
}

MlpForward mlp_forward(const MlpNetwork& net, const Eigen::MatrixXd& inputs) {
    if (static_cast<std::size_t>(inputs.cols()) != net.input_size()) {
        throw ShapeError("MLP input has " + std::to_string(inputs.cols()) + " features, network expects " +
                         std::to_string(net.input_size()));
    }
    MlpForward result;
    Eigen::MatrixXd a = inputs;
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        Eigen::MatrixXd z = a * net.weight(l).transpose();
        z.rowwise() += net.bias(l).transpose();
        result.cache.activations.push_back(std::move(a));
        if (l + 1 < net.num_layers()) {
            a = z.cwiseMax(0.0);
        } else {
            a = z;
        }
        result.cache.pre_activations.push_back(std::move(z));
    }
    if (!a.allFinite()) {
        throw NumericError("MLP produced a non-finite output");
    }
    result.output = std::move(a);
    return result;
}

MlpForward mlp_forward(const MlpNetwork& net, std::span<const double> input) {
    Eigen::MatrixXd row(1, static_cast<Eigen::Index>(input.size()));
    for (std::size_t i = 0; i < input.size(); ++i) {
        row(0, static_cast<Eigen::Index>(i)) = input[i];
    }
    return mlp_forward(net, row);
}

MlpGradients mlp_backward(const MlpNetwork& net, const MlpCache& cache, const Eigen::MatrixXd& upstream,
                          bool want_input_grad) {
    if (cache.activations.size() != net.num_layers() || cache.pre_activations.size() != net.num_layers()) {
        throw ShapeError("MLP cache does not match network depth");
    }
    const Eigen::Index batch = cache.activations.front().rows();
    if (upstream.rows() != batch || static_cast<std::size_t>(upstream.cols()) != net.output_size()) {
        throw ShapeError("MLP upstream gradient shape does not match forward output");
    }
    MlpGradients grads;
    grads.params.assign(net.num_parameters(), 0.0);
    Eigen::MatrixXd g = upstream;
    for (std::size_t l = net.num_layers(); l-- > 0;) {
        if (l + 1 < net.num_layers()) {
            g = g.cwiseProduct((cache.pre_activations[l].array() > 0.0).cast<double>().matrix());
        }
        const std::size_t offset = net.layer_offset(l);
        const auto rows = static_cast<Eigen::Index>(net.widths()[l + 1]);
        const auto cols = static_cast<Eigen::Index>(net.widths()[l]);
        Eigen::Map<RowMajorMatrix> dw(grads.params.data() + offset, rows, cols);
        Eigen::Map<Eigen::VectorXd> db(grads.params.data() + offset + static_cast<std::size_t>(rows * cols), rows);
        dw.noalias() = g.transpose() * cache.activations[l];
        db = g.colwise().sum().transpose();
        if (l == 0 && !want_input_grad) {
            break;
        }
        g = g * net.weight(l);
    }
    if (want_input_grad) {
        grads.input_grad = std::move(g);
    }
    return grads;
}

MseResult mse_loss(std::span<const double> pred, std::span<const double> target) {
    if (pred.size() != target.size()) {
        throw ShapeError("mse: prediction and target lengths differ");
    }
    if (pred.empty()) {
        throw InvalidArgument("mse: empty input");
    }
    const double n = static_cast<double>(pred.size());
    MseResult result;
    result.grad.resize(pred.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double diff = pred[i] - target[i];
        sum += diff * diff;
        result.grad[i] = 2.0 * diff / n;
    }
    result.loss = sum / n;
    return result;
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw InvalidArgument("learning_rate must be positive");
    }
    if (!(val_fraction > 0.0 && val_fraction < 0.5)) {
        throw InvalidArgument("val_fraction must lie in (0, 0.5)");
    }
    if (patience < 1) {
        throw InvalidArgument("patience must be at least 1");
    }
    if (max_epochs < 1) {
        throw InvalidArgument("max_epochs must be at least 1");
    }
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0) ||
        !(adam_eps > 0.0)) {
        throw InvalidArgument("Adam betas must lie in [0, 1) and eps must be positive");
    }
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const TrainConfig& config, std::size_t step) {
    if (params.size() != grads.size()) {
        throw ShapeError("adam: parameter and gradient counts differ");
    }
    if (step < 1) {
        throw InvalidArgument("adam: step index starts at 1");
    }
    if (state.m.empty() && state.v.empty()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
    }
    if (state.m.size() != params.size() || state.v.size() != params.size()) {
        throw ShapeError("adam: optimizer state does not match parameters");
    }
    const double b1 = config.adam_beta1;
    const double b2 = config.adam_beta2;
    const double t = static_cast<double>(step);
    const double c1 = 1.0 - std::pow(b1, t);
    const double c2 = 1.0 - std::pow(b2, t);
    for (std::size_t k = 0; k < params.size(); ++k) {
        const double g = grads[k];
        state.m[k] = b1 * state.m[k] + (1.0 - b1) * g;
        state.v[k] = b2 * state.v[k] + (1.0 - b2) * g * g;
        const double m_hat = state.m[k] / c1;
        const double v_hat = state.v[k] / c2;
        params[k] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.adam_eps);
    }
}

void write_history_csv(const TrainHistory& history, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write file: " + path.string());
    }
    out << "epoch,train_loss,val_loss\n";
    for (std::size_t e = 0; e < history.epochs(); ++e) {
        out << e << ',' << format_double(history.train_loss[e]) << ',' << format_double(history.val_loss[e])
            << '\n';
    }
}

namespace {

Eigen::VectorXd output_residual(const Eigen::MatrixXd& output, const Eigen::VectorXd& targets) {
    if (output.cols() != 1 || output.rows() != targets.size()) {
        throw ShapeError("training needs a single-output network and one target per row");
    }
    return output.col(0) - targets;
}

template <typename Forward, typename Backward>
LossAndGradient mse_gradient(Forward&& forward, Backward&& backward, const Eigen::VectorXd& targets) {
    auto fwd = forward();
    const Eigen::VectorXd residual = output_residual(fwd.output, targets);
    const double n = static_cast<double>(targets.size());
    Eigen::MatrixXd upstream = (2.0 / n) * residual;
    LossAndGradient result;
    result.loss = residual.squaredNorm() / n;
    result.grad = backward(fwd.cache, upstream).params;
    return result;
}

}  // namespace

LossAndGradient loss_and_gradient(const KanNetwork& net, const Eigen::MatrixXd& inputs,
                                  const Eigen::VectorXd& targets) {
    return mse_gradient([&] { return kan_forward(net, inputs); },
                        [&](const KanCache& c, const Eigen::MatrixXd& u) { return kan_backward(net, c, u, false); },
                        targets);
}

LossAndGradient loss_and_gradient(const MlpNetwork& net, const Eigen::MatrixXd& inputs,
                                  const Eigen::VectorXd& targets) {
    return mse_gradient([&] { return mlp_forward(net, inputs); },
                        [&](const MlpCache& c, const Eigen::MatrixXd& u) { return mlp_backward(net, c, u, false); },
                        targets);
}

double evaluate_loss(const KanNetwork& net, const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets) {
    return output_residual(kan_predict(net, inputs), targets).squaredNorm() /
           static_cast<double>(targets.size());
}

double evaluate_loss(const MlpNetwork& net, const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets) {
    return output_residual(mlp_forward(net, inputs).output, targets).squaredNorm() /
           static_cast<double>(targets.size());
}

namespace {

template <typename Network>
std::pair<Network, TrainHistory> train_impl(Network net, const WindowDataset& data, const TrainConfig& config) {
    config.validate();
    const std::size_t total = data.size();
    if (total < 2) {
        throw InvalidArgument("training needs at least 2 windows, got " + std::to_string(total));
    }
    if (data.lag != net.input_size()) {
        throw ShapeError("window length " + std::to_string(data.lag) + " does not match network input " +
                         std::to_string(net.input_size()));
    }
    const std::size_t n_val = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(config.val_fraction * static_cast<double>(total))));
    const std::size_t n_train = total - n_val;

    const auto rows = [&](std::size_t first, std::size_t count) {
        Eigen::MatrixXd x(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(data.lag));
        Eigen::VectorXd y(static_cast<Eigen::Index>(count));
        for (std::size_t m = 0; m < count; ++m) {
            const auto r = data.row(first + m);
            for (std::size_t i = 0; i < data.lag; ++i) {
                x(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(i)) = r[i];
            }
            y(static_cast<Eigen::Index>(m)) = data.targets[first + m];
        }
        return std::pair{std::move(x), std::move(y)};
    };
    const auto [x_train, y_train] = rows(0, n_train);
    const auto [x_val, y_val] = rows(n_train, n_val);

    TrainHistory history;
    history.best_val_loss = std::numeric_limits<double>::infinity();
    std::vector<double> best_params(net.parameters().begin(), net.parameters().end());
    AdamState adam;
    for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
        auto step = loss_and_gradient(net, x_train, y_train);
        const double val = evaluate_loss(net, x_val, y_val);
        if (!std::isfinite(step.loss) || !std::isfinite(val)) {
            throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + " (train " +
                               format_double(step.loss) + ", validation " + format_double(val) + ")");
        }
        history.train_loss.push_back(step.loss);
        history.val_loss.push_back(val);
        if (val < history.best_val_loss) {
            history.best_val_loss = val;
            history.best_epoch = epoch;
            std::copy(net.parameters().begin(), net.parameters().end(), best_params.begin());
        } else if (epoch - history.best_epoch >= config.patience) {
            break;
        }
        adam_step(net.parameters(), step.grad, adam, config, epoch + 1);
    }
    std::copy(best_params.begin(), best_params.end(), net.parameters().begin());
    return {std::move(net), std::move(history)};
}

}  // namespace

std::pair<KanNetwork, TrainHistory> train(KanNetwork net, const WindowDataset& data, const TrainConfig& config) {
    return train_impl(std::move(net), data, config);
}

std::pair<MlpNetwork, TrainHistory> train(MlpNetwork net, const WindowDataset& data, const TrainConfig& config) {
    return train_impl(std::move(net), data, config);
}

}  // namespace arkan
