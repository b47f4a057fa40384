#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace arkan {

/// Clamped uniform B-spline grid: G intervals on [lo, hi], degree k.
///
/// The knot vector has G + 2k + 1 entries, lo and hi each repeated k + 1 times,
/// giving G + k basis functions.
struct SplineGrid {
    double lo = -3.0;
    double hi = 3.0;
    int intervals = 3;
    int degree = 3;

    void validate() const;
    [[nodiscard]] std::size_t num_basis() const noexcept {
        return static_cast<std::size_t>(intervals + degree);
    }
    [[nodiscard]] std::vector<double> knots() const;

    friend bool operator==(const SplineGrid&, const SplineGrid&) = default;
};

enum class BaseActivation { Silu, None };

[[nodiscard]] std::string to_string(BaseActivation base);
[[nodiscard]] BaseActivation parse_base_activation(std::string_view name);

/// Parameters of one learnable univariate edge function.
struct KanEdge {
    std::vector<double> spline_coeffs;
    double base_weight = 1.0;
    double mix_weight = 1.0;
};

[[nodiscard]] double silu(double x) noexcept;
[[nodiscard]] double silu_slope(double x) noexcept;

/// All G + k basis values at x.
///
/// Inside [lo, hi] this is the Cox-de Boor recursion on the clamped knots.
/// Outside, each basis function continues affinely from its value and
/// one-sided slope at the nearer boundary.
[[nodiscard]] std::vector<double> bspline_basis(double x, const SplineGrid& grid);

/// Basis values and their derivatives at x, written into spans of length G + k.
void bspline_basis(double x, const SplineGrid& grid, std::span<double> values,
                   std::span<double> slopes);

/// mix_weight * (base_weight * silu(x) + sum_c spline_coeffs[c] * B_c(x)).
[[nodiscard]] double edge_eval(const KanEdge& edge, const SplineGrid& grid, double x,
                               BaseActivation base = BaseActivation::Silu);

/// Stack of KAN layers sharing one spline grid.
///
/// Parameters live in one flat vector; layer l occupies, in order, its spline
/// coefficients indexed ((i * d_out + j) * (G + k) + c), its base weights
/// (i * d_out + j) and its mix weights (i * d_out + j).
class KanNetwork {
public:
    /// All-zero parameters.
    KanNetwork(std::vector<std::size_t> widths, SplineGrid grid,
               BaseActivation base = BaseActivation::Silu);

    /// Spline coefficients ~ N(0, 0.1 / sqrt(G + k)), base weights 1,
    /// mix weights ~ N(0, 1 / sqrt(d_l)) (standard deviations), drawn layer by
    /// layer in edge order from a NormalSampler seeded with `seed`.
    [[nodiscard]] static KanNetwork random(std::vector<std::size_t> widths, SplineGrid grid,
                                           BaseActivation base, std::uint64_t seed);

    [[nodiscard]] const std::vector<std::size_t>& widths() const noexcept { return widths_; }
    [[nodiscard]] const SplineGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] BaseActivation base_activation() const noexcept { return base_; }
    [[nodiscard]] std::size_t num_layers() const noexcept { return widths_.size() - 1; }
    [[nodiscard]] std::size_t input_size() const noexcept { return widths_.front(); }
    [[nodiscard]] std::size_t output_size() const noexcept { return widths_.back(); }

    [[nodiscard]] std::span<const double> parameters() const noexcept { return params_; }
    [[nodiscard]] std::span<double> parameters() noexcept { return params_; }
    [[nodiscard]] std::size_t num_parameters() const noexcept { return params_.size(); }

    [[nodiscard]] std::size_t coeff_index(std::size_t layer, std::size_t i, std::size_t j,
                                          std::size_t c) const;
    [[nodiscard]] std::size_t base_index(std::size_t layer, std::size_t i, std::size_t j) const;
    [[nodiscard]] std::size_t mix_index(std::size_t layer, std::size_t i, std::size_t j) const;

    [[nodiscard]] KanEdge edge(std::size_t layer, std::size_t i, std::size_t j) const;
    void set_edge(std::size_t layer, std::size_t i, std::size_t j, const KanEdge& edge);

    /// Throws InvalidArgument if any parameter is non-finite.
    void validate() const;

private:
    std::vector<std::size_t> widths_;
    SplineGrid grid_;
    BaseActivation base_;
    std::vector<double> params_;
    std::vector<std::size_t> layer_offsets_;
};

using KanFeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Per-layer state recorded by a forward pass. Row s of features[l] holds, per
/// input i, [silu(x_i), B_0(x_i), ..., B_{G+k-1}(x_i)]; slopes[l] holds their
/// derivatives. A cache with only layer_inputs is accepted by kan_backward,
/// which then recomputes the features.
struct KanCache {
    std::vector<Eigen::MatrixXd> layer_inputs;  // batch x d_l
    std::vector<KanFeatureMatrix> features;
    std::vector<KanFeatureMatrix> slopes;
};

struct KanForward {
    Eigen::MatrixXd output;  // batch x d_L
    KanCache cache;
};

struct KanGradients {
    std::vector<double> params;  // same layout as KanNetwork::parameters()
    Eigen::MatrixXd input_grad;  // batch x d_0
};

/// Batched forward pass; rows of `inputs` are samples.
///
/// Raises ShapeError on a width mismatch and NumericError (naming the layer)
/// when a layer produces a non-finite value.
[[nodiscard]] KanForward kan_forward(const KanNetwork& net, const Eigen::MatrixXd& inputs);

/// Batched forward pass without a cache.
[[nodiscard]] Eigen::MatrixXd kan_predict(const KanNetwork& net, const Eigen::MatrixXd& inputs);

/// Single-sample forward pass.
[[nodiscard]] KanForward kan_forward(const KanNetwork& net, std::span<const double> input);

/// Gradients of sum(upstream .* output) w.r.t. every parameter (summed over the
/// batch) and, unless `want_input_grad` is false, w.r.t. each input row.
[[nodiscard]] KanGradients kan_backward(const KanNetwork& net, const KanCache& cache,
                                        const Eigen::MatrixXd& upstream, bool want_input_grad = true);

}  // namespace arkan
