#include "arkan/kan.hpp"

#include <cmath>

#include "arkan/error.hpp"
#include "arkan/random.hpp"

namespace arkan {

void SplineGrid::validate() const {
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi)) {
        throw InvalidArgument("spline grid needs finite lo < hi");
    }
    if (intervals < 1 || degree < 1) {
        throw InvalidArgument("spline grid needs at least 1 interval and degree >= 1");
    }
}

std::vector<double> SplineGrid::knots() const {
    validate();
    const double h = (hi - lo) / intervals;
    std::vector<double> t;
    t.reserve(static_cast<std::size_t>(intervals + 2 * degree + 1));
    for (int i = 0; i < degree; ++i) {
        t.push_back(lo);
    }
    for (int g = 0; g <= intervals; ++g) {
        t.push_back(g == intervals ? hi : lo + g * h);
    }
    for (int i = 0; i < degree; ++i) {
        t.push_back(hi);
    }
    return t;
}

std::string to_string(BaseActivation base) { return base == BaseActivation::Silu ? "silu" : "none"; }

BaseActivation parse_base_activation(std::string_view name) {
    if (name == "silu") {
        return BaseActivation::Silu;
    }
    if (name == "none") {
        return BaseActivation::None;
    }
    throw InvalidArgument("unknown base activation '" + std::string(name) + "' (expected silu|none)");
}

double silu(double x) noexcept { return x / (1.0 + std::exp(-x)); }

double silu_slope(double x) noexcept {
    const double s = 1.0 / (1.0 + std::exp(-x));
    return s * (1.0 + x * (1.0 - s));
}

namespace {

// Clamped knots plus k / (t[i + k] - t[i]) (0 for repeated knots), the factors
// of the derivative recursion.
struct KnotTable {
    explicit KnotTable(const SplineGrid& grid) : t(grid.knots()) {
        const auto k = static_cast<std::size_t>(grid.degree);
        scale.assign(grid.num_basis() + 1, 0.0);
        for (std::size_t i = 0; i < scale.size(); ++i) {
            const double den = t[i + k] - t[i];
            scale[i] = den > 0.0 ? static_cast<double>(k) / den : 0.0;
        }
    }
    std::vector<double> t;
    std::vector<double> scale;
};

// Nonzero basis values (and slopes) of degree k at x in [lo, hi] on span s,
// where t[s] <= x < t[s + 1]. Entry r belongs to basis index s - k + r.
void span_basis(double x, std::size_t s, int k, const KnotTable& table, double* values, double* slopes) {
    const double* t = table.t.data();
    double left[16];
    double right[16];
    double lower[16];  // degree k - 1 values
    values[0] = 1.0;
    for (int q = 1; q <= k; ++q) {
        if (q == k) {
            for (int r = 0; r < k; ++r) {
                lower[r] = values[r];
            }
        }
        left[q] = x - t[s + 1 - static_cast<std::size_t>(q)];
        right[q] = t[s + static_cast<std::size_t>(q)] - x;
        double saved = 0.0;
        for (int r = 0; r < q; ++r) {
            const double temp = values[r] / (right[r + 1] + left[q - r]);
            values[r] = saved + right[r + 1] * temp;
            saved = left[q - r] * temp;
        }
        values[q] = saved;
    }
    // N'_{i,k} = k * (N_{i,k-1} / (t[i+k] - t[i]) - N_{i+1,k-1} / (t[i+k+1] - t[i+1]))
    const double* scale = table.scale.data() + (s - static_cast<std::size_t>(k));
    lower[k] = 0.0;
    double prev = 0.0;
    for (int r = 0; r <= k; ++r) {
        const double next = lower[r] * scale[r + 1];
        slopes[r] = prev - next;
        prev = next;
    }
}

// Evaluates basis and slopes for all G + k functions.
void full_basis(double x, const SplineGrid& grid, const KnotTable& table, double* values, double* slopes) {
    if (!std::isfinite(x)) {
        throw NumericError("spline basis evaluated at a non-finite point");
    }
    const int k = grid.degree;
    const std::size_t nb = grid.num_basis();
    const double* t = table.t.data();
    const double anchor = x < grid.lo ? grid.lo : (x > grid.hi ? grid.hi : x);
    const double h = (grid.hi - grid.lo) / grid.intervals;
    auto cell = static_cast<long>((anchor - grid.lo) / h);
    cell = std::max(0L, std::min(cell, static_cast<long>(grid.intervals) - 1));
    std::size_t s = static_cast<std::size_t>(k) + static_cast<std::size_t>(cell);
    // Guard against rounding in the division above.
    while (s > static_cast<std::size_t>(k) && anchor < t[s]) {
        --s;
    }
    while (s + 1 < static_cast<std::size_t>(k + grid.intervals) && anchor >= t[s + 1]) {
        ++s;
    }

    double local_values[17];
    double local_slopes[17];
    span_basis(anchor, s, k, table, local_values, local_slopes);

    for (std::size_t c = 0; c < nb; ++c) {
        values[c] = 0.0;
        slopes[c] = 0.0;
    }
    const std::size_t first = s - static_cast<std::size_t>(k);
    const double offset = x - anchor;
    for (int r = 0; r <= k; ++r) {
        const std::size_t c = first + static_cast<std::size_t>(r);
        values[c] = offset == 0.0 ? local_values[r] : local_values[r] + offset * local_slopes[r];
        slopes[c] = local_slopes[r];
    }
}

void check_degree(const SplineGrid& grid) {
    grid.validate();
    if (grid.degree > 15) {
        throw InvalidArgument("spline degree above 15 is not supported");
    }
}

}  // namespace

void bspline_basis(double x, const SplineGrid& grid, std::span<double> values,
                   std::span<double> slopes) {
    check_degree(grid);
    if (values.size() != grid.num_basis() || slopes.size() != grid.num_basis()) {
        throw ShapeError("basis output spans must have G + k entries");
    }
    full_basis(x, grid, KnotTable(grid), values.data(), slopes.data());
}

std::vector<double> bspline_basis(double x, const SplineGrid& grid) {
    std::vector<double> values(grid.num_basis());
    std::vector<double> slopes(grid.num_basis());
    bspline_basis(x, grid, values, slopes);
    return values;
}

double edge_eval(const KanEdge& edge, const SplineGrid& grid, double x, BaseActivation base) {
    if (edge.spline_coeffs.size() != grid.num_basis()) {
        throw ShapeError("edge has " + std::to_string(edge.spline_coeffs.size()) +
                         " spline coefficients, grid needs " + std::to_string(grid.num_basis()));
    }
    const auto basis = bspline_basis(x, grid);
    double spline = 0.0;
    for (std::size_t c = 0; c < basis.size(); ++c) {
        spline += edge.spline_coeffs[c] * basis[c];
    }
    const double residual = base == BaseActivation::Silu ? edge.base_weight * silu(x) : 0.0;
    return edge.mix_weight * (residual + spline);
}

// ---------------------------------------------------------------------------

KanNetwork::KanNetwork(std::vector<std::size_t> widths, SplineGrid grid, BaseActivation base)
    : widths_(std::move(widths)), grid_(grid), base_(base) {
    check_degree(grid_);
    if (widths_.size() < 2) {
        throw InvalidArgument("KAN needs at least an input and an output width");
    }
    for (auto w : widths_) {
        if (w == 0) {
            throw InvalidArgument("KAN layer widths must be positive");
        }
    }
    const std::size_t nb = grid_.num_basis();
    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
        layer_offsets_.push_back(offset);
        offset += widths_[l] * widths_[l + 1] * (nb + 2);
    }
    params_.assign(offset, 0.0);
}

KanNetwork KanNetwork::random(std::vector<std::size_t> widths, SplineGrid grid, BaseActivation base,
                              std::uint64_t seed) {
    KanNetwork net(std::move(widths), grid, base);
    NormalSampler rng(seed);
    const std::size_t nb = grid.num_basis();
    const double coeff_std = 0.1 / std::sqrt(static_cast<double>(nb));
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        const double mix_std = 1.0 / std::sqrt(static_cast<double>(net.widths_[l]));
        for (std::size_t i = 0; i < net.widths_[l]; ++i) {
            for (std::size_t j = 0; j < net.widths_[l + 1]; ++j) {
                for (std::size_t c = 0; c < nb; ++c) {
                    net.params_[net.coeff_index(l, i, j, c)] = rng.normal(0.0, coeff_std);
                }
                net.params_[net.base_index(l, i, j)] = 1.0;
                net.params_[net.mix_index(l, i, j)] = rng.normal(0.0, mix_std);
            }
        }
    }
    return net;
}

std::size_t KanNetwork::coeff_index(std::size_t layer, std::size_t i, std::size_t j,
                                    std::size_t c) const {
    const std::size_t out = widths_[layer + 1];
    return layer_offsets_[layer] + (i * out + j) * grid_.num_basis() + c;
}

std::size_t KanNetwork::base_index(std::size_t layer, std::size_t i, std::size_t j) const {
    const std::size_t edges = widths_[layer] * widths_[layer + 1];
    return layer_offsets_[layer] + edges * grid_.num_basis() + i * widths_[layer + 1] + j;
}

std::size_t KanNetwork::mix_index(std::size_t layer, std::size_t i, std::size_t j) const {
    const std::size_t edges = widths_[layer] * widths_[layer + 1];
    return layer_offsets_[layer] + edges * (grid_.num_basis() + 1) + i * widths_[layer + 1] + j;
}

KanEdge KanNetwork::edge(std::size_t layer, std::size_t i, std::size_t j) const {
    KanEdge e;
    const std::size_t nb = grid_.num_basis();
    e.spline_coeffs.resize(nb);
    for (std::size_t c = 0; c < nb; ++c) {
        e.spline_coeffs[c] = params_[coeff_index(layer, i, j, c)];
    }
    e.base_weight = params_[base_index(layer, i, j)];
    e.mix_weight = params_[mix_index(layer, i, j)];
    return e;
}

void KanNetwork::set_edge(std::size_t layer, std::size_t i, std::size_t j, const KanEdge& e) {
    const std::size_t nb = grid_.num_basis();
    if (e.spline_coeffs.size() != nb) {
        throw ShapeError("edge spline coefficient count does not match grid");
    }
    for (std::size_t c = 0; c < nb; ++c) {
        params_[coeff_index(layer, i, j, c)] = e.spline_coeffs[c];
    }
    params_[base_index(layer, i, j)] = e.base_weight;
    params_[mix_index(layer, i, j)] = e.mix_weight;
}

void KanNetwork::validate() const {
    for (double v : params_) {
        if (!std::isfinite(v)) {
            throw InvalidArgument("KAN parameter is not finite");
        }
    }
}

// ---------------------------------------------------------------------------
// Each layer is evaluated as features * W, where a row of features holds, per
// input i, [silu(x_i), B_0(x_i), ..., B_{G+k-1}(x_i)] and W folds the mix
// weight into the base weight and spline coefficients of every edge.

namespace {

struct LayerFeatures {
    KanFeatureMatrix values;  // batch x d_in * (G + k + 1)
    KanFeatureMatrix slopes;
};

LayerFeatures layer_features(const KanNetwork& net, const Eigen::MatrixXd& x, bool with_slopes,
                             const KnotTable& knots) {
    const std::size_t nb = net.grid().num_basis();
    const auto stride = static_cast<Eigen::Index>(nb + 1);
    const bool silu_on = net.base_activation() == BaseActivation::Silu;
    LayerFeatures f;
    f.values.resize(x.rows(), x.cols() * stride);
    if (with_slopes) {
        f.slopes.resize(x.rows(), x.cols() * stride);
    }
    double slopes[32];
    for (Eigen::Index s = 0; s < x.rows(); ++s) {
        double* vrow = f.values.row(s).data();
        double* srow = with_slopes ? f.slopes.row(s).data() : slopes;
        for (Eigen::Index i = 0; i < x.cols(); ++i) {
            const double v = x(s, i);
            double* vs = vrow + i * stride;
            double* ss = with_slopes ? srow + i * stride : slopes;
            full_basis(v, net.grid(), knots, vs + 1, ss + 1);
            if (silu_on) {
                const double sig = 1.0 / (1.0 + std::exp(-v));
                vs[0] = v * sig;
                ss[0] = sig * (1.0 + v * (1.0 - sig));
            } else {
                vs[0] = 0.0;
                ss[0] = 0.0;
            }
        }
    }
    return f;
}

Eigen::MatrixXd folded_weights(const KanNetwork& net, std::size_t layer) {
    const std::size_t in = net.widths()[layer];
    const std::size_t out = net.widths()[layer + 1];
    const std::size_t nb = net.grid().num_basis();
    const auto p = net.parameters();
    Eigen::MatrixXd w(static_cast<Eigen::Index>(in * (nb + 1)), static_cast<Eigen::Index>(out));
    for (std::size_t i = 0; i < in; ++i) {
        for (std::size_t j = 0; j < out; ++j) {
            const double mix = p[net.mix_index(layer, i, j)];
            const auto row = static_cast<Eigen::Index>(i * (nb + 1));
            const auto col = static_cast<Eigen::Index>(j);
            w(row, col) = mix * p[net.base_index(layer, i, j)];
            for (std::size_t c = 0; c < nb; ++c) {
                w(row + 1 + static_cast<Eigen::Index>(c), col) = mix * p[net.coeff_index(layer, i, j, c)];
            }
        }
    }
    return w;
}

}  // namespace

namespace {

void check_inputs(const KanNetwork& net, const Eigen::MatrixXd& inputs) {
    if (static_cast<std::size_t>(inputs.cols()) != net.input_size()) {
        throw ShapeError("KAN input has " + std::to_string(inputs.cols()) + " features, network expects " +
                         std::to_string(net.input_size()));
    }
    if (!inputs.allFinite()) {
        throw NumericError("KAN input contains a non-finite value");
    }
}

void check_layer(const Eigen::MatrixXd& next, std::size_t l) {
    if (!next.allFinite()) {
        throw NumericError("KAN layer " + std::to_string(l) + " produced a non-finite value");
    }
}

}  // namespace

KanForward kan_forward(const KanNetwork& net, const Eigen::MatrixXd& inputs) {
    check_inputs(net, inputs);
    const KnotTable knots(net.grid());
    KanForward result;
    Eigen::MatrixXd x = inputs;
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        auto features = layer_features(net, x, true, knots);
        Eigen::MatrixXd next = features.values * folded_weights(net, l);
        check_layer(next, l);
        result.cache.layer_inputs.push_back(std::move(x));
        result.cache.features.push_back(std::move(features.values));
        result.cache.slopes.push_back(std::move(features.slopes));
        x = std::move(next);
    }
    result.output = std::move(x);
    return result;
}

Eigen::MatrixXd kan_predict(const KanNetwork& net, const Eigen::MatrixXd& inputs) {
    check_inputs(net, inputs);
    const KnotTable knots(net.grid());
    Eigen::MatrixXd x = inputs;
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        Eigen::MatrixXd next = layer_features(net, x, false, knots).values * folded_weights(net, l);
        check_layer(next, l);
        x = std::move(next);
    }
    return x;
}

KanForward kan_forward(const KanNetwork& net, std::span<const double> input) {
    Eigen::MatrixXd row(1, static_cast<Eigen::Index>(input.size()));
    for (std::size_t i = 0; i < input.size(); ++i) {
        row(0, static_cast<Eigen::Index>(i)) = input[i];
    }
    return kan_forward(net, row);
}

KanGradients kan_backward(const KanNetwork& net, const KanCache& cache, const Eigen::MatrixXd& upstream,
                          bool want_input_grad) {
    if (cache.layer_inputs.size() != net.num_layers()) {
        throw ShapeError("KAN cache does not match network depth");
    }
    const Eigen::Index batch = cache.layer_inputs.front().rows();
    if (upstream.rows() != batch || static_cast<std::size_t>(upstream.cols()) != net.output_size()) {
        throw ShapeError("KAN upstream gradient shape does not match forward output");
    }
    const KnotTable knots(net.grid());
    const std::size_t nb = net.grid().num_basis();
    const auto p = net.parameters();

    KanGradients grads;
    grads.params.assign(net.num_parameters(), 0.0);
    Eigen::MatrixXd g = upstream;
    for (std::size_t l = net.num_layers(); l-- > 0;) {
        const Eigen::MatrixXd& x = cache.layer_inputs[l];
        const std::size_t in = net.widths()[l];
        const std::size_t out = net.widths()[l + 1];
        if (static_cast<std::size_t>(x.cols()) != in || x.rows() != batch) {
            throw ShapeError("KAN cache layer " + std::to_string(l) + " has the wrong shape");
        }
        LayerFeatures recomputed;
        const bool cached = cache.features.size() == net.num_layers() && cache.slopes.size() == net.num_layers();
        if (!cached) {
            recomputed = layer_features(net, x, true, knots);
        }
        const KanFeatureMatrix& values = cached ? cache.features[l] : recomputed.values;
        const KanFeatureMatrix& slopes = cached ? cache.slopes[l] : recomputed.slopes;
        if (values.rows() != batch || static_cast<std::size_t>(values.cols()) != in * (nb + 1)) {
            throw ShapeError("KAN cache layer " + std::to_string(l) + " has the wrong feature shape");
        }
        const Eigen::MatrixXd w = folded_weights(net, l);
        const Eigen::MatrixXd dw = values.transpose() * g;

        for (std::size_t i = 0; i < in; ++i) {
            const auto row = static_cast<Eigen::Index>(i * (nb + 1));
            for (std::size_t j = 0; j < out; ++j) {
                const auto col = static_cast<Eigen::Index>(j);
                const double mix = p[net.mix_index(l, i, j)];
                const double base = p[net.base_index(l, i, j)];
                double dmix = base * dw(row, col);
                grads.params[net.base_index(l, i, j)] = mix * dw(row, col);
                for (std::size_t c = 0; c < nb; ++c) {
                    const double dwc = dw(row + 1 + static_cast<Eigen::Index>(c), col);
                    dmix += p[net.coeff_index(l, i, j, c)] * dwc;
                    grads.params[net.coeff_index(l, i, j, c)] = mix * dwc;
                }
                grads.params[net.mix_index(l, i, j)] = dmix;
            }
        }

        if (l == 0 && !want_input_grad) {
            break;
        }
        const KanFeatureMatrix dfeatures = (g * w.transpose()).cwiseProduct(slopes);
        Eigen::MatrixXd dx(batch, static_cast<Eigen::Index>(in));
        const auto stride = static_cast<Eigen::Index>(nb + 1);
        for (Eigen::Index s = 0; s < batch; ++s) {
            const double* row = dfeatures.row(s).data();
            for (std::size_t i = 0; i < in; ++i) {
                double sum = 0.0;
                for (Eigen::Index c = 0; c < stride; ++c) {
                    sum += row[static_cast<Eigen::Index>(i) * stride + c];
                }
                dx(s, static_cast<Eigen::Index>(i)) = sum;
            }
        }
        g = std::move(dx);
    }
    if (want_input_grad) {
        grads.input_grad = std::move(g);
    }
    return grads;
}

}  // namespace arkan
