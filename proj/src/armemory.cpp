#include "arkan/armemory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "arkan/error.hpp"

namespace arkan {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw ShapeError(std::string(what) + ": length mismatch (" + std::to_string(a) + " vs " +
                         std::to_string(b) + ")");
    }
}

double max_residual(const Eigen::MatrixXd& R, const Eigen::VectorXd& a, const Eigen::VectorXd& rhs) {
    return (R * a - rhs).cwiseAbs().maxCoeff();
}

double condition_estimate(const Eigen::MatrixXd& R) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(R);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(s.size() - 1) == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return s(0) / s(s.size() - 1);
}

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace

void ArModel::validate() const {
    if (coeffs.empty()) {
        throw InvalidArgument("AR model needs at least one coefficient");
    }
    if (d != 0 && d != 1) {
        throw InvalidArgument("differencing degree must be 0 or 1");
    }
    for (double c : coeffs) {
        if (!std::isfinite(c)) {
            throw InvalidArgument("AR coefficient is not finite");
        }
    }
}

AutocorrSequence autocorrelation(std::span<const double> x, std::size_t maxlag) {
    const std::size_t n = x.size();
    if (maxlag >= n || n - maxlag < 2) {
        throw InvalidArgument("autocorrelation to lag " + std::to_string(maxlag) + " needs more than " +
                              std::to_string(maxlag + 1) + " samples, got " + std::to_string(n));
    }
    AutocorrSequence out;
    out.r.resize(maxlag + 1);
    for (std::size_t i = 0; i <= maxlag; ++i) {
        double acc = 0.0;
        for (std::size_t k = i; k < n; ++k) {
            acc += x[k] * x[k - i];
        }
        out.r[i] = acc / static_cast<double>(n - i);
    }
    if (!(out.r[0] > 0.0)) {
        throw DegenerateSeries("autocorrelation of an all-zero series");
    }
    return out;
}

AutocorrSequence autocorrelation(const TimeSeries& ts, std::size_t maxlag) {
    return autocorrelation(ts.values(), maxlag);
}

Eigen::MatrixXd toeplitz(const AutocorrSequence& r, std::size_t p) {
    if (r.r.size() < p) {
        throw ShapeError("autocorrelation too short for Toeplitz order " + std::to_string(p));
    }
    Eigen::MatrixXd R(p, p);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            R(i, j) = r.r[i > j ? i - j : j - i];
        }
    }
    return R;
}

std::vector<double> solve_yule_walker(const AutocorrSequence& r, std::size_t p) {
    if (p == 0) {
        throw InvalidArgument("AR order must be at least 1");
    }
    if (r.r.size() < p + 1) {
        throw ShapeError("Yule-Walker order " + std::to_string(p) + " needs lags up to " +
                         std::to_string(p));
    }
    const double r0 = r.r[0];
    if (!(r0 > 0.0)) {
        throw DegenerateSeries("r(0) must be positive");
    }

    // Levinson-Durbin. a[j] multiplies x(n - j) for the order-k predictor (a[0] unused).
    std::vector<double> a(p + 1, 0.0);
    std::vector<double> prev(p + 1, 0.0);
    double error = r0;
    bool recursion_ok = true;
    for (std::size_t k = 1; k <= p; ++k) {
        if (!(error > 1e-12 * r0)) {
            recursion_ok = false;
            break;
        }
        double acc = r.r[k];
        for (std::size_t j = 1; j < k; ++j) {
            acc -= a[j] * r.r[k - j];
        }
        const double reflection = acc / error;
        prev = a;
        a[k] = reflection;
        for (std::size_t j = 1; j < k; ++j) {
            a[j] = prev[j] - reflection * prev[k - j];
        }
        error *= (1.0 - reflection * reflection);
    }

    const Eigen::MatrixXd R = toeplitz(r, p);
    const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(r.r.data() + 1, static_cast<Eigen::Index>(p));
    const double tolerance = 1e-8 * r0;

    if (recursion_ok) {
        const Eigen::VectorXd sol = Eigen::Map<const Eigen::VectorXd>(a.data() + 1, static_cast<Eigen::Index>(p));
        if (all_finite(sol) && max_residual(R, sol, rhs) <= tolerance) {
            return {a.begin() + 1, a.end()};
        }
    }

    const Eigen::VectorXd dense = R.fullPivLu().solve(rhs);
    if (all_finite(dense) && max_residual(R, dense, rhs) <= tolerance) {
        return {dense.data(), dense.data() + dense.size()};
    }

    Eigen::MatrixXd jittered = R;
    jittered.diagonal().array() += 1e-10 * r0;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(jittered);
    const Eigen::VectorXd regularized = ldlt.solve(rhs);
    if (ldlt.info() == Eigen::Success && all_finite(regularized) &&
        max_residual(jittered, regularized, rhs) <= tolerance) {
        return {regularized.data(), regularized.data() + regularized.size()};
    }
    throw EstimationError("Yule-Walker system is singular", condition_estimate(R));
}

double ar_predict(const ArModel& model, std::span<const double> window) {
    require_same_length(model.coeffs.size(), window.size(), "ar_predict");
    double acc = 0.0;
    for (std::size_t i = 0; i < window.size(); ++i) {
        acc += model.coeffs[i] * window[i];
    }
    return acc;
}

void apply_memory(std::span<const double> coeffs, std::span<const double> window,
                  std::span<double> out) {
    require_same_length(coeffs.size(), window.size(), "apply_memory");
    require_same_length(coeffs.size(), out.size(), "apply_memory output");
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        out[i] = coeffs[i] * window[i];
    }
}

std::vector<double> apply_memory(std::span<const double> coeffs, std::span<const double> window) {
    std::vector<double> out(coeffs.size());
    apply_memory(coeffs, window, out);
    return out;
}

namespace {

void check_objective_shapes(std::span<const double> w, const Eigen::MatrixXd& R,
                            std::span<const double> rho) {
    const auto p = static_cast<Eigen::Index>(w.size());
    if (R.rows() != p || R.cols() != p || rho.size() != w.size()) {
        throw ShapeError("memory objective dimension mismatch");
    }
}

}  // namespace

double memory_objective(std::span<const double> w, const Eigen::MatrixXd& R,
                        std::span<const double> rho) {
    check_objective_shapes(w, R, rho);
    const auto p = static_cast<Eigen::Index>(w.size());
    const Eigen::Map<const Eigen::VectorXd> wv(w.data(), p);
    const Eigen::Map<const Eigen::VectorXd> rv(rho.data(), p);
    return wv.dot(rv) - 0.5 * wv.dot(R * wv);
}

std::vector<double> memory_objective_gradient(std::span<const double> w, const Eigen::MatrixXd& R,
                                              std::span<const double> rho) {
    check_objective_shapes(w, R, rho);
    const auto p = static_cast<Eigen::Index>(w.size());
    const Eigen::Map<const Eigen::VectorXd> wv(w.data(), p);
    const Eigen::Map<const Eigen::VectorXd> rv(rho.data(), p);
    const Eigen::VectorXd g = rv - R * wv;
    return {g.data(), g.data() + g.size()};
}

ArModel fit_ar(std::span<const double> train, std::size_t p, int d) {
    if (d != 0 && d != 1) {
        throw InvalidArgument("differencing degree must be 0 or 1");
    }
    if (p == 0) {
        throw InvalidArgument("AR order must be at least 1");
    }
    std::vector<double> work(train.begin(), train.end());
    if (d == 1) {
        work = difference(work);
    }
    const std::size_t n = work.size();
    if (n <= p + 1) {
        throw InvalidArgument("AR(" + std::to_string(p) + ") needs more than " + std::to_string(p + 1) +
                              " samples after differencing, got " + std::to_string(n));
    }
    if (4 * p > n) {
        throw InvalidArgument("AR(" + std::to_string(p) + ") needs at least " + std::to_string(4 * p) +
                              " samples after differencing (order <= N/4), got " + std::to_string(n));
    }
    const auto [lo, hi] = std::minmax_element(work.begin(), work.end());
    if (*hi - *lo <= 1e-12 * std::max(1.0, std::max(std::abs(*lo), std::abs(*hi)))) {
        throw DegenerateSeries(d == 1 ? "differenced series is constant" : "series is constant");
    }
    ArModel model{solve_yule_walker(autocorrelation(work, p), p), d};
    model.validate();
    return model;
}

ArModel fit_ar(const TimeSeries& train, std::size_t p, int d) { return fit_ar(train.values(), p, d); }

}  // namespace arkan
