#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "arkan/series.hpp"

namespace arkan {

/// Linear predictor x(n+1) = sum_i coeffs[i] * w(n-i) on the d-times differenced series w.
struct ArModel {
    std::vector<double> coeffs;
    int d = 0;

    [[nodiscard]] std::size_t order() const noexcept { return coeffs.size(); }

    /// Throws InvalidArgument on empty or non-finite coefficients or d outside {0, 1}.
    void validate() const;

    friend bool operator==(const ArModel&, const ArModel&) = default;
};

/// Autocorrelation r[0..maxlag] of a (standardized) series, r[0] > 0.
struct AutocorrSequence {
    std::vector<double> r;

    [[nodiscard]] std::size_t max_lag() const noexcept { return r.empty() ? 0 : r.size() - 1; }
};

/// r(i) = 1/(N-i) * sum_{n=i}^{N-1} x(n) x(n-i), without mean removal.
///
/// Requires N > maxlag and N - maxlag >= 2. An all-zero series raises DegenerateSeries.
[[nodiscard]] AutocorrSequence autocorrelation(std::span<const double> x, std::size_t maxlag);
[[nodiscard]] AutocorrSequence autocorrelation(const TimeSeries& ts, std::size_t maxlag);

/// Symmetric Toeplitz matrix R(i, j) = r(|i - j|) of size p x p.
[[nodiscard]] Eigen::MatrixXd toeplitz(const AutocorrSequence& r, std::size_t p);

/// Solves R a = [r(1) .. r(p)] by Levinson-Durbin recursion.
///
/// When the recursion's prediction error drops to 1e-12 r(0) or below, or the
/// solution's residual exceeds 1e-8 r(0), the system is re-solved densely, and
/// once more with 1e-10 r(0) added to the diagonal if that also fails. Raises
/// EstimationError (with a condition estimate) when no route yields a finite
/// solution.
[[nodiscard]] std::vector<double> solve_yule_walker(const AutocorrSequence& r, std::size_t p);

/// sum_i coeffs[i] * window[i], with window[i] = x(n - i).
[[nodiscard]] double ar_predict(const ArModel& model, std::span<const double> window);

/// Per-lag filter outputs coeffs[i] * window[i]; the sum is left to the nonlinear stage.
[[nodiscard]] std::vector<double> apply_memory(std::span<const double> coeffs,
                                               std::span<const double> window);
void apply_memory(std::span<const double> coeffs, std::span<const double> window,
                  std::span<double> out);

/// L(w) = w^T rho - 1/2 w^T R w, maximized at w = R^{-1} rho.
[[nodiscard]] double memory_objective(std::span<const double> w, const Eigen::MatrixXd& R,
                                      std::span<const double> rho);

/// dL/dw = rho - R w.
[[nodiscard]] std::vector<double> memory_objective_gradient(std::span<const double> w,
                                                            const Eigen::MatrixXd& R,
                                                            std::span<const double> rho);

/// Differences `train` d times (d in {0, 1}), then fits order-p Yule-Walker coefficients.
///
/// `train` must already be standardized. Needs p <= N/4 and N > p + 1 after
/// differencing; a constant (differenced) series raises DegenerateSeries.
[[nodiscard]] ArModel fit_ar(const TimeSeries& train, std::size_t p, int d = 0);
[[nodiscard]] ArModel fit_ar(std::span<const double> train, std::size_t p, int d = 0);

}  // namespace arkan
