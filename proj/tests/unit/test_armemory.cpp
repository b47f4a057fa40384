#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "arkan/armemory.hpp"
#include "arkan/error.hpp"
#include "oracles.hpp"

using namespace arkan;

TEST(Autocorrelation, AlternatingSeries) {
    const auto r = autocorrelation(std::vector<double>{1, -1, 1, -1}, 2);
    ASSERT_EQ(r.r.size(), 3u);
    EXPECT_DOUBLE_EQ(r.r[0], 1.0);
    EXPECT_DOUBLE_EQ(r.r[1], -1.0);
    EXPECT_DOUBLE_EQ(r.r[2], 1.0);
}

TEST(Autocorrelation, Constant) {
    const auto r = autocorrelation(std::vector<double>(7, 3.0), 1);
    EXPECT_DOUBLE_EQ(r.r[0], 9.0);
    EXPECT_DOUBLE_EQ(r.r[1], 9.0);
}

TEST(Autocorrelation, MatchesDirectSums) {
    std::mt19937_64 gen(5);
    std::normal_distribution<double> noise;
    std::vector<double> x(97);
    for (auto& v : x) {
        v = noise(gen);
    }
    const auto r = autocorrelation(x, 30);
    const auto expected = oracle::lagged_products(x, 30);
    for (std::size_t i = 0; i <= 30; ++i) {
        EXPECT_NEAR(r.r[i], expected[i], 1e-14);
    }
}

TEST(Autocorrelation, Ar1Theory) {
    const auto x = oracle::simulate_ar({0.5}, 100000, 42);
    const auto r = autocorrelation(x, 3);
    EXPECT_NEAR(r.r[1] / r.r[0], 0.5, 0.02);
    EXPECT_NEAR(r.r[2] / r.r[0], 0.25, 0.02);
}

TEST(Autocorrelation, BoundedByLagZero) {
    std::mt19937_64 gen(9);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 60 + gen() % 400;
        const auto x = oracle::simulate_ar(oracle::random_stable_ar(1 + gen() % 5, gen), n, gen());
        const auto r = autocorrelation(x, n / 2);
        for (std::size_t i = 0; i <= n / 2 && n - i >= 30; ++i) {
            EXPECT_LE(std::abs(r.r[i]), r.r[0] * (1 + 1e-9)) << "n=" << n << " lag " << i;
        }
    }
}

TEST(Autocorrelation, Errors) {
    EXPECT_THROW((void)autocorrelation(std::vector<double>{1, 2, 3}, 3), InvalidArgument);
    EXPECT_THROW((void)autocorrelation(std::vector<double>{1, 2, 3}, 2), InvalidArgument);
    EXPECT_THROW((void)autocorrelation(std::vector<double>{0, 0, 0}, 1), DegenerateSeries);
}

TEST(Toeplitz, Layout) {
    const auto R = toeplitz(AutocorrSequence{{4, 2, 1, 0.5}}, 3);
    EXPECT_EQ(R(0, 0), 4);
    EXPECT_EQ(R(0, 2), 1);
    EXPECT_EQ(R(2, 0), 1);
    EXPECT_EQ(R(1, 2), 2);
    EXPECT_THROW((void)toeplitz(AutocorrSequence{{1, 0.5}}, 3), ShapeError);
}

TEST(YuleWalker, GeometricAutocorrelationGivesOneTap) {
    const AutocorrSequence r{{1, 0.5, 0.25, 0.125}};
    const auto a = solve_yule_walker(r, 3);
    const auto dense = oracle::gauss_solve(oracle::toeplitz(r.r, 3), {0.5, 0.25, 0.125});
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_NEAR(a[i], dense[i], 1e-12);
    }
    EXPECT_NEAR(a[0], 0.5, 1e-12);
    EXPECT_NEAR(a[1], 0.0, 1e-12);
    EXPECT_NEAR(a[2], 0.0, 1e-12);
}

TEST(YuleWalker, WhiteNoise) {
    const auto a = solve_yule_walker(AutocorrSequence{{1, 0, 0}}, 2);
    EXPECT_EQ(a, (std::vector<double>{0, 0}));
}

TEST(YuleWalker, MatchesDenseSolveOnRandomOrder10) {
    std::mt19937_64 gen(2024);
    for (int trial = 0; trial < 100; ++trial) {
        const auto x = oracle::simulate_ar(oracle::random_stable_ar(10, gen), 2000, gen());
        const auto r = autocorrelation(x, 10);
        const auto a = solve_yule_walker(r, 10);
        const std::vector<double> rho(r.r.begin() + 1, r.r.end());
        const auto dense = oracle::gauss_solve(oracle::toeplitz(r.r, 10), rho);
        for (std::size_t i = 0; i < 10; ++i) {
            EXPECT_NEAR(a[i], dense[i], 1e-8) << "trial " << trial;
        }
    }
}

TEST(YuleWalker, ResidualBound) {
    std::mt19937_64 gen(7);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t p = 1 + gen() % 20;
        const auto x = oracle::simulate_ar(oracle::random_stable_ar(1 + gen() % 6, gen), 1500, gen());
        const auto r = autocorrelation(x, p);
        const auto a = solve_yule_walker(r, p);
        const auto R = toeplitz(r, p);
        for (std::size_t i = 0; i < p; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < p; ++j) {
                s += R(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * a[j];
            }
            EXPECT_LE(std::abs(s - r.r[i + 1]), 1e-8 * r.r[0]);
        }
    }
}

TEST(YuleWalker, SingularFallsBackOrFails) {
    // A pure sinusoid sampled at 4 points per period gives a rank-2 Toeplitz matrix.
    const AutocorrSequence r{{1, 0, -1, 0, 1}};
    try {
        const auto a = solve_yule_walker(r, 4);
        const auto R = toeplitz(r, 4);
        for (std::size_t i = 0; i < 4; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < 4; ++j) {
                s += R(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * a[j];
            }
            EXPECT_NEAR(s, r.r[i + 1], 1e-6);
        }
    } catch (const EstimationError& e) {
        EXPECT_GT(e.condition(), 1e8);
    }
    EXPECT_THROW((void)solve_yule_walker(AutocorrSequence{{0, 0, 0}}, 2), Error);
}

TEST(ArPredict, HandExamples) {
    EXPECT_DOUBLE_EQ(ar_predict(ArModel{{1, 0}, 0}, std::vector<double>{3.5, 9}), 3.5);
    EXPECT_DOUBLE_EQ(ar_predict(ArModel{{0.5, 0.5}, 0}, std::vector<double>{2, 4}), 3.0);
    EXPECT_NEAR(ar_predict(ArModel{{0.2, -0.1, 0.3}, 0}, std::vector<double>{1, 2, 3}), 0.9, 1e-15);
    EXPECT_THROW((void)ar_predict(ArModel{{1, 2}, 0}, std::vector<double>{1}), ShapeError);
}

TEST(ApplyMemory, HandExamples) {
    EXPECT_EQ(apply_memory(std::vector<double>{1, 1, 1}, std::vector<double>{4, 5, 6}),
              (std::vector<double>{4, 5, 6}));
    EXPECT_EQ(apply_memory(std::vector<double>{0, 0}, std::vector<double>{7, 8}), (std::vector<double>{0, 0}));
    EXPECT_EQ(apply_memory(std::vector<double>{0.5, -2}, std::vector<double>{2, 1}), (std::vector<double>{1, -2}));
    EXPECT_THROW((void)apply_memory(std::vector<double>{1}, std::vector<double>{1, 2}), ShapeError);
}

TEST(ApplyMemory, SumEqualsArPredict) {
    std::mt19937_64 gen(4);
    std::normal_distribution<double> n;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> a(20);
        std::vector<double> w(20);
        for (std::size_t i = 0; i < 20; ++i) {
            a[i] = n(gen);
            w[i] = n(gen);
        }
        const auto y = apply_memory(a, w);
        double s = 0.0;
        for (double v : y) {
            s += v;
        }
        EXPECT_EQ(s, ar_predict(ArModel{a, 0}, w));
    }
}

TEST(MemoryObjective, ZeroAndStationaryPoint) {
    const AutocorrSequence r{{1, 0.6, 0.2, -0.1}};
    const auto R = toeplitz(r, 3);
    const std::vector<double> rho{0.6, 0.2, -0.1};
    EXPECT_EQ(memory_objective(std::vector<double>{0, 0, 0}, R, rho), 0.0);

    const auto w = solve_yule_walker(r, 3);
    double quad = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        quad += rho[i] * w[i];
    }
    EXPECT_NEAR(memory_objective(w, R, rho), 0.5 * quad, 1e-12);
    for (double g : memory_objective_gradient(w, R, rho)) {
        EXPECT_NEAR(g, 0.0, 1e-12);
    }
}

TEST(MemoryObjective, PerturbationsDecrease) {
    std::mt19937_64 gen(77);
    std::normal_distribution<double> n;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t p = 2 + gen() % 8;
        Eigen::MatrixXd A = Eigen::MatrixXd::Random(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
        const Eigen::MatrixXd R = A * A.transpose() + 0.1 * Eigen::MatrixXd::Identity(A.rows(), A.cols());
        std::vector<double> rho(p);
        for (auto& v : rho) {
            v = n(gen);
        }
        const Eigen::VectorXd ws = R.ldlt().solve(Eigen::Map<Eigen::VectorXd>(rho.data(), static_cast<Eigen::Index>(p)));
        const std::vector<double> w(ws.data(), ws.data() + p);
        const double best = memory_objective(w, R, rho);
        for (int k = 0; k < 20; ++k) {
            std::vector<double> delta(p);
            double norm = 0.0;
            for (auto& d : delta) {
                d = n(gen);
                norm += d * d;
            }
            auto moved = w;
            for (std::size_t i = 0; i < p; ++i) {
                moved[i] += 0.1 * delta[i] / std::sqrt(norm);
            }
            EXPECT_LT(memory_objective(moved, R, rho), best);
        }
    }
}

TEST(FitAr, RecoversAr2) {
    const auto x = oracle::simulate_ar({0.5, -0.3}, 5000, 1);
    const auto m = fit_ar(x, 2, 0);
    EXPECT_EQ(m.d, 0);
    EXPECT_NEAR(m.coeffs[0], 0.5, 0.05);
    EXPECT_NEAR(m.coeffs[1], -0.3, 0.05);
}

TEST(FitAr, WhiteNoiseSmallCoefficients) {
    const auto x = oracle::simulate_ar({}, 10000, 8);
    const auto m = fit_ar(x, 5, 0);
    for (double a : m.coeffs) {
        EXPECT_LE(std::abs(a), 0.1);
    }
}

TEST(FitAr, RampDifferencedIsDegenerate) {
    std::vector<double> ramp(100);
    for (std::size_t i = 0; i < ramp.size(); ++i) {
        ramp[i] = static_cast<double>(i);
    }
    EXPECT_THROW((void)fit_ar(ramp, 1, 1), DegenerateSeries);
}

TEST(FitAr, DifferencingMatchesManualDifference) {
    const auto x = oracle::simulate_ar({0.3}, 800, 3);
    std::vector<double> walk(x.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        acc += x[i];
        walk[i] = acc;
    }
    const auto m = fit_ar(walk, 4, 1);
    EXPECT_EQ(m.d, 1);
    EXPECT_EQ(m.coeffs, fit_ar(difference(walk), 4, 0).coeffs);
}

TEST(FitAr, Preconditions) {
    EXPECT_THROW((void)fit_ar(std::vector<double>{1, -1, 1, -1, 1, -1, 1, -1}, 3, 0), InvalidArgument);
    EXPECT_THROW((void)fit_ar(std::vector<double>{1, -1, 1}, 1, 2), InvalidArgument);
    EXPECT_THROW((void)fit_ar(std::vector<double>{1, -1, 1, 2}, 0, 0), InvalidArgument);
}

TEST(ArModel, Validate) {
    EXPECT_THROW((ArModel{{}, 0}.validate()), InvalidArgument);
    EXPECT_THROW((ArModel{{1}, 2}.validate()), InvalidArgument);
    EXPECT_THROW((ArModel{{NAN}, 0}.validate()), InvalidArgument);
    EXPECT_NO_THROW((ArModel{{1}, 1}.validate()));
}
