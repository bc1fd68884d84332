#include <doctest.h>

#include <cmath>

#include "spinchain/estimators.hpp"
#include "spinchain/fitting.hpp"

using namespace spinchain;

TEST_CASE("linear fit recovers an exact line in the slope/offset convention") {
    std::vector<std::pair<double, double>> pts;
    for (int l = 3; l <= 9; ++l) pts.emplace_back(l, -0.1 + 0.3 * l);
    const FitResult fit = fit_linear(pts);
    CHECK(fit.c0 == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(fit.c1 == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(fit.residual_norm < 1e-12);
}

TEST_CASE("linear fit reproduces the nonresonant coefficients from their own line") {
    const double a = 0.02;
    const NrCoefficients c = nr_coefficients(a);
    std::vector<std::pair<double, double>> pts;
    for (int l = 3; l <= 9; ++l) pts.emplace_back(l, p_nr(l, a));
    const FitResult fit = fit_linear(pts);
    CHECK(fit.c0 == doctest::Approx(c.p0).epsilon(1e-10));
    CHECK(fit.c1 == doctest::Approx(c.p1).epsilon(1e-10));
}

TEST_CASE("power-law fit recovers exact power data") {
    std::vector<std::pair<double, double>> pts;
    for (double x : {0.01, 0.02, 0.04, 0.08}) pts.emplace_back(x, 2.0 * x * x * x);
    const FitResult fit = fit_power_law(pts);
    CHECK(fit.c0 == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(fit.c1 == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("power-law fit is scale equivariant and idempotent") {
    std::vector<std::pair<double, double>> pts = {
        {0.01, 3.1e-4}, {0.02, 1.4e-3}, {0.045, 6.3e-3}, {0.09, 2.8e-2}};
    const FitResult base = fit_power_law(pts);
    SUBCASE("scaling y scales the multiplier only") {
        std::vector<std::pair<double, double>> scaled = pts;
        for (auto& [x, y] : scaled) y *= 7.5;
        const FitResult fit = fit_power_law(scaled);
        CHECK(fit.c0 == doctest::Approx(7.5 * base.c0).epsilon(1e-12));
        CHECK(fit.c1 == doctest::Approx(base.c1).epsilon(1e-12));
    }
    SUBCASE("refitting its own curve returns the same parameters") {
        std::vector<std::pair<double, double>> regen;
        for (const auto& [x, y] : pts) regen.emplace_back(x, base.c0 * std::pow(x, base.c1));
        const FitResult fit = fit_power_law(regen);
        CHECK(fit.c0 == doctest::Approx(base.c0).epsilon(1e-10));
        CHECK(fit.c1 == doctest::Approx(base.c1).epsilon(1e-10));
    }
}

TEST_CASE("degenerate and invalid inputs are rejected") {
    std::vector<std::pair<double, double>> same_x = {{2.0, 1.0}, {2.0, 2.0}, {2.0, 3.0}};
    CHECK_THROWS_AS(fit_linear(same_x), std::invalid_argument);
    std::vector<std::pair<double, double>> two = {{1.0, 1.0}, {2.0, 2.0}};
    CHECK_THROWS_AS(fit_linear(two), std::invalid_argument);
    std::vector<std::pair<double, double>> negative = {{0.1, 1.0}, {0.2, -2.0}, {0.3, 3.0}};
    CHECK_THROWS_AS(fit_power_law(negative), std::invalid_argument);
}

TEST_CASE("fit JSON names the model") {
    std::vector<std::pair<double, double>> pts = {{1.0, 2.0}, {2.0, 4.0}, {3.0, 6.1}};
    const std::string j = fit_result_json(fit_linear(pts));
    CHECK(j.find("\"model\":\"linear\"") != std::string::npos);
    CHECK(j.find("\"c0\"") != std::string::npos);
    CHECK(j.find("\"residual_norm\"") != std::string::npos);
}
