#pragma once

#include <string>
#include <utility>
#include <vector>

namespace spinchain {

enum class FitModel { linear, power_law };

// Least-squares fit result. For linear fits of y = -c0 + c1 x the pair
// (c0, c1) follows the (P0, P1) sign convention of the scaling law; for
// power-law fits y = c0 x^c1 the pair is (multiplier, exponent).
struct FitResult {
    FitModel model = FitModel::linear;
    double c0 = 0.0;
    double c1 = 0.0;
    double c0_stderr = 0.0;
    double c1_stderr = 0.0;
    double residual_norm = 0.0;  // in log space for power-law fits
};

// Ordinary least squares of y against x, reported as (-intercept, slope).
// Needs >= 3 points with distinct x.
FitResult fit_linear(const std::vector<std::pair<double, double>>& points);

// Log-log ordinary least squares; all x and y must be positive.
FitResult fit_power_law(const std::vector<std::pair<double, double>>& points);

std::string fit_result_json(const FitResult& fit);

}  // namespace spinchain
