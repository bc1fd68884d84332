#include "spinchain/fitting.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace spinchain {

namespace {

struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double intercept_err = 0.0;
    double slope_err = 0.0;
    double rss = 0.0;
};

LineFit ols(const std::vector<std::pair<double, double>>& pts) {
    const auto n = static_cast<double>(pts.size());
    double sx = 0.0, sy = 0.0;
    for (const auto& [x, y] : pts) {
        sx += x;
        sy += y;
    }
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : pts) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit: degenerate design, all x equal");

    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    for (const auto& [x, y] : pts) {
        const double r = y - (f.intercept + f.slope * x);
        f.rss += r * r;
    }
    if (pts.size() > 2) {
        const double sigma2 = f.rss / (n - 2.0);
        f.slope_err = std::sqrt(sigma2 / sxx);
        f.intercept_err = std::sqrt(sigma2 * (1.0 / n + mx * mx / sxx));
    }
    return f;
}

}  // namespace

FitResult fit_linear(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) throw std::invalid_argument("fit_linear: need at least 3 points");
    const LineFit f = ols(points);
    FitResult out;
    out.model = FitModel::linear;
    out.c0 = -f.intercept;
    out.c1 = f.slope;
    out.c0_stderr = f.intercept_err;
    out.c1_stderr = f.slope_err;
    out.residual_norm = std::sqrt(f.rss);
    return out;
}

FitResult fit_power_law(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) throw std::invalid_argument("fit_power_law: need at least 3 points");
    std::vector<std::pair<double, double>> logs;
    logs.reserve(points.size());
    for (const auto& [x, y] : points) {
        if (x <= 0.0 || y <= 0.0)
            throw std::invalid_argument("fit_power_law: requires positive x and y");
        logs.emplace_back(std::log(x), std::log(y));
    }
    const LineFit f = ols(logs);
    FitResult out;
    out.model = FitModel::power_law;
    out.c0 = std::exp(f.intercept);
    out.c1 = f.slope;
    out.c0_stderr = out.c0 * f.intercept_err;  // delta method on exp(intercept)
    out.c1_stderr = f.slope_err;
    out.residual_norm = std::sqrt(f.rss);
    return out;
}

std::string fit_result_json(const FitResult& fit) {
    nlohmann::json j;
    j["model"] = fit.model == FitModel::linear ? "linear" : "power_law";
    j["c0"] = fit.c0;
    j["c1"] = fit.c1;
    j["c0_stderr"] = fit.c0_stderr;
    j["c1_stderr"] = fit.c1_stderr;
    j["residual_norm"] = fit.residual_norm;
    return j.dump();
}

}  // namespace spinchain
