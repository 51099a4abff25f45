#include <cmath>
#include <stdexcept>

#include "bandsing/experiments.hpp"

namespace bandsing {

ScalingFit fit_scaling(const std::vector<ScalingPoint>& points, double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("fit_scaling: alpha must be positive");
    ScalingFit fit;
    fit.alpha = alpha;
    fit.points = points;

    double sxy = 0.0, sxx = 0.0;
    std::size_t used = 0;
    for (const auto& pt : points) {
        if (!(pt.value > 0.0) || pt.value > 1.0)
            throw std::invalid_argument("fit_scaling: value at n = " + std::to_string(pt.n) + " is outside (0, 1]");
        const double x = std::pow(static_cast<double>(pt.n), alpha / 2);
        const double y = -std::log(pt.value);
        fit.x.push_back(x);
        fit.y.push_back(y);
        if (pt.censored) continue;
        sxy += x * y;
        sxx += x * x;
        ++used;
    }
    if (used < 2) throw std::invalid_argument("fit_scaling: need at least two uncensored points");
    fit.C = sxy / sxx;

    double mean = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
        if (!points[i].censored) mean += fit.y[i];
    mean /= static_cast<double>(used);

    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].censored) {
            fit.residuals.push_back(0.0);
            // The bound is one-sided: it must not fall below the fitted curve.
            fit.consistent.push_back(points[i].value >= std::exp(-fit.C * fit.x[i]));
            continue;
        }
        const double r = fit.y[i] - fit.C * fit.x[i];
        fit.residuals.push_back(r);
        fit.consistent.push_back(true);
        ss_res += r * r;
        ss_tot += (fit.y[i] - mean) * (fit.y[i] - mean);
    }
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
    return fit;
}

}  // namespace bandsing
