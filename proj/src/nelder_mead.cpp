#include "mcmr/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace mcmr::optim {

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& options,
                             const std::vector<double>& scales) {
    const std::size_t n = x0.size();
    if (n == 0) {
        throw std::invalid_argument("nelder_mead: empty parameter vector");
    }
    if (!scales.empty() && scales.size() != n) {
        throw std::invalid_argument("nelder_mead: scales size mismatch");
    }

    const double dn = static_cast<double>(n);
    const double alpha = 1.0;
    const double gamma = options.adaptive ? 1.0 + 2.0 / dn : 2.0;
    const double rho = options.adaptive ? 0.75 - 1.0 / (2.0 * dn) : 0.5;
    const double sigma = options.adaptive ? 1.0 - 1.0 / dn : 0.5;

    std::size_t evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evals;
        const double v = f(x);
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };

    std::vector<std::vector<double>> simplex(n + 1, x0);
    std::vector<double> values(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = options.initial_step * (scales.empty() ? 1.0 : scales[i]);
        simplex[i + 1][i] += s;
    }
    for (std::size_t i = 0; i <= n; ++i) {
        values[i] = eval(simplex[i]);
    }

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), trial(n), trial2(n);
    bool converged = false;

    auto point = [&](double t, const std::vector<double>& worst, std::vector<double>& out) {
        for (std::size_t j = 0; j < n; ++j) {
            out[j] = centroid[j] + t * (centroid[j] - worst[j]);
        }
    };

    while (evals < options.max_evaluations) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[n - 1];

        double diameter = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                diameter = std::max(diameter, std::abs(simplex[i][j] - simplex[best][j]));
            }
        }
        if (values[worst] - values[best] <= options.f_tolerance && diameter <= options.x_tolerance) {
            converged = true;
            break;
        }
        if (diameter <= options.x_tolerance * 1e-3) {
            converged = true;
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) {
                continue;
            }
            for (std::size_t j = 0; j < n; ++j) {
                centroid[j] += simplex[i][j] / dn;
            }
        }

        point(alpha, simplex[worst], trial);
        const double fr = eval(trial);
        if (fr < values[best]) {
            point(alpha * gamma, simplex[worst], trial2);
            const double fe = eval(trial2);
            if (fe < fr) {
                simplex[worst] = trial2;
                values[worst] = fe;
            } else {
                simplex[worst] = trial;
                values[worst] = fr;
            }
            continue;
        }
        if (fr < values[second]) {
            simplex[worst] = trial;
            values[worst] = fr;
            continue;
        }
        const bool outside = fr < values[worst];
        point(outside ? alpha * rho : -rho, simplex[worst], trial2);
        const double fc = eval(trial2);
        if (fc < (outside ? fr : values[worst])) {
            simplex[worst] = trial2;
            values[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) {
                continue;
            }
            for (std::size_t j = 0; j < n; ++j) {
                simplex[i][j] = simplex[best][j] + sigma * (simplex[i][j] - simplex[best][j]);
            }
            values[i] = eval(simplex[i]);
        }
    }

    const auto it = std::min_element(values.begin(), values.end());
    const auto idx = static_cast<std::size_t>(it - values.begin());
    return {simplex[idx], *it, evals, converged};
}

}  // namespace mcmr::optim
