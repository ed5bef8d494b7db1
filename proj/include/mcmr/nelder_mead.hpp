// nelder_mead.hpp: derivative-free simplex minimizer

#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace mcmr::optim {

struct NelderMeadOptions {
    std::size_t max_evaluations = 4000;
    double f_tolerance = 1e-16;  // spread of simplex values
    double x_tolerance = 1e-10;  // simplex diameter
    double initial_step = 0.5;   // scaled per coordinate by `scales`
    bool adaptive = true;        // dimension-dependent coefficients (Gao & Han)
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t evaluations = 0;
    bool converged = false;
};

using Objective = std::function<double(const std::vector<double>&)>;

/// Minimize `f` starting from `x0`. `scales` (optional, same size as x0)
/// sets the initial simplex edge per coordinate.
NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& options = {},
                             const std::vector<double>& scales = {});

}  // namespace mcmr::optim
