#pragma once

#include <functional>
#include <vector>

namespace hotcat {

struct SimplexOptions {
    int max_iterations = 20000;
    double rel_tol = 1e-10;  // relative spread of objective values across the simplex
    double initial_step = 0.1;  // relative; absolute when the coordinate is 0
    int starts = 5;
    unsigned seed = 12345;
};

struct SimplexResult {
    std::vector<double> x;
    double value = 0;
    int iterations = 0;
    bool converged = false;
};

using Objective = std::function<double(const std::vector<double>&)>;

// Nelder-Mead from a single start, restarted at its own optimum until a
// restart no longer improves the value.
SimplexResult nelder_mead(const Objective& f, std::vector<double> x0, const SimplexOptions& opt = {});

// best of `starts` runs: x0 itself and x0 with each coordinate perturbed
// multiplicatively by up to +-20% (deterministic for a fixed seed)
SimplexResult multistart_nelder_mead(const Objective& f, const std::vector<double>& x0,
                                     const SimplexOptions& opt = {});

}  // namespace hotcat
