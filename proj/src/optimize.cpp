#include "hotcat/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace hotcat {

namespace {

SimplexResult single_run(const Objective& f, const std::vector<double>& x0, const SimplexOptions& opt,
                         int budget) {
    const size_t n = x0.size();
    std::vector<std::vector<double>> p(n + 1, x0);
    for (size_t i = 0; i < n; ++i) {
        const double h = x0[i] != 0 ? opt.initial_step * x0[i] : opt.initial_step;
        p[i + 1][i] += h;
    }
    std::vector<double> fv(n + 1);
    for (size_t i = 0; i <= n; ++i) fv[i] = f(p[i]);

    SimplexResult r;
    std::vector<size_t> idx(n + 1);
    auto point = [&](const std::vector<double>& c, const std::vector<double>& w, double t) {
        std::vector<double> x(n);
        for (size_t j = 0; j < n; ++j) x[j] = c[j] + t * (w[j] - c[j]);
        return x;
    };
    int it = 0;
    for (; it < budget; ++it) {
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return fv[a] < fv[b]; });
        const double lo = fv[idx[0]], hi = fv[idx[n]];
        if (std::abs(hi - lo) <= opt.rel_tol * (std::abs(lo) + std::abs(hi)) + 1e-300) {
            r.converged = true;
            break;
        }
        std::vector<double> c(n, 0.0);
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j) c[j] += p[idx[i]][j] / n;
        const size_t w = idx[n];
        const auto xr = point(c, p[w], -1.0);
        const double fr = f(xr);
        if (fr < lo) {
            const auto xe = point(c, p[w], -2.0);
            const double fe = f(xe);
            if (fe < fr) {
                p[w] = xe;
                fv[w] = fe;
            } else {
                p[w] = xr;
                fv[w] = fr;
            }
        } else if (fr < fv[idx[n - 1]]) {
            p[w] = xr;
            fv[w] = fr;
        } else {
            const bool outside = fr < hi;
            const auto xc = point(c, outside ? xr : p[w], 0.5);
            const double fc = f(xc);
            if (fc < (outside ? fr : hi)) {
                p[w] = xc;
                fv[w] = fc;
            } else {
                for (size_t i = 1; i <= n; ++i) {
                    p[idx[i]] = point(p[idx[0]], p[idx[i]], 0.5);
                    fv[idx[i]] = f(p[idx[i]]);
                }
            }
        }
    }
    const size_t best = std::min_element(fv.begin(), fv.end()) - fv.begin();
    r.x = p[best];
    r.value = fv[best];
    r.iterations = it;
    return r;
}

}  // namespace

SimplexResult nelder_mead(const Objective& f, std::vector<double> x0, const SimplexOptions& opt) {
    SimplexResult best;
    best.x = x0;
    best.value = f(x0);
    int used = 0;
    for (int restart = 0; restart < 20 && used < opt.max_iterations; ++restart) {
        SimplexResult r = single_run(f, best.x, opt, opt.max_iterations - used);
        used += r.iterations;
        const bool improved = r.value < best.value * (1 - opt.rel_tol) - 1e-300;
        if (r.value <= best.value) {
            best.x = r.x;
            best.value = r.value;
        }
        best.converged = r.converged;
        if (!improved) break;
    }
    best.iterations = used;
    return best;
}

SimplexResult multistart_nelder_mead(const Objective& f, const std::vector<double>& x0, const SimplexOptions& opt) {
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> u(-0.2, 0.2);
    SimplexResult best;
    bool have = false;
    int total = 0;
    for (int s = 0; s < std::max(1, opt.starts); ++s) {
        std::vector<double> x = x0;
        if (s > 0)
            for (double& v : x) v = v != 0 ? v * (1 + u(rng)) : u(rng);
        SimplexResult r = nelder_mead(f, x, opt);
        total += r.iterations;
        if (!have || r.value < best.value) {
            best = r;
            have = true;
        }
    }
    best.iterations = total;
    return best;
}

}  // namespace hotcat
