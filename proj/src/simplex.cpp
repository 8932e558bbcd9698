#include "qxct/simplex.hpp"
#include "qxct/common.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qxct::tune {

namespace {

class Budgeted {
public:
    Budgeted(const Objective& f, std::size_t budget) : f_(f), budget_(budget) {}

    double operator()(std::span<const double> x) {
        ++used_;
        return f_(x);
    }

    bool exhausted() const noexcept { return used_ >= budget_; }
    std::size_t used() const noexcept { return used_; }

private:
    const Objective& f_;
    std::size_t budget_;
    std::size_t used_ = 0;
};

// One Nelder-Mead descent. Updates (best, fbest) in place.
void nelder_mead(Budgeted& f, std::vector<double>& best, double& fbest, double step) {
    const std::size_t n = best.size();
    std::vector<std::vector<double>> pts(n + 1, best);
    std::vector<double> vals(n + 1, fbest);
    for (std::size_t i = 0; i < n; ++i) {
        if (f.exhausted()) {
            return;
        }
        pts[i + 1][i] += step;
        vals[i + 1] = f(pts[i + 1]);
    }

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), trial(n), trial2(n);
    auto point_at = [&](double t, std::vector<double>& out, std::size_t worst) {
        for (std::size_t k = 0; k < n; ++k) {
            out[k] = centroid[k] + t * (pts[worst][k] - centroid[k]);
        }
    };

    while (!f.exhausted()) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        const std::size_t lo = order.front();
        const std::size_t hi = order.back();
        const std::size_t second = order[n - 1];

        double diameter = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
            for (std::size_t k = 0; k < n; ++k) {
                diameter = std::max(diameter, std::abs(pts[i][k] - pts[lo][k]));
            }
        }
        if ((vals[hi] - vals[lo] <= 1e-12 + 1e-10 * std::abs(vals[lo]) && diameter < 1e-6) || diameter < 1e-10) {
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == hi) {
                continue;
            }
            for (std::size_t k = 0; k < n; ++k) {
                centroid[k] += pts[i][k] / static_cast<double>(n);
            }
        }

        point_at(-1.0, trial, hi);
        const double fr = f(trial);
        if (fr < vals[lo]) {
            point_at(-2.0, trial2, hi);
            const double fe = f.exhausted() ? fr : f(trial2);
            if (fe < fr) {
                pts[hi] = trial2;
                vals[hi] = fe;
            } else {
                pts[hi] = trial;
                vals[hi] = fr;
            }
        } else if (fr < vals[second]) {
            pts[hi] = trial;
            vals[hi] = fr;
        } else {
            const bool outside = fr < vals[hi];
            point_at(outside ? -0.5 : 0.5, trial2, hi);
            const double fc = f(trial2);
            if (fc < (outside ? fr : vals[hi])) {
                pts[hi] = trial2;
                vals[hi] = fc;
            } else {
                for (std::size_t i = 0; i <= n && !f.exhausted(); ++i) {
                    if (i == lo) {
                        continue;
                    }
                    for (std::size_t k = 0; k < n; ++k) {
                        pts[i][k] = pts[lo][k] + 0.5 * (pts[i][k] - pts[lo][k]);
                    }
                    vals[i] = f(pts[i]);
                }
            }
        }
    }

    for (std::size_t i = 0; i <= n; ++i) {
        if (vals[i] < fbest) {
            fbest = vals[i];
            best = pts[i];
        }
    }
}

} // namespace

SimplexResult minimize_simplex(const Objective& f, std::vector<double> x0, const SimplexOptions& options) {
    if (!(options.initial_step > 0.0)) {
        throw Error("simplex step must be positive");
    }
    const std::size_t budget = options.max_evaluations ? options.max_evaluations : 500 * std::max<std::size_t>(1, x0.size());
    Budgeted fb(f, budget);

    SimplexResult result;
    result.x = std::move(x0);
    result.value = fb(result.x);
    if (result.x.empty()) {
        result.evaluations = fb.used();
        return result;
    }

    double step = options.initial_step;
    while (!fb.exhausted()) {
        const double before = result.value;
        nelder_mead(fb, result.x, result.value, step);

        // Axis-aligned polling around the incumbent.
        for (std::size_t k = 0; k < result.x.size() && !fb.exhausted(); ++k) {
            for (const double sign : {1.0, -1.0}) {
                if (fb.exhausted()) {
                    break;
                }
                std::vector<double> probe = result.x;
                probe[k] += sign * step;
                const double v = fb(probe);
                if (v < result.value) {
                    result.value = v;
                    result.x = std::move(probe);
                    break;
                }
            }
        }

        if (before - result.value < options.tolerance) {
            break;
        }
        step *= 0.5;
    }
    result.evaluations = fb.used();
    return result;
}

} // namespace qxct::tune
