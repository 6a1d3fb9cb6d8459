// Fits a small ensemble on a two-branch synthetic target and prints the
// averaged density at a few inputs, plus a central 80% interval.
#include <cstdio>
#include <string>

#include "presto/regressor.hpp"

int main() {
    using namespace presto;
    Rng rng(7);
    const std::size_t n = 5000;
    FeatureMatrix x(n, 1);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x(i, 0) = rng.uniform();
        // Above 0.5 the target splits into two branches.
        const double branch = (x(i, 0) > 0.5 && rng.uniform() < 0.5) ? 3.0 : 0.0;
        y[i] = branch + 0.4 * rng.normal();
    }

    PrestoConfig config;
    config.num_classifiers = 10;
    config.gbdt.learning_rate = 0.05;
    config.gbdt.max_depth = 2;
    config.gbdt.max_trees = 500;
    const std::size_t n_train = 4000;
    std::vector<std::size_t> tr(n_train), va(n - n_train);
    for (std::size_t i = 0; i < n; ++i) (i < n_train ? tr[i] : va[i - n_train]) = i;
    const auto model = presto_fit(x.select_rows(tr), select<double>(y, tr), x.select_rows(va), select<double>(y, va),
                                  config);

    FeatureMatrix probe(2, 1, {0.25, 0.75});
    const auto densities = presto_predict(model, probe);
    for (std::size_t r = 0; r < 2; ++r) {
        const auto& d = densities[r];
        const auto iv = central_interval(d, 0.8);
        std::printf("x = %.2f  mean %.3f  80%% interval [%.3f, %.3f]\n", probe(r, 0), d.mean(), iv.lo, iv.hi);
        for (double t = -1.5; t <= 4.5; t += 0.5) {
            const int bar = static_cast<int>(d.pdf(t) * 60);
            std::printf("  %5.1f %s\n", t, std::string(static_cast<std::size_t>(bar), '#').c_str());
        }
    }
}
