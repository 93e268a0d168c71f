#include <algorithm>
#include <cmath>
#include <limits>

#include "models_internal.hpp"

namespace dram_oracle::detail {

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
    double d2 = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

namespace {

// Epsilon-insensitive SVR trained by SMO on the 2n-variable dual:
//   min 0.5 sum_ij beta_i beta_j K_ij + eps sum (a_i + a*_i) - sum y_i beta_i
//   s.t. sum beta_i = 0, a, a* in [0, C],   beta = a - a*.
// Variables t < n are a_t (sign +1), t >= n are a*_{t-n} (sign -1).
struct SmoState {
    const std::vector<std::vector<double>>& X;
    const std::vector<double>& y;
    double C, eps, gamma, tol;
    uint64_t max_iter;

    size_t n;
    std::vector<double> a;     // 2n box variables
    std::vector<double> F;     // F_i = sum_j beta_j K_ij
    std::vector<double> krow_i, krow_j;

    SmoState(const std::vector<std::vector<double>>& X_, const std::vector<double>& y_,
             const ModelConfig& cfg)
        : X(X_), y(y_), C(cfg.c), eps(cfg.epsilon),
          gamma(cfg.gamma > 0 ? cfg.gamma : 1.0 / static_cast<double>(X_[0].size())),
          tol(cfg.svr_tol), max_iter(cfg.svr_max_iter), n(X_.size()) {
        a.assign(2 * n, 0.0);
        F.assign(n, 0.0);
        krow_i.resize(n);
        krow_j.resize(n);
    }

    double sign(size_t t) const { return t < n ? 1.0 : -1.0; }
    size_t point(size_t t) const { return t < n ? t : t - n; }

    // Gradient of the dual objective w.r.t. a_t.
    double grad(size_t t) const {
        const size_t p = point(t);
        return t < n ? F[p] + eps - y[p] : -F[p] + eps + y[p];
    }

    void kernel_row(size_t p, std::vector<double>& row) const {
        for (size_t q = 0; q < n; ++q) row[q] = rbf_kernel(X[p], X[q], gamma);
    }

    // Maximal-violating pair. A variable can move "up" along the equality
    // constraint when s=+1 and a<C, or s=-1 and a>0; "down" is the mirror.
    struct Selection {
        size_t i = SIZE_MAX, j = SIZE_MAX;
        double m = -std::numeric_limits<double>::infinity();
        double M = std::numeric_limits<double>::infinity();
    };

    Selection select() const {
        Selection s;
        for (size_t t = 0; t < 2 * n; ++t) {
            const double st = sign(t);
            const double v = -st * grad(t);
            const bool can_up = st > 0 ? a[t] < C : a[t] > 0.0;
            const bool can_down = st > 0 ? a[t] > 0.0 : a[t] < C;
            if (can_up && v > s.m) {
                s.m = v;
                s.i = t;
            }
            if (can_down && v < s.M) {
                s.M = v;
                s.j = t;
            }
        }
        return s;
    }

    SvrParams solve() {
        uint64_t iter = 0;
        Selection s;
        while (true) {
            s = select();
            if (s.i == SIZE_MAX || s.j == SIZE_MAX || s.m - s.M <= tol) break;
            if (++iter > max_iter)
                throw NumericError("svr: SMO did not converge; duality gap " +
                                       std::to_string(s.m - s.M),
                                   s.m - s.M);

            const size_t i = s.i, j = s.j;
            const size_t p = point(i), q = point(j);
            const double si = sign(i), sj = sign(j);

            kernel_row(p, krow_i);
            kernel_row(q, krow_j);
            double eta = krow_i[p] + krow_j[q] - 2.0 * si * sj * krow_i[q];
            if (eta <= 1e-12) eta = 1e-12;

            // delta > 0 moves a_i by si*delta and a_j by -sj*delta; both
            // bounds are strictly positive by the I_up/I_low membership.
            double delta = (s.m - s.M) / eta;
            delta = std::min(delta, si > 0 ? C - a[i] : a[i]);
            delta = std::min(delta, sj > 0 ? a[j] : C - a[j]);

            a[i] += si * delta;
            a[j] -= sj * delta;

            // beta gains +delta at p and -delta at q regardless of signs.
            for (size_t k = 0; k < n; ++k) F[k] += delta * (krow_i[k] - krow_j[k]);
        }

        const double bias = (std::isfinite(s.m) && std::isfinite(s.M)) ? (s.m + s.M) / 2.0 : 0.0;

        SvrParams out;
        out.gamma = gamma;
        out.bias = bias;
        for (size_t k = 0; k < n; ++k) {
            const double beta = a[k] - a[n + k];
            if (beta != 0.0) {
                out.support.push_back(X[k]);
                out.coef.push_back(beta);
            }
        }
        return out;
    }
};

}  // namespace

SvrParams train_svr(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                    const ModelConfig& cfg) {
    if (X.empty()) throw ValidationError("svr: empty dataset");
    if (!(cfg.c > 0)) throw ValidationError("svr: c must be positive");
    if (cfg.epsilon < 0) throw ValidationError("svr: epsilon must be non-negative");
    if (cfg.gamma < 0) throw ValidationError("svr: gamma must be non-negative");
    SmoState smo(X, y, cfg);
    return smo.solve();
}

double svr_predict(const SvrParams& p, std::span<const double> x) {
    double f = p.bias;
    for (size_t i = 0; i < p.support.size(); ++i)
        f += p.coef[i] * rbf_kernel(p.support[i], x, p.gamma);
    return f;
}

}  // namespace dram_oracle::detail
