#include "perioscope/trendfilter.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "perioscope/banded.hpp"

namespace perioscope {

namespace {

double l2_norm(const std::vector<double>& v) {
    double ss = 0.0;
    for (double x : v) ss += x * x;
    return std::sqrt(ss);
}

// The stacked matrix A = [W; lambda1 D1; lambda2 D2] applied to x, laid out
// as rows [0, n) for W, [n, 2n-1) for D1, [2n-1, 3n-3) for D2.
void apply_stacked(const ObservedSeries& s, double lam1, double lam2,
                   const std::vector<double>& x, std::vector<double>& out) {
    const std::size_t n = x.size();
    out.resize(3 * n - 3);
    for (std::size_t i = 0; i < n; ++i) out[i] = s.mask[i] ? x[i] : 0.0;
    for (std::size_t t = 0; t + 1 < n; ++t) out[n + t] = lam1 * (x[t] - x[t + 1]);
    for (std::size_t t = 0; t + 2 < n; ++t)
        out[2 * n - 1 + t] = lam2 * (x[t] - 2.0 * x[t + 1] + x[t + 2]);
}

// A^T v for the same layout.
void apply_stacked_t(const ObservedSeries& s, double lam1, double lam2,
                     const std::vector<double>& v, std::vector<double>& out) {
    const std::size_t n = s.size();
    out.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        if (s.mask[i]) out[i] = v[i];
    for (std::size_t t = 0; t + 1 < n; ++t) {
        const double w = lam1 * v[n + t];
        out[t] += w;
        out[t + 1] -= w;
    }
    for (std::size_t t = 0; t + 2 < n; ++t) {
        const double w = lam2 * v[2 * n - 1 + t];
        out[t] += w;
        out[t + 1] -= 2.0 * w;
        out[t + 2] += w;
    }
}

linalg::BandedSpd normal_matrix(const ObservedSeries& s, double lam1, double lam2) {
    const std::size_t n = s.size();
    linalg::BandedSpd a;
    a.diag.assign(n, 0.0);
    a.sub1.assign(n - 1, 0.0);
    a.sub2.assign(n - 2, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        if (s.mask[i]) a.diag[i] += 1.0;
    const double l1sq = lam1 * lam1;
    for (std::size_t t = 0; t + 1 < n; ++t) {
        a.diag[t] += l1sq;
        a.diag[t + 1] += l1sq;
        a.sub1[t] -= l1sq;
    }
    const double l2sq = lam2 * lam2;
    for (std::size_t t = 0; t + 2 < n; ++t) {
        a.diag[t] += l2sq;
        a.diag[t + 1] += 4.0 * l2sq;
        a.diag[t + 2] += l2sq;
        a.sub1[t] -= 2.0 * l2sq;
        a.sub1[t + 1] -= 2.0 * l2sq;
        a.sub2[t] += l2sq;
    }
    return a;
}

}  // namespace

std::vector<double> DifferenceMatrix::apply(const std::vector<double>& x) const {
    if (x.size() != cols) throw std::runtime_error("difference matrix: size mismatch");
    std::vector<double> out(rows, 0.0);
    for (std::size_t t = 0; t < rows; ++t)
        for (std::size_t j = 0; j < stencil.size(); ++j) out[t] += stencil[j] * x[t + j];
    return out;
}

DifferenceMatrix difference_matrix(int order, std::size_t n) {
    if (order != 1 && order != 2) throw std::runtime_error("difference matrix: order must be 1 or 2");
    if (n < static_cast<std::size_t>(order) + 1)
        throw std::runtime_error("difference matrix: n too small for requested order");
    DifferenceMatrix d;
    d.order = order;
    d.cols = n;
    d.rows = n - static_cast<std::size_t>(order);
    d.stencil = order == 1 ? std::vector<double>{1.0, -1.0} : std::vector<double>{1.0, -2.0, 1.0};
    return d;
}

double soft_threshold(double x, double kappa) {
    const double a = std::abs(x);
    if (a <= kappa) return 0.0;
    return (1.0 - kappa / a) * x;
}

std::vector<double> soft_threshold(std::vector<double> x, double kappa) {
    for (double& v : x) v = soft_threshold(v, kappa);
    return x;
}

double trend_objective(const ObservedSeries& s, const std::vector<double>& tau,
                       double lambda1, double lambda2) {
    const std::size_t n = s.size();
    if (tau.size() != n) throw std::runtime_error("trend objective: size mismatch");
    double j = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (s.mask[i]) j += std::abs(s.values[i] - tau[i]);
    for (std::size_t t = 0; t + 1 < n; ++t) j += lambda1 * std::abs(tau[t] - tau[t + 1]);
    for (std::size_t t = 0; t + 2 < n; ++t)
        j += lambda2 * std::abs(tau[t] - 2.0 * tau[t + 1] + tau[t + 2]);
    return j;
}

TrendFit robust_detrend(const ObservedSeries& s, const TrendConfig& cfg) {
    validate_series(s);
    if (cfg.lambda1 <= 0 || cfg.lambda2 <= 0 || cfg.rho <= 0 || cfg.max_iter <= 0 ||
        cfg.tol_abs <= 0 || cfg.tol_rel <= 0)
        throw std::runtime_error("trend config: all fields must be strictly positive");

    const std::size_t n = s.size();
    const std::size_t rows = 3 * n - 3;

    // Standardize on the observed values so the solver trajectory (and hence
    // the result, iteration for iteration) is invariant to affine changes of
    // data units. The objective is 1-homogeneous and shift-equivariant, so
    // this does not change the minimizer.
    std::vector<double> obs;
    obs.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        if (s.mask[i]) obs.push_back(s.values[i]);
    const double center = median(obs);
    const double scale = robust_scale(obs);

    ObservedSeries z;
    z.mask = s.mask;
    z.values.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        if (s.mask[i]) z.values[i] = (s.values[i] - center) / scale;

    std::vector<double> b(rows, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        if (z.mask[i]) b[i] = z.values[i];

    const linalg::BandedCholesky chol(normal_matrix(s, cfg.lambda1, cfg.lambda2));

    std::vector<double> x(n, 0.0), e(rows, 0.0), u(rows, 0.0);
    std::vector<double> ax(rows, 0.0), rhs_stacked(rows, 0.0), tmp_n(n, 0.0), e_old(rows, 0.0);

    double rho = cfg.rho;
    TrendFit fit;
    fit.converged = false;

    const double sqrt_rows = std::sqrt(static_cast<double>(rows));
    const double sqrt_n = std::sqrt(static_cast<double>(n));

    int it = 0;
    for (it = 1; it <= cfg.max_iter; ++it) {
        // x-update: (A^T A) x = A^T (b + e - u/rho)
        for (std::size_t i = 0; i < rows; ++i) rhs_stacked[i] = b[i] + e[i] - u[i] / rho;
        apply_stacked_t(z, cfg.lambda1, cfg.lambda2, rhs_stacked, tmp_n);
        x = tmp_n;
        chol.solve_in_place(x);

        apply_stacked(z, cfg.lambda1, cfg.lambda2, x, ax);

        // e-update: soft threshold at 1/rho
        e_old.swap(e);
        e.resize(rows);
        for (std::size_t i = 0; i < rows; ++i)
            e[i] = soft_threshold(ax[i] - b[i] + u[i] / rho, 1.0 / rho);

        // dual update
        for (std::size_t i = 0; i < rows; ++i) u[i] += rho * (ax[i] - e[i] - b[i]);

        double r_pri = 0.0, norm_ax = 0.0, norm_eb = 0.0;
        for (std::size_t i = 0; i < rows; ++i) {
            const double r = ax[i] - e[i] - b[i];
            r_pri += r * r;
            norm_ax += ax[i] * ax[i];
            const double eb = e[i] + b[i];
            norm_eb += eb * eb;
        }
        r_pri = std::sqrt(r_pri);
        norm_ax = std::sqrt(norm_ax);
        norm_eb = std::sqrt(norm_eb);

        for (std::size_t i = 0; i < rows; ++i) rhs_stacked[i] = e[i] - e_old[i];
        apply_stacked_t(z, cfg.lambda1, cfg.lambda2, rhs_stacked, tmp_n);
        const double s_dual = rho * l2_norm(tmp_n);

        apply_stacked_t(z, cfg.lambda1, cfg.lambda2, u, tmp_n);
        const double norm_atu = l2_norm(tmp_n);

        const double eps_pri = sqrt_rows * cfg.tol_abs + cfg.tol_rel * std::max(norm_ax, norm_eb);
        const double eps_dual = sqrt_n * cfg.tol_abs + cfg.tol_rel * norm_atu;

        fit.primal_residual = r_pri;
        fit.dual_residual = s_dual;
        if (r_pri <= eps_pri && s_dual <= eps_dual) {
            fit.converged = true;
            break;
        }

        // Residual balancing; rho never enters the factorized normal matrix,
        // so adapting it costs nothing.
        if (r_pri > 10.0 * s_dual && rho < 1e8)
            rho *= 2.0;
        else if (s_dual > 10.0 * r_pri && rho > 1e-8)
            rho /= 2.0;
    }
    fit.iterations = std::min(it, cfg.max_iter);

    fit.trend.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) fit.trend[i] = center + scale * x[i];
    return fit;
}

}  // namespace perioscope
