#pragma once

#include <cstddef>
#include <vector>

#include "perioscope/series.hpp"

namespace perioscope {

struct TrendConfig {
    double lambda1 = 1.0;   // weight on first-order difference penalty
    double lambda2 = 100.0; // weight on second-order difference penalty
    double rho = 1.0;       // ADMM penalty parameter (adapted during the run)
    int max_iter = 500;
    double tol_abs = 1e-7;
    double tol_rel = 1e-5;
};

struct TrendFit {
    std::vector<double> trend;
    int iterations = 0;
    // Residuals at termination, in the solver's internal robustly-scaled
    // units (the same units the stopping tolerances apply to).
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    bool converged = false;
};

// Banded descriptor of the first/second-order difference matrix: row t of the
// order-1 matrix computes x_t - x_{t+1}; row t of the order-2 matrix computes
// x_t - 2 x_{t+1} + x_{t+2}.
struct DifferenceMatrix {
    int order = 1;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> stencil;  // (1,-1) or (1,-2,1), applied at columns t..t+order

    std::vector<double> apply(const std::vector<double>& x) const;
};

// order must be 1 or 2 and n >= order + 1.
DifferenceMatrix difference_matrix(int order, std::size_t n);

// S_kappa(x) = (1 - kappa/|x|)+ * x, with S_kappa(0) = 0.
double soft_threshold(double x, double kappa);
std::vector<double> soft_threshold(std::vector<double> x, double kappa);

// The masked LAD + L1-difference objective:
//   sum_{observed t} |y_t - tau_t|
//   + lambda1 * sum |tau_t - tau_{t+1}| + lambda2 * sum |tau_t - 2 tau_{t+1} + tau_{t+2}|.
double trend_objective(const ObservedSeries& s, const std::vector<double>& tau,
                       double lambda1, double lambda2);

// Minimizes trend_objective over tau by ADMM on the stacked reformulation
// min ||e||_1 s.t. A tau - b = e with A = [W; lambda1 D1; lambda2 D2],
// b = [W y; 0; 0]. Masked positions contribute nothing to the fit. On
// non-convergence within max_iter the best iterate is returned with
// converged = false.
TrendFit robust_detrend(const ObservedSeries& s, const TrendConfig& cfg = {});

}  // namespace perioscope
