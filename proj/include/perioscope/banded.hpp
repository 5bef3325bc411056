#pragma once

#include <cstddef>
#include <vector>

namespace perioscope::linalg {

// Symmetric positive-definite pentadiagonal matrix, stored by diagonals:
// diag[i] = A[i][i], sub1[i] = A[i+1][i], sub2[i] = A[i+2][i].
struct BandedSpd {
    std::vector<double> diag;
    std::vector<double> sub1;  // length n-1
    std::vector<double> sub2;  // length n-2

    std::size_t size() const { return diag.size(); }
};

// Banded Cholesky factorization A = L L^T with the same bandwidth, computed
// once so repeated solves cost O(n) each.
class BandedCholesky {
public:
    explicit BandedCholesky(const BandedSpd& a);  // throws if not positive definite

    // Solves A x = b, overwriting b with x.
    void solve_in_place(std::vector<double>& b) const;

private:
    std::vector<double> ld_, l1_, l2_;
};

}  // namespace perioscope::linalg
