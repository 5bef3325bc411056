#include "perioscope/banded.hpp"

#include <cmath>
#include <stdexcept>

namespace perioscope::linalg {

BandedCholesky::BandedCholesky(const BandedSpd& a) {
    const std::size_t n = a.size();
    if (n == 0) throw std::runtime_error("banded cholesky: empty matrix");
    if (a.sub1.size() + 1 != n || a.sub2.size() + 2 != n)
        throw std::runtime_error("banded cholesky: inconsistent band lengths");
    ld_.assign(n, 0.0);
    l1_.assign(n > 1 ? n - 1 : 0, 0.0);
    l2_.assign(n > 2 ? n - 2 : 0, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double d = a.diag[i];
        if (i >= 1) d -= l1_[i - 1] * l1_[i - 1];
        if (i >= 2) d -= l2_[i - 2] * l2_[i - 2];
        if (!(d > 0.0)) throw std::runtime_error("banded cholesky: matrix not positive definite");
        ld_[i] = std::sqrt(d);
        if (i + 1 < n) {
            double v = a.sub1[i];
            if (i >= 1) v -= l2_[i - 1] * l1_[i - 1];
            l1_[i] = v / ld_[i];
        }
        if (i + 2 < n) l2_[i] = a.sub2[i] / ld_[i];
    }
}

void BandedCholesky::solve_in_place(std::vector<double>& b) const {
    const std::size_t n = ld_.size();
    if (b.size() != n) throw std::runtime_error("banded cholesky: rhs size mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        double v = b[i];
        if (i >= 1) v -= l1_[i - 1] * b[i - 1];
        if (i >= 2) v -= l2_[i - 2] * b[i - 2];
        b[i] = v / ld_[i];
    }
    for (std::size_t i = n; i-- > 0;) {
        double v = b[i];
        if (i + 1 < n) v -= l1_[i] * b[i + 1];
        if (i + 2 < n) v -= l2_[i] * b[i + 2];
        b[i] = v / ld_[i];
    }
}

}  // namespace perioscope::linalg
