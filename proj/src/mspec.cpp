#include "perioscope/mspec.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "perioscope/fft.hpp"
#include "perioscope/series.hpp"

namespace perioscope {

namespace {

// Regressor values come from one shared table of cos/sin(2 pi j / N') looked
// up at (k*t) mod N', which keeps every bin's trigonometry exact in the same
// way regardless of execution order or thread count.
struct TrigTable {
    std::vector<double> c, s;

    explicit TrigTable(std::size_t n_prime) : c(n_prime), s(n_prime) {
        const double step = 2.0 * M_PI / static_cast<double>(n_prime);
        for (std::size_t j = 0; j < n_prime; ++j) {
            c[j] = std::cos(step * static_cast<double>(j));
            s[j] = std::sin(step * static_cast<double>(j));
        }
    }
};

// 1.345 * robust scale of the residuals; MAD first, mean absolute deviation
// about the median when the MAD degenerates (e.g. when most residuals are
// exactly zero because of padding and missing positions). Returns 0 when the
// residual spread is identically zero.
double adaptive_delta(const std::vector<double>& r, std::vector<double>& work) {
    work = r;
    const double med = median(work);
    work.resize(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) work[i] = std::abs(r[i] - med);
    const double mad = median(work);
    if (mad > 0.0) return 1.345 * 1.4826 * mad;
    double sum = 0.0;
    for (double v : work) sum += v;
    const double mean_abs = sum / static_cast<double>(r.size());
    return 1.345 * 1.2533 * mean_abs;
}

struct BinWorkspace {
    std::vector<double> resid, scratch;
};

double huber_objective(const std::vector<double>& resid, double delta) {
    double obj = 0.0;
    for (double r : resid) obj += huber_loss(r, delta);
    return obj;
}

// Shared IRLS core. The cosine regressor reads trig.c at idx1; the sine
// regressor reads trig.s at idx2, or is absent when idx2 == nullptr (the
// one-parameter Nyquist path). Returns |beta|^2.
double irls_bin(const std::vector<double>& h, const std::size_t* idx1, const std::size_t* idx2,
                const TrigTable& trig, const HuberConfig& cfg, BinWorkspace& ws,
                IrlsDiag* diag) {
    const std::size_t n = h.size();

    // OLS initialization; the regressors are orthogonal with squared norm
    // N'/2 (interior bins) or N' (Nyquist) on the full grid.
    double b1 = 0.0, b2 = 0.0;
    const bool two_param = idx2 != nullptr;
    {
        double s1 = 0.0, s2 = 0.0, n1 = 0.0, n2 = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            const double c = trig.c[idx1[t]];
            s1 += h[t] * c;
            n1 += c * c;
            if (two_param) {
                const double sv = trig.s[idx2[t]];
                s2 += h[t] * sv;
                n2 += sv * sv;
            }
        }
        b1 = n1 > 0.0 ? s1 / n1 : 0.0;
        b2 = two_param && n2 > 0.0 ? s2 / n2 : 0.0;
    }

    ws.resid.resize(n);
    bool converged = false;
    int it = 0;
    for (it = 1; it <= cfg.irls_max_iter; ++it) {
        for (std::size_t t = 0; t < n; ++t) {
            double fit = b1 * trig.c[idx1[t]];
            if (two_param) fit += b2 * trig.s[idx2[t]];
            ws.resid[t] = h[t] - fit;
        }
        double delta = cfg.adaptive_delta ? adaptive_delta(ws.resid, ws.scratch) : cfg.delta;
        if (delta <= 0.0) {
            // Residual spread is identically zero; nothing left to reweight.
            converged = true;
            break;
        }

        const double obj_before = diag ? huber_objective(ws.resid, delta) : 0.0;

        double scc = 0.0, sss = 0.0, scs = 0.0, sch = 0.0, ssh = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            const double a = std::abs(ws.resid[t]);
            const double w = a <= delta ? 1.0 : delta / a;
            const double c = trig.c[idx1[t]];
            scc += w * c * c;
            sch += w * c * h[t];
            if (two_param) {
                const double sv = trig.s[idx2[t]];
                sss += w * sv * sv;
                scs += w * c * sv;
                ssh += w * sv * h[t];
            }
        }

        double nb1 = b1, nb2 = b2;
        if (two_param) {
            const double det = scc * sss - scs * scs;
            if (std::abs(det) < 1e-300) break;
            nb1 = (sch * sss - scs * ssh) / det;
            nb2 = (scc * ssh - scs * sch) / det;
        } else {
            if (scc < 1e-300) break;
            nb1 = sch / scc;
        }

        if (diag) {
            ws.scratch.resize(n);
            for (std::size_t t = 0; t < n; ++t) {
                double fit = nb1 * trig.c[idx1[t]];
                if (two_param) fit += nb2 * trig.s[idx2[t]];
                ws.scratch[t] = h[t] - fit;
            }
            const double obj_after = huber_objective(ws.scratch, delta);
            diag->max_descent_violation =
                std::max(diag->max_descent_violation, obj_after - obj_before);
        }

        const double change = std::hypot(nb1 - b1, nb2 - b2);
        const double base = std::max(std::hypot(b1, b2), 1e-300);
        b1 = nb1;
        b2 = nb2;
        if (change <= cfg.irls_tol * base) {
            converged = true;
            break;
        }
    }
    if (diag) {
        diag->iterations = std::min(it, cfg.irls_max_iter);
        diag->converged = converged;
    }
    return b1 * b1 + b2 * b2;
}

void check_cfg(const HuberConfig& cfg) {
    if (cfg.irls_max_iter <= 0 || cfg.irls_tol <= 0 ||
        (!cfg.adaptive_delta && cfg.delta <= 0))
        throw std::runtime_error("huber config: all fields must be positive");
}

double bin_power(const std::vector<double>& h_bar, std::size_t k, const TrigTable& trig,
                 const HuberConfig& cfg, BinWorkspace& ws, IrlsDiag* diag) {
    const std::size_t np = h_bar.size();
    std::vector<std::size_t> idx(np);
    for (std::size_t t = 0; t < np; ++t) idx[t] = (k * t) % np;
    const double beta_sq = irls_bin(h_bar, idx.data(), idx.data(), trig, cfg, ws, diag);
    return static_cast<double>(np) / 4.0 * beta_sq;
}

double nyquist_power(const std::vector<double>& h_bar, const TrigTable& trig,
                     const HuberConfig& cfg, BinWorkspace& ws, IrlsDiag* diag) {
    const std::size_t np = h_bar.size();
    const std::size_t k = np / 2;
    std::vector<std::size_t> idx(np);
    for (std::size_t t = 0; t < np; ++t) idx[t] = (k * t) % np;
    const double beta_sq = irls_bin(h_bar, idx.data(), nullptr, trig, cfg, ws, diag);
    return static_cast<double>(np) * beta_sq;
}

MPeriodogram m_periodogram_impl(const std::vector<double>& h_bar, const HuberConfig& cfg,
                                bool parallel) {
    check_cfg(cfg);
    const std::size_t np = h_bar.size();
    if (np < 4 || np % 2 != 0)
        throw std::runtime_error("m_periodogram: input length must be even and >= 4");

    const TrigTable trig(np);
    MPeriodogram mp;
    mp.n_prime = np;
    mp.power.assign(np, 0.0);
    const std::size_t half = np / 2;
    std::vector<std::uint8_t> flag(half, 0);

    const auto run_bin = [&](std::size_t k) {
        BinWorkspace ws;
        IrlsDiag diag;
        mp.power[k] = bin_power(h_bar, k, trig, cfg, ws, &diag);
        if (!diag.converged) flag[k] = 1;
    };

    if (parallel) {
#pragma omp parallel for schedule(dynamic, 8)
        for (std::ptrdiff_t k = 1; k < static_cast<std::ptrdiff_t>(half); ++k)
            run_bin(static_cast<std::size_t>(k));
    } else {
        for (std::size_t k = 1; k < half; ++k) run_bin(k);
    }

    {
        BinWorkspace ws;
        IrlsDiag diag;
        mp.power[half] = nyquist_power(h_bar, trig, cfg, ws, &diag);
        if (!diag.converged) flag.push_back(1);
    }

    mp.power[0] = 0.0;  // mean-removed upstream; keeps the g-test off DC
    for (std::size_t k = 1; k < half; ++k) mp.power[np - k] = mp.power[k];
    mp.nonconverged_bins = 0;
    for (auto f : flag) mp.nonconverged_bins += f;
    return mp;
}

}  // namespace

double huber_loss(double x, double delta) {
    if (delta <= 0) throw std::runtime_error("huber_loss: delta must be positive");
    const double a = std::abs(x);
    if (a <= delta) return 0.5 * x * x;
    return delta * a - 0.5 * delta * delta;
}

double m_periodogram_bin(const std::vector<double>& h_bar, std::size_t k,
                         const HuberConfig& cfg, IrlsDiag* diag) {
    check_cfg(cfg);
    const std::size_t np = h_bar.size();
    if (np < 4 || np % 2 != 0)
        throw std::runtime_error("m_periodogram_bin: input length must be even and >= 4");
    if (k < 1 || k > np / 2 - 1)
        throw std::runtime_error("m_periodogram_bin: bin index out of range");
    const TrigTable trig(np);
    BinWorkspace ws;
    return bin_power(h_bar, k, trig, cfg, ws, diag);
}

MPeriodogram m_periodogram(const std::vector<double>& h_bar, const HuberConfig& cfg) {
    return m_periodogram_impl(h_bar, cfg, true);
}

MPeriodogram m_periodogram_serial(const std::vector<double>& h_bar, const HuberConfig& cfg) {
    return m_periodogram_impl(h_bar, cfg, false);
}

RobustAcf robust_acf_m(const std::vector<double>& x, const std::vector<std::uint8_t>& mask,
                       const HuberConfig& cfg) {
    if (x.size() != mask.size()) throw std::runtime_error("robust_acf_m: lengths differ");
    const std::size_t n = x.size();
    if (n < 4) throw std::runtime_error("robust_acf_m: series too short");
    const std::size_t np = 2 * n;

    std::vector<double> h_bar(np, 0.0);
    for (std::size_t t = 0; t < n; ++t)
        if (mask[t]) h_bar[t] = x[t];  // branch, never multiply

    const MPeriodogram mp = m_periodogram(h_bar, cfg);

    // The classical numerator is IFFT(|FFT(h_bar)|^2); power approximates
    // |FFT|^2 / N', so scale back by N' to let the least-squares limit match
    // acf_fft exactly.
    std::vector<double> spectrum(np);
    for (std::size_t k = 0; k < np; ++k) spectrum[k] = static_cast<double>(np) * mp.power[k];
    const auto num = fftutil::inverse_of_real_even_spectrum(spectrum);

    const auto q = pair_counts(mask);
    RobustAcf acf;
    acf.r.assign(n, 0.0);
    acf.pair_count = q;
    for (std::size_t k = 0; k < n; ++k)
        acf.r[k] = q[k] > 0 ? num[k] / static_cast<double>(q[k]) : 0.0;
    return acf;
}

}  // namespace perioscope
