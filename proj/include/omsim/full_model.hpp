#pragma once

// Direct integration of the nonlinear semiclassical equations in the pump frame,
// with the probe entering as E_p(t) exp(-i delta t). Nothing is truncated, so
// this serves as a reference for the envelope model. The lock-in helpers pull
// the n = -1, 0, +1 harmonics back out of the raw series.

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "omsim/constants.hpp"
#include "omsim/envelope.hpp"
#include "omsim/error.hpp"
#include "omsim/params.hpp"

namespace omsim {

struct FullState {
    double Q = 0.0;
    double P = 0.0;
    cplx a1;
    cplx a2;

    friend FullState operator+(FullState a, const FullState& b) {
        a.Q += b.Q;
        a.P += b.P;
        a.a1 += b.a1;
        a.a2 += b.a2;
        return a;
    }
    friend FullState operator*(double s, FullState a) {
        a.Q *= s;
        a.P *= s;
        a.a1 *= s;
        a.a2 *= s;
        return a;
    }
    bool finite() const {
        return std::isfinite(Q) && std::isfinite(P) && std::isfinite(a1.real()) && std::isfinite(a1.imag()) &&
               std::isfinite(a2.real()) && std::isfinite(a2.imag());
    }
};

class FullModel {
public:
    FullModel(const SystemParams& p, const DriveConfig& d)
        : p_(p), field_(p, d), bare_(bare_detunings(p, d)), delta_(d.delta) {}

    FullState operator()(const FullState& s, double t) const {
        FullState ds;
        ds.Q = p_.omega_m * s.P;
        ds.P = p_.g1 * std::norm(s.a1) - p_.g2 * std::norm(s.a2) - p_.omega_m * s.Q - p_.gamma_m * s.P;
        const cplx probe = field_.probe(t) * std::polar(1.0, -delta_ * t);
        ds.a1 = (-I * (bare_.cavity1 - p_.g1 * s.Q) - p_.kappa1) * s.a1 + field_.left(t) + probe;
        ds.a2 = (-I * (bare_.cavity2 + p_.g2 * s.Q) - p_.kappa2) * s.a2 + field_.right(t);
        return ds;
    }

private:
    SystemParams p_;
    DriveField field_;
    BareDetunings bare_;
    double delta_;
};

struct FullSeries {
    std::vector<double> t;
    std::vector<double> Q;
    std::vector<double> P;
    std::vector<cplx> a1;
    std::vector<cplx> a2;

    std::size_t size() const { return t.size(); }
};

/// 2 pi / (100 delta)
inline double default_full_dt(const DriveConfig& d) { return two_pi / (100.0 * std::abs(d.delta)); }

/// Integrates from the empty state at t0 to t1. Requires dt <= 2 pi / (50 delta).
inline FullSeries simulate_full(const SystemParams& p, const DriveConfig& d, double dt, double t0, double t1,
                                std::size_t record_every = 1, const FullState& initial = {}) {
    if (d.delta != 0.0 && dt > two_pi / (50.0 * std::abs(d.delta)))
        throw InvalidParameter("full model step must resolve the probe beat: dt <= 2 pi / (50 delta)");
    if (record_every == 0) throw InvalidParameter("record_every must be >= 1");
    const std::size_t n = step_count(t0, t1, dt);
    const double h = (t1 - t0) / static_cast<double>(n);
    const FullModel model(p, d);

    FullSeries out;
    const std::size_t rows = n / record_every + 2;
    out.t.reserve(rows);
    out.Q.reserve(rows);
    out.P.reserve(rows);
    out.a1.reserve(rows);
    out.a2.reserve(rows);

    FullState y = initial;
    for (std::size_t k = 0;; ++k) {
        const double t = k == n ? t1 : t0 + h * static_cast<double>(k);
        if (!y.finite()) throw DivergedError("full model diverged at t = " + std::to_string(t) + " s", t);
        if (k % record_every == 0 || k == n) {
            out.t.push_back(t);
            out.Q.push_back(y.Q);
            out.P.push_back(y.P);
            out.a1.push_back(y.a1);
            out.a2.push_back(y.a2);
        }
        if (k == n) break;
        y = rk4_step(model, t, y, h);
    }
    return out;
}

/// Harmonics A_n(t), n = -1, 0, +1, on the samples where the window fits.
struct Demodulated {
    std::vector<double> t;
    std::vector<cplx> minus; // coefficient of exp(+i delta t)
    std::vector<cplx> zero;
    std::vector<cplx> plus;  // coefficient of exp(-i delta t)
    std::size_t first_index = 0; // index into the input series of t[0]
};

namespace detail {

inline double uniform_step(const std::vector<double>& t) {
    if (t.size() < 3) throw InvalidParameter("demodulation needs at least three samples");
    const double h = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    for (std::size_t i = 1; i < t.size(); ++i)
        if (std::abs((t[i] - t[i - 1]) - h) > 1e-9 * h) throw InvalidParameter("demodulation needs a uniform grid");
    return h;
}

/// Sliding trapezoidal mean of x[k] exp(i n delta t_k) over 2*half samples.
/// Entries outside [lo + half, hi - half] are left untouched.
inline void boxcar_channel(const std::vector<double>& t, const std::vector<cplx>& x, double delta, int n,
                           std::size_t half, std::size_t lo, std::size_t hi, double h, std::vector<cplx>& out) {
    std::vector<cplx> cum(hi - lo + 1, cplx{});
    cplx prev = x[lo] * std::polar(1.0, n * delta * t[lo]);
    for (std::size_t k = lo + 1; k <= hi; ++k) {
        const cplx cur = x[k] * std::polar(1.0, n * delta * t[k]);
        cum[k - lo] = cum[k - lo - 1] + 0.5 * (prev + cur) * h;
        prev = cur;
    }
    const double width = 2.0 * static_cast<double>(half) * h;
    for (std::size_t i = lo + half; i + half <= hi; ++i) out[i] = (cum[i + half - lo] - cum[i - half - lo]) / width;
}

inline std::size_t half_window(double window, double h, double delta) {
    if (delta == 0.0) throw InvalidParameter("demodulation needs a nonzero delta");
    const double period = two_pi / std::abs(delta);
    if (window < 3.0 * period * (1.0 - 1e-9)) throw InvalidParameter("demodulation window shorter than 3 beat periods");
    return static_cast<std::size_t>(std::llround(0.5 * window / h));
}

} // namespace detail

/// Sliding lock-in: A_n(t) = (1/W) int_{t-W/2}^{t+W/2} X(t') exp(+i n delta t') dt', trapezoidal rule.
inline Demodulated demodulate(const std::vector<double>& t, const std::vector<cplx>& x, double delta, double window) {
    if (t.size() != x.size()) throw InvalidParameter("demodulate: size mismatch");
    const double h = detail::uniform_step(t);
    const std::size_t half = detail::half_window(window, h, delta);
    if (2 * half >= t.size()) throw InvalidParameter("demodulation window longer than the series");
    const std::size_t N = t.size();
    std::vector<cplx> am(N), a0(N), ap(N);
    detail::boxcar_channel(t, x, delta, -1, half, 0, N - 1, h, am);
    detail::boxcar_channel(t, x, delta, 0, half, 0, N - 1, h, a0);
    detail::boxcar_channel(t, x, delta, +1, half, 0, N - 1, h, ap);

    Demodulated d;
    d.first_index = half;
    for (std::size_t i = half; i + half < N; ++i) {
        d.t.push_back(t[i]);
        d.minus.push_back(am[i]);
        d.zero.push_back(a0[i]);
        d.plus.push_back(ap[i]);
    }
    return d;
}

/// Lock-in with harmonic cancellation: after the plain pass, each channel is
/// re-demodulated from the series with the other two reconstructed harmonics
/// subtracted. This removes the leakage of a strong, time-varying carrier into
/// the sidebands (of order |dA_0/dt| / delta for a plain boxcar). Each pass
/// trims another half window from both ends.
inline Demodulated separate_sidebands(const std::vector<double>& t, const std::vector<cplx>& x, double delta,
                                      double window, int passes = 3) {
    if (t.size() != x.size()) throw InvalidParameter("separate_sidebands: size mismatch");
    if (passes < 0) throw InvalidParameter("separate_sidebands: passes must be >= 0");
    const double h = detail::uniform_step(t);
    const std::size_t half = detail::half_window(window, h, delta);
    const std::size_t N = t.size();
    if (2 * half * static_cast<std::size_t>(passes + 1) >= N)
        throw InvalidParameter("series too short for the requested cancellation passes");

    std::vector<cplx> am(N), a0(N), ap(N);
    std::size_t lo = 0;
    std::size_t hi = N - 1;
    detail::boxcar_channel(t, x, delta, -1, half, lo, hi, h, am);
    detail::boxcar_channel(t, x, delta, 0, half, lo, hi, h, a0);
    detail::boxcar_channel(t, x, delta, +1, half, lo, hi, h, ap);
    lo += half;
    hi -= half;

    std::vector<cplx> rm(N), r0(N), rp(N);
    for (int pass = 0; pass < passes; ++pass) {
        std::vector<cplx> nm(N), n0(N), np(N);
        for (std::size_t k = lo; k <= hi; ++k) {
            const cplx em = std::polar(1.0, delta * t[k]);  // exp(+i delta t)
            const cplx ep = std::polar(1.0, -delta * t[k]); // exp(-i delta t)
            rm[k] = x[k] - a0[k] - ap[k] * ep;
            r0[k] = x[k] - am[k] * em - ap[k] * ep;
            rp[k] = x[k] - a0[k] - am[k] * em;
        }
        detail::boxcar_channel(t, rm, delta, -1, half, lo, hi, h, nm);
        detail::boxcar_channel(t, r0, delta, 0, half, lo, hi, h, n0);
        detail::boxcar_channel(t, rp, delta, +1, half, lo, hi, h, np);
        am.swap(nm);
        a0.swap(n0);
        ap.swap(np);
        lo += half;
        hi -= half;
    }

    Demodulated d;
    d.first_index = lo;
    for (std::size_t i = lo; i <= hi; ++i) {
        d.t.push_back(t[i]);
        d.minus.push_back(am[i]);
        d.zero.push_back(a0[i]);
        d.plus.push_back(ap[i]);
    }
    return d;
}

/// Real series convenience (e.g. Q).
inline std::vector<cplx> as_complex(const std::vector<double>& x) { return {x.begin(), x.end()}; }

} // namespace omsim
