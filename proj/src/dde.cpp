#include "halfcavity/dde.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "halfcavity/errors.hpp"

namespace halfcavity::dde {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

struct Workspace {
    ComplexVector k2, k3, k4, k5, k6, k7, tmp, y1;
    explicit Workspace(Eigen::Index n)
        : k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), y1(n) {}
};

template <class F>
double attempt(F& f, double t, const ComplexVector& y, const ComplexVector& k1, double h,
               double atol, double rtol, Workspace& w) {
    w.tmp = y + h * a21 * k1;
    f(t + c2 * h, w.tmp, w.k2);
    w.tmp = y + h * (a31 * k1 + a32 * w.k2);
    f(t + c3 * h, w.tmp, w.k3);
    w.tmp = y + h * (a41 * k1 + a42 * w.k2 + a43 * w.k3);
    f(t + c4 * h, w.tmp, w.k4);
    w.tmp = y + h * (a51 * k1 + a52 * w.k2 + a53 * w.k3 + a54 * w.k4);
    f(t + c5 * h, w.tmp, w.k5);
    w.tmp = y + h * (a61 * k1 + a62 * w.k2 + a63 * w.k3 + a64 * w.k4 + a65 * w.k5);
    f(t + h, w.tmp, w.k6);
    w.y1 = y + h * (a71 * k1 + a73 * w.k3 + a74 * w.k4 + a75 * w.k5 + a76 * w.k6);
    f(t + h, w.y1, w.k7);
    w.tmp = h * (e1 * k1 + e3 * w.k3 + e4 * w.k4 + e5 * w.k5 + e6 * w.k6 + e7 * w.k7);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(w.y1[i]));
        const double r = std::abs(w.tmp[i]) / sc;
        acc += r * r;
    }
    return std::sqrt(acc / double(std::max<Eigen::Index>(1, y.size())));
}

Segment make_segment(double t, double h, const ComplexVector& y, const ComplexVector& k1,
                     const Workspace& w) {
    Segment s;
    s.t0 = t;
    s.h = h;
    s.r[0] = y;
    s.r[1] = w.y1 - y;
    s.r[2] = h * k1 - s.r[1];
    s.r[3] = s.r[1] - h * w.k7 - s.r[2];
    s.r[4] = h * (d1 * k1 + d3 * w.k3 + d4 * w.k4 + d5 * w.k5 + d6 * w.k6 + d7 * w.k7);
    return s;
}

double step_factor(double err) {
    if (err == 0.0) return 5.0;
    return std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
}

double initial_step(const ComplexVector& y, const ComplexVector& f0, double atol, double rtol) {
    double d0 = 0.0, d1 = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double sc = atol + rtol * std::abs(y[i]);
        d0 += std::norm(y[i]) / (sc * sc);
        d1 += std::norm(f0[i]) / (sc * sc);
    }
    d0 = std::sqrt(d0 / double(y.size()));
    d1 = std::sqrt(d1 / double(y.size()));
    return (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
}

void check_finite(const ComplexVector& y, double t) {
    if (!y.allFinite())
        throw NumericalError("dde: non-finite state at t=" + std::to_string(t));
}

}  // namespace

ComplexVector Segment::eval(double t) const {
    const double th = (t - t0) / h;
    const double th1 = 1.0 - th;
    return r[0] + th * (r[1] + th1 * (r[2] + th * (r[3] + th1 * r[4])));
}

void DdeProblem::validate() const {
    const auto n = x0.size();
    if (n == 0) throw DomainError("dde: empty state");
    if (A.rows() != n || A.cols() != n) throw DomainError("dde: A has wrong shape");
    if (B.size() != 0 && (B.rows() != n || B.cols() != n))
        throw DomainError("dde: B has wrong shape");
    if (c.size() != 0 && c.size() != n) throw DomainError("dde: c has wrong size");
    if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("dde: tau must be positive");
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw DomainError("dde: t_end must be >= 0");
    if (!A.allFinite() || !x0.allFinite() || (B.size() && !B.allFinite()) ||
        (c.size() && !c.allFinite()))
        throw DomainError("dde: non-finite problem data");
}

void HistorySolution::set_initial(const ComplexVector& x0) {
    x0_ = x0;
    x_end_ = x0;
    t_end_ = 0.0;
    segments_.clear();
}

void HistorySolution::append(Segment s, const ComplexVector& end_state) {
    t_end_ = s.t0 + s.h;
    x_end_ = end_state;
    segments_.push_back(std::move(s));
}

std::vector<double> HistorySolution::mesh() const {
    std::vector<double> m;
    m.reserve(segments_.size() + 1);
    m.push_back(0.0);
    for (const auto& s : segments_) m.push_back(s.t0 + s.h);
    return m;
}

ComplexVector HistorySolution::query(double t) const {
    if (!(t >= 0.0) || t > t_end_ * (1.0 + 1e-14) + 1e-300)
        throw std::out_of_range("HistorySolution::query: t=" + std::to_string(t) +
                                " outside [0, " + std::to_string(t_end_) + "]");
    if (segments_.empty() || t == 0.0) return x0_;
    if (t >= t_end_) return x_end_;
    auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                               [](double v, const Segment& s) { return v < s.t0; });
    return std::prev(it)->eval(t);
}

ComplexVector HistorySolution::query_left(double t) const {
    if (!(t > 0.0) || t > t_end_ * (1.0 + 1e-14) + 1e-300)
        throw std::out_of_range("HistorySolution::query_left: t outside (0, t_end]");
    auto it = std::lower_bound(segments_.begin(), segments_.end(), t,
                               [](const Segment& s, double v) { return s.t0 < v; });
    return std::prev(it)->eval(t);
}

HistorySolution integrate(const DdeProblem& pb, double tol, StepStats* stats) {
    pb.validate();
    if (!(tol >= 1e-14 && tol <= 1e-4)) throw DomainError("dde: tol must lie in [1e-14, 1e-4]");
    const Eigen::Index n = pb.x0.size();
    const bool delayed = pb.B.size() != 0 && pb.B.cwiseAbs().maxCoeff() > 0.0;
    const bool forced = pb.c.size() != 0;

    HistorySolution sol(pb.tau, int(n));
    sol.set_initial(pb.x0);
    if (pb.t_end == 0.0) return sol;

    StepStats local;
    StepStats& st = stats ? *stats : local;
    Workspace w(n);
    ComplexVector y = pb.x0, k1(n);

    ComplexVector lagged(n);
    auto lookup = [&](double s) -> const ComplexVector& {
        const double tq = std::clamp(s, 0.0, sol.t_end());
        lagged = sol.query(tq);
        return lagged;
    };

    long interval = 0;
    auto rhs = [&](double s, const ComplexVector& x, ComplexVector& out) {
        ++st.rhs_evaluations;
        out.noalias() = pb.A * x;
        if (forced) out += pb.c;
        if (delayed && interval >= 1) out.noalias() += pb.B * lookup(s - pb.tau);
    };

    double t = 0.0;
    double h = -1.0;
    while (t < pb.t_end) {
        const double next = std::min(pb.t_end, double(interval + 1) * pb.tau);
        rhs(t, y, k1);
        if (h <= 0.0) h = initial_step(y, k1, tol, tol);
        while (t < next) {
            const double remaining = next - t;
            bool last = false;
            if (h >= remaining || remaining - h < 1e-10 * pb.tau) {
                h = remaining;
                last = true;
            }
            const double err = attempt(rhs, t, y, k1, h, tol, tol, w);
            if (!std::isfinite(err)) {
                check_finite(w.y1, t + h);
                throw NumericalError("dde: non-finite error estimate");
            }
            if (err <= 1.0) {
                ++st.accepted;
                check_finite(w.y1, t + h);
                Segment seg = make_segment(t, h, y, k1, w);
                const double tn = last ? next : t + h;
                seg.h = tn - t;
                sol.append(std::move(seg), w.y1);
                t = tn;
                y = w.y1;
                k1 = w.k7;
                const double grow = step_factor(err);
                if (!last) h *= grow;
                else h = std::max(h, std::min(h * grow, pb.tau));
            } else {
                ++st.rejected;
                h *= std::max(0.2, step_factor(err));
                if (h < 1e-13 * std::max(1.0, t))
                    throw NumericalError("dde: step size underflow at t=" + std::to_string(t) +
                                         " (tolerance cannot be met)");
            }
            if (st.accepted + st.rejected > 50'000'000)
                throw NumericalError("dde: step budget exhausted (tolerance cannot be met)");
        }
        ++interval;
    }
    return sol;
}

ComplexVector integrate_ode(const Rhs& f, double t0, const ComplexVector& y0,
                            const std::vector<double>& sample_times, const Observer& observe,
                            const OdeOptions& opt, StepStats* stats) {
    if (!std::is_sorted(sample_times.begin(), sample_times.end()))
        throw DomainError("integrate_ode: sample times must be sorted");
    if (!sample_times.empty() && sample_times.front() < t0)
        throw DomainError("integrate_ode: sample time before t0");
    StepStats local;
    StepStats& st = stats ? *stats : local;
    const Eigen::Index n = y0.size();
    Workspace w(n);
    ComplexVector y = y0, k1(n);
    auto rhs = [&](double s, const ComplexVector& x, ComplexVector& out) {
        ++st.rhs_evaluations;
        f(s, x, out);
    };

    std::size_t next_sample = 0;
    while (next_sample < sample_times.size() && sample_times[next_sample] == t0)
        observe(t0, y), ++next_sample;
    if (next_sample == sample_times.size()) return y;

    const double t_end = sample_times.back();
    double t = t0;
    rhs(t, y, k1);
    double h = initial_step(y, k1, opt.atol, opt.rtol);
    if (opt.h_max > 0.0) h = std::min(h, opt.h_max);
    while (t < t_end) {
        bool last = false;
        if (h >= t_end - t) {
            h = t_end - t;
            last = true;
        }
        const double err = attempt(rhs, t, y, k1, h, opt.atol, opt.rtol, w);
        if (!std::isfinite(err)) throw NumericalError("integrate_ode: non-finite state");
        if (err <= 1.0) {
            ++st.accepted;
            const double tn = last ? t_end : t + h;
            if (next_sample < sample_times.size() && sample_times[next_sample] <= tn) {
                Segment seg = make_segment(t, h, y, k1, w);
                while (next_sample < sample_times.size() && sample_times[next_sample] <= tn) {
                    const double ts = sample_times[next_sample++];
                    observe(ts, ts == tn ? w.y1 : seg.eval(ts));
                }
            }
            t = tn;
            y = w.y1;
            k1 = w.k7;
            h *= step_factor(err);
            if (opt.h_max > 0.0) h = std::min(h, opt.h_max);
        } else {
            ++st.rejected;
            h *= std::max(0.2, step_factor(err));
            if (h < 1e-13 * std::max(1.0, std::abs(t)))
                throw NumericalError("integrate_ode: step size underflow");
        }
        if (st.accepted + st.rejected > opt.max_steps)
            throw NumericalError("integrate_ode: step budget exhausted");
    }
    return y;
}

}  // namespace halfcavity::dde
