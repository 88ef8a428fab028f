#pragma once

#include <functional>
#include <vector>

#include "halfcavity/numerics.hpp"

namespace halfcavity::dde {

/// x'(t) = A x(t) + B x(t - tau) Theta(t - tau) + c,  x(0) = x0.
struct DdeProblem {
    ComplexMatrix A;
    ComplexMatrix B;
    ComplexVector c;
    double tau = 1.0;
    ComplexVector x0;
    double t_end = 0.0;

    int dim() const { return int(x0.size()); }
    void validate() const;
};

/// One accepted Runge-Kutta step with its continuous extension.
struct Segment {
    double t0 = 0.0;
    double h = 0.0;
    ComplexVector r[5];  ///< Dormand-Prince dense-output coefficients

    ComplexVector eval(double t) const;
};

/// Piecewise polynomial solution on [0, t_end]; immutable once built.
class HistorySolution {
public:
    HistorySolution() = default;
    HistorySolution(double tau, int dim) : tau_(tau), dim_(dim) {}

    /// State at t. Throws std::out_of_range outside [0, t_end].
    ComplexVector query(double t) const;
    /// Left limit at t (uses the segment ending at t).
    ComplexVector query_left(double t) const;

    double t_end() const { return t_end_; }
    double tau() const { return tau_; }
    int dim() const { return dim_; }
    std::size_t size() const { return segments_.size(); }
    const std::vector<Segment>& segments() const { return segments_; }
    std::vector<double> mesh() const;

    void append(Segment s, const ComplexVector& end_state);
    void set_initial(const ComplexVector& x0);

private:
    double tau_ = 0.0;
    int dim_ = 0;
    double t_end_ = 0.0;
    ComplexVector x0_;
    ComplexVector x_end_;
    std::vector<Segment> segments_;
};

struct StepStats {
    long accepted = 0;
    long rejected = 0;
    long rhs_evaluations = 0;
};

/// Method of steps with an embedded Dormand-Prince 5(4) pair; every multiple of
/// tau is a mesh point. atol = rtol = tol.
HistorySolution integrate(const DdeProblem& problem, double tol, StepStats* stats = nullptr);

/// Generic adaptive Dormand-Prince 5(4) integration of y' = f(t, y) with dense
/// sampling: `observe(t, y)` is called for each requested sample time.
using Rhs = std::function<void(double, const ComplexVector&, ComplexVector&)>;
using Observer = std::function<void(double, const ComplexVector&)>;

struct OdeOptions {
    double rtol = 1e-8;
    double atol = 1e-10;
    double h_max = 0.0;  ///< 0 means unbounded
    long max_steps = 10'000'000;
};

ComplexVector integrate_ode(const Rhs& f, double t0, const ComplexVector& y0,
                            const std::vector<double>& sample_times, const Observer& observe,
                            const OdeOptions& options, StepStats* stats = nullptr);

}  // namespace halfcavity::dde
