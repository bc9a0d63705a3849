#pragma once

#include "crtbp/moser.hpp"
#include "crtbp/types.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

namespace crtbp {

/// Fixed-step Gauss collocation (implicit Runge-Kutta, symmetric and
/// symplectic; 2 stages = order 4, 3 stages = order 6). The rotating-frame
/// Hamiltonian is not separable, so stage equations are solved by fixed-point
/// iteration to fp_tol.
struct StepSpec {
    double h = 1e-3;
    int stages = 3;
    double fp_tol = 1e-14;
    int max_fp_iters = 200;
};

enum class Chart { Rotating = 0, Regularized = 1 };

struct TrajectorySample {
    double t = 0.0;      // physical time
    double s = 0.0;      // flow parameter (= t in the rotating chart)
    Vec8 state{};        // rotating chart uses the first 6 entries
    Chart chart = Chart::Rotating;
    double invariant = 0.0;           // H or Q along the trajectory
    double constraint_residual = 0.0; // regularized chart only
};

enum class FlowStatus { Completed, CloseApproachMoon, CloseApproachEarth };

struct Trajectory {
    std::vector<TrajectorySample> samples;
    FlowStatus status = FlowStatus::Completed;
    double invariant_drift = 0.0;
    double max_constraint_residual = 0.0;
    double max_projection_correction = 0.0;
};

struct FlowOptions {
    std::size_t sample_stride = 1;       // record every n-th step
    double switch_threshold = 0.05;      // close-approach abort radius
    bool abort_on_close_approach = true;
};

/// Integrate the rotating-frame flow of H for time t_final (t_final may be
/// negative). Close approaches to either primary abort with the chart-switch
/// status when enabled.
Trajectory integrate_unregularized(const RotatingState& s0, const MassRatio& mu, double t_final,
                                   const StepSpec& step = {}, const FlowOptions& opt = {});

/// Integrate the regularized flow of Q on T*S^3 for parameter length s_final.
/// The tangency/norm constraints are restored by projection after every step
/// (corrections recorded); physical time is reconstructed alongside through
/// dt = mu (1 - xi0) |eta| dsigma.
Trajectory integrate_regularized(const RegularizedState& s0, const EnergyLevel& c,
                                 const MassRatio& mu, double s_final, const StepSpec& step = {},
                                 const FlowOptions& opt = {});

/// Endpoint-only propagation of the rotating flow.
RotatingState advance(const RotatingState& s0, const MassRatio& mu, double t, const StepSpec& step = {});

/// Regularized state advanced until the reconstructed physical time reaches
/// t_target (final partial step found by bisection on the step size).
RegularizedState advance_regularized_to_time(const RegularizedState& s0, const EnergyLevel& c,
                                             const MassRatio& mu, double t_target,
                                             const StepSpec& step = {});

/// Quadratures along the rotating flow used by the continuation module:
///   action    = integral of lambda(X_H) dt, lambda = -(q - M) . dp
///   length    = integral of |qdot| dt
///   reeb_time = integral of |lambda(X_H)| dt
struct AugmentedFlowResult {
    RotatingState state;
    double action = 0.0;
    double length = 0.0;
    double reeb_time = 0.0;
};
AugmentedFlowResult integrate_with_quadratures(const RotatingState& s0, const MassRatio& mu,
                                               double t_final, const StepSpec& step = {});

/// Integrate the Reeb-rescaled field X_H / |lambda(X_H)| for parameter
/// length tau and return the endpoint.
RotatingState advance_reeb_rescaled(const RotatingState& s0, const MassRatio& mu, double tau,
                                    const StepSpec& step = {});

/// Chart switch at a state: exact coordinate chain in either direction.
RegularizedState switch_chart_to_regularized(const RotatingState& s);
RotatingState switch_chart_to_rotating(const RegularizedState& s);

/// H recovered from the regularized chart through K = (H - c)|q - M|:
///   H = c + (|eta| f - mu) / ((1 - xi0)|eta|).
double reconstruct_H(const RegularizedState& s, const RegularizedLevel& level);

/// Locate the first time in (0, t_max] where event(state) crosses zero, by
/// stepping and bisecting the crossing step. Returns true when found.
bool locate_event(const RotatingState& s0, const MassRatio& mu,
                  const std::function<double(const RotatingState&)>& event, double t_max,
                  const StepSpec& step, double& t_event, RotatingState& state_event,
                  double tol = 1e-10);

/// Classic RK4 with the same interface, used as a cross-check oracle only.
RotatingState advance_rk4(const RotatingState& s0, const MassRatio& mu, double t, double h);

} // namespace crtbp
