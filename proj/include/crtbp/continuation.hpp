#pragma once

#include "crtbp/flow.hpp"
#include "crtbp/types.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace crtbp {

struct PeriodicOrbit {
    RotatingState initial;
    double period = 0.0;
    double closure_residual = 0.0;
    double energy = 0.0;
    bool planar = false;
    double action = 0.0; // Rabinowitz action of the orbit
    double length = 0.0; // integral of |qdot| dt
};

struct CorrectorSpec {
    int segments = 4;
    int max_iters = 30;
    double tol = 1e-10;
    double fd_eps = 1e-7;
    StepSpec step{5e-4, 3, 1e-14, 200};
};

struct CorrectorResult {
    PeriodicOrbit orbit;
    bool converged = false;
    std::vector<double> residual_history;
    std::string message;
};

/// Multiple-shooting Newton correction of a near-periodic guess with the
/// period as unknown and a phase condition anchored at the guess. A planar
/// guess is corrected inside the planar invariant subspace.
CorrectorResult correct_periodic(const RotatingState& guess, double period_guess,
                                 const MassRatio& mu, const CorrectorSpec& spec = {});

/// Near-circular planar seed orbit around the Moon at the given radius,
/// found from the two-body-limit initial guess plus a section-return scan,
/// then corrected.
CorrectorResult kepler_seed_orbit(const MassRatio& mu, double radius,
                                  const CorrectorSpec& spec = {});

struct FamilyMember {
    PeriodicOrbit orbit;
    double r = 0.0;       // normalized continuation parameter in [0,1]
    double k_local = 0.0; // |d log tau / d r| to the previous member
};

struct OrbitFamily {
    std::vector<FamilyMember> members;
    double k_estimate = 0.0; // Lipschitz constant of log tau in r (with slack)
    std::vector<std::size_t> fold_indices;
    bool reached_target = false;
};

struct ContinuationSpec {
    std::size_t max_steps = 40;
    double initial_energy_step = 0.02;
    double arclength_step = 0.05;
    CorrectorSpec corrector;
};

/// Pseudo-arclength continuation of a periodic-orbit family toward the
/// target energy; proceeds through folds (recorded). The reported k is the
/// largest observed |d log tau / d r| with a hair of slack so the strict
/// two-sided period estimate holds for every adjacent pair.
OrbitFamily continue_family(const PeriodicOrbit& seed, double energy_target, const MassRatio& mu,
                            const ContinuationSpec& spec = {});

struct ActionResult {
    double action = 0.0;    // integral of lambda(X_H) dt over one period
    double reeb_time = 0.0; // integral of |lambda(X_H)| dt
    std::vector<double> integrand; // lambda(X_H) at quadrature samples
    bool constant_sign = false;
};

/// Rabinowitz action of an on-shell periodic orbit for the primitive
/// lambda = -(q - M) . dp of the Moon-radial Liouville field.
ActionResult rabinowitz_action(const PeriodicOrbit& orbit, const MassRatio& mu,
                               const StepSpec& step = {5e-4, 3, 1e-14, 200});

struct BlueSkyConfig {
    double growth_factor = 5.0; // flag when period or length grows beyond this
};

struct BlueSkyReport {
    bool flagged = false;
    double max_period_ratio = 1.0;
    double max_length_ratio = 1.0;
    double k_estimate = 0.0;
    std::string reason;
};

/// Flags a family whose period or length grows beyond the configured factor.
/// On certified-contact energy windows the expected result is no flag.
BlueSkyReport blue_sky_monitor(const OrbitFamily& family, const BlueSkyConfig& cfg = {});

} // namespace crtbp
