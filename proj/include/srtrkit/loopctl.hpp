#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "srtrkit/srtrcore.hpp"
#include "srtrkit/sysrep.hpp"

namespace srtrkit::loopctl {

// [W/x  V/x] realized with a bank of p integrators in front of the pair state.
struct KdController {
    sysrep::StateSpaceSystem realization;
    srtrcore::SrtrPair source;

    CMatrix transfer(Complex lambda) const;
};

KdController kd_from_srtr(const srtrcore::SrtrPair& pair);

// Eigenvalues of the minimal part on or outside the stability boundary; boundary_tol absorbs rounding
// of poles that sit exactly on it.
int unstable_pole_count(const sysrep::StateSpaceSystem& sys, double boundary_tol = 1e-8);

// One single-output system per controller output, inputs ordered [u + du; z].
struct RowImplementation {
    std::vector<sysrep::StateSpaceSystem> rows;
    Eigen::Index p = 0, m = 0;
    StabilityDomain domain = StabilityDomain::Continuous;

    Eigen::Index states() const;
    sysrep::StateSpaceSystem stacked() const;
};

// Without orders every row of K_d is realized in full and pruned to its minimal part. With orders the pair's
// generator is reduced row by row and each reduced row is preceded by an integrator.
RowImplementation rowwise_implementation(const srtrcore::SrtrPair& pair,
                                         const std::optional<std::vector<int>>& orders = std::nullopt,
                                         double truncation_tol = 1e-2);

enum class Signal { R, W, Zeta, Du, U, Y, Z, V };
const char* signal_name(Signal s);

// x' = Acl x + Bcl e, s = Ccl x + Dcl e with e = [r; w; zeta; du] and s = [u; y; z; v].
// Positive feedback: v = u + w, y = G v + zeta, z = r + y, controller input [u + du; z].
struct ClosedLoopModel {
    Matrix Acl, Bcl, Ccl, Dcl;
    Eigen::Index plant_states = 0;
    Eigen::Index controller_states = 0;
    Eigen::Index n_u = 0;  // plant inputs = controller outputs
    Eigen::Index n_y = 0;  // plant outputs = controller measurements
    StabilityDomain domain = StabilityDomain::Continuous;

    Eigen::Index states() const { return Acl.rows(); }
    Eigen::Index size(Signal s) const;
    Eigen::Index offset(Signal s) const;  // within e for exogenous signals, within s otherwise
    Matrix input_map(Signal s) const;
    Matrix output_map(Signal s) const;
};

ClosedLoopModel assemble_closed_loop(const sysrep::StateSpaceSystem& plant, const RowImplementation& rows);

bool check_internal_stability(const ClosedLoopModel& cl);

// Each generator maps time (or the step index, in discrete time) to a signal value; empty means zero.
struct ExogenousSignals {
    std::function<Vector(double)> r, w, zeta, du;
};

struct Trajectory {
    std::vector<double> t;
    Matrix states;     // one row per recorded instant
    Matrix exogenous;  // [r w zeta du]
    Matrix internal;   // [u y z v]
    bool diverged = false;
};

// Continuous time uses classical RK4 with step dt; discrete time iterates the recursion for horizon steps.
// Every record_stride-th step is kept.
Trajectory simulate(const ClosedLoopModel& cl, const ExogenousSignals& signals, const Vector& x0, double horizon,
                    double dt = 1e-3, int record_stride = 1);

void write_csv(std::ostream& out, const ClosedLoopModel& cl, const Trajectory& traj);

}  // namespace srtrkit::loopctl
