#include "srtrkit/loopctl.hpp"

#include <cmath>
#include <iomanip>

#include "srtrkit/numcore.hpp"
#include "srtrkit/structsyn.hpp"

namespace srtrkit::loopctl {

using srtrcore::SrtrPair;
using sysrep::StateSpaceSystem;

CMatrix KdController::transfer(Complex lambda) const { return sysrep::eval_tfm(realization, lambda); }

KdController kd_from_srtr(const SrtrPair& pair) {
    const Eigen::Index p = pair.p(), m = pair.m(), N = pair.order();
    Matrix A = Matrix::Zero(p + N, p + N);
    A.topRightCorner(p, N) = pair.Cw;
    A.bottomRightCorner(N, N) = pair.Aw;
    Matrix B(p + N, p + m);
    B << pair.Dw, pair.Bw;
    Matrix C = Matrix::Zero(p, p + N);
    C.leftCols(p).setIdentity();
    return {sysrep::make_system(A, B, C, Matrix::Zero(p, p + m), pair.domain), pair};
}

int unstable_pole_count(const StateSpaceSystem& sys, double boundary_tol) {
    const StateSpaceSystem minimal = sysrep::minimal_realization(sys);
    if (minimal.states() == 0) return 0;
    int count = 0;
    for (const auto& ev : numcore::eigenvalues(minimal.A))
        if (domain_margin(sys.domain, ev) > -boundary_tol)
            ++count;
    return count;
}

Eigen::Index RowImplementation::states() const {
    Eigen::Index n = 0;
    for (const auto& r : rows) n += r.states();
    return n;
}

StateSpaceSystem RowImplementation::stacked() const {
    structsyn::ReducedRows rr{rows, p, m, domain};
    return rr.stacked();
}

namespace {

// Row i of [W/x V/x] given a realization of the matching row of [W V]: one integrator on its output.
StateSpaceSystem integrate_row(const StateSpaceSystem& row) {
    const Eigen::Index n = row.states(), k = row.inputs();
    Matrix A = Matrix::Zero(n + 1, n + 1);
    A.block(0, 1, 1, n) = row.C;
    A.bottomRightCorner(n, n) = row.A;
    Matrix B(n + 1, k);
    B << row.D, row.B;
    Matrix C = Matrix::Zero(1, n + 1);
    C(0, 0) = 1.0;
    return sysrep::make_system(A, B, C, Matrix::Zero(1, k), row.domain);
}

}  // namespace

RowImplementation rowwise_implementation(const SrtrPair& pair, const std::optional<std::vector<int>>& orders,
                                         double truncation_tol) {
    require(srtrcore::srtr_is_stable(pair), ErrorKind::Precondition, "pair is not stable");
    RowImplementation out;
    out.p = pair.p();
    out.m = pair.m();
    out.domain = pair.domain;
    if (!orders) {
        const StateSpaceSystem wv = pair.as_system();
        for (Eigen::Index i = 0; i < pair.p(); ++i) {
            const StateSpaceSystem row =
                sysrep::make_system(wv.A, wv.B, wv.C.row(i), wv.D.row(i), wv.domain);
            out.rows.push_back(sysrep::minimal_realization(integrate_row(row)));
        }
        return out;
    }
    require(pair.has_generator() && pair.base.has_value(), ErrorKind::Precondition,
            "row reduction needs the pair's generating realization and gain");
    const structsyn::ReducedRows reduced = structsyn::reduce_rows(*pair.base, pair.K, *orders, truncation_tol);
    for (const auto& row : reduced.rows) out.rows.push_back(integrate_row(row));
    return out;
}

const char* signal_name(Signal s) {
    switch (s) {
        case Signal::R: return "r";
        case Signal::W: return "w";
        case Signal::Zeta: return "zeta";
        case Signal::Du: return "du";
        case Signal::U: return "u";
        case Signal::Y: return "y";
        case Signal::Z: return "z";
        case Signal::V: return "v";
    }
    return "?";
}

Eigen::Index ClosedLoopModel::size(Signal s) const {
    switch (s) {
        case Signal::R:
        case Signal::Zeta:
        case Signal::Y:
        case Signal::Z: return n_y;
        default: return n_u;
    }
}

Eigen::Index ClosedLoopModel::offset(Signal s) const {
    switch (s) {
        case Signal::R: return 0;
        case Signal::W: return n_y;
        case Signal::Zeta: return n_y + n_u;
        case Signal::Du: return 2 * n_y + n_u;
        case Signal::U: return 0;
        case Signal::Y: return n_u;
        case Signal::Z: return n_u + n_y;
        case Signal::V: return n_u + 2 * n_y;
    }
    return 0;
}

Matrix ClosedLoopModel::input_map(Signal s) const {
    require(s == Signal::R || s == Signal::W || s == Signal::Zeta || s == Signal::Du, ErrorKind::InvalidInput,
            "not an exogenous signal");
    return Bcl.middleCols(offset(s), size(s));
}

Matrix ClosedLoopModel::output_map(Signal s) const {
    require(s == Signal::U || s == Signal::Y || s == Signal::Z || s == Signal::V, ErrorKind::InvalidInput,
            "not an internal signal");
    return Ccl.middleRows(offset(s), size(s));
}

ClosedLoopModel assemble_closed_loop(const StateSpaceSystem& plant, const RowImplementation& rows) {
    plant.validate();
    const Eigen::Index nu = plant.inputs(), ny = plant.outputs();
    require(rows.p == nu && rows.m == ny && static_cast<Eigen::Index>(rows.rows.size()) == nu,
            ErrorKind::Dimension, "controller rows do not match the plant dimensions");
    require(rows.domain == plant.domain, ErrorKind::InvalidInput, "plant and controller disagree on the time domain");
    using numcore::Property;
    require(numcore::structural_property(plant.A, plant.B, Property::Stabilizable, plant.domain) &&
                numcore::structural_property(plant.A, plant.C, Property::Detectable, plant.domain),
            ErrorKind::Precondition, "plant is not stabilizable and detectable");
    for (const auto& r : rows.rows) {
        require(r.outputs() == 1 && r.inputs() == nu + ny, ErrorKind::Dimension, "each row needs [u; z] inputs");
        require(r.D.leftCols(nu).isZero(0.0), ErrorKind::AlgebraicLoop, "row feeds u through directly");
        require(numcore::structural_property(r.A, r.B, Property::Stabilizable, r.domain) &&
                    numcore::structural_property(r.A, r.C, Property::Detectable, r.domain),
                ErrorKind::Precondition, "row realization is not stabilizable and detectable");
    }
    const StateSpaceSystem ctl = rows.stacked();
    const Eigen::Index np = plant.states(), nc = ctl.states(), nx = np + nc;
    const Eigen::Index ne = 2 * (nu + ny), ns = 2 * (nu + ny);
    const Matrix Du_u = ctl.D.leftCols(nu), Du_z = ctl.D.rightCols(ny);
    const Matrix Bc_u = ctl.B.leftCols(nu), Bc_z = ctl.B.rightCols(ny);

    ClosedLoopModel cl;
    cl.plant_states = np;
    cl.controller_states = nc;
    cl.n_u = nu;
    cl.n_y = ny;
    cl.domain = plant.domain;
    const auto eo = [&](Signal s) { return cl.offset(s); };

    // Signal equations s = L s + P x + Q e.
    Matrix L = Matrix::Zero(ns, ns), P = Matrix::Zero(ns, nx), Q = Matrix::Zero(ns, ne);
    const Eigen::Index u = eo(Signal::U), y = eo(Signal::Y), z = eo(Signal::Z), v = eo(Signal::V);
    L.block(u, u, nu, nu) = Du_u;
    L.block(u, z, nu, ny) = Du_z;
    P.block(u, np, nu, nc) = ctl.C;
    Q.block(u, eo(Signal::Du), nu, nu) = Du_u;
    L.block(v, u, nu, nu).setIdentity();
    Q.block(v, eo(Signal::W), nu, nu).setIdentity();
    L.block(y, v, ny, nu) = plant.D;
    P.block(y, 0, ny, np) = plant.C;
    Q.block(y, eo(Signal::Zeta), ny, ny).setIdentity();
    L.block(z, y, ny, ny).setIdentity();
    Q.block(z, eo(Signal::R), ny, ny).setIdentity();

    const Matrix IL = Matrix::Identity(ns, ns) - L;
    Eigen::FullPivLU<Matrix> lu(IL);
    require(lu.isInvertible() && lu.rcond() > 1e-12, ErrorKind::AlgebraicLoop, "interconnection is not well posed");
    cl.Ccl = lu.solve(P);
    cl.Dcl = lu.solve(Q);

    // State equations x' = X x + S s + E e.
    Matrix X = Matrix::Zero(nx, nx), S = Matrix::Zero(nx, ns), E = Matrix::Zero(nx, ne);
    X.topLeftCorner(np, np) = plant.A;
    S.block(0, v, np, nu) = plant.B;
    X.bottomRightCorner(nc, nc) = ctl.A;
    S.block(np, u, nc, nu) = Bc_u;
    S.block(np, z, nc, ny) = Bc_z;
    E.block(np, eo(Signal::Du), nc, nu) = Bc_u;
    cl.Acl = X + S * cl.Ccl;
    cl.Bcl = E + S * cl.Dcl;
    return cl;
}

bool check_internal_stability(const ClosedLoopModel& cl) { return numcore::is_stable_spectrum(cl.Acl, cl.domain); }

namespace {

Vector exogenous_at(const ClosedLoopModel& cl, const ExogenousSignals& sig, double t) {
    Vector e = Vector::Zero(cl.Bcl.cols());
    const auto put = [&](const std::function<Vector(double)>& f, Signal s) {
        if (!f) return;
        const Vector val = f(t);
        require(val.size() == cl.size(s), ErrorKind::Dimension,
                std::string("generator for ") + signal_name(s) + " has the wrong size");
        e.segment(cl.offset(s), cl.size(s)) = val;
    };
    put(sig.r, Signal::R);
    put(sig.w, Signal::W);
    put(sig.zeta, Signal::Zeta);
    put(sig.du, Signal::Du);
    return e;
}

}  // namespace

Trajectory simulate(const ClosedLoopModel& cl, const ExogenousSignals& signals, const Vector& x0, double horizon,
                    double dt, int record_stride) {
    require(x0.size() == cl.states(), ErrorKind::Dimension, "initial state has the wrong size");
    require(x0.allFinite(), ErrorKind::InvalidInput, "initial state is not finite");
    require(horizon >= 0.0 && record_stride >= 1, ErrorKind::InvalidInput, "horizon and stride must be positive");
    const bool discrete = cl.domain == StabilityDomain::Discrete;
    if (discrete) dt = 1.0;
    require(dt > 0.0, ErrorKind::InvalidInput, "time step must be positive");
    const long steps = static_cast<long>(std::llround(horizon / dt));
    const long recorded = steps / record_stride + 1;

    Trajectory tr;
    tr.t.reserve(recorded);
    tr.states.resize(recorded, cl.states());
    tr.exogenous.resize(recorded, cl.Bcl.cols());
    tr.internal.resize(recorded, cl.Ccl.rows());
    Vector x = x0;
    long row = 0;
    const auto record = [&](double t) {
        const Vector e = exogenous_at(cl, signals, t);
        tr.t.push_back(t);
        tr.states.row(row) = x.transpose();
        tr.exogenous.row(row) = e.transpose();
        tr.internal.row(row) = (cl.Ccl * x + cl.Dcl * e).transpose();
        ++row;
    };
    const auto rhs = [&](const Vector& s, double t) -> Vector {
        return cl.Acl * s + cl.Bcl * exogenous_at(cl, signals, t);
    };
    record(0.0);
    for (long k = 0; k < steps; ++k) {
        const double t = k * dt;
        if (discrete) {
            x = rhs(x, t);
        } else {
            const Vector k1 = rhs(x, t);
            const Vector k2 = rhs(x + 0.5 * dt * k1, t + 0.5 * dt);
            const Vector k3 = rhs(x + 0.5 * dt * k2, t + 0.5 * dt);
            const Vector k4 = rhs(x + dt * k3, t + dt);
            x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        if (!x.allFinite()) {
            tr.diverged = true;
            break;
        }
        if ((k + 1) % record_stride == 0) record((k + 1) * dt);
    }
    tr.states.conservativeResize(row, Eigen::NoChange);
    tr.exogenous.conservativeResize(row, Eigen::NoChange);
    tr.internal.conservativeResize(row, Eigen::NoChange);
    return tr;
}

void write_csv(std::ostream& out, const ClosedLoopModel& cl, const Trajectory& traj) {
    out << "t";
    for (Eigen::Index k = 0; k < cl.states(); ++k) out << ",x" << k + 1;
    for (Signal s : {Signal::R, Signal::W, Signal::Zeta, Signal::Du, Signal::U, Signal::Y, Signal::Z, Signal::V})
        for (Eigen::Index k = 0; k < cl.size(s); ++k) out << ',' << signal_name(s) << k + 1;
    out << '\n' << std::setprecision(12);
    for (std::size_t r = 0; r < traj.t.size(); ++r) {
        const auto i = static_cast<Eigen::Index>(r);
        out << traj.t[r];
        for (Eigen::Index k = 0; k < traj.states.cols(); ++k) out << ',' << traj.states(i, k);
        for (Eigen::Index k = 0; k < traj.exogenous.cols(); ++k) out << ',' << traj.exogenous(i, k);
        for (Eigen::Index k = 0; k < traj.internal.cols(); ++k) out << ',' << traj.internal(i, k);
        out << '\n';
    }
}

}  // namespace srtrkit::loopctl
