// Acceptance suite: one line per criterion, exit status 0 only if every criterion passes
// (or, with --expect-fail, if exactly the listed criteria fail).
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>

#include "srtrkit/factorkit.hpp"
#include "srtrkit/fixtures.hpp"
#include "srtrkit/loopctl.hpp"
#include "srtrkit/numcore.hpp"
#include "srtrkit/rational.hpp"
#include "srtrkit/srtrcore.hpp"
#include "srtrkit/structsyn.hpp"
#include "support.hpp"

using namespace srtrkit;
using srtrcore::SrtrPair;
using testsupport::random_matrix;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

class Clock {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* format, double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, value);
    return buf;
}

structsyn::SynthesisSpec ring_spec() {
    structsyn::SynthesisSpec spec;
    const Eigen::MatrixXi mask = cli::ring6_mask().cast<int>();
    spec.masks = {mask, mask};
    spec.orders.assign(6, 1);
    spec.extra = structsyn::ExtraConstraint::RingHomogeneous;
    return spec;
}

SrtrPair ring_pair() { return srtrcore::srtr_from_k(cli::ring6_controller(), cli::ring6_K()); }

// Oracle: evaluate a scalar row realization's transfer function at a point.
Complex row_value(const sysrep::StateSpaceSystem& r, Eigen::Index col, Complex x) {
    const CMatrix A = r.A.cast<Complex>();
    const CMatrix resolvent = (x * CMatrix::Identity(A.rows(), A.cols()) - A).inverse();
    return (r.C.cast<Complex>() * resolvent * r.B.col(col).cast<Complex>())(0, 0) + r.D(0, col);
}

Outcome ring_reduced_laws() {
    const Clock clock;
    const auto rows = structsyn::reduce_rows(cli::ring6_controller(), cli::ring6_K(), ring_spec());
    double worst = 0.0;
    bool shape_ok = rows.rows.size() == 6;
    for (const auto& tf : cli::ring6_expected_srtr()) {
        for (Eigen::Index i = 0; i < 6 && shape_ok; ++i) {
            const auto& r = rows.rows[i];
            if (r.states() != 1) {
                shape_ok = false;
                break;
            }
            const Eigen::Index col = (tf.v_channel ? 6 : 0) + (i - tf.row_offset + 6) % 6;
            // Monic first-order form: (d s + e) / (s + f) with f = -a, e = c b - d a.
            const double a = r.A(0, 0), b = r.B(0, col), c = r.C(0, 0), d = r.D(0, col);
            std::vector<double> num = {d, c * b - d * a};
            if (tf.num.size() == 1) {
                worst = std::max(worst, std::abs(d) / std::abs(tf.num[0]));
                num.erase(num.begin());
            }
            for (std::size_t k = 0; k < tf.num.size(); ++k)
                worst = std::max(worst, std::abs(num[k] - tf.num[k]) / std::abs(tf.num[k]));
            worst = std::max(worst, std::abs(-a - tf.den[1]) / std::abs(tf.den[1]));
            // Cross-check the closed form against direct evaluation.
            const Complex x(0.7, 1.3);
            const Complex direct = row_value(r, col, x);
            const Complex formula = (d * x + (c * b - d * a)) / (x - a);
            worst = std::max(worst, std::abs(direct - formula) / (1.0 + std::abs(direct)));
        }
    }
    const double t = clock.seconds();
    return {shape_ok && worst <= 1e-2 && t < 1.0,
            "max relative coefficient deviation " + fmt("%.2e", worst) + " (bound 1e-2), " + fmt("%.3f", t) + " s"};
}

Outcome ring_certificate() {
    const auto rep = structsyn::mm_conditions(cli::ring6_controller(), cli::ring6_K(), ring_spec(), 5e-3);
    return {rep.pass && rep.max_residual <= 5e-3,
            "max residual " + fmt("%.2e", rep.max_residual) + ", ring-homogeneous residual " +
                fmt("%.2e", rep.extra) + " (bound 5e-3)"};
}

struct RandomInstance {
    sysrep::StateSpaceSystem sys;
    SrtrPair pair;
};

std::vector<RandomInstance> identity_instances() {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> pick_pm(1, 3);
    std::vector<RandomInstance> out;
    while (out.size() < 100) {
        const int p = pick_pm(rng), m = pick_pm(rng);
        std::uniform_int_distribution<int> pick_n(p + 1, 10);
        const int n = pick_n(rng);
        const auto sys = sysrep::make_system(random_matrix(rng, n, n), random_matrix(rng, n, m),
                                             random_matrix(rng, p, n), Matrix::Zero(p, m));
        if (!sysrep::is_minimal(sys)) continue;
        const auto base = sysrep::to_output_normal(sys).form;
        out.push_back({sys, srtrcore::srtr_from_k(base, random_matrix(rng, n - p, p))});
    }
    return out;
}

Outcome identity_property(const std::vector<RandomInstance>& instances) {
    const Clock clock;
    double worst = 0.0;
    std::uint64_t seed = 1;
    for (const auto& inst : instances)
        worst = std::max(worst, srtrcore::verify_srtr_identity(inst.pair, inst.sys, 5, seed++));
    const double t = clock.seconds();
    return {worst <= 1e-8 && t < 10.0,
            "100 systems, worst residual " + fmt("%.2e", worst) + " (bound 1e-8), " + fmt("%.2f", t) + " s"};
}

Outcome coprimeness(const std::vector<RandomInstance>& instances) {
    int coprime = 0;
    for (const auto& inst : instances) coprime += srtrcore::check_flcf(inst.pair).coprime ? 1 : 0;
    // [x + 2, (x + 2)/(x + 1)]
    const auto common_zero = srtrcore::srtr_from_realization(
        sysrep::make_system(Matrix::Constant(1, 1, -1.0), (Matrix(1, 2) << 0.0, 1.0).finished(),
                            Matrix::Constant(1, 1, 1.0), (Matrix(1, 2) << -2.0, 1.0).finished()));
    const bool detected = !srtrcore::check_flcf(common_zero).coprime;
    return {coprime == static_cast<int>(instances.size()) && detected,
            std::to_string(coprime) + "/" + std::to_string(instances.size()) + " coprime, common-zero fixture " +
                (detected ? "rejected" : "accepted")};
}

// Pairs with a gain of moderate size; the absolute residual bound below presumes O(1) scaling.
SrtrPair random_stable_pair(std::mt19937_64& rng, int n, int p, int m, StabilityDomain domain) {
    for (;;) {
        const auto sys = sysrep::make_system(random_matrix(rng, n, n), random_matrix(rng, n, m),
                                             random_matrix(rng, p, n), Matrix::Zero(p, m), domain);
        if (!sysrep::is_minimal(sys)) continue;
        const auto base = sysrep::to_output_normal(sys).form;
        std::uniform_real_distribution<double> u(domain == StabilityDomain::Continuous ? -4.0 : -0.8,
                                                 domain == StabilityDomain::Continuous ? -0.5 : 0.8);
        std::vector<Complex> targets;
        for (int i = 0; i < n - p; ++i) targets.emplace_back(u(rng), 0.0);
        const Matrix K = structsyn::assign_pair_spectrum(base, targets, rng);
        if (K.norm() > 100.0) continue;
        return srtrcore::srtr_from_k(base, K);
    }
}

double pair_gap(const SrtrPair& a, const SrtrPair& b, std::mt19937_64& rng) {
    double worst = 0.0;
    for (const auto& x : numcore::sample_points(testsupport::oracle_eigenvalues(a.Aw), 5, rng)) {
        const CMatrix Ga = sysrep::eval_tfm(a.as_system(), x);
        worst = std::max(worst, (Ga - sysrep::eval_tfm(b.as_system(), x)).norm() / (1.0 + Ga.norm()));
    }
    return worst;
}

Outcome factorization_round_trip() {
    std::mt19937_64 rng(77);
    double worst_gap = 0.0, worst_residual = 0.0;
    int spectrum_ok = 0, solved = 0;
    std::string first_error;
    for (int trial = 0; trial < 50; ++trial) {
        const int p = 1 + trial % 3, m = 1 + (trial / 3) % 3, n = p + 1 + trial % 5;
        const auto domain = trial % 5 == 4 ? StabilityDomain::Discrete : StabilityDomain::Continuous;
        const auto pair = random_stable_pair(rng, n, p, m, domain);
        try {
            const auto lcf = factorkit::lcf_from_srtr(pair, factorkit::default_theta(p, domain));
            const auto sol = factorkit::solve_ctnare(lcf);
            ++solved;
            worst_residual = std::max(worst_residual, factorkit::ctnare_residual(lcf, sol.K).norm());
            const bool inside = std::all_of(sol.closed_spectrum.begin(), sol.closed_spectrum.end(),
                                            [&](Complex e) { return in_domain(domain, e); });
            spectrum_ok += inside ? 1 : 0;
            worst_gap = std::max(worst_gap, pair_gap(pair, factorkit::srtr_from_lcf(lcf, sol), rng));
        } catch (const Error& e) {
            if (first_error.empty()) first_error = e.what();
        }
    }
    std::string detail = std::to_string(solved) + "/50 solved, worst gap " + fmt("%.2e", worst_gap) +
                         " (bound 1e-6), worst residual " + fmt("%.2e", worst_residual) + " (bound 1e-10), " +
                         std::to_string(spectrum_ok) + "/50 closed spectra stable";
    if (!first_error.empty()) detail += ", first error: " + first_error;
    return {solved == 50 && spectrum_ok == 50 && worst_gap <= 1e-6 && worst_residual <= 1e-10, detail};
}

Outcome integrator_controller() {
    std::mt19937_64 rng(99);
    int continuous_ok = 0, discrete_ok = 0;
    const int trials = 20;
    for (int trial = 0; trial < trials; ++trial) {
        const int p = 1 + trial % 3, m = 1 + trial % 2, n = p + 1 + trial % 4;
        const auto pair = random_stable_pair(rng, n, p, m, StabilityDomain::Continuous);
        const auto kd = loopctl::kd_from_srtr(pair);
        int near_zero = 0;
        bool others_inside = true;
        for (const auto& ev : testsupport::oracle_eigenvalues(kd.realization.A)) {
            if (std::abs(ev) <= 1e-8)
                ++near_zero;
            else
                others_inside = others_inside && ev.real() < 0.0;
        }
        continuous_ok += (near_zero == p && others_inside) ? 1 : 0;

        const auto dpair = random_stable_pair(rng, n, p, m, StabilityDomain::Discrete);
        const auto dkd = loopctl::kd_from_srtr(dpair);
        const auto dev = testsupport::oracle_eigenvalues(dkd.realization.A);
        discrete_ok += std::all_of(dev.begin(), dev.end(), [](Complex e) { return std::abs(e) < 1.0; }) ? 1 : 0;
    }
    return {continuous_ok == trials && discrete_ok == trials,
            "continuous " + std::to_string(continuous_ok) + "/" + std::to_string(trials) + " with exactly p poles at 0, " +
                "discrete " + std::to_string(discrete_ok) + "/" + std::to_string(trials) + " stable"};
}

Outcome ring_closed_loop() {
    const Clock clock;
    const auto rows = loopctl::rowwise_implementation(ring_pair(), std::vector<int>(6, 1));
    const auto cl = loopctl::assemble_closed_loop(cli::ring6_plant(), rows);
    double abscissa = -1e300;
    for (const auto& ev : testsupport::oracle_eigenvalues(cl.Acl)) abscissa = std::max(abscissa, ev.real());
    std::mt19937_64 rng(5);
    const Vector x0 = random_matrix(rng, cl.states(), 1);
    const auto tr = loopctl::simulate(cl, {}, x0, 20.0, 1e-3, 1000);
    const double final_ratio = tr.states.row(tr.states.rows() - 1).norm() / x0.norm();
    const double t = clock.seconds();
    const bool states_ok = cl.states() == 24;
    const bool hurwitz = abscissa < -1e-6;
    const bool decays = !tr.diverged && final_ratio < 1e-6;
    std::string detail = std::to_string(cl.states()) + " states (12 plant + 6 rows of order 2), spectral abscissa " +
                         fmt("%.4f", abscissa) + ", |x(20)|/|x0| = " + fmt("%.2e", final_ratio) +
                         " (bound 1e-6), " + fmt("%.2f", t) + " s";
    if (!decays) detail += "; decay clause not met";
    return {states_ok && hurwitz && decays && t < 5.0, detail};
}

Outcome nrf_properties() {
    std::mt19937_64 rng(31);
    double worst_gap = 0.0;
    int diag_nonzero = 0, pattern_mismatch = 0, pairs = 0;
    const auto examine = [&](const SrtrPair& pair, double pattern_tol) {
        const auto nrf = srtrcore::nrf_from_srtr(pair);
        ++pairs;
        for (Eigen::Index i = 0; i < pair.p(); ++i)
            if (srtrcore::degree(nrf.Phi(i, i).num) != -1) ++diag_nonzero;
        if (!(srtrcore::sparsity_pattern(pair, pattern_tol) == srtrcore::sparsity_pattern(nrf, pattern_tol)))
            ++pattern_mismatch;
        const Eigen::Index p = pair.p();
        for (const auto& x : numcore::sample_points(testsupport::oracle_eigenvalues(pair.Aw), 5, rng)) {
            const CMatrix G = (x * CMatrix::Identity(p, p) - pair.W(x)).partialPivLu().solve(pair.V(x));
            worst_gap = std::max(worst_gap, (nrf.transfer(x) - G).norm() / (1.0 + G.norm()));
        }
    };
    examine(ring_pair(), 1e-2);
    for (int trial = 0; trial < 20; ++trial) {
        const auto inst = testsupport::structured_instance(rng, 3 + trial % 2, 2, 1 + trial % 2);
        examine(srtrcore::srtr_from_k(inst.base, Matrix::Zero(inst.base.n() - inst.base.p(), inst.base.p())), 1e-9);
    }
    return {diag_nonzero == 0 && pattern_mismatch == 0 && worst_gap <= 1e-7,
            std::to_string(pairs) + " pairs, " + std::to_string(diag_nonzero) + " nonzero diagonal entries, " +
                std::to_string(pattern_mismatch) + " pattern mismatches, worst sampling residual " +
                fmt("%.2e", worst_gap) + " (bound 1e-7)"};
}

Outcome ring_solver() {
    const Clock clock;
    structsyn::SolveOptions opt;
    opt.tol = 1e-6;
    opt.time_budget_seconds = 60.0;
    try {
        const auto res = structsyn::mm_solve(cli::ring6_controller(), ring_spec(), opt);
        const auto check = structsyn::mm_conditions(cli::ring6_controller(), res.K, ring_spec(), 1e-6);
        const double t = clock.seconds();
        return {check.pass && t < 60.0,
                "found K with max residual " + fmt("%.2e", check.max_residual) + " in " + fmt("%.2f", t) + " s"};
    } catch (const structsyn::InfeasibleError& e) {
        return {false, "no K within 1e-6; best max residual " + fmt("%.2e", e.best_report().max_residual) + " after " +
                           fmt("%.2f", clock.seconds()) + " s"};
    }
}

std::set<int> parse_list(const std::string& text) {
    std::set<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.insert(std::stoi(item));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> expected_failures;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--expect-fail" && i + 1 < argc) expected_failures = parse_list(argv[++i]);
    }

    const auto instances = identity_instances();
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"ring reduced control laws", ring_reduced_laws},
        {"ring structure certificate", ring_certificate},
        {"identity on random systems", [&] { return identity_property(instances); }},
        {"coprimeness", [&] { return coprimeness(instances); }},
        {"factorization round trip", factorization_round_trip},
        {"integrator controller poles", integrator_controller},
        {"ring closed loop", ring_closed_loop},
        {"network realization function", nrf_properties},
        {"structured solver on the ring", ring_solver},
    };

    std::set<int> failed;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const int id = static_cast<int>(k + 1);
        if (!o.pass) failed.insert(id);
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << id << ". " << criteria[k].first << ": " << o.detail
                  << std::endl;
    }
    std::cout << (criteria.size() - failed.size()) << "/" << criteria.size() << " criteria pass" << std::endl;
    if (argc > 1 && !expected_failures.empty()) {
        if (failed == expected_failures) return 0;
        std::cout << "failure set differs from the expected one" << std::endl;
        return 1;
    }
    return failed.empty() ? 0 : 1;
}
