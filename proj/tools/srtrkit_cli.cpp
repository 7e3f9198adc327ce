// srtrkit command-line front end.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "srtrkit/factorkit.hpp"
#include "srtrkit/fixtures.hpp"
#include "srtrkit/json_io.hpp"
#include "srtrkit/loopctl.hpp"
#include "srtrkit/numcore.hpp"
#include "srtrkit/srtrcore.hpp"
#include "srtrkit/structsyn.hpp"

namespace {

using namespace srtrkit;
using io::Json;

enum Exit { Ok = 0, VerificationFailed = 1, BadInput = 2, NumericalTrouble = 3 };

struct RunConfig {
    std::optional<double> tol;
    std::uint64_t seed = 42;
    int samples = 5;
    std::optional<std::string> domain;
    std::string output;

    std::string in, plant;
    double horizon = 20.0, dt = 1e-3;
    int stride = 100;
    std::string x0 = "random";
    std::string disturbance = "none";
    double amplitude = 1.0, period = 2.0;
    int max_iter = 400, restarts = 8;
    std::string fixture;
    bool from_nrf = false;

    double tol_or(double fallback) const { return tol.value_or(fallback); }
};

void emit(const RunConfig& cfg, const std::string& text) {
    if (cfg.output.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(cfg.output);
    require(out.good(), ErrorKind::InvalidInput, "cannot write " + cfg.output);
    out << text;
}

void emit(const RunConfig& cfg, const Json& j) { emit(cfg, j.dump(2) + "\n"); }

void override_domain(Json& j, const std::string& domain) {
    if (j.is_object()) {
        if (j.contains("domain")) j["domain"] = domain;
        for (auto& [key, value] : j.items()) override_domain(value, domain);
    } else if (j.is_array()) {
        for (auto& value : j) override_domain(value, domain);
    }
}

Json load(const RunConfig& cfg, const std::string& path) {
    require(!path.empty(), ErrorKind::InvalidInput, "an input file is required (--in)");
    Json j = io::read_json_file(path);
    if (cfg.domain) {
        parse_domain(*cfg.domain);
        override_domain(j, *cfg.domain);
    }
    return j;
}

const Json& member(const Json& j, const char* name) {
    require(j.is_object() && j.contains(name) && !j.at(name).is_null(), ErrorKind::InvalidInput,
            std::string("input lacks '") + name + "'");
    return j.at(name);
}

// ----- srtr -----

int srtr_build(const RunConfig& cfg) {
    const Json j = load(cfg, cfg.in);
    sysrep::PartitionedRealization base = j.contains("system")
                                              ? sysrep::to_output_normal(io::system_from_json(j.at("system"))).form
                                              : io::partitioned_from_json(member(j, "base"));
    Matrix K;
    if (j.contains("K")) {
        K = io::matrix_from_json(j.at("K"), base.A22.rows(), base.p());
    } else {
        std::mt19937_64 rng(cfg.seed);
        K = structsyn::assign_pair_spectrum(base, io::complex_list_from_json(member(j, "spectrum")), rng);
    }
    emit(cfg, io::to_json(srtrcore::srtr_from_k(base, K)));
    return Ok;
}

int srtr_check(const RunConfig& cfg) {
    const auto pair = io::pair_from_json(load(cfg, cfg.in));
    Json out;
    const bool stable = srtrcore::srtr_is_stable(pair);
    out["stable"] = stable;
    bool identity_ok = true;
    const double tol = cfg.tol_or(1e-8);
    std::optional<double> residual;
    if (!cfg.plant.empty())
        residual = srtrcore::verify_srtr_identity(pair, io::system_from_json(load(cfg, cfg.plant)), cfg.samples, cfg.seed);
    else if (pair.base)
        residual = srtrcore::verify_srtr_identity(pair, cfg.samples, cfg.seed);
    if (residual) {
        out["identity_residual"] = *residual;
        identity_ok = *residual <= tol;
    } else {
        out["identity_residual"] = nullptr;
    }
    const auto flcf = srtrcore::check_flcf(pair, cfg.seed);
    out["flcf"] = io::to_json(flcf);
    out["verified"] = stable && flcf.coprime && identity_ok;
    emit(cfg, out);
    return out["verified"].get<bool>() ? Ok : VerificationFailed;
}

int srtr_nrf(const RunConfig& cfg) {
    const auto pair = io::pair_from_json(load(cfg, cfg.in));
    emit(cfg, io::to_json(srtrcore::nrf_from_srtr(pair, cfg.tol_or(1e-8))));
    return Ok;
}

int srtr_pattern(const RunConfig& cfg) {
    const auto pair = io::pair_from_json(load(cfg, cfg.in));
    const double tol = cfg.tol_or(1e-9);
    const auto pattern = cfg.from_nrf ? srtrcore::sparsity_pattern(srtrcore::nrf_from_srtr(pair), tol)
                                      : srtrcore::sparsity_pattern(pair, tol);
    emit(cfg, io::to_json(pattern));
    return Ok;
}

// ----- lcf / riccati -----

int lcf_from_srtr(const RunConfig& cfg) {
    const auto pair = io::pair_from_json(load(cfg, cfg.in));
    const auto theta = factorkit::default_theta(pair.p(), pair.domain);
    emit(cfg, io::to_json(factorkit::lcf_from_srtr(pair, theta, cfg.samples, cfg.seed)));
    return Ok;
}

factorkit::CtnareOptions riccati_options(const RunConfig& cfg) {
    factorkit::CtnareOptions opt;
    opt.tol = cfg.tol_or(1e-10);
    return opt;
}

int lcf_to_srtr(const RunConfig& cfg) {
    const auto lcf = io::lcf_from_json(load(cfg, cfg.in));
    const auto sol = factorkit::solve_ctnare(lcf, riccati_options(cfg));
    emit(cfg, io::to_json(factorkit::srtr_from_lcf(lcf, sol, cfg.samples, cfg.seed)));
    return Ok;
}

int lcf_check(const RunConfig& cfg) {
    const auto lcf = io::lcf_from_json(load(cfg, cfg.in));
    require(!cfg.plant.empty(), ErrorKind::InvalidInput, "lcf check needs --system");
    const auto rep = factorkit::verify_lcf(lcf, io::system_from_json(load(cfg, cfg.plant)), cfg.samples, cfg.seed);
    Json out = io::to_json(rep);
    const bool ok = rep.stable && rep.coprime_over_s && rep.identity_residual <= cfg.tol_or(1e-8);
    out["verified"] = ok;
    emit(cfg, out);
    return ok ? Ok : VerificationFailed;
}

int riccati_solve(const RunConfig& cfg) {
    const auto lcf = io::lcf_from_json(load(cfg, cfg.in));
    emit(cfg, io::to_json(factorkit::solve_ctnare(lcf, riccati_options(cfg))));
    return Ok;
}

// ----- synth -----

struct SynthInput {
    sysrep::PartitionedRealization base;
    structsyn::SynthesisSpec spec;
    std::optional<Matrix> K;
};

SynthInput synth_input(const RunConfig& cfg) {
    const Json j = load(cfg, cfg.in);
    SynthInput s{io::partitioned_from_json(member(j, "base")), {}, std::nullopt};
    s.spec = io::spec_from_json(member(j, "spec"), s.base.domain);
    if (j.contains("K") && !j.at("K").is_null()) s.K = io::matrix_from_json(j.at("K"), s.base.A22.rows(), s.base.p());
    return s;
}

int synth_conditions(const RunConfig& cfg) {
    const auto s = synth_input(cfg);
    require(s.K.has_value(), ErrorKind::InvalidInput, "synth conditions needs K");
    const auto rep = structsyn::mm_conditions(s.base, *s.K, s.spec, cfg.tol_or(1e-6));
    emit(cfg, io::to_json(rep));
    return rep.pass ? Ok : VerificationFailed;
}

int synth_solve(const RunConfig& cfg) {
    const auto s = synth_input(cfg);
    structsyn::SolveOptions opt;
    opt.tol = cfg.tol_or(1e-6);
    opt.seed = cfg.seed;
    opt.max_iter = cfg.max_iter;
    opt.restarts = cfg.restarts;
    try {
        const auto res = structsyn::mm_solve(s.base, s.spec, opt);
        emit(cfg, Json{{"K", io::to_json(res.K)}, {"report", io::to_json(res.report)}, {"starts_run", res.starts_run}});
        return Ok;
    } catch (const structsyn::InfeasibleError& e) {
        std::cerr << "error: " << e.what() << "\n";
        emit(cfg, Json{{"K", nullptr},
                       {"best_K", io::to_json(e.best_K())},
                       {"report", io::to_json(e.best_report())}});
        return VerificationFailed;
    }
}

int synth_reduce(const RunConfig& cfg) {
    const auto s = synth_input(cfg);
    require(s.K.has_value(), ErrorKind::InvalidInput, "synth reduce needs K");
    emit(cfg, io::to_json(structsyn::reduce_rows(s.base, *s.K, s.spec, cfg.tol_or(1e-2))));
    return Ok;
}

// ----- loop -----

struct LoopInput {
    sysrep::StateSpaceSystem plant;
    srtrcore::SrtrPair pair;
    std::optional<std::vector<int>> orders;
};

LoopInput loop_input(const RunConfig& cfg) {
    const Json j = load(cfg, cfg.in);
    LoopInput in{io::system_from_json(member(j, "plant")), io::pair_from_json(member(j, "pair")), std::nullopt};
    if (j.contains("orders") && !j.at("orders").is_null()) in.orders = j.at("orders").get<std::vector<int>>();
    return in;
}

loopctl::ClosedLoopModel closed_loop(const LoopInput& in) {
    return loopctl::assemble_closed_loop(in.plant, loopctl::rowwise_implementation(in.pair, in.orders));
}

int loop_kd(const RunConfig& cfg) {
    const auto kd = loopctl::kd_from_srtr(io::pair_from_json(load(cfg, cfg.in)));
    emit(cfg, Json{{"realization", io::to_json(kd.realization)},
                   {"unstable_poles", loopctl::unstable_pole_count(kd.realization)}});
    return Ok;
}

int loop_assemble(const RunConfig& cfg) {
    emit(cfg, io::to_json(closed_loop(loop_input(cfg))));
    return Ok;
}

int loop_stability(const RunConfig& cfg) {
    const auto cl = closed_loop(loop_input(cfg));
    const bool stable = loopctl::check_internal_stability(cl);
    emit(cfg, Json{{"stable", stable},
                   {"spectral_margin", numcore::spectral_margin(cl.Acl, cl.domain)},
                   {"states", cl.states()},
                   {"spectrum", io::to_json(numcore::eigenvalues(cl.Acl))}});
    return stable ? Ok : VerificationFailed;
}

int loop_simulate(const RunConfig& cfg) {
    const auto cl = closed_loop(loop_input(cfg));
    Vector x0 = Vector::Zero(cl.states());
    if (cfg.x0 == "random") {
        std::mt19937_64 rng(cfg.seed);
        std::normal_distribution<double> g(0.0, 1.0);
        for (Eigen::Index k = 0; k < x0.size(); ++k) x0(k) = g(rng);
    } else if (cfg.x0 == "ones") {
        x0.setOnes();
    } else {
        require(cfg.x0 == "zero", ErrorKind::InvalidInput, "--x0 must be zero, ones or random");
    }
    loopctl::ExogenousSignals sig;
    const Eigen::Index nu = cl.n_u;
    const double amp = cfg.amplitude, period = cfg.period;
    if (cfg.disturbance == "step") {
        sig.du = [nu, amp](double) { return Vector::Constant(nu, amp); };
    } else if (cfg.disturbance == "square") {
        require(period > 0.0, ErrorKind::InvalidInput, "--period must be positive");
        sig.du = [nu, amp, period](double t) {
            return Vector::Constant(nu, std::fmod(t, period) < 0.5 * period ? amp : -amp);
        };
    } else {
        require(cfg.disturbance == "none", ErrorKind::InvalidInput, "--disturbance must be none, step or square");
    }
    const auto tr = loopctl::simulate(cl, sig, x0, cfg.horizon, cfg.dt, cfg.stride);
    std::ostringstream csv;
    loopctl::write_csv(csv, cl, tr);
    emit(cfg, csv.str());
    if (tr.diverged) std::cerr << "simulation diverged\n";
    return tr.diverged ? VerificationFailed : Ok;
}

// ----- reproduce / fixtures -----

std::string format_poly(const std::vector<double>& descending) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(4);
    const int deg = static_cast<int>(descending.size()) - 1;
    bool first = true;
    for (int k = 0; k <= deg; ++k) {
        const double c = descending[k];
        const int power = deg - k;
        if (!first) s << (c < 0 ? " - " : " + ");
        else if (c < 0) s << "-";
        first = false;
        s << std::abs(c);
        if (power == 1) s << " s";
        if (power > 1) s << " s^" << power;
    }
    return s.str();
}

int reproduce_ring_example(const RunConfig& cfg) {
    const auto base = cli::ring6_controller();
    const Matrix K = cli::ring6_K();
    structsyn::SynthesisSpec spec;
    const Eigen::MatrixXi mask = cli::ring6_mask().cast<int>();
    spec.masks = {mask, mask};
    spec.orders.assign(6, 1);
    spec.extra = structsyn::ExtraConstraint::RingHomogeneous;
    const auto rows = structsyn::reduce_rows(base, K, spec);
    const auto report = structsyn::mm_conditions(base, K, spec, 5e-3);

    std::ostringstream text;
    double worst = 0.0;
    Json tfs = Json::array();
    for (const auto& tf : cli::ring6_expected_srtr()) {
        double tf_worst = 0.0;
        std::vector<double> shown_num, shown_den;
        for (Eigen::Index i = 0; i < 6; ++i) {
            const auto& r = rows.rows[i];
            const Eigen::Index col = (tf.v_channel ? 6 : 0) + (i - tf.row_offset + 6) % 6;
            const double a = r.A(0, 0), b = r.B(0, col), c = r.C(0, 0), d = r.D(0, col);
            std::vector<double> num = {d, c * b - d * a}, den = {1.0, -a};
            if (tf.num.size() == 1) num.erase(num.begin());
            for (std::size_t k = 0; k < tf.num.size(); ++k)
                tf_worst = std::max(tf_worst, std::abs(num[k] - tf.num[k]) / std::abs(tf.num[k]));
            for (std::size_t k = 0; k < tf.den.size(); ++k)
                tf_worst = std::max(tf_worst, std::abs(den[k] - tf.den[k]) / std::abs(tf.den[k]));
            if (i == 0) {
                shown_num = num;
                shown_den = den;
            }
        }
        worst = std::max(worst, tf_worst);
        text << std::left << std::setw(8) << tf.name << " = (" << format_poly(shown_num) << ") / ("
             << format_poly(shown_den) << ")   reference (" << format_poly(tf.num) << ") / (" << format_poly(tf.den)
             << ")   max rel. deviation over rows " << std::scientific << std::setprecision(2) << tf_worst
             << std::defaultfloat << "\n";
        tfs.push_back({{"name", tf.name}, {"num", shown_num}, {"den", shown_den}, {"max_relative_deviation", tf_worst}});
    }
    text << "max coefficient deviation: " << std::scientific << std::setprecision(3) << worst << " (bound 1e-2)\n";
    text << "structure conditions at 5e-3: " << (report.pass ? "pass" : "fail") << ", worst residual "
         << report.max_residual << "\n";
    std::cout << text.str();
    if (!cfg.output.empty())
        emit(cfg, Json{{"transfer_functions", tfs}, {"max_relative_deviation", worst}, {"conditions", io::to_json(report)}});
    return worst <= 1e-2 ? Ok : VerificationFailed;
}

Json ring_synthesis_bundle() {
    structsyn::SynthesisSpec spec;
    const Eigen::MatrixXi mask = cli::ring6_mask().cast<int>();
    spec.masks = {mask, mask};
    spec.orders.assign(6, 1);
    spec.extra = structsyn::ExtraConstraint::RingHomogeneous;
    return {{"base", io::to_json(cli::ring6_controller())}, {"K", io::to_json(cli::ring6_K())}, {"spec", io::to_json(spec)}};
}

int fixtures_export(const RunConfig& cfg) {
    const std::string& name = cfg.fixture;
    Json out;
    if (name == "ring6-plant") {
        out = io::to_json(cli::ring6_plant());
    } else if (name == "ring6-controller") {
        out = io::to_json(cli::ring6_controller());
    } else if (name == "ring6-K") {
        out = io::to_json(cli::ring6_K());
    } else if (name == "ring6-expected-srtr") {
        out = Json::array();
        for (const auto& tf : cli::ring6_expected_srtr())
            out.push_back({{"name", tf.name},
                           {"num", tf.num},
                           {"den", tf.den},
                           {"entry", tf.row_offset == 0 ? "(i,i)" : "(i,i-1)"},
                           {"block", tf.v_channel ? "V" : "W"}});
    } else if (name == "ring6-pair") {
        out = io::to_json(srtrcore::srtr_from_k(cli::ring6_controller(), cli::ring6_K()));
    } else if (name == "ring6-synthesis") {
        out = ring_synthesis_bundle();
    } else if (name == "ring6-loop") {
        out = {{"plant", io::to_json(cli::ring6_plant())},
               {"pair", io::to_json(srtrcore::srtr_from_k(cli::ring6_controller(), cli::ring6_K()))},
               {"orders", std::vector<int>(6, 1)}};
    } else {
        throw Error(ErrorKind::InvalidInput, "unknown fixture '" + name + "'");
    }
    emit(cfg, out);
    return Ok;
}

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::NumericalFailure:
        case ErrorKind::NoSolution:
        case ErrorKind::PoleEvaluation: return NumericalTrouble;
        case ErrorKind::Precondition:
        case ErrorKind::Infeasible: return VerificationFailed;
        default: return BadInput;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"srtrkit: SRTR network representations, factorizations and structured controllers"};
    app.require_subcommand(1);
    app.fallthrough();
    RunConfig cfg;
    double tol = 0.0;
    std::string domain;
    app.add_option("--tol", tol, "numerical tolerance (command specific default)")
        ->check(CLI::PositiveNumber);
    app.add_option("--seed", cfg.seed, "seed for randomized checks")->capture_default_str();
    app.add_option("--samples", cfg.samples, "number of sample points")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--domain", domain, "override the time domain of inputs")
        ->check(CLI::IsMember({"continuous", "discrete"}));
    app.add_option("-o,--output", cfg.output, "write the result here instead of stdout");

    int code = Ok;
    const auto with_in = [&](CLI::App* sub) { sub->add_option("--in", cfg.in, "input JSON file")->required(); };
    const auto action = [&](CLI::App* group, const char* name, const char* help, int (*fn)(const RunConfig&)) {
        CLI::App* sub = group->add_subcommand(name, help);
        sub->callback([&, fn] { code = fn(cfg); });
        return sub;
    };

    CLI::App* srtr = app.add_subcommand("srtr", "build and check SRTR pairs")->require_subcommand(1);
    with_in(action(srtr, "build", "pair from {system|base, K|spectrum}", srtr_build));
    auto* check = action(srtr, "check", "stability, identity and coprimeness", srtr_check);
    with_in(check);
    check->add_option("--system", cfg.plant, "realization the pair should represent");
    with_in(action(srtr, "nrf", "network realization function", srtr_nrf));
    auto* pattern = action(srtr, "pattern", "sparsity pattern", srtr_pattern);
    with_in(pattern);
    pattern->add_flag("--nrf", cfg.from_nrf, "read the pattern off the NRF");

    CLI::App* lcf = app.add_subcommand("lcf", "left coprime factorizations")->require_subcommand(1);
    with_in(action(lcf, "from-srtr", "LCF of a pair", lcf_from_srtr));
    with_in(action(lcf, "to-srtr", "pair from an LCF", lcf_to_srtr));
    auto* lcheck = action(lcf, "check", "verify an LCF against a plant", lcf_check);
    with_in(lcheck);
    lcheck->add_option("--system", cfg.plant, "realization the factors should represent")->required();

    CLI::App* ric = app.add_subcommand("riccati", "nonsymmetric Riccati equation")->require_subcommand(1);
    with_in(action(ric, "solve", "stabilizing solution", riccati_solve));

    CLI::App* synth = app.add_subcommand("synth", "structured synthesis")->require_subcommand(1);
    with_in(action(synth, "conditions", "condition residuals for {base, K, spec}", synth_conditions));
    auto* solve = action(synth, "solve", "search a structured K for {base, spec}", synth_solve);
    with_in(solve);
    solve->add_option("--max-iter", cfg.max_iter, "evaluations per start")->capture_default_str();
    solve->add_option("--restarts", cfg.restarts, "random restarts")->capture_default_str();
    with_in(action(synth, "reduce", "reduced rows for {base, K, spec}", synth_reduce));

    CLI::App* loop = app.add_subcommand("loop", "closed-loop implementation")->require_subcommand(1);
    with_in(action(loop, "kd", "controller with integrators", loop_kd));
    with_in(action(loop, "assemble", "closed loop for {plant, pair, orders}", loop_assemble));
    with_in(action(loop, "stability", "internal stability", loop_stability));
    auto* sim = action(loop, "simulate", "time response as CSV", loop_simulate);
    with_in(sim);
    sim->add_option("--horizon", cfg.horizon, "simulated time (steps in discrete time)")->capture_default_str();
    sim->add_option("--dt", cfg.dt, "RK4 step")->check(CLI::PositiveNumber)->capture_default_str();
    sim->add_option("--stride", cfg.stride, "keep every k-th step")->check(CLI::PositiveNumber)->capture_default_str();
    sim->add_option("--x0", cfg.x0, "zero, ones or random")->capture_default_str();
    sim->add_option("--disturbance", cfg.disturbance, "none, step or square on du")->capture_default_str();
    sim->add_option("--amplitude", cfg.amplitude, "disturbance amplitude")->capture_default_str();
    sim->add_option("--period", cfg.period, "square wave period")->capture_default_str();

    CLI::App* repro = app.add_subcommand("reproduce", "worked example")->require_subcommand(1);
    action(repro, "paper-example", "six-node ring: reduced control laws", reproduce_ring_example);

    CLI::App* fx = app.add_subcommand("fixtures", "embedded data")->require_subcommand(1);
    auto* exp = action(fx, "export", "write a fixture as JSON", fixtures_export);
    exp->add_option("name", cfg.fixture,
                    "ring6-plant, ring6-controller, ring6-K, ring6-expected-srtr, ring6-pair, ring6-synthesis, ring6-loop")
        ->required();

    app.parse_complete_callback([&] {
        if (app.count("--tol")) cfg.tol = tol;
        if (app.count("--domain")) cfg.domain = domain;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? Ok : BadInput;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: malformed JSON: " << e.what() << "\n";
        return BadInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return NumericalTrouble;
    }
    return code;
}
