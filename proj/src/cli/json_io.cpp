#include "srtrkit/json_io.hpp"

#include <fstream>

#include "srtrkit/numcore.hpp"

namespace srtrkit::io {

namespace {

const Json& field(const Json& j, const char* name) {
    require(j.is_object(), ErrorKind::InvalidInput, std::string("expected an object holding '") + name + "'");
    const auto it = j.find(name);
    require(it != j.end(), ErrorKind::InvalidInput, std::string("missing field '") + name + "'");
    return *it;
}

bool has(const Json& j, const char* name) { return j.is_object() && j.contains(name) && !j.at(name).is_null(); }

StabilityDomain domain_of(const Json& j) {
    if (!has(j, "domain")) return StabilityDomain::Continuous;
    const Json& d = j.at("domain");
    require(d.is_string(), ErrorKind::InvalidInput, "domain must be a string");
    return parse_domain(d.get<std::string>());
}

double number(const Json& v) {
    require(v.is_number(), ErrorKind::InvalidInput, "matrix entries must be numbers");
    return v.get<double>();
}

}  // namespace

Json to_json(const Matrix& M) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        Json r = Json::array();
        for (Eigen::Index k = 0; k < M.cols(); ++k) r.push_back(M(i, k));
        rows.push_back(std::move(r));
    }
    return rows;
}

Matrix matrix_from_json(const Json& j) {
    require(j.is_array(), ErrorKind::InvalidInput, "matrix must be an array of rows");
    if (j.empty()) return Matrix(0, 0);
    const auto cols = static_cast<Eigen::Index>(j.at(0).is_array() ? j.at(0).size() : 0);
    Matrix M(static_cast<Eigen::Index>(j.size()), cols);
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        const Json& r = j.at(i);
        require(r.is_array() && static_cast<Eigen::Index>(r.size()) == cols, ErrorKind::InvalidInput,
                "matrix rows must be arrays of equal length");
        for (Eigen::Index k = 0; k < cols; ++k) M(i, k) = number(r.at(k));
    }
    return M;
}

Matrix matrix_from_json(const Json& j, Eigen::Index rows, Eigen::Index cols) {
    Matrix M = matrix_from_json(j);
    if (M.size() == 0 && (rows == 0 || cols == 0)) return Matrix(rows, cols);
    require(M.rows() == rows && M.cols() == cols, ErrorKind::Dimension,
            "matrix has shape " + std::to_string(M.rows()) + "x" + std::to_string(M.cols()) + ", expected " +
                std::to_string(rows) + "x" + std::to_string(cols));
    return M;
}

Json to_json(const Eigen::MatrixXi& M) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        Json r = Json::array();
        for (Eigen::Index k = 0; k < M.cols(); ++k) r.push_back(M(i, k));
        rows.push_back(std::move(r));
    }
    return rows;
}

Eigen::MatrixXi mask_from_json(const Json& j) {
    const Matrix M = matrix_from_json(j);
    require((M.array() == M.array().round()).all(), ErrorKind::InvalidInput, "mask entries must be integers");
    return M.cast<int>();
}

Json to_json(const std::vector<Complex>& values) {
    Json out = Json::array();
    for (const auto& v : values) out.push_back({v.real(), v.imag()});
    return out;
}

std::vector<Complex> complex_list_from_json(const Json& j) {
    require(j.is_array(), ErrorKind::InvalidInput, "expected a list of [re, im] pairs");
    std::vector<Complex> out;
    for (const auto& e : j) {
        if (e.is_number()) {
            out.emplace_back(e.get<double>(), 0.0);
            continue;
        }
        require(e.is_array() && e.size() == 2, ErrorKind::InvalidInput, "complex values are [re, im] pairs");
        out.emplace_back(number(e.at(0)), number(e.at(1)));
    }
    return out;
}

Json to_json(const sysrep::StateSpaceSystem& sys) {
    return {{"A", to_json(sys.A)}, {"B", to_json(sys.B)},   {"C", to_json(sys.C)},
            {"D", to_json(sys.D)}, {"domain", to_string(sys.domain)}};
}

sysrep::StateSpaceSystem system_from_json(const Json& j) {
    if (!has(j, "A") && has(j, "A11")) return partitioned_from_json(j).to_system();
    const Matrix A = matrix_from_json(field(j, "A"));
    const Eigen::Index n = A.rows();
    Matrix D;
    if (has(j, "D")) {
        D = matrix_from_json(j.at("D"));
    } else {
        const Matrix B = matrix_from_json(field(j, "B")), C = matrix_from_json(field(j, "C"));
        D = Matrix::Zero(C.rows(), B.cols());
    }
    const Matrix B = matrix_from_json(field(j, "B"), n, D.cols());
    const Matrix C = matrix_from_json(field(j, "C"), D.rows(), n);
    return sysrep::make_system(A, B, C, D, domain_of(j));
}

Json to_json(const sysrep::PartitionedRealization& b) {
    return {{"A11", to_json(b.A11)}, {"A12", to_json(b.A12)}, {"A21", to_json(b.A21)},        {"A22", to_json(b.A22)},
            {"B1", to_json(b.B1)},   {"B2", to_json(b.B2)},   {"domain", to_string(b.domain)}};
}

sysrep::PartitionedRealization partitioned_from_json(const Json& j) {
    return sysrep::make_partitioned(matrix_from_json(field(j, "A11")), matrix_from_json(field(j, "A12")),
                                    matrix_from_json(field(j, "A21")), matrix_from_json(field(j, "A22")),
                                    matrix_from_json(field(j, "B1")), matrix_from_json(field(j, "B2")),
                                    domain_of(j));
}

Json to_json(const srtrcore::SrtrPair& pair) {
    Json out = {{"Aw", to_json(pair.Aw)},
                {"Bw", to_json(pair.Bw)},
                {"Cw", to_json(pair.Cw)},
                {"Dw", to_json(pair.Dw)},
                {"domain", to_string(pair.domain)},
                {"hand_encoded", pair.hand_encoded},
                {"base_minimal", pair.base_minimal}};
    out["K"] = pair.hand_encoded ? Json(nullptr) : to_json(pair.K);
    out["base"] = pair.base ? to_json(*pair.base) : Json(nullptr);
    return out;
}

srtrcore::SrtrPair pair_from_json(const Json& j) {
    std::optional<sysrep::PartitionedRealization> base;
    if (has(j, "base")) base = partitioned_from_json(j.at("base"));
    if (!has(j, "Aw")) {
        require(base && has(j, "K"), ErrorKind::InvalidInput, "pair needs either its blocks or a base and K");
        const Matrix K = matrix_from_json(j.at("K"), base->A22.rows(), base->p());
        return srtrcore::srtr_from_k(*base, K);
    }
    const Matrix Dw = matrix_from_json(field(j, "Dw"));
    require(Dw.rows() >= 1, ErrorKind::Dimension, "Dw must have at least one row");
    const Matrix Aw = matrix_from_json(field(j, "Aw"));
    const Eigen::Index N = Aw.rows();
    srtrcore::SrtrPair pair;
    const auto wv = sysrep::make_system(Aw, matrix_from_json(field(j, "Bw"), N, Dw.cols()),
                                        matrix_from_json(field(j, "Cw"), Dw.rows(), N), Dw, domain_of(j));
    const bool hand = has(j, "hand_encoded") ? j.at("hand_encoded").get<bool>() : !has(j, "K");
    if (hand) {
        pair = srtrcore::srtr_from_realization(wv, base);
    } else {
        require(base.has_value(), ErrorKind::InvalidInput, "a pair with a gain needs its base");
        pair.base = base;
        pair.K = matrix_from_json(j.at("K"), base->A22.rows(), base->p());
        pair.Aw = wv.A;
        pair.Bw = wv.B;
        pair.Cw = wv.C;
        pair.Dw = wv.D;
        pair.domain = wv.domain;
        pair.hand_encoded = false;
        require(wv.outputs() == base->p() && wv.inputs() == base->p() + base->m(), ErrorKind::Dimension,
                "pair blocks do not match the base");
    }
    pair.base_minimal = has(j, "base_minimal") ? j.at("base_minimal").get<bool>() : pair.base_minimal;
    return pair;
}

Json to_json(const srtrcore::RationalFn& f) { return {{"num", f.num}, {"den", f.den}}; }

namespace {

Json rational_matrix_json(const srtrcore::RationalMatrix& R) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < R.rows(); ++i) {
        Json r = Json::array();
        for (Eigen::Index k = 0; k < R.cols(); ++k) r.push_back(to_json(R(i, k)));
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace

Json to_json(const srtrcore::NrfPair& nrf) {
    return {{"Phi", rational_matrix_json(nrf.Phi)},
            {"Gamma", rational_matrix_json(nrf.Gamma)},
            {"domain", to_string(nrf.domain)},
            {"cancelled_roots", nrf.cancelled_roots},
            {"uncancelled_near_common", nrf.uncancelled_near_common},
            {"coefficient_order", "ascending"}};
}

Json to_json(const srtrcore::SparsityPattern& p) { return {{"maskW", to_json(p.maskW)}, {"maskV", to_json(p.maskV)}}; }

Json to_json(const srtrcore::FlcfReport& r) {
    return {{"coprime", r.coprime},
            {"full_normal_rank", r.full_normal_rank},
            {"no_finite_zeros", r.no_finite_zeros},
            {"no_infinite_zeros", r.no_infinite_zeros},
            {"min_sv_normal", r.min_sv_normal},
            {"min_sv_finite", r.min_sv_finite},
            {"min_sv_infinite", r.min_sv_infinite},
            {"weakest_point", {r.weakest_point.real(), r.weakest_point.imag()}}};
}

Json to_json(const factorkit::LcfOverS& lcf) {
    return {{"blocks", to_json(lcf.blocks)},   {"F1", to_json(lcf.F1)},
            {"F2", to_json(lcf.F2)},           {"U", to_json(lcf.U)},
            {"domain", to_string(lcf.domain)}, {"factor_spectrum", to_json(lcf.factor_spectrum)}};
}

factorkit::LcfOverS lcf_from_json(const Json& j) {
    auto blocks = partitioned_from_json(field(j, "blocks"));
    if (has(j, "domain")) blocks.domain = domain_of(j);
    const Eigen::Index p = blocks.p(), q = blocks.A22.rows();
    auto lcf = factorkit::make_lcf(blocks, matrix_from_json(field(j, "F1"), p, p), matrix_from_json(field(j, "F2"), q, p),
                                   matrix_from_json(field(j, "U"), p, p));
    if (has(j, "factor_spectrum")) lcf.factor_spectrum = complex_list_from_json(j.at("factor_spectrum"));
    return lcf;
}

Json to_json(const factorkit::RiccatiSolution& s) {
    return {{"K", to_json(s.K)},
            {"residual_norm", s.residual_norm},
            {"closed_spectrum", to_json(s.closed_spectrum)},
            {"cond_v1", s.cond_v1},
            {"subsets_tried", s.subsets_tried}};
}

Json to_json(const factorkit::LcfReport& r) {
    return {{"stable", r.stable}, {"identity_residual", r.identity_residual}, {"coprime_over_s", r.coprime_over_s}};
}

Json to_json(const structsyn::SynthesisSpec& s) {
    return {{"maskW", to_json(s.masks.maskW)},
            {"maskV", to_json(s.masks.maskV)},
            {"orders", s.orders},
            {"extra", s.extra == structsyn::ExtraConstraint::None ? Json(nullptr) : Json(to_string(s.extra))}};
}

structsyn::SynthesisSpec spec_from_json(const Json& j, StabilityDomain domain) {
    structsyn::SynthesisSpec s;
    s.masks = {mask_from_json(field(j, "maskW")), mask_from_json(field(j, "maskV"))};
    const Json& orders = field(j, "orders");
    require(orders.is_array(), ErrorKind::InvalidInput, "orders must be a list of integers");
    for (const auto& o : orders) {
        require(o.is_number_integer(), ErrorKind::InvalidInput, "orders must be integers");
        s.orders.push_back(o.get<int>());
    }
    s.extra = has(j, "extra") ? structsyn::parse_extra(j.at("extra").get<std::string>())
                              : structsyn::ExtraConstraint::None;
    s.domain = has(j, "domain") ? domain_of(j) : domain;
    return s;
}

Json to_json(const structsyn::ConditionReport& r) {
    Json rows = Json::array();
    for (const auto& c : r.rows)
        rows.push_back({{"i", c.feedthrough_w},
                        {"ii", c.feedthrough_v},
                        {"iii", c.input_w},
                        {"iv", c.input_v},
                        {"v", c.truncation},
                        {"vi", c.stability},
                        {"margin", c.constant_row ? Json(nullptr) : Json(c.margin)},
                        {"constant_row", c.constant_row}});
    return {{"rows", rows}, {"extra", r.extra}, {"max_residual", r.max_residual}, {"tol", r.tol}, {"pass", r.pass}};
}

Json to_json(const structsyn::ReducedRows& rows) {
    Json list = Json::array();
    for (const auto& r : rows.rows) list.push_back(to_json(r));
    return {{"rows", list}, {"p", rows.p}, {"m", rows.m}, {"domain", to_string(rows.domain)}};
}

Json to_json(const loopctl::RowImplementation& rows) {
    Json list = Json::array();
    for (const auto& r : rows.rows) list.push_back(to_json(r));
    return {{"rows", list}, {"p", rows.p}, {"m", rows.m}, {"domain", to_string(rows.domain)}};
}

Json to_json(const loopctl::ClosedLoopModel& cl) {
    return {{"Acl", to_json(cl.Acl)},
            {"Bcl", to_json(cl.Bcl)},
            {"Ccl", to_json(cl.Ccl)},
            {"Dcl", to_json(cl.Dcl)},
            {"exogenous_order", {"r", "w", "zeta", "du"}},
            {"signal_order", {"u", "y", "z", "v"}},
            {"plant_states", cl.plant_states},
            {"controller_states", cl.controller_states},
            {"n_u", cl.n_u},
            {"n_y", cl.n_y},
            {"domain", to_string(cl.domain)}};
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), ErrorKind::InvalidInput, "cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidInput, path + ": " + e.what());
    }
}

}  // namespace srtrkit::io
