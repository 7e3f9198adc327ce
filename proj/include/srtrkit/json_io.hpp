#pragma once

#include <string>

#include <json.hpp>

#include "srtrkit/factorkit.hpp"
#include "srtrkit/loopctl.hpp"
#include "srtrkit/srtrcore.hpp"
#include "srtrkit/structsyn.hpp"
#include "srtrkit/sysrep.hpp"

namespace srtrkit::io {

using Json = nlohmann::json;

// Matrices are arrays of rows. Shapes of empty blocks are recovered from their neighbours.
Json to_json(const Matrix& M);
Matrix matrix_from_json(const Json& j);
Matrix matrix_from_json(const Json& j, Eigen::Index rows, Eigen::Index cols);
Json to_json(const Eigen::MatrixXi& M);
Eigen::MatrixXi mask_from_json(const Json& j);
Json to_json(const std::vector<Complex>& values);  // [[re, im], ...]
std::vector<Complex> complex_list_from_json(const Json& j);

Json to_json(const sysrep::StateSpaceSystem& sys);
sysrep::StateSpaceSystem system_from_json(const Json& j);

Json to_json(const sysrep::PartitionedRealization& base);
sysrep::PartitionedRealization partitioned_from_json(const Json& j);

Json to_json(const srtrcore::SrtrPair& pair);
srtrcore::SrtrPair pair_from_json(const Json& j);

Json to_json(const srtrcore::RationalFn& f);
Json to_json(const srtrcore::NrfPair& nrf);
Json to_json(const srtrcore::SparsityPattern& pattern);
Json to_json(const srtrcore::FlcfReport& report);

Json to_json(const factorkit::LcfOverS& lcf);
factorkit::LcfOverS lcf_from_json(const Json& j);
Json to_json(const factorkit::RiccatiSolution& sol);
Json to_json(const factorkit::LcfReport& report);

Json to_json(const structsyn::SynthesisSpec& spec);
structsyn::SynthesisSpec spec_from_json(const Json& j, StabilityDomain domain);
Json to_json(const structsyn::ConditionReport& report);
Json to_json(const structsyn::ReducedRows& rows);

Json to_json(const loopctl::RowImplementation& rows);
Json to_json(const loopctl::ClosedLoopModel& cl);

Json read_json_file(const std::string& path);

}  // namespace srtrkit::io
