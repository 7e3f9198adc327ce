#pragma once

#include <string>
#include <vector>

#include "srtrkit/srtrcore.hpp"
#include "srtrkit/sysrep.hpp"

namespace srtrkit::cli {

// Six-node ring example data, four decimals.

sysrep::StateSpaceSystem ring6_phi();    // -1 / (10 s + 5)
sysrep::StateSpaceSystem ring6_gamma();  // 1 / (s - 1)
sysrep::StateSpaceSystem ring6_plant();  // 12 states, C = [I I]
sysrep::PartitionedRealization ring6_controller();
Matrix ring6_K();
Matrix ring6_mask();  // I + cyclic shift

// One scalar transfer function with coefficients in descending powers of s.
struct ExpectedTf {
    std::string name;
    std::vector<double> num;
    std::vector<double> den;
    Eigen::Index row_offset;  // 0: local entry (i, i); 1: entry (i, i - 1)
    bool v_channel;
};

std::vector<ExpectedTf> ring6_expected_srtr();

std::vector<std::string> fixture_names();

}  // namespace srtrkit::cli
