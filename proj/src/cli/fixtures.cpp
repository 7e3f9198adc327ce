#include "srtrkit/fixtures.hpp"

namespace srtrkit::cli {

namespace {

const double kA11[36] = {
        -11.8035, -2.5928, 0.6483, -0.1498, -0.0059, 1.5415,
        1.5415, -11.8035, -2.5928, 0.6483, -0.1498, -0.0059,
        -0.0059, 1.5415, -11.8035, -2.5928, 0.6483, -0.1498,
        -0.1498, -0.0059, 1.5415, -11.8035, -2.5928, 0.6483,
        0.6483, -0.1498, -0.0059, 1.5415, -11.8035, -2.5928,
        -2.5928, 0.6483, -0.1498, -0.0059, 1.5415, -11.8035};

const double kA12[36] = {
        -7.3460, -12.0158, 29.1222, -12.1621, 9.7523, -5.1182,
        -16.0509, 10.1202, 25.3239, -8.1033, -15.2385, 4.0548,
        -23.7679, 21.4320, 8.6752, 13.6752, 1.5280, -5.1783,
        -27.0198, 9.8895, -11.8960, -7.4120, 16.8991, 2.4006,
        -26.0184, -17.3463, -14.7520, -7.3268, -4.8881, -6.5282,
        -15.8018, -29.0018, 9.5454, 10.1566, 5.3141, 1.5347};

const double kA21[36] = {
        0.1795, 0.0818, 0.4039, 0.4133, 0.4137, 0.3992,
        0.4333, -0.0452, -0.2691, -0.3175, 0.0051, 0.4693,
        -0.4047, -0.5266, -0.2458, -0.0123, 0.2775, 0.1615,
        -0.4200, 0.5344, 0.0288, -0.4924, 0.4689, 0.0625,
        -0.2869, -0.2283, 0.5717, -0.3033, -0.4110, 0.4398,
        -0.2019, 0.2441, -0.2441, 0.2778, -0.2152, 0.2834};

const double kA22[36] = {
        -2.2413, 1.0141, 0.3885, -0.5740, -0.4535, 0.2336,
        -1.0913, -2.1134, -2.7942, -0.1511, 0.1878, 0.0216,
        -0.3266, 2.7957, -2.1347, -0.4690, 0.0492, 0.1115,
        0.6269, 0.2681, 0.3424, -2.8351, 4.0507, -0.0716,
        0.2603, -0.3236, -0.2731, -4.0526, -2.8072, 0.0350,
        0.1026, 0.1898, -0.0850, 0.0140, -0.1408, -4.6168};

const double kB1[36] = {
        -1.0779, 0.0000, 0.0000, 0.0000, 0.0000, 15.8441,
        15.8441, -1.0779, 0.0000, 0.0000, 0.0000, 0.0000,
        0.0000, 15.8441, -1.0779, 0.0000, 0.0000, 0.0000,
        0.0000, 0.0000, 15.8441, -1.0779, 0.0000, 0.0000,
        0.0000, 0.0000, 0.0000, 15.8441, -1.0779, 0.0000,
        0.0000, 0.0000, 0.0000, 0.0000, 15.8441, -1.0779};

const double kB2[36] = {
        0.6417, 1.1275, 1.4058, 1.4121, 1.0183, 0.5263,
        -0.1623, -1.0111, -0.7933, 0.4321, 1.4028, 1.0261,
        -1.5048, -0.7775, 0.3057, 0.7985, -0.0171, -1.2371,
        0.5132, -0.2538, -0.0823, 0.3877, -0.1357, 0.1614,
        0.2803, 0.2855, -0.5768, -0.2496, -0.0568, -0.3892,
        0.0177, 0.0315, 0.0806, 0.1186, 0.1352, 0.0834};

const double kK[36] = {
        -0.0259, 0.0404, 0.0610, 0.0693, 0.0776, 0.0821,
        0.0563, -0.0062, -0.0746, -0.0792, 0.0163, 0.1318,
        -0.1053, -0.0838, -0.0574, 0.0127, 0.1007, 0.0124,
        0.0257, 0.1610, -0.1578, -0.0006, 0.1571, -0.1560,
        -0.1736, 0.1068, 0.0956, -0.1956, 0.0737, 0.0580,
        0.1935, -0.1927, 0.1912, -0.1835, 0.1914, -0.1767};

Matrix read6(const double* data) { return Eigen::Map<const Eigen::Matrix<double, 6, 6, Eigen::RowMajor>>(data); }

}  // namespace

sysrep::StateSpaceSystem ring6_phi() {
    return sysrep::make_system(Matrix::Constant(1, 1, -0.5), Matrix::Constant(1, 1, -0.1), Matrix::Constant(1, 1, 1.0),
                               Matrix::Zero(1, 1));
}

sysrep::StateSpaceSystem ring6_gamma() {
    return sysrep::make_system(Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 1.0),
                               Matrix::Zero(1, 1));
}

sysrep::StateSpaceSystem ring6_plant() {
    const Matrix I = Matrix::Identity(6, 6);
    const Matrix F = sysrep::cyclic_shift(6);
    Matrix A = Matrix::Zero(12, 12);
    A.topLeftCorner(6, 6) = -0.5 * I - 0.1 * F;
    A.topRightCorner(6, 6) = -0.1 * F;
    A.bottomRightCorner(6, 6) = I;
    Matrix B = Matrix::Zero(12, 6);
    B.bottomRows(6) = I;
    Matrix C(6, 12);
    C << I, I;
    return sysrep::make_system(A, B, C, Matrix::Zero(6, 6));
}

sysrep::PartitionedRealization ring6_controller() {
    return sysrep::make_partitioned(read6(kA11), read6(kA12), read6(kA21), read6(kA22), read6(kB1), read6(kB2));
}

Matrix ring6_K() { return read6(kK); }

Matrix ring6_mask() { return Matrix::Identity(6, 6) + sysrep::cyclic_shift(6); }

std::vector<ExpectedTf> ring6_expected_srtr() {
    return {
        {"W_local", {-5.255, -55.9}, {1.0, 9.34}, 0, false},
        {"V_local", {-1.078, -94.28}, {1.0, 9.34}, 0, true},
        {"W_prev", {-15.84}, {1.0, 9.34}, 1, false},
        {"V_prev", {15.84, -15.84}, {1.0, 9.34}, 1, true},
    };
}

std::vector<std::string> fixture_names() {
    return {"ring6-plant", "ring6-controller", "ring6-K", "ring6-expected-srtr"};
}

}  // namespace srtrkit::cli
