#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace latrem {

using IMat = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using IVec = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

struct SmithForm {
  IMat U, W;  // unimodular, U * V * W = D
  IMat D;     // diagonal, D(i,i) divides D(i+1,i+1), entries >= 0
  IMat U_inv;
};

// Smith normal form over the integers; throws NumericError on int64 overflow.
SmithForm smith_normal_form(const IMat& v);

// Determinant of a square integer matrix (Bareiss fraction-free elimination).
std::int64_t integer_determinant(const IMat& v);

}  // namespace latrem
