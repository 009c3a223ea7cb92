#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace pacefair {

template <typename Scalar> using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar> using RowVectorX = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Vector = VectorX<double>;
using Matrix = MatrixX<double>;
using Index = Eigen::Index;

/// Agents in rows, items in columns: entry (i, j) is v_i(item j).
using ValuationMatrix = Matrix;

}  // namespace pacefair
