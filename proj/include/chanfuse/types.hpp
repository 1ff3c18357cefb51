// Copyright 2026 The chanfuse Authors
//
// Licensed under the Apache License, Version 2.0

#ifndef CHANFUSE_TYPES_HPP
#define CHANFUSE_TYPES_HPP

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace chanfuse {

using Real = double;
using Complex = std::complex<double>;

using Vec = Eigen::VectorXd;
using Arr = Eigen::ArrayXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

// Row-major matrix: rows stay contiguous, so a channel (or a frame) can be
// handed to Eigen as a flat slice of a larger buffer.
using RMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRMat = Eigen::Map<RMat>;
using ConstMapRMat = Eigen::Map<const RMat>;

// Error taxonomy mirrored by the CLI exit codes.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace chanfuse

#endif  // CHANFUSE_TYPES_HPP
