#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace glomkit {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using RowMatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using MatrixXd = MatrixX<double>;
using VectorXd = VectorX<double>;

/// Base for all recoverable errors raised by the library.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Input failed a structural or domain check (bad labels, empty sample, ...).
struct ValidationError : Error {
  using Error::Error;
};

/// Filesystem or format failure while reading/writing artifacts.
struct IoError : Error {
  using Error::Error;
};

}  // namespace glomkit
