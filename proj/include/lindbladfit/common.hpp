// Copyright 2026 The lindbladfit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace lindbladfit {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using SparseR = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Largest qubit count accepted by the dense operator builders.
inline constexpr int kDefaultMaxQubits = 6;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument, shape or configuration.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Integration failed: step underflow, step budget exhausted, non-finite
/// state, or a trajectory whose trace collapsed.
class IntegrationError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent dataset / parameter files.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Optimizer encountered a non-finite gradient or loss.
class TrainingError : public Error {
 public:
  using Error::Error;
};

inline constexpr std::size_t ipow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

}  // namespace lindbladfit
