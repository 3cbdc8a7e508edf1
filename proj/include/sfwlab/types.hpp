// Core dense types and small shared helpers. Eigen is the only math
// dependency; everything runs in double precision.
#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace sfwlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Raised for malformed configs, files and option values (CLI exit code 1).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when a computation goes bad at runtime: divergence, NaN in a
// trajectory, shape misuse (CLI exit code 2).
struct ComputeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ComputeError(msg);
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
    return m.derived().array().isFinite().all();
}

template <typename Derived>
void ensure_finite(const Eigen::DenseBase<Derived>& m, const std::string& what) {
    if (!all_finite(m)) throw ComputeError("non-finite values in " + what);
}

}  // namespace sfwlab
