#pragma once
/// Shared scalar types, error classes and the deterministic worker pool.

#include <Eigen/Core>

#include <complex>
#include <cstddef>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>

namespace magbl {

using cplx = std::complex<double>;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using RVec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline const cplx kI{0.0, 1.0};

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Violated precondition or malformed input.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A numerical routine could not deliver its contract (non-convergence, near-singular solve).
class ComputeError : public Error {
public:
    using Error::Error;
};

/// Number of worker threads used by parallel_for. Defaults to 1.
void set_num_threads(int n);
int num_threads();

/// Runs body(i) for i in [0, n). Each index is processed exactly once and
/// results must be written to index-owned slots, so output never depends on
/// the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Serializes calls into LAPACK and pins its internal threading to one thread.
std::unique_lock<std::mutex> lapack_guard();

}  // namespace magbl
