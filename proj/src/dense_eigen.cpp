#include "magbl/dense_eigen.hpp"

#include <lapacke.h>

#include <string>
#include <vector>

namespace magbl {

void hermitian_eigen(const CMat& A, int first, int last, RVec& values, CMat& vectors) {
    const int n = static_cast<int>(A.rows());
    if (A.cols() != n) throw InvalidArgument("hermitian_eigen needs a square matrix");
    if (first < 1 || last > n || first > last) throw InvalidArgument("hermitian_eigen index range invalid");
    const int count = last - first + 1;
    CMat work = A;
    RVec w(n);
    CMat Z(n, count);
    std::vector<lapack_int> support(2 * static_cast<std::size_t>(count) + 2);
    lapack_int found = 0;
    lapack_int info;
    {
        auto lock = lapack_guard();
        info = LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n,
                              reinterpret_cast<lapack_complex_double*>(work.data()), n, 0.0, 0.0, first, last, 0.0,
                              &found, w.data(), reinterpret_cast<lapack_complex_double*>(Z.data()), n, support.data());
    }
    if (info != 0 || found != count)
        throw ComputeError("dense Hermitian eigensolver failed (info " + std::to_string(info) + ")");
    values = w.head(count);
    vectors = std::move(Z);
}

}  // namespace magbl
