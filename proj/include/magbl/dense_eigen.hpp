#pragma once
/// Dense Hermitian eigensolver backed by LAPACK.

#include "magbl/common.hpp"

namespace magbl {

/// Eigenpairs with 1-based indices first..last (ascending) of the Hermitian matrix A.
/// Only the lower triangle of A is referenced.
void hermitian_eigen(const CMat& A, int first, int last, RVec& values, CMat& vectors);

}  // namespace magbl
