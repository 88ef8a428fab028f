#pragma once

#include <Eigen/Dense>

#include "halfcavity/params.hpp"

namespace halfcavity {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

namespace numerics {

/// e^s - 1 without cancellation for small |s|.
cplx expm1(cplx s);

/// G_n[s] = 1F1(n, n+1; s) - e^s.
///
/// Three regimes keep every recurrence in its stable direction:
/// Kummer-transformed series for |s| <= (n+1)/2, forward recurrence on
/// I_n = int_0^1 u^(n-1) e^(su) du for n <= |s|, backward recurrence
/// seeded by the series otherwise.
cplx g_n(int n, cplx s);

/// 1F1(n, n+1; s) for n >= 0.
cplx hyp1f1_n(int n, cplx s);

/// e^(A t) by scaling and squaring with the degree-13 Pade approximant.
ComplexMatrix matrix_exponential(const ComplexMatrix& A, double t = 1.0);

/// Reciprocal 1-norm condition estimate of M (0 for exactly singular M).
double rcond(const ComplexMatrix& M);

/// Solves M x = b with partial-pivoting LU. Throws SingularMatrixError when the
/// condition estimate exceeds max_condition.
ComplexVector solve_linear(const ComplexMatrix& M, const ComplexVector& b,
                           double max_condition = 1e12);

/// Eigenvector of the eigenvalue of smallest modulus. Throws
/// DegenerateKernelError unless the next eigenvalue is at least `separation`
/// times larger in modulus. The result has unit 2-norm.
ComplexVector null_eigenvector(const ComplexMatrix& M, double separation = 10.0);

}  // namespace numerics
}  // namespace halfcavity
