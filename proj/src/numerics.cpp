#include "halfcavity/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "halfcavity/errors.hpp"

namespace halfcavity::numerics {

cplx expm1(cplx s) {
    const double a = s.real();
    const double b = s.imag();
    const double sh = std::sin(0.5 * b);
    return {std::expm1(a) * std::cos(b) - 2.0 * sh * sh, std::exp(a) * std::sin(b)};
}

namespace {

struct KummerPair {
    cplx F;  // 1F1(n, n+1; s)
    cplx G;  // 1F1(n, n+1; s) - e^s
};

// e^s * sum_{k>=1} x^k n!/(n+k)!, x = -s, valid when |s| <= (n+1)/2.
cplx kummer_tail(int n, cplx s) {
    const cplx x = -s;
    cplx term = 1.0;
    cplx sum = 0.0;
    for (int k = 1; k < 2000; ++k) {
        term *= x / double(n + k);
        sum += term;
        if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
    }
    return sum;
}

KummerPair evaluate(int n, cplx s) {
    if (n < 0) throw DomainError("g_n: n must be non-negative");
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
        throw DomainError("g_n: non-finite argument");
    if (n == 0) return {1.0, -expm1(s)};

    const double a = std::abs(s);
    const cplx es = std::exp(s);
    if (a <= 0.5 * (n + 1)) {
        const cplx tail = kummer_tail(n, s);
        return {es * (1.0 + tail), es * tail};
    }
    if (n <= a) {
        cplx I = expm1(s) / s;
        for (int k = 2; k <= n; ++k) I = (es - double(k - 1) * I) / s;
        const cplx F = double(n) * I;
        return {F, F - es};
    }
    const int N = std::max(n, int(std::ceil(2.0 * a)));
    cplx I = es * (1.0 + kummer_tail(N, s)) / double(N);
    for (int k = N; k > n; --k) I = (es - s * I) / double(k - 1);
    const cplx F = double(n) * I;
    return {F, F - es};
}

}  // namespace

cplx g_n(int n, cplx s) { return evaluate(n, s).G; }

cplx hyp1f1_n(int n, cplx s) { return evaluate(n, s).F; }

ComplexMatrix matrix_exponential(const ComplexMatrix& A, double t) {
    if (A.rows() != A.cols()) throw DomainError("matrix_exponential: matrix must be square");
    if (!A.allFinite() || !std::isfinite(t)) throw DomainError("matrix_exponential: non-finite input");
    const Eigen::Index n = A.rows();
    const ComplexMatrix I = ComplexMatrix::Identity(n, n);
    ComplexMatrix X = A * t;

    static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                   1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                   670442572800.0,      33522128640.0,       1323241920.0,
                                   40840800.0,          960960.0,            16380.0,
                                   182.0,               1.0};
    constexpr double theta13 = 5.371920351148152;

    const double norm = X.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm > theta13) {
        squarings = int(std::ceil(std::log2(norm / theta13)));
        X /= std::ldexp(1.0, squarings);
    }
    const ComplexMatrix X2 = X * X;
    const ComplexMatrix X4 = X2 * X2;
    const ComplexMatrix X6 = X4 * X2;
    const ComplexMatrix U =
        X * (X6 * (b[13] * X6 + b[11] * X4 + b[9] * X2) + b[7] * X6 + b[5] * X4 + b[3] * X2 +
             b[1] * I);
    const ComplexMatrix V = X6 * (b[12] * X6 + b[10] * X4 + b[8] * X2) + b[6] * X6 + b[4] * X4 +
                            b[2] * X2 + b[0] * I;
    ComplexMatrix R = (V - U).partialPivLu().solve(V + U);
    for (int k = 0; k < squarings; ++k) R = R * R;
    return R;
}

double rcond(const ComplexMatrix& M) {
    if (M.rows() == 0) return 1.0;
    Eigen::PartialPivLU<ComplexMatrix> lu(M);
    const double r = lu.rcond();
    return std::isfinite(r) ? r : 0.0;
}

ComplexVector solve_linear(const ComplexMatrix& M, const ComplexVector& b, double max_condition) {
    if (M.rows() != M.cols() || M.rows() != b.size())
        throw DomainError("solve_linear: dimension mismatch");
    if (!M.allFinite() || !b.allFinite()) throw DomainError("solve_linear: non-finite input");
    Eigen::PartialPivLU<ComplexMatrix> lu(M);
    const double r = lu.rcond();
    const double cond = (r > 0.0 && std::isfinite(r)) ? 1.0 / r : INFINITY;
    if (!(cond <= max_condition))
        throw SingularMatrixError("solve_linear: matrix is numerically singular", cond);
    ComplexVector x = lu.solve(b);
    // one step of iterative refinement
    x += lu.solve(b - M * x);
    return x;
}

ComplexVector null_eigenvector(const ComplexMatrix& M, double separation) {
    if (M.rows() != M.cols() || M.rows() == 0) throw DomainError("null_eigenvector: bad matrix");
    if (!M.allFinite()) throw DomainError("null_eigenvector: non-finite input");
    Eigen::ComplexEigenSolver<ComplexMatrix> es(M, true);
    if (es.info() != Eigen::Success) throw NumericalError("null_eigenvector: eigensolver failed");
    const auto& lam = es.eigenvalues();
    std::vector<Eigen::Index> order(lam.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](auto i, auto j) { return std::abs(lam[i]) < std::abs(lam[j]); });
    if (lam.size() > 1) {
        const double l0 = std::abs(lam[order[0]]);
        const double l1 = std::abs(lam[order[1]]);
        if (!(l1 >= separation * l0) || l1 <= 1e-14 * M.norm())
            throw DegenerateKernelError("null_eigenvector: smallest eigenvalue is not isolated");
    }
    ComplexVector v = es.eigenvectors().col(order[0]);
    return v / v.norm();
}

}  // namespace halfcavity::numerics
