#include <cmath>
#include <random>

#include "doctest.h"
#include "halfcavity/dde.hpp"
#include "halfcavity/errors.hpp"
#include "halfcavity/numerics.hpp"

using namespace halfcavity;

namespace {

struct GnRef {
    int n;
    cplx s;
    cplx value;
};

// hyp1f1(n, n+1, s) - exp(s) at 60 digits (mpmath)
const GnRef kGnTable[] = {
    {0, {0.3, 0.0}, {-0.3498588075760031, 0.0}},
    {0, {-0.5, 0.2}, {0.4055595719796487, -0.12049904027179588}},
    {0, {2.5, -1.0}, {-5.582229578192773, 10.251215190529404}},
    {0, {-7.5, 0.0}, {0.9994469156298522, 0.0}},
    {0, {-12.0, 30.0}, {0.9999990522463361, 6.070676110230296e-06}},
    {0, {-40.0, -5.0}, {1.0, -4.073850022767545e-18}},
    {0, {-1.0, 60.0}, {1.3503731549995555, 0.11213356095420372}},
    {0, {25.0, 0.0}, {-72004899336.38588, 0.0}},
    {0, {-150.0, 0.0}, {1.0, 0.0}},
    {0, {-100.0, -100.0}, {1.0, -1.8837186565748022e-44}},
    {0, {-3.0, 199.0}, {1.0234808615932713, 0.043902178937997964}},
    {0, {120.0, 40.0}, {8.698078670797933e+51, -9.717623361366127e+51}},
    {1, {0.3, 0.0}, {-0.18366278232265942, 0.0}},
    {1, {-0.5, 0.2}, {0.18790299971821262, -0.048559749719962075}},
    {1, {2.5, -1.0}, {-3.243362111156727, 7.48627610113206}},
    {1, {-7.5, 0.0}, {0.13270650438049914, 0.0}},
    {1, {-12.0, 30.0}, {0.011493119781463215, 0.028741745403603913}},
    {1, {-40.0, -5.0}, {0.024615384615384615, -0.0030769230769230813}},
    {1, {-1.0, 60.0}, {0.3488797807973193, 0.13466466977423358}},
    {1, {25.0, 0.0}, {-69124703363.93044, 0.0}},
    {1, {-150.0, 0.0}, {0.006666666666666667, 0.0}},
    {1, {-100.0, -100.0}, {0.005, -0.005}},
    {1, {-3.0, 199.0}, {0.02333781460958336, 0.04904745533269312}},
    {1, {120.0, 40.0}, {8.657137139170364e+51, -9.622995989478885e+51}},
    {2, {0.3, 0.0}, {-0.1254402587582736, 0.0}},
    {2, {-0.5, 0.2}, {0.12047991544929511, -0.02876990176378561}},
    {2, {2.5, -1.0}, {-2.2802485081172206, 5.982986737653976}},
    {2, {-7.5, 0.0}, {0.034835316797985266, 0.0}},
    {2, {-12.0, 30.0}, {-0.001388562551998322, 0.001327324580874873}},
    {2, {-40.0, -5.0}, {0.0011928994082840223, -0.00030295857988166106}},
    {2, {-1.0, 60.0}, {0.34607934749849656, 0.12383445043913202}},
    {2, {25.0, 0.0}, {-66474923068.27144, 0.0}},
    {2, {-150.0, 0.0}, {8.888888888888889e-05, 0.0}},
    {2, {-100.0, -100.0}, {-3.258996196102866e-44, -0.0001}},
    {2, {-3.0, 199.0}, {0.02299156948686504, 0.044144106101507444}},
    {2, {120.0, 40.0}, {8.616336593657772e+51, -9.529992735828091e+51}},
    {3, {0.3, 0.0}, {-0.09545621999326699, 0.0}},
    {3, {-0.5, 0.2}, {0.0882554831252143, -0.02004008639628331}},
    {3, {2.5, -1.0}, {-1.7476331611112443, 5.005469672177243}},
    {3, {-7.5, 0.0}, {0.013381042349046272, 0.0}},
    {3, {-12.0, 30.0}, {-0.0001632537538082458, -6.786317903187081e-05}},
    {3, {-40.0, -5.0}, {8.529449248975742e-05, -3.338370505234848e-05}},
    {3, {-1.0, 60.0}, {0.34447147129043354, 0.1295358897242806}},
    {3, {25.0, 0.0}, {-64027908569.1933, 0.0}},
    {3, {-150.0, 0.0}, {1.7777777777777777e-06, 0.0}},
    {3, {-100.0, -100.0}, {-1.5e-06, -1.5e-06}},
    {3, {-3.0, 199.0}, {0.022820747803389562, 0.04425873697734591}},
    {3, {120.0, 40.0}, {8.575686042959344e+51, -9.438576000357561e+51}},
    {5, {0.3, 0.0}, {-0.06470534647972914, 0.0}},
    {5, {-0.5, 0.2}, {0.05726927560746578, -0.012246468172944235}},
    {5, {2.5, -1.0}, {-1.1777557223829107, 3.7903437524365997}},
    {5, {-7.5, 0.0}, {0.003835896662747841, 0.0}},
    {5, {-12.0, 30.0}, {1.286865035959456e-06, 5.067943968066353e-06}},
    {5, {-40.0, -5.0}, {9.163386974692854e-07, -6.56641003201541e-07}},
    {5, {-1.0, 60.0}, {0.33958166962951436, 0.14082362462328263}},
    {5, {25.0, 0.0}, {-59652812544.12289, 0.0}},
    {5, {-150.0, 0.0}, {1.5802469135802468e-09, 0.0}},
    {5, {-100.0, -100.0}, {-1.5e-09, 1.5e-09}},
    {5, {-3.0, 199.0}, {0.022374743307786774, 0.04448665193998212}},
    {5, {120.0, 40.0}, {8.494867766702778e+51, -9.260356842462498e+51}},
    {10, {0.3, 0.0}, {-0.03591476568750935, 0.0}},
    {10, {-0.5, 0.2}, {0.03037218556793061, -0.006086504663008155}},
    {10, {2.5, -1.0}, {-0.6334212564241588, 2.373501739792992}},
    {10, {-7.5, 0.0}, {0.0008877279429532293, 0.0}},
    {10, {-12.0, 30.0}, {-3.0002831098919625e-06, 5.960901514733668e-06}},
    {10, {-40.0, -5.0}, {1.0294179697072743e-10, -3.0325960831922893e-10}},
    {10, {-1.0, 60.0}, {0.32426622146313633, 0.1671784622692634}},
    {10, {25.0, 0.0}, {-50997975891.10241, 0.0}},
    {10, {-150.0, 0.0}, {6.292894375857339e-16, 0.0}},
    {10, {-100.0, -100.0}, {-3.4706682429927696e-44, -1.134e-15}},
    {10, {-3.0, 199.0}, {0.021240660753472352, 0.045014820614551275}},
    {10, {120.0, 40.0}, {8.295962001361855e+51, -8.840133319337062e+51}},
    {25, {0.3, 0.0}, {-0.015404070322322397, 0.0}},
    {25, {-0.5, 0.2}, {0.012573474723460355, -0.0023926232302022973}},
    {25, {2.5, -1.0}, {-0.25670578323424154, 1.1248632699845942}},
    {25, {-7.5, 0.0}, {0.00021981144138066974, 0.0}},
    {25, {-12.0, 30.0}, {-5.0699611691569576e-06, 3.531683321947019e-06}},
    {25, {-40.0, -5.0}, {-1.138710783415862e-15, -4.626923432523988e-17}},
    {25, {-1.0, 60.0}, {0.26000558650867517, 0.2239566343067931}},
    {25, {25.0, 0.0}, {-35638865775.45034, 0.0}},
    {25, {-150.0, 0.0}, {6.1427692622802856e-30, 0.0}},
    {25, {-100.0, -100.0}, {1.8934582572425482e-29, -1.8934582572425535e-29}},
    {25, {-3.0, 199.0}, {0.017714718067956072, 0.046244625058002045}},
    {25, {120.0, 40.0}, {7.731032881829961e+51, -7.764327518131814e+51}},
    {60, {0.3, 0.0}, {-0.006606679624494618, 0.0}},
    {60, {-0.5, 0.2}, {0.005307155388464854, -0.0009863570169009238}},
    {60, {2.5, -1.0}, {-0.10561962822021341, 0.5059208166379506}},
    {60, {-7.5, 0.0}, {7.733723712002606e-05, 0.0}},
    {60, {-12.0, 30.0}, {-3.4768998993612243e-06, 2.2429246335509473e-08}},
    {60, {-40.0, -5.0}, {-2.6474412393807464e-19, 7.446291951111619e-18}},
    {60, {-1.0, 60.0}, {0.11619115382326424, 0.23524035943959867}},
    {60, {25.0, 0.0}, {-21002298737.967937, 0.0}},
    {60, {-150.0, 0.0}, {2.263076870783394e-49, 0.0}},
    {60, {-100.0, -100.0}, {-4.862159848918746e-44, -6.342980591043191e-45}},
    {60, {-3.0, 199.0}, {0.009350231613259798, 0.04700432980544847}},
    {60, {120.0, 40.0}, {6.614987896939426e+51, -6.002213976924412e+51}},
    {100, {0.3, 0.0}, {-0.00399772326226213, 0.0}},
    {100, {-0.5, 0.2}, {0.0031958956488921018, -0.0005897364668254883}},
    {100, {2.5, -1.0}, {-0.06293378135404135, 0.31068005113451125}},
    {100, {-7.5, 0.0}, {4.43274924560916e-05, 0.0}},
    {100, {-12.0, 30.0}, {-2.0675684401092454e-06, -4.4884845193418527e-07}},
    {100, {-40.0, -5.0}, {2.333456497816713e-19, 2.7605945443601113e-18}},
    {100, {-1.0, 60.0}, {0.039953447707996186, 0.18578037365750263}},
    {100, {25.0, 0.0}, {-14309110857.342701, 0.0}},
    {100, {-150.0, 0.0}, {2.2954816144339318e-60, 0.0}},
    {100, {-100.0, -100.0}, {-5.144391688360036e-44, 1.3366929436794806e-44}},
    {100, {-3.0, 199.0}, {0.0009365241869714005, 0.04480582801762935}},
    {100, {120.0, 40.0}, {5.641071670777876e+51, -4.7331245852762006e+51}},
    {150, {0.3, 0.0}, {-0.002676555946323281, 0.0}},
    {150, {-0.5, 0.2}, {0.002134451923995008, -0.0003924341170493058}},
    {150, {2.5, -1.0}, {-0.04178040466035979, 0.20959057962061278}},
    {150, {-7.5, 0.0}, {2.8896404396361974e-05, 0.0}},
    {150, {-12.0, 30.0}, {-1.3233626765864433e-06, -4.450132302069141e-07}},
    {150, {-40.0, -5.0}, {1.8228250305637687e-19, 1.5256079299292473e-18}},
    {150, {-1.0, 60.0}, {0.007168536694454562, 0.13666919121649584}},
    {150, {25.0, 0.0}, {-10236196462.8353, 0.0}},
    {150, {-150.0, 0.0}, {1.0541623334162612e-64, 0.0}},
    {150, {-100.0, -100.0}, {-3.5384793076438705e-44, 3.153970392628923e-44}},
    {150, {-3.0, 199.0}, {-0.00648525095099828, 0.039551431110232196}},
    {150, {120.0, 40.0}, {4.7452260466438204e+51, -3.7243922499289095e+51}},
};

// n (-s)^-n lower_gamma(n, -s) - e^s, using the finite sum for integer n
cplx gn_incomplete_gamma(int n, cplx s) {
    using lc = std::complex<long double>;
    const lc x = -lc(s.real(), s.imag());
    lc partial = 0, term = 1;
    long double fact = 1;
    for (int k = 0; k < n; ++k) {
        partial += term;
        term *= x / (long double)(k + 1);
        if (k > 0) fact *= k;
    }
    const lc lower = fact * (1.0L - std::exp(-x) * partial);
    const lc f = (long double)n * lower / std::pow(x, n);
    const lc g = f - std::exp(-x);
    return {double(g.real()), double(g.imag())};
}

ComplexMatrix bloch_generator(double Om, double D) {
    ComplexMatrix A(4, 4);
    const cplx h = 0.5 * kI * Om;
    A << -0.5 - kI * D, 0, -h, h,
         0, -0.5 + kI * D, h, -h,
         -h, h, -1.0, 0,
         h, -h, 1.0, 0;
    return A;
}

}  // namespace

TEST_CASE("g_n matches high-precision reference table") {
    for (const auto& r : kGnTable) {
        const cplx v = numerics::g_n(r.n, r.s);
        const double scale = std::max(std::abs(r.value), 1e-300);
        INFO("n=" << r.n << " s=" << r.s);
        CHECK(std::abs(v - r.value) / scale < 1e-10);
    }
}

TEST_CASE("g_n special values") {
    CHECK(numerics::g_n(0, 2.0).real() == doctest::Approx(1.0 - std::exp(2.0)).epsilon(1e-14));
    CHECK(std::abs(numerics::g_n(1, 1.0) - cplx(-1.0)) < 1e-14);
    CHECK(std::abs(numerics::g_n(3, 0.0)) < 1e-15);
    CHECK(std::abs(numerics::hyp1f1_n(4, 0.0) - 1.0) < 1e-15);
}

TEST_CASE("g_n agrees with the incomplete-gamma closed form") {
    for (int n = 1; n <= 10; ++n)
        for (double re : {-9.0, -4.0, -2.0, 2.5, 6.0})
            for (double im : {-3.0, 0.0, 1.5, 7.0}) {
                const cplx s(re, im);
                const cplx ref = gn_incomplete_gamma(n, s);
                INFO("n=" << n << " s=" << s);
                CHECK(std::abs(numerics::g_n(n, s) - ref) <= 1e-8 * std::abs(ref));
            }
}

TEST_CASE("g_n rejects bad input") {
    CHECK_THROWS_AS(numerics::g_n(-1, 1.0), DomainError);
    CHECK_THROWS_AS(numerics::g_n(2, cplx(NAN, 0.0)), DomainError);
    CHECK_THROWS_AS(numerics::g_n(2, cplx(0.0, INFINITY)), DomainError);
}

TEST_CASE("g_n is finite across its working range") {
    for (int n : {0, 1, 7, 50, 100})
        for (double r : {1.0, 30.0, 120.0, 200.0})
            for (double a : {0.0, 1.0, 2.0, 3.0, 4.0, 5.0}) {
                const cplx s = std::polar(r, a);
                const cplx v = numerics::g_n(n, s);
                CHECK(std::isfinite(v.real()));
                CHECK(std::isfinite(v.imag()));
            }
}

TEST_CASE("matrix exponential basics") {
    std::mt19937 rng(7);
    std::normal_distribution<double> N(0.0, 1.0);
    ComplexMatrix A(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) A(i, j) = cplx(N(rng), N(rng));

    CHECK((numerics::matrix_exponential(A, 0.0) - ComplexMatrix::Identity(4, 4)).norm() < 1e-15);
    CHECK((numerics::matrix_exponential(ComplexMatrix::Zero(3, 3), 2.0) -
           ComplexMatrix::Identity(3, 3)).norm() < 1e-15);

    const ComplexMatrix E1 = numerics::matrix_exponential(A, 0.7);
    const ComplexMatrix E2 = numerics::matrix_exponential(A, 1.9);
    const ComplexMatrix E12 = numerics::matrix_exponential(A, 2.6);
    CHECK((E1 * E2 - E12).norm() <= 1e-10 * E12.norm());

    const cplx det = E12.determinant();
    const cplx ref = std::exp(A.trace() * 2.6);
    CHECK(std::abs(det - ref) <= 1e-8 * std::abs(ref));

    // rotation generator
    ComplexMatrix R(2, 2);
    R << 0, -3.0, 3.0, 0;
    const ComplexMatrix ER = numerics::matrix_exponential(R, 0.4);
    CHECK(std::abs(ER(0, 0) - std::cos(1.2)) < 1e-14);
    CHECK(std::abs(ER(1, 0) - std::sin(1.2)) < 1e-14);
    CHECK_THROWS_AS(numerics::matrix_exponential(ComplexMatrix::Zero(2, 3)), DomainError);
}

TEST_CASE("matrix exponential of the Bloch generator") {
    const double tau = 0.8;
    const ComplexMatrix U0 = numerics::matrix_exponential(bloch_generator(0.0, 0.0), tau);
    CHECK(std::abs(U0(0, 0) - std::exp(-0.5 * tau)) < 1e-14);

    // adaptive ODE oracle for Omega0 = 2, Delta = 0, tau = 1
    const ComplexMatrix A = bloch_generator(2.0, 0.0);
    const ComplexMatrix U = numerics::matrix_exponential(A, 1.0);
    dde::OdeOptions opt;
    opt.rtol = 1e-12;
    opt.atol = 1e-14;
    for (int j = 0; j < 4; ++j) {
        ComplexVector e = ComplexVector::Zero(4);
        e[j] = 1.0;
        ComplexVector col;
        dde::integrate_ode([&](double, const ComplexVector& x, ComplexVector& dx) { dx = A * x; },
                           0.0, e, {1.0}, [&](double, const ComplexVector& x) { col = x; }, opt);
        CHECK((col - U.col(j)).norm() < 1e-9);
    }
    // population block of every column of U sums to that of the input
    const ComplexMatrix Ur = numerics::matrix_exponential(bloch_generator(3.0, 0.4), 2.0);
    for (int j = 0; j < 4; ++j) {
        const double in = (j >= 2) ? 1.0 : 0.0;
        CHECK(std::abs(Ur(2, j) + Ur(3, j) - in) < 1e-12);
    }
}

TEST_CASE("solve_linear") {
    const ComplexVector b = ComplexVector::Random(3);
    CHECK((numerics::solve_linear(ComplexMatrix::Identity(3, 3), b) - b).norm() < 1e-15);

    ComplexMatrix D = ComplexMatrix::Zero(2, 2);
    D(0, 0) = 2.0;
    D(1, 1) = cplx(0.0, 4.0);
    ComplexVector bd(2);
    bd << 2.0, cplx(0.0, 4.0);
    const ComplexVector x = numerics::solve_linear(D, bd);
    CHECK(std::abs(x[0] - 1.0) < 1e-15);
    CHECK(std::abs(x[1] - 1.0) < 1e-15);

    std::mt19937 rng(11);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        ComplexMatrix M(3, 3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) M(i, j) = cplx(U(rng), U(rng));
        M += 3.0 * ComplexMatrix::Identity(3, 3);
        ComplexVector rhs(3);
        for (int i = 0; i < 3; ++i) rhs[i] = cplx(U(rng), U(rng));
        const ComplexVector s = numerics::solve_linear(M, rhs);
        CHECK((M * s - rhs).norm() <= 1e-10 * rhs.norm());
    }

    ComplexMatrix S(2, 2);
    S << 1.0, 2.0, 2.0, 4.0;
    try {
        numerics::solve_linear(S, ComplexVector::Ones(2));
        FAIL("expected SingularMatrixError");
    } catch (const SingularMatrixError& e) {
        CHECK(e.condition() > 1e12);
    }
}

TEST_CASE("null_eigenvector") {
    ComplexMatrix D = ComplexMatrix::Zero(4, 4);
    for (int i = 0; i < 4; ++i) D(i, i) = double(i);
    const ComplexVector v = numerics::null_eigenvector(D);
    CHECK(std::abs(std::abs(v[0]) - 1.0) < 1e-14);
    CHECK(v.tail(3).norm() < 1e-14);

    ComplexMatrix deg = ComplexMatrix::Zero(3, 3);
    deg(0, 0) = 1e-3;
    deg(1, 1) = 2e-3;
    deg(2, 2) = 1.0;
    CHECK_THROWS_AS(numerics::null_eigenvector(deg), DegenerateKernelError);
}

TEST_CASE("null_eigenvector is unaffected by row scaling") {
    ComplexMatrix M = bloch_generator(1.3, 0.2);
    const ComplexVector v = numerics::null_eigenvector(M);
    ComplexMatrix S = M;
    S.row(1) *= cplx(0.0, 5.0);
    S.row(3) *= 0.01;
    const ComplexVector w = numerics::null_eigenvector(S, 2.0);
    const cplx ratio = w.dot(v);  // conj(w).v
    CHECK((v - ratio * w).norm() < 1e-10);
    CHECK((M * v).norm() < 1e-12);
}
