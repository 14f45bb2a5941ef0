#ifndef BLOCH_TEST_ORACLES_HPP
#define BLOCH_TEST_ORACLES_HPP

// Independent reference computations used only by tests. Everything here goes
// through characteristic polynomials or brute-force sums, never through the
// library's own eigensolver path.

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracles {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

// det(K - lambda*M) for n = 2,3 expanded by cofactors.
inline Complex pencil_det(const Matrix& K, const Matrix& M, double lambda) {
    const Matrix A = K - lambda * M;
    if (A.rows() == 2) return A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
    return A(0, 0) * (A(1, 1) * A(2, 2) - A(1, 2) * A(2, 1)) -
           A(0, 1) * (A(1, 0) * A(2, 2) - A(1, 2) * A(2, 0)) +
           A(0, 2) * (A(1, 0) * A(2, 1) - A(1, 1) * A(2, 0));
}

// Interpolates the characteristic polynomial from determinant samples and
// returns its real roots. Valid for Hermitian K and SPD M of size 2 or 3.
inline std::vector<double> charpoly_eigenvalues(const Matrix& K, const Matrix& M) {
    const int n = static_cast<int>(K.rows());
    // Scale sample points to the spectral magnitude so interpolation stays sane
    const double s = std::max(1.0, K.norm() / std::max(M.norm(), 1e-300));
    std::vector<double> roots;
    if (n == 2) {
        const double p0 = pencil_det(K, M, 0.0).real();
        const double p1 = pencil_det(K, M, s).real();
        const double p2 = pencil_det(K, M, -s).real();
        // p(x) = a x^2 + b x + c through (0,p0), (s,p1), (-s,p2)
        const double c = p0;
        const double a = (p1 + p2 - 2 * p0) / (2 * s * s);
        const double b = (p1 - p2) / (2 * s);
        const double disc = std::sqrt(std::max(0.0, b * b - 4 * a * c));
        const double q = -0.5 * (b + (b >= 0 ? disc : -disc));
        roots = {q / a, c / q};
        if (std::abs(q) < 1e-300) roots = {-b / (2 * a), -b / (2 * a)};
    } else {
        // Four samples -> cubic coefficients, then the trigonometric formula
        const std::array<double, 4> x{0.0, s, -s, 2 * s};
        std::array<double, 4> p{};
        for (int i = 0; i < 4; ++i) p[i] = pencil_det(K, M, x[i]).real();
        Eigen::Matrix4d V;
        for (int i = 0; i < 4; ++i)
            V.row(i) << x[i] * x[i] * x[i], x[i] * x[i], x[i], 1.0;
        Eigen::Vector4d coef = V.fullPivLu().solve(Eigen::Vector4d(p[0], p[1], p[2], p[3]));
        const double a = coef[0], b = coef[1], c = coef[2], d = coef[3];
        const double pp = (3 * a * c - b * b) / (3 * a * a);
        const double qq = (2 * b * b * b - 9 * a * b * c + 27 * a * a * d) / (27 * a * a * a);
        const double shift = -b / (3 * a);
        if (pp >= 0) {
            // near-triple root; all roots coincide to roundoff
            roots = {shift, shift, shift};
        } else {
            const double m = 2 * std::sqrt(-pp / 3);
            double arg = 3 * qq / (pp * m);
            arg = std::clamp(arg, -1.0, 1.0);
            const double theta = std::acos(arg) / 3.0;
            for (int k = 0; k < 3; ++k)
                roots.push_back(shift + m * std::cos(theta - 2 * M_PI * k / 3.0));
        }
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

inline Matrix random_complex(int n, int m, std::mt19937& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix A(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) A(i, j) = Complex(g(rng), g(rng));
    return A;
}

// Hermitian K, well-conditioned SPD M
inline std::pair<Matrix, Matrix> random_pencil(int n, std::mt19937& rng) {
    Matrix A = random_complex(n, n, rng);
    Matrix K = 0.5 * (A + A.adjoint());
    Matrix B = random_complex(n, n, rng);
    Matrix M = Matrix::Identity(n, n) + 0.25 * (B * B.adjoint());
    return {K, M};
}

} // namespace oracles

#endif
