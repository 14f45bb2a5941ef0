#ifndef BLOCH_NUMKERNEL_HPP
#define BLOCH_NUMKERNEL_HPP

#include <complex>
#include <optional>

#include <Eigen/Dense>

#include "bloch/errors.hpp"

namespace bloch {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Hermitian generalized pencil K u = omega^2 M u with M positive definite.
struct HermitianPencil {
    Matrix K;
    Matrix M;

    Eigen::Index dim() const { return K.rows(); }

    // Throws NotHermitian / MassNotSpd / NonFiniteInput on violation.
    void validate(double hermitian_rtol = 1e-12) const;
};

// Eigenvalues ascending; eigenvectors M-orthonormal and gauge-fixed.
struct EigenSolution {
    RealVector omega2;
    Matrix vectors;

    Eigen::Index dim() const { return omega2.size(); }
};

struct KernelOptions {
    double hermitian_rtol = 1e-12;  // relative Frobenius tolerance for K = K^H, M = M^H
    double gauge_rtol = 1e-8;       // component significance threshold for phase fixing
    double tie_rtol = 1e-12;        // eigenvalue tie detection, relative to spectral range
    double degenerate_rtol = 1e-10; // orthonormalization span rejection
};

enum class InnerProduct { Euclidean, MWeighted };

// Rotates v by a unit phase so that its first significant component
// (|v_i| >= gauge_rtol * max|v|) becomes real and positive. Falls back to
// the largest-modulus component when the leading ones are negligible.
void gauge_fix(Vector& v, double gauge_rtol = 1e-8);

// Cholesky reduction M = L L^H, Hermitian solve on L^-1 K L^-H, back-transform.
EigenSolution eig_hermitian_gen(const HermitianPencil& p, const KernelOptions& opts = {});

struct ThinSvd {
    Matrix U;
    RealVector sigma; // non-increasing, non-negative
    Matrix V;
};

ThinSvd thin_svd(const Matrix& A);

// Two passes of modified Gram-Schmidt against the (orthonormal) basis columns.
// Returns the normalized remainder, or nullopt when v already lies in the span
// (residual below degenerate_rtol * ||v||). For MWeighted, mass must be given
// and the basis must be M-orthonormal.
std::optional<Vector> orthonormalize_against(const Vector& v, const Matrix& basis,
                                             InnerProduct inner = InnerProduct::Euclidean,
                                             const Matrix* mass = nullptr,
                                             double degenerate_rtol = 1e-10);

// General (non-Hermitian) dense eigenvalues, sorted by (Re, Im). Diagnostic
// fallback for complex wave vectors where the pencil loses Hermitian symmetry.
Eigen::VectorXcd eig_general(const Matrix& A);
Eigen::VectorXcd eig_pencil_general(const Matrix& K, const Matrix& M);

} // namespace bloch

#endif
