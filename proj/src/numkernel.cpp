#include "bloch/numkernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace bloch {

void HermitianPencil::validate(double hermitian_rtol) const {
    if (!K.allFinite() || !M.allFinite())
        throw NonFiniteInput("pencil contains non-finite entries");
    if (K.rows() != K.cols() || M.rows() != M.cols() || K.rows() != M.rows())
        throw Error("pencil dimension mismatch");
    const double kf = K.norm();
    const double mf = M.norm();
    if ((K - K.adjoint()).norm() > hermitian_rtol * std::max(kf, 1e-300))
        throw NotHermitian("stiffness deviates from K = K^H beyond tolerance");
    if ((M - M.adjoint()).norm() > hermitian_rtol * std::max(mf, 1e-300))
        throw NotHermitian("mass deviates from M = M^H beyond tolerance");
    Eigen::LLT<Matrix> llt(M);
    if (llt.info() != Eigen::Success)
        throw MassNotSpd("mass matrix Cholesky failed (not positive definite)");
}

void gauge_fix(Vector& v, double gauge_rtol) {
    const Eigen::Index n = v.size();
    if (n == 0) return;
    double vmax = v.cwiseAbs().maxCoeff();
    if (vmax <= 0.0) return;
    Eigen::Index pivot = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(v[i]) >= gauge_rtol * vmax) { pivot = i; break; }
    }
    if (pivot < 0) {
        v.cwiseAbs().maxCoeff(&pivot);
    }
    const Complex z = v[pivot];
    v *= std::conj(z) / std::abs(z);
    v[pivot] = Complex(std::abs(v[pivot]), 0.0); // kill roundoff in the pinned entry
}

namespace {

// Lexicographic order on (Re u0, Im u0, Re u1, ...) used to break eigenvalue ties.
bool lex_less(const Vector& a, const Vector& b) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a[i].real() != b[i].real()) return a[i].real() < b[i].real();
        if (a[i].imag() != b[i].imag()) return a[i].imag() < b[i].imag();
    }
    return false;
}

} // namespace

EigenSolution eig_hermitian_gen(const HermitianPencil& p, const KernelOptions& opts) {
    p.validate(opts.hermitian_rtol);
    const Eigen::Index n = p.dim();

    Eigen::LLT<Matrix> llt(p.M);
    if (llt.info() != Eigen::Success)
        throw MassNotSpd("mass matrix Cholesky failed (not positive definite)");
    const auto L = llt.matrixL();

    // C = L^-1 K L^-H, symmetrized to absorb roundoff
    Matrix C = L.solve(p.K);
    C = L.solve(C.adjoint()).adjoint();
    C = 0.5 * (C + C.adjoint()).eval();

    Eigen::SelfAdjointEigenSolver<Matrix> es(C);
    if (es.info() != Eigen::Success)
        throw Error("Hermitian eigensolver failed to converge");

    EigenSolution sol;
    sol.omega2 = es.eigenvalues();
    sol.vectors = L.adjoint().solve(es.eigenvectors());

    for (Eigen::Index j = 0; j < n; ++j) {
        Vector col = sol.vectors.col(j);
        gauge_fix(col, opts.gauge_rtol);
        sol.vectors.col(j) = col;
    }

    // Deterministic ordering inside degenerate groups
    const double scale = std::max(std::abs(sol.omega2[0]), std::abs(sol.omega2[n - 1]));
    const double tie = opts.tie_rtol * std::max(scale, 1e-300);
    Eigen::Index lo = 0;
    while (lo < n) {
        Eigen::Index hi = lo + 1;
        while (hi < n && sol.omega2[hi] - sol.omega2[lo] <= tie) ++hi;
        if (hi - lo > 1) {
            std::vector<Eigen::Index> idx(hi - lo);
            std::iota(idx.begin(), idx.end(), lo);
            std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
                return lex_less(sol.vectors.col(a), sol.vectors.col(b));
            });
            Matrix block(n, hi - lo);
            RealVector vals(hi - lo);
            for (Eigen::Index t = 0; t < hi - lo; ++t) {
                block.col(t) = sol.vectors.col(idx[t]);
                vals[t] = sol.omega2[idx[t]];
            }
            sol.vectors.middleCols(lo, hi - lo) = block;
            sol.omega2.segment(lo, hi - lo) = vals;
        }
        lo = hi;
    }
    return sol;
}

ThinSvd thin_svd(const Matrix& A) {
    if (!A.allFinite())
        throw NonFiniteInput("thin_svd input contains non-finite entries");
    Eigen::BDCSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return ThinSvd{svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

std::optional<Vector> orthonormalize_against(const Vector& v, const Matrix& basis,
                                             InnerProduct inner, const Matrix* mass,
                                             double degenerate_rtol) {
    if (inner == InnerProduct::MWeighted && mass == nullptr)
        throw Error("M-weighted orthonormalization requires the mass matrix");

    auto dot = [&](const Vector& a, const Vector& b) -> Complex {
        if (inner == InnerProduct::Euclidean) return a.dot(b);
        return a.dot(*mass * b);
    };
    auto norm = [&](const Vector& a) -> double { return std::sqrt(std::abs(dot(a, a))); };

    const double v0 = norm(v);
    if (v0 <= 0.0) return std::nullopt;
    Vector w = v;
    for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index j = 0; j < basis.cols(); ++j) {
            Vector bj = basis.col(j);
            w -= bj * dot(bj, w);
        }
    }
    const double r = norm(w);
    if (r < degenerate_rtol * v0) return std::nullopt;
    w /= r;
    return w;
}

Eigen::VectorXcd eig_general(const Matrix& A) {
    if (!A.allFinite())
        throw NonFiniteInput("eig_general input contains non-finite entries");
    Eigen::ComplexEigenSolver<Matrix> es(A, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw Error("general eigensolver failed to converge");
    Eigen::VectorXcd ev = es.eigenvalues();
    std::sort(ev.data(), ev.data() + ev.size(), [](Complex a, Complex b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return ev;
}

Eigen::VectorXcd eig_pencil_general(const Matrix& K, const Matrix& M) {
    return eig_general(M.partialPivLu().solve(K));
}

} // namespace bloch
