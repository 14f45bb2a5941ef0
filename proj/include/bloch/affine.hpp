#ifndef BLOCH_AFFINE_HPP
#define BLOCH_AFFINE_HPP

#include <array>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "bloch/numkernel.hpp"

namespace bloch {

// Wave vectors are always stored padded to two components; the y entry is
// zero for one-dimensional problems.
using Wave = Eigen::Vector2d;
using CWave = Eigen::Vector2cd;

struct Lattice {
    int dim = 1;
    std::array<Eigen::Vector2d, 2> a{Eigen::Vector2d::UnitX(), Eigen::Vector2d::UnitY()};

    static Lattice line(double period);
    static Lattice square(double period);

    double period() const { return a[0].norm(); }
    // Brillouin-zone edge along the first axis, pi/a
    double bz_edge() const { return M_PI / period(); }

    // High-symmetry points of the square-lattice irreducible Brillouin zone
    Wave gamma_point() const { return Wave::Zero(); }
    Wave x_point() const { return {bz_edge(), 0.0}; }
    Wave m_point() const { return {bz_edge(), bz_edge()}; }
};

// Exponent vector of a phase monomial f(k) = prod_j exp(i alpha_j k.a_j),
// entries restricted to {-1, 0, 1}.
struct MonomialExponent {
    std::array<int, 2> alpha{0, 0};

    bool is_zero() const { return alpha[0] == 0 && alpha[1] == 0; }
    MonomialExponent negated() const { return {{-alpha[0], -alpha[1]}}; }
    bool operator==(const MonomialExponent& o) const { return alpha == o.alpha; }
    bool operator<(const MonomialExponent& o) const { return alpha < o.alpha; }
};

struct FamilyTerm {
    MonomialExponent exp;
    Matrix K;
    Matrix M;
};

// K(k) = sum_m f_m(k) K_m and likewise M(k), with k-independent coefficient
// matrices and monomial phase coefficients. Immutable after construction.
class AffineFamily {
public:
    AffineFamily(Lattice lattice, std::vector<FamilyTerm> terms);

    Eigen::Index dim() const { return dim_; }
    // Number of non-constant terms (the constant term is excluded)
    int term_count() const { return static_cast<int>(terms_.size()) - 1; }
    const Lattice& lattice() const { return lattice_; }
    const std::vector<FamilyTerm>& terms() const { return terms_; }

    Complex phase(const MonomialExponent& e, const Wave& k) const;
    Complex phase(const MonomialExponent& e, const CWave& k) const;

    // Real wave vector: Hermitian pencil (Hermiticity checked).
    HermitianPencil evaluate(const Wave& k) const;
    // Complex wave vector: plain matrix pair, no Hermitian validation.
    std::pair<Matrix, Matrix> evaluate_complex(const CWave& k) const;

    nlohmann::json to_json() const;
    static AffineFamily from_json(const nlohmann::json& j);

private:
    Lattice lattice_;
    std::vector<FamilyTerm> terms_; // constant term first, rest sorted by exponent
    Eigen::Index dim_ = 0;
};

// One row of the Bloch constraint matrix T(k): a single monomial phase factor
// placed in column `col`.
struct ConstraintRow {
    Eigen::Index col;
    MonomialExponent exp;
};

// Symbolic congruence T(k)^H A T(k) collected by monomial products. Exponents
// outside {-1,0,1}^d raise ExponentOverflow (mesh elements spanning more than
// one cell).
AffineFamily build_from_constrained(const Matrix& global_K, const Matrix& global_M,
                                    const std::vector<ConstraintRow>& rows,
                                    const Lattice& lattice);

// Explicit constraint matrix at a fixed k, for direct-congruence checks.
Matrix constraint_matrix(const std::vector<ConstraintRow>& rows, const Lattice& lattice,
                         const Wave& k, Eigen::Index n_reduced);

// --- Two-element homogeneous bar fixture (closed form available) ---

// 3x3 unconstrained matrices of the two-element discretization.
std::pair<Matrix, Matrix> appendix_global(double E = 1, double A = 1, double rho = 1, double a = 1);
std::vector<ConstraintRow> appendix_constraints();
AffineFamily appendix_family(double E = 1, double A = 1, double rho = 1, double a = 1);

struct AppendixPair {
    double omega2_1, omega2_2;
    Eigen::Vector2cd u1, u2; // unnormalized (1, +-e^{ika/2})
};
AppendixPair appendix_closed_form(double k, double c0 = 1, double a = 1);

} // namespace bloch

#endif
