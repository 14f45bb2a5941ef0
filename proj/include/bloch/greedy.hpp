#ifndef BLOCH_GREEDY_HPP
#define BLOCH_GREEDY_HPP

#include <functional>
#include <vector>

#include "bloch/affine.hpp"
#include "bloch/nwidth.hpp"

namespace bloch {

struct BasisProvenance {
    Wave k;
    int band;
    int step; // 0 = initialization
};

// Orthonormal reduced basis with the per-term operator products K_m Phi,
// M_m Phi and reduced blocks Phi^H K_m Phi cached; the caches are rebuilt on
// every enrichment so reduced assembly never touches N-sized operators.
struct ReducedBasis {
    Matrix Phi;
    std::vector<BasisProvenance> provenance;
    InnerProduct inner = InnerProduct::Euclidean;
    Matrix mass_ref; // M(k0) when inner == MWeighted

    std::vector<Matrix> K_phi, M_phi; // N x n, one per family term
    std::vector<Matrix> K_red, M_red; // n x n, one per family term

    Eigen::Index size() const { return Phi.cols(); }
    void rebuild_products(const AffineFamily& fam);
};

// Orthonormalizes the given columns (throws Stagnation when one is dependent)
// and caches the products.
ReducedBasis init_basis(const AffineFamily& fam, const Matrix& columns,
                        std::vector<BasisProvenance> provenance,
                        InnerProduct inner = InnerProduct::Euclidean,
                        const Matrix* mass_ref = nullptr);

void enrich_basis(ReducedBasis& basis, const AffineFamily& fam, const Vector& v,
                  const BasisProvenance& provenance);

struct ReducedSolveResult {
    RealVector omega2;
    Matrix coeffs; // n x J reduced eigenvectors
    Matrix lifted; // N x J lifted vectors Phi * coeffs
};

// O(Q n^2) assembly from the cached reduced blocks plus an n x n eigensolve.
ReducedSolveResult reduced_solve(const ReducedBasis& basis, const AffineFamily& fam,
                                 const Wave& k, int J);

// Residuals r_j = K(k) Phi u_j - w_j^2 M(k) Phi u_j through the cached
// N x n products (O(Q N n) per wave vector).
Matrix reduced_residuals(const ReducedBasis& basis, const AffineFamily& fam, const Wave& k,
                         const ReducedSolveResult& sol);

struct GreedyStep {
    int step;      // 0-based sweep counter
    int n;         // basis size when the indicator was evaluated
    Wave k_sel;
    int band_sel;  // 1-based
    double indicator;  // oracle: worst projection error; residual: max residual norm
    double true_error; // filled by audits; NaN otherwise
    long full_solves;  // cumulative full eigenvalue solves
    bool enriched;     // false for the final converged row
};

struct GreedyHistory {
    std::vector<GreedyStep> steps;
    std::vector<BasisProvenance> provenance;
    long full_solves = 0;
    double sigma1 = 0; // largest singular value of the training snapshots (oracle mode)
};

struct GreedyOptions {
    int n_max = 50;
    double tol = 1e-12;             // relative stopping threshold
    Wave init_k{M_PI / 2.0, 0.0};
    int threads = 1;
    InnerProduct inner = InnerProduct::Euclidean;
    bool mass_weighted_residual = false; // ||M(k)^{-1/2} r|| instead of ||r||
    bool audit = false;                  // verify the indicator against a true error at the stop
};

// Worst-approximated snapshot is appended each step; requires the full
// precomputed snapshot set. Initialization takes all J bands at the training
// point closest to init_k.
std::pair<ReducedBasis, GreedyHistory> oracle_greedy(const SnapshotSet& set, const AffineFamily& fam,
                                                     int J, const GreedyOptions& opts);

// Weak greedy with the affine residual indicator; one full solve per step.
std::pair<ReducedBasis, GreedyHistory> residual_greedy(const AffineFamily& fam,
                                                       const BandSolver& full_solver,
                                                       const std::vector<Wave>& training_grid, int J,
                                                       const GreedyOptions& opts);

// True worst-case projection error of every basis-prefix size 0..n over the
// snapshot columns.
RealVector audit_true_errors(const Matrix& Phi, const SnapshotSet& set);

struct SelectionRow {
    int step;
    Wave k;
    int band;
    double omega;
};

std::vector<SelectionRow> selection_pattern_report(
    const GreedyHistory& history, const std::function<double(const Wave&, int)>& omega_fn);

} // namespace bloch

#endif
