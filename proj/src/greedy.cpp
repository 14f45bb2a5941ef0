#include "bloch/greedy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bloch/parallel.hpp"

namespace bloch {

void ReducedBasis::rebuild_products(const AffineFamily& fam) {
    const auto& terms = fam.terms();
    K_phi.resize(terms.size());
    M_phi.resize(terms.size());
    K_red.resize(terms.size());
    M_red.resize(terms.size());
    for (size_t m = 0; m < terms.size(); ++m) {
        K_phi[m].noalias() = terms[m].K * Phi;
        M_phi[m].noalias() = terms[m].M * Phi;
        K_red[m].noalias() = Phi.adjoint() * K_phi[m];
        M_red[m].noalias() = Phi.adjoint() * M_phi[m];
    }
}

ReducedBasis init_basis(const AffineFamily& fam, const Matrix& columns,
                        std::vector<BasisProvenance> provenance, InnerProduct inner,
                        const Matrix* mass_ref) {
    ReducedBasis b;
    b.inner = inner;
    if (inner == InnerProduct::MWeighted) {
        if (mass_ref == nullptr) throw Error("M-weighted basis needs a reference mass matrix");
        b.mass_ref = *mass_ref;
    }
    b.Phi.resize(columns.rows(), 0);
    for (Eigen::Index c = 0; c < columns.cols(); ++c) {
        auto w = orthonormalize_against(columns.col(c), b.Phi, inner,
                                        inner == InnerProduct::MWeighted ? &b.mass_ref : nullptr);
        if (!w) throw Stagnation("initial basis column " + std::to_string(c) + " is dependent");
        b.Phi.conservativeResize(Eigen::NoChange, b.Phi.cols() + 1);
        b.Phi.col(b.Phi.cols() - 1) = *w;
    }
    b.provenance = std::move(provenance);
    b.rebuild_products(fam);
    return b;
}

void enrich_basis(ReducedBasis& basis, const AffineFamily& fam, const Vector& v,
                  const BasisProvenance& provenance) {
    auto w = orthonormalize_against(v, basis.Phi, basis.inner,
                                    basis.inner == InnerProduct::MWeighted ? &basis.mass_ref : nullptr);
    if (!w) throw Stagnation("selected vector already lies in the basis span");
    basis.Phi.conservativeResize(Eigen::NoChange, basis.Phi.cols() + 1);
    basis.Phi.col(basis.Phi.cols() - 1) = *w;
    basis.provenance.push_back(provenance);
    basis.rebuild_products(fam);
}

ReducedSolveResult reduced_solve(const ReducedBasis& basis, const AffineFamily& fam,
                                 const Wave& k, int J) {
    const Eigen::Index n = basis.size();
    if (J > n) throw Error("reduced basis smaller than the requested band count");
    const auto& terms = fam.terms();
    Matrix Kt = Matrix::Zero(n, n);
    Matrix Mt = Matrix::Zero(n, n);
    for (size_t m = 0; m < terms.size(); ++m) {
        const Complex f = fam.phase(terms[m].exp, k);
        Kt += f * basis.K_red[m];
        Mt += f * basis.M_red[m];
    }
    Kt = 0.5 * (Kt + Kt.adjoint()).eval();
    Mt = 0.5 * (Mt + Mt.adjoint()).eval();
    auto sol = eig_hermitian_gen({std::move(Kt), std::move(Mt)});
    ReducedSolveResult out;
    out.omega2 = sol.omega2.head(J);
    out.coeffs = sol.vectors.leftCols(J);
    out.lifted.noalias() = basis.Phi * out.coeffs;
    return out;
}

Matrix reduced_residuals(const ReducedBasis& basis, const AffineFamily& fam, const Wave& k,
                         const ReducedSolveResult& sol) {
    const auto& terms = fam.terms();
    const Eigen::Index N = basis.Phi.rows();
    const Eigen::Index n = basis.size();
    Matrix Kphi_k = Matrix::Zero(N, n);
    Matrix Mphi_k = Matrix::Zero(N, n);
    for (size_t m = 0; m < terms.size(); ++m) {
        const Complex f = fam.phase(terms[m].exp, k);
        Kphi_k += f * basis.K_phi[m];
        Mphi_k += f * basis.M_phi[m];
    }
    const int J = static_cast<int>(sol.omega2.size());
    Matrix R(N, J);
    for (int j = 0; j < J; ++j)
        R.col(j) = Kphi_k * sol.coeffs.col(j) - sol.omega2[j] * (Mphi_k * sol.coeffs.col(j));
    return R;
}

namespace {

double residual_norm(const Matrix& R, int j, const AffineFamily& fam, const Wave& k,
                     bool mass_weighted) {
    if (!mass_weighted) return R.col(j).norm();
    auto p = fam.evaluate(k);
    Eigen::LLT<Matrix> llt(p.M);
    return llt.matrixL().solve(R.col(j)).norm();
}

} // namespace

RealVector audit_true_errors(const Matrix& Phi, const SnapshotSet& set) {
    Matrix E = set.S;
    RealVector worst(Phi.cols() + 1);
    worst[0] = E.colwise().norm().maxCoeff();
    for (Eigen::Index j = 0; j < Phi.cols(); ++j) {
        const Vector phi = Phi.col(j);
        E.noalias() -= phi * (phi.adjoint() * E);
        worst[j + 1] = E.colwise().norm().maxCoeff();
    }
    return worst;
}

std::pair<ReducedBasis, GreedyHistory> oracle_greedy(const SnapshotSet& set, const AffineFamily& fam,
                                                     int J, const GreedyOptions& opts) {
    const Eigen::Index m = set.S.cols();
    if (m == 0) throw Error("empty snapshot set");

    GreedyHistory hist;
    hist.sigma1 = thin_svd(set.S).sigma[0];
    hist.full_solves = static_cast<long>(m); // all snapshots are precomputed full solves

    // initialization: every requested band at the training point nearest init_k
    Eigen::Index nearest = 0;
    for (Eigen::Index c = 1; c < m; ++c)
        if ((set.meta[c].k - opts.init_k).norm() < (set.meta[nearest].k - opts.init_k).norm())
            nearest = c;
    const Wave k0 = set.meta[nearest].k;
    std::vector<Eigen::Index> init_cols;
    for (Eigen::Index c = 0; c < m; ++c)
        if ((set.meta[c].k - k0).norm() == 0.0 && set.meta[c].band <= J) init_cols.push_back(c);

    Matrix init(set.S.rows(), init_cols.size());
    std::vector<BasisProvenance> prov;
    for (size_t i = 0; i < init_cols.size(); ++i) {
        init.col(i) = set.S.col(init_cols[i]);
        prov.push_back({set.meta[init_cols[i]].k, set.meta[init_cols[i]].band, 0});
    }
    Matrix mref;
    const Matrix* mref_ptr = nullptr;
    if (opts.inner == InnerProduct::MWeighted) {
        mref = fam.evaluate(k0).M;
        mref_ptr = &mref;
    }
    ReducedBasis basis = init_basis(fam, init, std::move(prov), opts.inner, mref_ptr);

    // residual columns maintained by deflation against the growing basis
    Matrix E = set.S;
    for (Eigen::Index j = 0; j < basis.size(); ++j) {
        const Vector phi = basis.Phi.col(j);
        E.noalias() -= phi * (phi.adjoint() * E);
    }

    for (int step = 0;; ++step) {
        Eigen::Index worst_col = 0;
        double worst = -1.0;
        for (Eigen::Index c = 0; c < m; ++c) {
            const double e = E.col(c).norm();
            if (e > worst) {
                worst = e;
                worst_col = c;
            }
        }
        GreedyStep row{step, static_cast<int>(basis.size()), set.meta[worst_col].k,
                       set.meta[worst_col].band, worst, worst, hist.full_solves, false};
        const bool stop = worst <= opts.tol * hist.sigma1 || basis.size() >= opts.n_max;
        hist.steps.push_back(row);
        if (stop) break;

        enrich_basis(basis, fam, set.S.col(worst_col),
                     {set.meta[worst_col].k, set.meta[worst_col].band, step + 1});
        hist.steps.back().enriched = true;
        const Vector phi = basis.Phi.col(basis.size() - 1);
        E.noalias() -= phi * (phi.adjoint() * E);
    }
    hist.provenance = basis.provenance;
    return {std::move(basis), std::move(hist)};
}

std::pair<ReducedBasis, GreedyHistory> residual_greedy(const AffineFamily& fam,
                                                       const BandSolver& full_solver,
                                                       const std::vector<Wave>& training_grid, int J,
                                                       const GreedyOptions& opts) {
    if (training_grid.empty()) throw Error("empty training grid");
    GreedyHistory hist;

    auto init_vecs = full_solver(opts.init_k, J);
    hist.full_solves = 1;
    Matrix init(init_vecs.front().size(), J);
    std::vector<BasisProvenance> prov;
    for (int j = 0; j < J; ++j) {
        init.col(j) = init_vecs[j];
        prov.push_back({opts.init_k, j + 1, 0});
    }
    Matrix mref;
    const Matrix* mref_ptr = nullptr;
    if (opts.inner == InnerProduct::MWeighted) {
        mref = fam.evaluate(opts.init_k).M;
        mref_ptr = &mref;
    }
    ReducedBasis basis = init_basis(fam, init, std::move(prov), opts.inner, mref_ptr);

    double indicator_ref = -1.0;
    for (int step = 0;; ++step) {
        const size_t nk = training_grid.size();
        std::vector<double> delta(nk);
        std::vector<int> worst_band(nk);
        parallel_for_index(nk, opts.threads, [&](size_t i) {
            auto sol = reduced_solve(basis, fam, training_grid[i], J);
            Matrix R = reduced_residuals(basis, fam, training_grid[i], sol);
            double d = -1.0;
            int b = 1;
            for (int j = 0; j < J; ++j) {
                const double r = residual_norm(R, j, fam, training_grid[i],
                                               opts.mass_weighted_residual);
                if (r > d) {
                    d = r;
                    b = j + 1;
                }
            }
            delta[i] = d;
            worst_band[i] = b;
        });
        size_t sel = 0;
        for (size_t i = 1; i < nk; ++i)
            if (delta[i] > delta[sel]) sel = i; // strict >: ties keep the lowest index
        if (indicator_ref < 0) indicator_ref = delta[sel];

        GreedyStep row{step, static_cast<int>(basis.size()), training_grid[sel], worst_band[sel],
                       delta[sel], std::numeric_limits<double>::quiet_NaN(), hist.full_solves, false};
        const bool converged = delta[sel] <= opts.tol * indicator_ref;
        if (converged || basis.size() >= opts.n_max) {
            if (converged && opts.audit) {
                auto vecs = full_solver(training_grid[sel], J);
                ++hist.full_solves;
                row.full_solves = hist.full_solves;
                double err = 0.0;
                for (const auto& u : vecs)
                    err = std::max(err, (u - basis.Phi * (basis.Phi.adjoint() * u)).norm() / u.norm());
                row.true_error = err;
                if (err > 10.0 * opts.tol)
                    throw IndicatorCollapse("residual indicator converged but the true error is " +
                                            std::to_string(err));
            }
            hist.steps.push_back(row);
            break;
        }
        hist.steps.push_back(row);

        auto vecs = full_solver(training_grid[sel], J);
        ++hist.full_solves;
        hist.steps.back().full_solves = hist.full_solves;
        // insert the worst-approximated of the J eigenvectors at k*
        int pick = 0;
        double worst = -1.0;
        for (int j = 0; j < J; ++j) {
            const double e = (vecs[j] - basis.Phi * (basis.Phi.adjoint() * vecs[j])).norm() / vecs[j].norm();
            if (e > worst) {
                worst = e;
                pick = j;
            }
        }
        hist.steps.back().band_sel = pick + 1;
        hist.steps.back().enriched = true;
        enrich_basis(basis, fam, vecs[pick], {training_grid[sel], pick + 1, step + 1});
    }
    hist.provenance = basis.provenance;
    return {std::move(basis), std::move(hist)};
}

std::vector<SelectionRow> selection_pattern_report(
    const GreedyHistory& history, const std::function<double(const Wave&, int)>& omega_fn) {
    std::vector<SelectionRow> rows;
    rows.reserve(history.provenance.size());
    for (const auto& p : history.provenance)
        rows.push_back({p.step, p.k, p.band, omega_fn(p.k, p.band)});
    return rows;
}

} // namespace bloch
