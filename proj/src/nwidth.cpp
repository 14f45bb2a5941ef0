#include "bloch/nwidth.hpp"

#include <algorithm>
#include <cmath>

#include "bloch/parallel.hpp"
#include "bloch/solver2d.hpp"

namespace bloch {

BandSolver make_tmm_solver(const MaterialProfile1D& profile, const DispersionOptions& opts) {
    const RealVector w = trapezoid_weights(profile.layer_count() + 1, profile.layer_width());
    const RealVector sqw = w.cwiseSqrt();
    return [profile, opts, sqw](const Wave& k, int n_bands) {
        auto modes = bloch_modes(profile, k.x(), n_bands, opts);
        std::vector<Vector> out;
        out.reserve(modes.size());
        for (auto& m : modes) out.push_back(m.u_periodic.cwiseProduct(sqw.cast<Complex>()));
        return out;
    };
}

BandSolver make_family_solver(const AffineFamily& fam) {
    return [&fam](const Wave& k, int n_bands) {
        auto sol = eig_hermitian_gen(fam.evaluate(k));
        if (n_bands > sol.dim()) throw Error("family has fewer bands than requested");
        std::vector<Vector> out;
        out.reserve(n_bands);
        for (int j = 0; j < n_bands; ++j) {
            Vector u = sol.vectors.col(j);
            u /= u.norm();
            out.push_back(std::move(u));
        }
        return out;
    };
}

SamplingDomain SamplingDomain::interval(double k_hi, double k_lo) {
    SamplingDomain d;
    d.type = Type::Interval;
    d.k_lo = k_lo;
    d.k_hi = k_hi;
    return d;
}

SamplingDomain SamplingDomain::path(std::vector<Wave> vertices) {
    SamplingDomain d;
    d.type = Type::Path;
    d.vertices = std::move(vertices);
    return d;
}

SamplingDomain SamplingDomain::ibz_triangle(const Lattice& lattice, int subdivision) {
    SamplingDomain d;
    d.type = Type::IbzTriangle;
    d.vertices = {lattice.gamma_point(), lattice.x_point(), lattice.m_point()};
    d.subdivision = subdivision;
    return d;
}

std::vector<Wave> SamplingDomain::samples(int M) const {
    switch (type) {
        case Type::Interval: {
            if (M < 1) throw Error("interval sampling needs M >= 1");
            std::vector<Wave> ks;
            ks.reserve(M);
            for (int i = 1; i <= M; ++i)
                ks.push_back({k_lo + (k_hi - k_lo) * i / (M + 1), 0.0});
            return ks;
        }
        case Type::Path:
            return sample_polyline(vertices, M);
        case Type::IbzTriangle: {
            std::vector<Wave> pts;
            const Wave& g = vertices[0];
            const Wave& x = vertices[1];
            const Wave& m = vertices[2];
            for (int i = 0; i <= subdivision; ++i)
                for (int j = 0; j <= subdivision - i; ++j) {
                    const int l = subdivision - i - j;
                    pts.push_back((i * g + j * x + l * m) / subdivision);
                }
            return pts;
        }
    }
    throw Error("unknown sampling domain");
}

const char* SamplingDomain::name() const {
    switch (type) {
        case Type::Interval: return "interval";
        case Type::Path: return "path";
        case Type::IbzTriangle: return "ibz_triangle";
    }
    return "unknown";
}

SnapshotSet collect_snapshots(const BandSolver& solver, const SamplingDomain& domain,
                              const std::vector<int>& bands, int M, int threads) {
    if (bands.empty()) throw Error("no bands requested");
    std::vector<int> sorted_bands = bands;
    std::sort(sorted_bands.begin(), sorted_bands.end());
    const int n_need = sorted_bands.back();

    auto ks = domain.samples(M);
    if (ks.size() < 2 && domain.type == SamplingDomain::Type::Interval && M >= 2)
        throw Error("sampling produced too few points");

    std::vector<std::vector<Vector>> per_k(ks.size());
    parallel_for_index(ks.size(), threads, [&](size_t i) { per_k[i] = solver(ks[i], n_need); });

    const Eigen::Index n = per_k.front().front().size();
    SnapshotSet set;
    set.S.resize(n, static_cast<Eigen::Index>(ks.size()) * sorted_bands.size());
    set.weighting = "per-solver";
    set.domain = domain.name();
    Eigen::Index c = 0;
    for (int b : sorted_bands) {
        for (size_t i = 0; i < ks.size(); ++i) {
            set.S.col(c) = per_k[i][b - 1];
            set.meta.push_back({ks[i], b});
            ++c;
        }
    }
    return set;
}

SnapshotSet realify(const SnapshotSet& set) {
    SnapshotSet out;
    out.S.resize(2 * set.S.rows(), set.S.cols());
    for (Eigen::Index r = 0; r < set.S.rows(); ++r) {
        out.S.row(2 * r) = set.S.row(r).real().cast<Complex>();
        out.S.row(2 * r + 1) = set.S.row(r).imag().cast<Complex>();
    }
    out.meta = set.meta;
    out.weighting = set.weighting;
    out.domain = set.domain;
    return out;
}

SvdDecay svd_decay(const SnapshotSet& set) {
    if (set.S.cols() == 0) throw Error("empty snapshot set");
    auto svd = thin_svd(set.S);
    const Eigen::Index r = svd.sigma.size();

    // Deflate one singular direction at a time; explicit residual columns
    // avoid the norm cancellation that a sum-of-squares update would hit.
    Matrix E = set.S;
    SvdDecay out;
    out.sigma = svd.sigma;
    out.U = svd.U;
    out.worst_error.resize(r + 1);
    out.worst_error[0] = E.colwise().norm().maxCoeff();
    for (Eigen::Index nlev = 0; nlev < r; ++nlev) {
        const Vector u = svd.U.col(nlev);
        E.noalias() -= u * (u.adjoint() * E);
        out.worst_error[nlev + 1] = E.colwise().norm().maxCoeff();
    }
    return out;
}

namespace {

std::pair<int, int> fit_window(const RealVector& sigma, double floor, double ceiling) {
    if (sigma.size() == 0 || sigma[0] <= 0) throw FitRangeEmpty("no positive singular values");
    int lo = -1, hi = -1;
    for (int i = 0; i < sigma.size(); ++i) {
        const double rel = sigma[i] / sigma[0];
        if (rel <= ceiling && rel >= floor && sigma[i] > 0) {
            if (lo < 0) lo = i;
            hi = i;
        }
    }
    if (lo < 0 || hi - lo + 1 < 4)
        throw FitRangeEmpty("fewer than 4 singular values inside the fit window");
    return {lo, hi};
}

} // namespace

DecayFit fit_decay(const RealVector& sigma, DecayModel model, double floor, double ceiling) {
    auto [lo, hi] = fit_window(sigma, floor, ceiling);
    const int m = hi - lo + 1;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = lo; i <= hi; ++i) {
        const double n1 = i + 1; // 1-based index
        const double x = model == DecayModel::Exponential ? n1 : std::sqrt(n1);
        const double y = std::log(sigma[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = m * sxx - sx * sx;
    const double slope = (m * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / m;

    double ss_res = 0, ss_tot = 0;
    const double ymean = sy / m;
    for (int i = lo; i <= hi; ++i) {
        const double n1 = i + 1;
        const double x = model == DecayModel::Exponential ? n1 : std::sqrt(n1);
        const double y = std::log(sigma[i]);
        ss_res += (y - (intercept + slope * x)) * (y - (intercept + slope * x));
        ss_tot += (y - ymean) * (y - ymean);
    }
    DecayFit fit;
    fit.model = model;
    fit.beta = -slope;
    fit.C = std::exp(intercept);
    fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    fit.fit_lo = lo + 1;
    fit.fit_hi = hi + 1;
    if (fit.beta <= 0) throw Error("fitted decay rate is not positive");
    return fit;
}

double log_decay_curvature(const RealVector& sigma, double floor, double ceiling) {
    auto [lo, hi] = fit_window(sigma, floor, ceiling);
    const int m = hi - lo + 1;
    Eigen::MatrixXd X(m, 3);
    Eigen::VectorXd y(m);
    for (int i = lo; i <= hi; ++i) {
        const double n1 = i + 1;
        X.row(i - lo) << n1 * n1, n1, 1.0;
        y[i - lo] = std::log(sigma[i]);
    }
    Eigen::Vector3d coef = (X.transpose() * X).ldlt().solve(X.transpose() * y);
    return coef[0];
}

int basis_size_for_tolerance(const RealVector& sigma, double tol) {
    if (sigma.size() == 0 || sigma[0] <= 0) return -1;
    for (int n = 1; n <= sigma.size(); ++n)
        if (sigma[n - 1] <= tol * sigma[0]) return n;
    return -1;
}

BoundReport nwidth_lower_bound_check(const SnapshotSet& set, const Matrix& Vn) {
    const Eigen::Index n = Vn.cols();
    Matrix R = set.S - Vn * (Vn.adjoint() * set.S);
    auto svd = thin_svd(set.S);
    const double sigma_next = n < svd.sigma.size() ? svd.sigma[n] : 0.0;
    BoundReport rep;
    rep.worst_error = R.colwise().norm().maxCoeff();
    rep.sigma_next = sigma_next;
    rep.ratio = sigma_next > 0 ? rep.worst_error / sigma_next
                               : (rep.worst_error > 0 ? std::numeric_limits<double>::infinity() : 1.0);
    return rep;
}

} // namespace bloch
