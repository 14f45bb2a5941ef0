#include "bloch/solver1d.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace bloch {

MaterialProfile1D::MaterialProfile1D(Form f, double a1, double a2, double a, int n_layers)
    : form_(f), alpha1_(a1), alpha2_(a2), a_(a), n_layers_(n_layers) {
    if (a <= 0) throw InvalidProfile("period must be positive");
    if (n_layers < 2) throw InvalidProfile("need at least 2 sublayers");
    for (int l = 0; l < n_layers_; ++l) {
        const double x = midpoint(l);
        if (stiffness(x) <= 0 || density(x) <= 0)
            throw InvalidProfile("profile is not positive at sublayer midpoints");
    }
}

MaterialProfile1D MaterialProfile1D::two_harmonic(double alpha1, double alpha2, double a, int n_layers) {
    return MaterialProfile1D(Form::TwoHarmonic, alpha1, alpha2, a, n_layers);
}

MaterialProfile1D MaterialProfile1D::single_harmonic(double alpha, double a, int n_layers) {
    return MaterialProfile1D(Form::SingleHarmonic, alpha, 0.0, a, n_layers);
}

MaterialProfile1D MaterialProfile1D::homogeneous(double a, int n_layers) {
    return MaterialProfile1D(Form::SingleHarmonic, 0.0, 0.0, a, n_layers);
}

double MaterialProfile1D::stiffness(double x) const {
    const double c1 = std::cos(2.0 * M_PI * x / a_);
    if (form_ == Form::SingleHarmonic) return 1.0 + alpha1_ * c1;
    const double c2 = std::cos(4.0 * M_PI * x / a_);
    return 1.0 + alpha1_ * c1 + alpha2_ * c2;
}

double MaterialProfile1D::density(double x) const {
    const double c1 = std::cos(2.0 * M_PI * x / a_);
    if (form_ == Form::SingleHarmonic) return 1.0 + alpha1_ * c1;
    const double c2 = std::cos(4.0 * M_PI * x / a_);
    return 1.0 + alpha1_ * c1 - alpha2_ * c2;
}

double MaterialProfile1D::wave_speed(double x) const {
    return std::sqrt(stiffness(x) / density(x));
}

double MaterialProfile1D::min_wave_speed() const {
    double emin = stiffness(midpoint(0)), rmax = density(midpoint(0));
    for (int l = 1; l < n_layers_; ++l) {
        emin = std::min(emin, stiffness(midpoint(l)));
        rmax = std::max(rmax, density(midpoint(l)));
    }
    return std::sqrt(emin / rmax);
}

double MaterialProfile1D::max_wave_speed() const {
    double emax = stiffness(midpoint(0)), rmin = density(midpoint(0));
    for (int l = 1; l < n_layers_; ++l) {
        emax = std::max(emax, stiffness(midpoint(l)));
        rmin = std::min(rmin, density(midpoint(l)));
    }
    return std::sqrt(emax / rmin);
}

namespace {

// sin(q h)/q with the q -> 0 limit h
inline double sinc_over_q(double q, double h) {
    const double qh = q * h;
    if (std::abs(qh) < 1e-6) return h * (1.0 - qh * qh / 6.0);
    return std::sin(qh) / q;
}

Eigen::Matrix2d layer_matrix(double E, double rho, double h, double omega) {
    const double q = omega * std::sqrt(rho / E);
    const double c = std::cos(q * h);
    const double s_over_q = sinc_over_q(q, h);
    Eigen::Matrix2d T;
    T << c, s_over_q / E,
        -E * q * q * s_over_q, c;
    return T;
}

} // namespace

TransferMatrix cell_transfer_matrix(const MaterialProfile1D& profile, double omega) {
    const int n = profile.layer_count();
    const double h = profile.layer_width();
    Eigen::Matrix2d T = Eigen::Matrix2d::Identity();
    for (int l = 0; l < n; ++l) {
        const double x = profile.midpoint(l);
        T = layer_matrix(profile.stiffness(x), profile.density(x), h, omega) * T;
    }
    return TransferMatrix{T.cast<Complex>(), omega};
}

namespace {

struct RootAccumulator {
    std::vector<double> roots; // ascending with multiplicity
};

double bisect(const std::function<double(double)>& g, double lo, double hi, double glo, double rtol) {
    for (int it = 0; it < 200 && (hi - lo) > rtol * std::max(hi, 1e-12); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if (gm == 0.0) return mid;
        if ((gm > 0) == (glo > 0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Locates the minimum of |g| on [lo, hi] (ternary search plus a Newton polish
// on g'); used for tangent double roots at band edges.
std::pair<double, double> refine_extremum(const std::function<double(double)>& g, double lo, double hi) {
    double a = lo, b = hi;
    for (int it = 0; it < 120 && (b - a) > 1e-14 * std::max(b, 1.0); ++it) {
        const double m1 = a + (b - a) / 3.0;
        const double m2 = b - (b - a) / 3.0;
        if (std::abs(g(m1)) < std::abs(g(m2)))
            b = m2;
        else
            a = m1;
    }
    double w = 0.5 * (a + b);
    for (int it = 0; it < 6; ++it) {
        const double h = 1e-6 * std::max(std::abs(w), 1.0);
        const double gp = (g(w + h) - g(w - h)) / (2 * h);
        const double gpp = (g(w + h) - 2 * g(w) + g(w - h)) / (h * h);
        if (std::abs(gpp) < 1e-300) break;
        const double step = gp / gpp;
        if (!std::isfinite(step) || std::abs(step) > (hi - lo)) break;
        w -= step;
    }
    return {w, g(w)};
}

} // namespace

std::vector<double> dispersion_solve(const MaterialProfile1D& profile, double k, int n_bands,
                                     const DispersionOptions& opts) {
    if (n_bands < 1) throw Error("n_bands must be at least 1");
    const double a = profile.period();
    const double cos_ka = std::cos(k * a);
    auto g = [&](double w) { return 0.5 * cell_transfer_matrix(profile, w).T.trace().real() - cos_ka; };

    const double step = opts.scan_step > 0 ? opts.scan_step
                                           : profile.min_wave_speed() * M_PI / a / 50.0;
    const double omega_max = opts.omega_max > 0
                                 ? opts.omega_max
                                 : (n_bands + 2) * M_PI * profile.max_wave_speed() / a;

    RootAccumulator acc;
    double w_prev = 0.0;
    double g_prev = g(w_prev);
    if (std::abs(g_prev) <= opts.tangency_tol) {
        // k at the zone center: the rigid mode sits exactly at omega = 0
        acc.roots.push_back(0.0);
        w_prev = step * 1e-6;
        g_prev = g(w_prev);
    }

    double w_pprev = -1.0, g_pprev = 0.0;
    while (w_prev < omega_max && static_cast<int>(acc.roots.size()) < n_bands) {
        const double w_next = w_prev + step;
        const double g_next = g(w_next);
        if ((g_next > 0) != (g_prev > 0)) {
            acc.roots.push_back(bisect(g, w_prev, w_next, g_prev, opts.root_rtol));
        } else if (w_pprev >= 0 && (g_prev > 0) == (g_pprev > 0) &&
                   std::abs(g_prev) < std::abs(g_pprev) && std::abs(g_prev) < std::abs(g_next)) {
            // same-sign local minimum of |g|: either a tangency or a pair of
            // nearby roots the grid stepped over
            auto [wm, gm] = refine_extremum(g, w_pprev, w_next);
            if ((gm > 0) != (g_pprev > 0)) {
                acc.roots.push_back(bisect(g, w_pprev, wm, g_pprev, opts.root_rtol));
                acc.roots.push_back(bisect(g, wm, w_next, gm, opts.root_rtol));
            } else if (std::abs(gm) <= opts.tangency_tol) {
                acc.roots.push_back(wm);
                acc.roots.push_back(wm);
            }
        }
        w_pprev = w_prev;
        g_pprev = g_prev;
        w_prev = w_next;
        g_prev = g_next;
    }

    if (static_cast<int>(acc.roots.size()) < n_bands)
        throw RootScanExhausted("found " + std::to_string(acc.roots.size()) + " of " +
                                std::to_string(n_bands) + " bands below omega_max = " +
                                std::to_string(omega_max));
    acc.roots.resize(n_bands);
    return acc.roots;
}

BlochMode1D bloch_mode(const MaterialProfile1D& profile, double k, int band, double omega,
                       int degenerate_rank) {
    const double a = profile.period();
    const int n = profile.layer_count();
    const double h = profile.layer_width();
    const Complex lambda = std::polar(1.0, k * a);

    const Eigen::Matrix2cd T = cell_transfer_matrix(profile, omega).T;
    const Complex tr = T.trace();
    const Complex disc = std::sqrt(tr * tr / 4.0 - 1.0);
    const Complex l1 = tr / 2.0 + disc;
    const Complex l2 = tr / 2.0 - disc;
    if (std::min(std::abs(l1 - lambda), std::abs(l2 - lambda)) > 1e-8 * (1.0 + std::abs(lambda)))
        throw EigenvectorDefect("transfer matrix has no eigenvalue near e^{ika}; root inaccurate");

    // null space of T - lambda I
    Eigen::Vector2cd s0;
    const Eigen::Vector2cd cand1(T(0, 1), lambda - T(0, 0));
    const Eigen::Vector2cd cand2(lambda - T(1, 1), T(1, 0));
    const double tn = T.norm();
    if (cand1.norm() > 1e-6 * tn || cand2.norm() > 1e-6 * tn) {
        s0 = cand1.norm() >= cand2.norm() ? cand1 : cand2;
    } else {
        // T is scalar: degenerate band edge, pick the standing-wave states
        if (degenerate_rank % 2 == 0)
            s0 = Eigen::Vector2cd(1.0, 0.0);
        else
            s0 = Eigen::Vector2cd(0.0, profile.stiffness(profile.midpoint(0)) * std::max(omega, 1.0));
    }

    Eigen::VectorXcd u(n + 1);
    Eigen::Vector2cd s = s0;
    u[0] = s[0];
    for (int l = 0; l < n; ++l) {
        const double x = profile.midpoint(l);
        s = layer_matrix(profile.stiffness(x), profile.density(x), h, omega).cast<Complex>() * s;
        u[l + 1] = s[0];
    }

    // remove the plane-wave factor
    for (int i = 0; i <= n; ++i) u[i] *= std::polar(1.0, -k * i * h);

    RealVector w = trapezoid_weights(n + 1, h);
    double nrm2 = 0.0;
    for (int i = 0; i <= n; ++i) nrm2 += w[i] * std::norm(u[i]);
    u /= std::sqrt(nrm2);

    // gauge: u(0) real and positive, falling back to the largest-modulus node
    const double umax = u.cwiseAbs().maxCoeff();
    Eigen::Index pivot = 0;
    if (std::abs(u[0]) < 1e-8 * umax) u.cwiseAbs().maxCoeff(&pivot);
    u *= std::conj(u[pivot]) / std::abs(u[pivot]);

    return BlochMode1D{band, k, omega, std::move(u)};
}

std::vector<BlochMode1D> bloch_modes(const MaterialProfile1D& profile, double k, int n_bands,
                                     const DispersionOptions& opts) {
    auto roots = dispersion_solve(profile, k, n_bands, opts);
    std::vector<BlochMode1D> modes;
    modes.reserve(roots.size());
    for (int j = 0; j < n_bands; ++j) {
        int rank = 0;
        while (j - rank - 1 >= 0 && roots[j - rank - 1] == roots[j]) ++rank;
        modes.push_back(bloch_mode(profile, k, j + 1, roots[j], rank));
    }
    return modes;
}

RealVector trapezoid_weights(int n_points, double dx) {
    RealVector w = RealVector::Constant(n_points, dx);
    w[0] = 0.5 * dx;
    w[n_points - 1] = 0.5 * dx;
    return w;
}

AffineFamily fem_affine_family(const MaterialProfile1D& profile, int n_elements) {
    const double h = profile.period() / n_elements;
    const Eigen::Index ng = n_elements + 1;
    Matrix Kg = Matrix::Zero(ng, ng);
    Matrix Mg = Matrix::Zero(ng, ng);
    for (int e = 0; e < n_elements; ++e) {
        const double x = (e + 0.5) * h;
        const double E = profile.stiffness(x);
        const double rho = profile.density(x);
        const double kd = E / h;
        const double md = rho * h / 6.0;
        Kg(e, e) += kd;
        Kg(e + 1, e + 1) += kd;
        Kg(e, e + 1) -= kd;
        Kg(e + 1, e) -= kd;
        Mg(e, e) += 2 * md;
        Mg(e + 1, e + 1) += 2 * md;
        Mg(e, e + 1) += md;
        Mg(e + 1, e) += md;
    }
    std::vector<ConstraintRow> rows;
    rows.reserve(ng);
    for (Eigen::Index i = 0; i < ng - 1; ++i) rows.push_back({i, {{0, 0}}});
    rows.push_back({0, {{1, 0}}});
    return build_from_constrained(Kg, Mg, rows, Lattice::line(profile.period()));
}

} // namespace bloch
