#ifndef BLOCH_NWIDTH_HPP
#define BLOCH_NWIDTH_HPP

#include <functional>
#include <string>
#include <vector>

#include "bloch/affine.hpp"
#include "bloch/solver1d.hpp"

namespace bloch {

struct SnapshotMeta {
    Wave k;
    int band; // 1-based
};

struct SnapshotSet {
    Matrix S;
    std::vector<SnapshotMeta> meta; // one entry per column
    std::string weighting;          // "sqrt_dx_trapezoid" | "none"
    std::string domain;             // "interval" | "path" | "ibz_triangle"
};

// Returns gauge-fixed eigenvectors of the first n_bands bands at k, normalized
// in the norm the snapshots live in.
using BandSolver = std::function<std::vector<Vector>(const Wave& k, int n_bands)>;

// Periodic parts on the sublayer grid, weighted by sqrt of the trapezoid
// weights so that Euclidean column norms are discrete L2 norms.
BandSolver make_tmm_solver(const MaterialProfile1D& profile, const DispersionOptions& opts = {});
// Euclidean-normalized eigenvectors of the affine pencil.
BandSolver make_family_solver(const AffineFamily& fam);

struct SamplingDomain {
    enum class Type { Interval, Path, IbzTriangle };
    Type type;
    double k_lo = 0.0, k_hi = M_PI; // open interval bounds (1D)
    std::vector<Wave> vertices;     // path or triangle corners
    int subdivision = 10;           // triangle barycentric depth

    static SamplingDomain interval(double k_hi, double k_lo = 0.0);
    static SamplingDomain path(std::vector<Wave> vertices);
    static SamplingDomain ibz_triangle(const Lattice& lattice, int subdivision);

    // sample count for the triangle is fixed by the subdivision depth
    std::vector<Wave> samples(int M) const;
    const char* name() const;
};

// Deterministic ordering: bands ascending (outer), samples in domain order
// (inner). Interval samples are uniform in the open interval; path samples
// uniform in arclength including endpoints.
SnapshotSet collect_snapshots(const BandSolver& solver, const SamplingDomain& domain,
                              const std::vector<int>& bands, int M, int threads = 1);

// C^N columns viewed in R^{2N} (Re/Im interleaved per component), for rank
// counts over the real field.
SnapshotSet realify(const SnapshotSet& set);

struct SvdDecay {
    RealVector sigma;
    // worst_error[n] = max_l || u_l - P_{V_n} u_l || with the first n left
    // singular vectors, n = 0..rank
    RealVector worst_error;
    Matrix U;
};

SvdDecay svd_decay(const SnapshotSet& set);

enum class DecayModel { Exponential, Stretched };

struct DecayFit {
    DecayModel model;
    double beta;
    double C;
    double r_squared;
    int fit_lo, fit_hi; // 1-based singular value indices, inclusive
};

// Least-squares line on (x_n, log sigma_n) with x = n (exp) or sqrt(n)
// (stretched), restricted to sigma_n/sigma_1 in [floor, ceiling].
DecayFit fit_decay(const RealVector& sigma, DecayModel model, double floor = 1e-12,
                   double ceiling = 1e-2);

// Quadratic coefficient of the parabola fitted to (n, log sigma_n) on the same
// window. Positive for stretched-exponential decay: the semilog curve drops
// fast early and flattens, so a straight-line fit leaves U-shaped residuals.
double log_decay_curvature(const RealVector& sigma, double floor = 1e-12, double ceiling = 1e-2);

// Smallest 1-based n with sigma_n <= tol * sigma_1, or -1 when the tail never
// reaches the target.
int basis_size_for_tolerance(const RealVector& sigma, double tol);

struct BoundReport {
    double worst_error;
    double sigma_next;
    double ratio; // worst_error / sigma_next
};

// Measures the supplied orthonormal basis against the sigma_{n+1} benchmark.
BoundReport nwidth_lower_bound_check(const SnapshotSet& set, const Matrix& Vn);

} // namespace bloch

#endif
