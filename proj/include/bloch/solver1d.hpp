#ifndef BLOCH_SOLVER1D_HPP
#define BLOCH_SOLVER1D_HPP

#include <vector>

#include "bloch/affine.hpp"
#include "bloch/numkernel.hpp"

namespace bloch {

// Periodic rod with smoothly varying stiffness E(x) and density rho(x),
// discretized into n_layers homogeneous sublayers with midpoint properties.
class MaterialProfile1D {
public:
    enum class Form { TwoHarmonic, SingleHarmonic };

    // E = 1 + a1 cos(2 pi x/a) + a2 cos(4 pi x/a), rho with the sign of a2 flipped
    static MaterialProfile1D two_harmonic(double alpha1, double alpha2, double a, int n_layers);
    // E = rho = 1 + alpha cos(2 pi x/a)
    static MaterialProfile1D single_harmonic(double alpha, double a, int n_layers);
    static MaterialProfile1D homogeneous(double a, int n_layers);

    double stiffness(double x) const;
    double density(double x) const;
    double wave_speed(double x) const;

    double period() const { return a_; }
    int layer_count() const { return n_layers_; }
    double layer_width() const { return a_ / n_layers_; }
    double midpoint(int layer) const { return (layer + 0.5) * layer_width(); }

    double min_wave_speed() const; // sqrt(min E / max rho) over midpoints
    double max_wave_speed() const; // sqrt(max E / min rho) over midpoints

    Form form() const { return form_; }
    double alpha1() const { return alpha1_; }
    double alpha2() const { return alpha2_; }

private:
    MaterialProfile1D(Form f, double a1, double a2, double a, int n_layers);

    Form form_;
    double alpha1_, alpha2_;
    double a_;
    int n_layers_;
};

struct TransferMatrix {
    Eigen::Matrix2cd T;
    double omega;
};

struct BlochMode1D {
    int band;               // 1-based
    double k;
    double omega;
    Eigen::VectorXcd u_periodic; // n_layers+1 node samples, unit discrete L2 norm
};

struct DispersionOptions {
    double omega_max = 0.0;     // 0 -> (n_bands+2) pi c_max / a
    double scan_step = 0.0;     // 0 -> (c_min pi / a) / 50
    double root_rtol = 1e-12;
    double tangency_tol = 1e-9; // |g| threshold for band-edge double roots
};

// State (u, E u') propagated through the sublayers; det T = 1 for lossless media.
TransferMatrix cell_transfer_matrix(const MaterialProfile1D& profile, double omega);

// The n_bands smallest roots of g(w) = tr T(w)/2 - cos(k a), ascending, with
// band-edge tangencies counted twice. Throws RootScanExhausted when fewer
// roots exist below omega_max.
std::vector<double> dispersion_solve(const MaterialProfile1D& profile, double k, int n_bands,
                                     const DispersionOptions& opts = {});

// Periodic part of the Bloch mode at a previously computed root. degenerate_rank
// selects between the two standing-wave states when T(omega) is scalar.
BlochMode1D bloch_mode(const MaterialProfile1D& profile, double k, int band, double omega,
                       int degenerate_rank = 0);

std::vector<BlochMode1D> bloch_modes(const MaterialProfile1D& profile, double k, int n_bands,
                                     const DispersionOptions& opts = {});

// Trapezoid quadrature weights on the uniform node grid.
RealVector trapezoid_weights(int n_points, double dx);

// P1 finite element discretization of the same rod with the Bloch boundary
// condition u(a) = e^{ika} u(0) imposed by congruence; element coefficients
// are sampled at midpoints like the transfer matrix sublayers.
AffineFamily fem_affine_family(const MaterialProfile1D& profile, int n_elements);

} // namespace bloch

#endif
