// spectral.hpp: Analytic Green's functions, self-energies, LDoS and decay-rate predictions
//
// All Green's functions use the retarded branch on the real axis inside the
// band and its analytic continuation into the lower half plane, which is the
// sheet that carries the resonance poles:
//
//   g_s(z) = (z - i sqrt(4V^2 - z^2)) / (2V^2)     surface site of a half chain
//   G_b(z) = 1 / (z - 2V^2 g_s(z))                 bulk site of a full chain
//
// Rates from this header are expressed in units of V0^2/(hbar V) unless the
// name says otherwise.

#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "nmdecay/lattice.hpp"

namespace nmdecay {

using cplx = std::complex<double>;

enum class BathKind { Surface, Bulk };
enum class Direction { Forward, Backward };
enum class PoleOrder { Exact, LeadingV0Squared };

std::string_view to_string(Direction d);
std::string_view to_string(PoleOrder o);

// ---------------------------------------------------------------------------
// Bath Green's functions and self-energies

cplx surface_green(cplx z, double v);
/// Half chain whose first site carries energy `first_energy`.
cplx surface_green(cplx z, double v, double first_energy);
cplx bulk_green(cplx z, double v);
/// Propagator between bulk sites n and m of an infinite chain.
cplx bulk_green(cplx z, double v, int distance);

/// Self-energy of a site hooked by v0 to a surface site (Surface) or embedded
/// between two half chains (Bulk = 2 x Surface). Throws ConfigError for |eps| > 2v.
cplx self_energy(double eps, double v0, double v, BathKind kind);

/// Self-energy of a site attached sideways to one bulk site: v0^2 G_b(eps).
/// Throws ConfigError outside the open band.
cplx lateral_self_energy(double eps, double v0, double v);

// ---------------------------------------------------------------------------
// Local densities of states

double ldos_surface(double eps, double v);
/// Throws NumericalError at the van Hove points |eps| = 2v.
double ldos_bulk(double eps, double v);

/// G_AA for the case described by `spec` (system block resolvent with the
/// exact bath self-energies folded in).
cplx site_green(const SystemSpec& spec, cplx z);
cplx inverse_site_green(const SystemSpec& spec, cplx z);

/// N_A(eps) = -Im G_AA(eps) / pi inside the band.
double ldos_site_a(double eps, const SystemSpec& spec);

enum class LdosKind { Surface, Bulk, SiteA };
std::string_view to_string(LdosKind k);

struct LdosCurve {
    LdosKind kind = LdosKind::Surface;
    std::vector<double> grid;
    std::vector<double> values;
};

/// Samples the LDoS on `points` cell midpoints of (-2v, 2v).
LdosCurve ldos_curve(LdosKind kind, const SystemSpec& spec, int points);

/// Integral of the LDoS over the band, by adaptive quadrature that resolves
/// the van Hove edges and the resonance peaks.
double ldos_integral(LdosKind kind, const SystemSpec& spec);

/// Composite Gauss-Kronrod rule on the band in the angle variable
/// eps = 2V sin(theta) + e_env, refined until the site-A LDoS is resolved
/// and each panel spans at most ~1 rad of phase at `t_max`.
class BandQuadrature {
public:
    BandQuadrature(const SystemSpec& spec, double t_max, double tolerance = 1e-12);

    const std::vector<double>& energies() const { return energies_; }
    /// N_A(eps_k) * weight_k (already includes the Jacobian).
    const std::vector<double>& weighted_density() const { return weighted_; }
    std::size_t panels() const { return panels_; }

    /// sum_k N_A(eps_k) w_k exp(-i eps_k t)
    cplx fourier(double t) const;
    double mass() const;

private:
    std::vector<double> energies_;
    std::vector<double> weighted_;
    std::size_t panels_ = 0;
};

// ---------------------------------------------------------------------------
// Poles and rates

struct PolePrediction {
    CaseId case_id = CaseId::I;
    Direction direction = Direction::Forward;
    double delta0 = 0.0;    // Re of the pole (upper branch, >= 0)
    double gamma0 = 0.0;    // -Im of the pole, >= 0
    double rate = 0.0;      // 2 gamma0 / hbar, absolute units
    PoleOrder order = PoleOrder::Exact;
    double residual = 0.0;  // |[G_AA(delta0 - i gamma0)]^-1|
    double v0 = 0.0;
    double v = 0.0;

    double normalized_rate() const { return rate * v / (v0 * v0); }
};

/// Exact resonance pole of G_AA for cases I-VI. Backward flips the sign of
/// the system Hamiltonian. Throws NumericalError if Newton refinement does not
/// reach 1e-12 v within 200 iterations.
PolePrediction gf_poles(const SystemSpec& spec, Direction direction);
PolePrediction gf_poles(CaseId id, double v_ab, double v0, double v, Direction direction);

/// Leading-order (V0^2) pole as a PolePrediction with order LeadingV0Squared.
PolePrediction leading_order_pole(CaseId id, double v_ab, double v0, double v, Direction direction);

/// Self-consistent FGR rate 2 Gamma0 at order V0^2, in units V0^2/(hbar V).
double scfgr_rate(CaseId id, double v_ab, double v, Direction direction);

/// Wide-band FGR rate 2 pi V0^2 N_1(0) weighted by the fraction of system
/// sites that touch a bath, in units V0^2/(hbar V).
double wba_rate(CaseId id, double v);

/// Echo rate as the mean of forward and backward SC-FGR rates.
double le_rate_prediction(CaseId id, double v_ab, double v);

// ---------------------------------------------------------------------------
// Public-bath symmetrization

struct PublicBathSplit {
    HamiltonianMatrix even;   // |AB_S>, |1_S>, |2_S>, ...
    HamiltonianMatrix odd;    // |AB_A>, |1_A>, |2_A>, ...
    Eigen::SparseMatrix<double> transform;  // columns: even basis then odd basis
    double off_block_residual = 0.0;        // max |(U^T H U)_{even,odd}|
    double initial_weight_even = 0.0;       // |<AB_S|A>|^2
    double initial_weight_odd = 0.0;
};

/// Rotates a mirror-symmetric case-VI Hamiltonian into two decoupled half
/// chains. Throws ConfigError if `h` is not such a matrix.
PublicBathSplit symmetrize_public(const HamiltonianMatrix& h);

}  // namespace nmdecay
