// dynamics.hpp: Exact propagation by spectral decomposition; survival probability and Loschmidt echo
//
// Both traces come from full eigensystems of the finite Hamiltonians, so any
// time on the grid is exact up to round-off. The echo evolves forward with
// H = H_S + Sigma for T/2 and then with -H_S + Sigma for another T/2.

#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "nmdecay/lattice.hpp"

namespace nmdecay {

struct Spectrum {
    Eigen::VectorXd energies;  // ascending
    Eigen::MatrixXd vectors;   // orthonormal columns

    /// max_k |H v_k - e_k v_k| / |H|, for diagnostics.
    double residual(const Eigen::MatrixXd& h) const;
};

/// Full real-symmetric eigendecomposition (divide and conquer).
/// Throws NumericalError on non-convergence, with size and off-diagonal norm.
// Every result is checked (column residual and norm within kSpectrumTolerance);
// a LAPACK result that fails the check is redone with Eigen's solver.
inline constexpr double kSpectrumTolerance = 1e-10;
Spectrum diagonalize(const Eigen::MatrixXd& h);
inline Spectrum diagonalize(const HamiltonianMatrix& h) { return diagonalize(h.entries); }

enum class TraceKind { SP, LE };
std::string_view to_string(TraceKind k);

struct TimeSeries {
    std::vector<double> t;
    std::vector<double> p;
    TraceKind kind = TraceKind::SP;

    std::size_t size() const { return t.size(); }
};

/// Uniform grid 0, dt, ..., up to t_max inclusive (within dt/2).
std::vector<double> time_grid(double t_max, double dt);

/// P_AA(t) = |sum_k |<k|A>|^2 exp(-i e_k t)|^2.
TimeSeries survival_probability(const SystemSpec& spec, double t_max, double dt);
TimeSeries survival_probability(const HamiltonianMatrix& h, const Spectrum& s,
                                const std::vector<double>& times);

/// M(T) = |<A| exp(-i H_b T/2) exp(-i H_f T/2) |A>|^2 on the echo-time grid.
TimeSeries loschmidt_echo(const SystemSpec& spec, double t_max, double dt);
TimeSeries loschmidt_echo(const HamiltonianMatrix& forward, const Spectrum& fs,
                          const HamiltonianMatrix& backward, const Spectrum& bs,
                          const std::vector<double>& times);

/// Diagonal +/-1 matrix D with backward = D forward D, if one exists.
/// Lets the echo reuse the forward eigensystem (V_b = D V_f, same energies).
std::optional<Eigen::VectorXd> gauge_signs(const Eigen::MatrixXd& forward,
                                           const Eigen::MatrixXd& backward);

/// Survival probability from the Fourier transform of the analytic site-A
/// LDoS. Bound states outside the band are not included.
TimeSeries sp_from_ldos(const SystemSpec& spec, double t_max, double dt);

/// |<f|exp(-iHt)|A>|^2 for all sites f at one time.
Eigen::VectorXd transfer_probabilities(const HamiltonianMatrix& h, const Spectrum& s, double t);

struct Traces {
    TimeSeries sp;
    TimeSeries le;
};

/// SP and LE from a shared forward eigensystem (one extra diagonalization
/// only when the backward Hamiltonian is not a gauge copy).
Traces simulate(const SystemSpec& spec, double t_max, double dt);

}  // namespace nmdecay
