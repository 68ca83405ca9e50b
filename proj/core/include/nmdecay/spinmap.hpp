// spinmap.hpp: XY spin chains, their Jordan-Wigner fermion image, and a brute-force cross-check
//
//   H = sum_n Omega_n S^z_n - sum_n (J_{n+1,n}/2) (S^+_{n+1} S^-_n + h.c.)
//
// maps onto free fermions with site energies Omega_n and hoppings
// V_{n+1,n} = J_{n+1,n}/2 (entered with the usual minus sign). Many-body
// states are stored over bit strings: bit n set means spin n is up.
//
// The double-quantum (flip-flip) Hamiltonian is unitarily equivalent to the
// XY one on a 1-D chain; it is not simulated here.

#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "nmdecay/dynamics.hpp"
#include "nmdecay/lattice.hpp"

namespace nmdecay {

inline constexpr int kMaxSpins = 14;

struct SpinChainSpec {
    int m = 2;
    std::vector<double> omega;  // m fields (empty = all zero)
    std::vector<double> j;      // m-1 couplings
    int i_site = 0;
    int f_site = 1;

    /// Throws ConfigError unless 2 <= m <= kMaxSpins, sizes match and sites are in range.
    void validate() const;
    static SpinChainSpec uniform(int m, double j, double omega = 0.0, int i_site = 0, int f_site = 1);
};

/// Single-particle matrix: diagonal Omega_n, off-diagonal -J_{n+1,n}/2.
HamiltonianMatrix jwt_hamiltonian(const SpinChainSpec& spec);

/// Bit strings of m spins with exactly n_up spins up, ascending.
std::vector<std::uint32_t> sector_basis(int m, int n_up);

/// Spin Hamiltonian restricted to `basis` (which must be closed under H).
Eigen::MatrixXd sector_hamiltonian(const SpinChainSpec& spec, const std::vector<std::uint32_t>& basis);

/// Full 2^m spin Hamiltonian (m <= 12).
Eigen::MatrixXd full_hamiltonian(const SpinChainSpec& spec);

/// sum_n <S^z_n> for a state over the full 2^m basis.
double total_sz(const Eigen::VectorXcd& state, int m);

struct ManyBodyState {
    std::vector<std::uint32_t> basis;
    Eigen::VectorXcd amplitudes;
    int sector = 0;  // number of up spins
};

/// Spin i_site flipped up on the all-down vacuum.
ManyBodyState single_flip(const SpinChainSpec& spec);

/// Probability that spin f_site is up, from exact evolution of the one-flip
/// sector built out of spin operators.
TimeSeries spin_correlation(const SpinChainSpec& spec, const std::vector<double>& times);

/// |<f| exp(-i h t) |i>|^2 from the fermion image.
TimeSeries single_particle_transfer(const SpinChainSpec& spec, const std::vector<double>& times);

}  // namespace nmdecay
