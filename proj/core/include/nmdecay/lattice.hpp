// lattice.hpp: Finite tight-binding Hamiltonians for a small system coupled to chain baths
//
// Energies are in units of the system hopping V_AB (hbar = 1). Every hopping
// enters the matrix with an explicit minus sign:
//
//   H_S   = E_A |A><A| + E_B |B><B| - V_AB (|A><B| + |B><A|)
//   H_E   = sum_n E_env |n><n| - V (|n+1><n| + |n><n+1|)
//   H_S-E = -V0 (|A><i| + |i><A| + |B><j| + |j><B|)
//
// Semi-infinite chains are truncated to n_env sites; infinite chains to
// 2*n_env + 1 sites centred on the attachment point (2*n_env for case VI,
// where the two attachment sites -1 and +1 are themselves neighbours).

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace nmdecay {

/// Bath topologies: I-VI from the single/two-site family, plus the five-site ladder.
enum class CaseId { I, II, III, IV, V, VI, FiveSite };

std::string_view to_string(CaseId id);
CaseId parse_case(std::string_view text);

/// Whether a case has a two-site (A, B) system with its own Rabi time scale.
bool has_dimer(CaseId id);

/// Ratio n_env / (2 V t_max) required so the ballistic front never returns.
inline constexpr double kReflectionMargin = 1.5;

struct SystemSpec {
    CaseId case_id = CaseId::I;
    double v_ab = 1.0;   // system hopping; negated by the backward evolution
    double v0 = 0.1;     // system-environment hopping
    double v = 1.0;      // environment hopping (band [-2V, 2V])
    double e_a = 0.0;
    double e_b = 0.0;
    double e_env = 0.0;  // uniform environment site energy
    int n_env = 200;     // sites per semi-infinite direction
    double v_s = 1.0;    // FiveSite intra-system hopping
    int five_site_initial = 2;  // FiveSite: system site holding the initial excitation

    /// Throws ConfigError unless v0 > 0, v > 0, v0 <= 0.5 v and n_env >= 1.
    void validate() const;
};

/// Minimum n_env for which reflections stay outside [0, horizon].
int required_env_length(double v, double horizon, double margin = kReflectionMargin);

enum class SiteRole { A, B, System, Environment };

struct SiteLabel {
    SiteRole role = SiteRole::Environment;
    int bath = 0;   // environment index (cases V: 0 or 1)
    int index = 0;  // chain coordinate, or system-site index for FiveSite

    std::string name() const;
    friend bool operator==(const SiteLabel&, const SiteLabel&) = default;
};

struct HamiltonianMatrix {
    Eigen::MatrixXd entries;
    std::vector<SiteLabel> labels;
    int initial_site = 0;  // index of the excited state |A>
    int system_size = 0;   // indices [0, system_size) are system sites

    Eigen::Index dim() const { return entries.rows(); }
    /// Index of the first site carrying `label`, or -1.
    int find(const SiteLabel& label) const;
};

/// Builds H = H_S + H_E + H_S-E for the declared topology. When `horizon`
/// is given, throws ConfigError if n_env is too short to keep reflections out.
HamiltonianMatrix build_hamiltonian(const SystemSpec& spec,
                                    std::optional<double> horizon = std::nullopt);

/// Same as build_hamiltonian with H_S -> -H_S (system energies and hoppings
/// negated); bath and coupling blocks untouched.
HamiltonianMatrix backward_hamiltonian(const SystemSpec& spec,
                                       std::optional<double> horizon = std::nullopt);

/// Permutation implementing the case-VI exchange A <-> B, n <-> -n.
Eigen::MatrixXd site_exchange_permutation(const HamiltonianMatrix& h);

}  // namespace nmdecay
