#include "nmdecay/spinmap.hpp"

#include <bit>
#include <cmath>
#include <complex>
#include <string>

#include "nmdecay/error.hpp"

namespace nmdecay {

namespace {

double field(const SpinChainSpec& s, int n) { return s.omega.empty() ? 0.0 : s.omega[n]; }

double diagonal_energy(const SpinChainSpec& s, std::uint32_t bits) {
    double e = 0.0;
    for (int n = 0; n < s.m; ++n) e += field(s, n) * (((bits >> n) & 1u) ? 0.5 : -0.5);
    return e;
}

// Calls visit(target_bits, amplitude) for every flip-flop term acting on `bits`.
template <class Visit>
void flip_flops(const SpinChainSpec& s, std::uint32_t bits, Visit&& visit) {
    for (int n = 0; n + 1 < s.m; ++n) {
        const std::uint32_t a = (bits >> n) & 1u, b = (bits >> (n + 1)) & 1u;
        if (a != b) visit(bits ^ (3u << n), -0.5 * s.j[n]);
    }
}

void evolve_rows(const Eigen::MatrixXd& h, int start, const std::vector<double>& times,
                 int target, TimeSeries& out) {
    const Spectrum sp = diagonalize(h);
    const Eigen::VectorXd c = sp.vectors.row(start).transpose();
    const Eigen::VectorXd row = sp.vectors.row(target).transpose();
    out.t = times;
    out.p.clear();
    for (double t : times) {
        std::complex<double> amp = 0.0;
        for (Eigen::Index k = 0; k < c.size(); ++k) {
            amp += row[k] * c[k] * std::exp(std::complex<double>(0.0, -sp.energies[k] * t));
        }
        out.p.push_back(std::norm(amp));
    }
}

}  // namespace

void SpinChainSpec::validate() const {
    if (m < 2 || m > kMaxSpins) {
        throw ConfigError("spin chain needs 2 <= m <= " + std::to_string(kMaxSpins) + ", got " +
                          std::to_string(m));
    }
    if (!omega.empty() && static_cast<int>(omega.size()) != m) {
        throw ConfigError("spin chain: omega must hold m values");
    }
    if (static_cast<int>(j.size()) != m - 1) throw ConfigError("spin chain: j must hold m-1 couplings");
    if (i_site < 0 || i_site >= m || f_site < 0 || f_site >= m) {
        throw ConfigError("spin chain: i_site and f_site must lie in [0, m)");
    }
    for (double x : j)
        if (!std::isfinite(x)) throw ConfigError("spin chain: non-finite coupling");
    for (double x : omega)
        if (!std::isfinite(x)) throw ConfigError("spin chain: non-finite field");
}

SpinChainSpec SpinChainSpec::uniform(int m, double j, double omega, int i_site, int f_site) {
    SpinChainSpec s;
    s.m = m;
    s.omega.assign(std::max(m, 0), omega);
    s.j.assign(std::max(m - 1, 0), j);
    s.i_site = i_site;
    s.f_site = f_site;
    return s;
}

HamiltonianMatrix jwt_hamiltonian(const SpinChainSpec& spec) {
    spec.validate();
    HamiltonianMatrix h;
    h.entries = Eigen::MatrixXd::Zero(spec.m, spec.m);
    for (int n = 0; n < spec.m; ++n) {
        h.entries(n, n) = field(spec, n);
        h.labels.push_back({SiteRole::System, 0, n});
    }
    for (int n = 0; n + 1 < spec.m; ++n) h.entries(n, n + 1) = h.entries(n + 1, n) = -0.5 * spec.j[n];
    h.initial_site = spec.i_site;
    h.system_size = spec.m;
    return h;
}

std::vector<std::uint32_t> sector_basis(int m, int n_up) {
    if (m < 1 || m > kMaxSpins) throw ConfigError("sector_basis: m out of range");
    std::vector<std::uint32_t> basis;
    for (std::uint32_t bits = 0; bits < (1u << m); ++bits) {
        if (std::popcount(bits) == n_up) basis.push_back(bits);
    }
    return basis;
}

Eigen::MatrixXd sector_hamiltonian(const SpinChainSpec& spec, const std::vector<std::uint32_t>& basis) {
    spec.validate();
    std::vector<int> index(1u << spec.m, -1);
    for (std::size_t k = 0; k < basis.size(); ++k) index[basis[k]] = static_cast<int>(k);
    const auto n = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        h(k, k) = diagonal_energy(spec, basis[k]);
        flip_flops(spec, basis[k], [&](std::uint32_t target, double amp) {
            const int l = index[target];
            if (l < 0) throw ConfigError("sector_hamiltonian: basis is not closed under H");
            h(l, k) += amp;
        });
    }
    return h;
}

Eigen::MatrixXd full_hamiltonian(const SpinChainSpec& spec) {
    spec.validate();
    if (spec.m > 12) throw ConfigError("full_hamiltonian: m > 12 would not fit a dense matrix");
    std::vector<std::uint32_t> all(1u << spec.m);
    for (std::uint32_t b = 0; b < all.size(); ++b) all[b] = b;
    return sector_hamiltonian(spec, all);
}

double total_sz(const Eigen::VectorXcd& state, int m) {
    double sz = 0.0;
    for (Eigen::Index b = 0; b < state.size(); ++b) {
        sz += std::norm(state[b]) * (std::popcount(static_cast<std::uint32_t>(b)) - 0.5 * m);
    }
    return sz;
}

ManyBodyState single_flip(const SpinChainSpec& spec) {
    spec.validate();
    ManyBodyState s;
    s.sector = 1;
    s.basis = sector_basis(spec.m, 1);
    s.amplitudes = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(s.basis.size()));
    for (std::size_t k = 0; k < s.basis.size(); ++k) {
        if (s.basis[k] == (1u << spec.i_site)) s.amplitudes[static_cast<Eigen::Index>(k)] = 1.0;
    }
    return s;
}

TimeSeries spin_correlation(const SpinChainSpec& spec, const std::vector<double>& times) {
    const ManyBodyState start = single_flip(spec);
    const Eigen::MatrixXd h = sector_hamiltonian(spec, start.basis);
    int from = -1, to = -1;
    for (std::size_t k = 0; k < start.basis.size(); ++k) {
        if (start.basis[k] == (1u << spec.i_site)) from = static_cast<int>(k);
        if (start.basis[k] == (1u << spec.f_site)) to = static_cast<int>(k);
    }
    TimeSeries out;
    out.kind = TraceKind::SP;
    evolve_rows(h, from, times, to, out);
    return out;
}

TimeSeries single_particle_transfer(const SpinChainSpec& spec, const std::vector<double>& times) {
    const HamiltonianMatrix h = jwt_hamiltonian(spec);
    TimeSeries out;
    out.kind = TraceKind::SP;
    evolve_rows(h.entries, spec.i_site, times, spec.f_site, out);
    return out;
}

}  // namespace nmdecay
