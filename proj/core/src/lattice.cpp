#include "nmdecay/lattice.hpp"

#include <cmath>
#include <sstream>

#include "nmdecay/error.hpp"

namespace nmdecay {

std::string_view to_string(CaseId id) {
    switch (id) {
        case CaseId::I: return "I";
        case CaseId::II: return "II";
        case CaseId::III: return "III";
        case CaseId::IV: return "IV";
        case CaseId::V: return "V";
        case CaseId::VI: return "VI";
        case CaseId::FiveSite: return "FiveSite";
    }
    return "?";
}

CaseId parse_case(std::string_view text) {
    for (CaseId id : {CaseId::I, CaseId::II, CaseId::III, CaseId::IV, CaseId::V, CaseId::VI,
                      CaseId::FiveSite}) {
        if (text == to_string(id)) return id;
    }
    if (text == "five" || text == "5" || text == "fivesite") return CaseId::FiveSite;
    throw ConfigError("unknown case '" + std::string(text) +
                      "' (expected I, II, III, IV, V, VI or FiveSite)");
}

bool has_dimer(CaseId id) {
    return id != CaseId::I && id != CaseId::II && id != CaseId::FiveSite;
}

void SystemSpec::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (!(v > 0.0)) fail("environment hopping v must be positive");
    if (!(v0 > 0.0)) fail("coupling v0 must be positive");
    if (v0 > 0.5 * v) {
        std::ostringstream os;
        os << "coupling v0=" << v0 << " violates the weak-coupling guard v0 <= 0.5*v (v=" << v
           << ")";
        fail(os.str());
    }
    if (n_env < 1) fail("n_env must be at least 1");
    if (case_id == CaseId::FiveSite) {
        if (!(v_s > 0.0)) fail("five-site hopping v_s must be positive");
        if (five_site_initial < 0 || five_site_initial > 4) fail("five_site_initial must be in [0, 4]");
    }
    for (double x : {v_ab, v0, v, e_a, e_b, e_env, v_s}) {
        if (!std::isfinite(x)) fail("non-finite parameter in system spec");
    }
}

int required_env_length(double v, double horizon, double margin) {
    if (horizon <= 0.0) return 1;
    return static_cast<int>(std::ceil(2.0 * v * horizon * margin));
}

std::string SiteLabel::name() const {
    switch (role) {
        case SiteRole::A: return "A";
        case SiteRole::B: return "B";
        case SiteRole::System: return "sys" + std::to_string(index);
        case SiteRole::Environment:
            return "env" + std::to_string(bath) + "(" + std::to_string(index) + ")";
    }
    return "?";
}

int HamiltonianMatrix::find(const SiteLabel& label) const {
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == label) return static_cast<int>(i);
    }
    return -1;
}

namespace {

class Builder {
public:
    int add(SiteLabel label, double energy) {
        labels_.push_back(label);
        energies_.push_back(energy);
        return static_cast<int>(labels_.size()) - 1;
    }

    void hop(int i, int j, double amplitude) { bonds_.push_back({i, j, -amplitude}); }

    /// Appends a uniform chain with coordinates [first, last] (skipping 0 if requested)
    /// and returns the indices in coordinate order.
    std::vector<int> chain(int bath, int first, int last, double energy, double v,
                           bool skip_zero = false) {
        std::vector<int> idx;
        for (int n = first; n <= last; ++n) {
            if (skip_zero && n == 0) continue;
            idx.push_back(add({SiteRole::Environment, bath, n}, energy));
        }
        for (std::size_t k = 1; k < idx.size(); ++k) hop(idx[k - 1], idx[k], v);
        return idx;
    }

    HamiltonianMatrix finish(int initial, int system_size) const {
        const auto n = static_cast<Eigen::Index>(labels_.size());
        HamiltonianMatrix h;
        h.entries = Eigen::MatrixXd::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i) h.entries(i, i) = energies_[i];
        for (const auto& b : bonds_) {
            h.entries(b.i, b.j) += b.value;
            h.entries(b.j, b.i) += b.value;
        }
        h.labels = labels_;
        h.initial_site = initial;
        h.system_size = system_size;
        return h;
    }

private:
    struct Bond {
        int i, j;
        double value;
    };
    std::vector<SiteLabel> labels_;
    std::vector<double> energies_;
    std::vector<Bond> bonds_;
};

// Position of coordinate `n` inside a chain vector that starts at `first`.
int at(const std::vector<int>& chain, int first, int n) { return chain[n - first]; }

HamiltonianMatrix assemble(const SystemSpec& s, double sign) {
    const int n = s.n_env;
    Builder b;
    switch (s.case_id) {
        case CaseId::I: {
            int a = b.add({SiteRole::A}, sign * s.e_a);
            auto env = b.chain(0, 1, n, s.e_env, s.v);
            b.hop(a, env.front(), s.v0);
            return b.finish(a, 1);
        }
        case CaseId::II: {
            int a = b.add({SiteRole::A}, sign * s.e_a);
            auto env = b.chain(0, -n, n, s.e_env, s.v);
            b.hop(a, at(env, -n, 0), s.v0);
            return b.finish(a, 1);
        }
        case CaseId::III: {
            int a = b.add({SiteRole::A}, sign * s.e_a);
            int bb = b.add({SiteRole::B}, sign * s.e_b);
            b.hop(a, bb, sign * s.v_ab);
            auto env = b.chain(0, 1, n, s.e_env, s.v);
            b.hop(bb, env.front(), s.v0);
            return b.finish(a, 2);
        }
        case CaseId::IV: {
            int a = b.add({SiteRole::A}, sign * s.e_a);
            int bb = b.add({SiteRole::B}, sign * s.e_b);
            b.hop(a, bb, sign * s.v_ab);
            auto env = b.chain(0, -n, n, s.e_env, s.v);
            b.hop(bb, at(env, -n, 0), s.v0);
            return b.finish(a, 2);
        }
        case CaseId::V: {
            int a = b.add({SiteRole::A}, sign * s.e_a);
            int bb = b.add({SiteRole::B}, sign * s.e_b);
            b.hop(a, bb, sign * s.v_ab);
            auto env0 = b.chain(0, -n, n, s.e_env, s.v);
            auto env1 = b.chain(1, -n, n, s.e_env, s.v);
            b.hop(a, at(env0, -n, 0), s.v0);
            b.hop(bb, at(env1, -n, 0), s.v0);
            return b.finish(a, 2);
        }
        case CaseId::VI: {
            int a = b.add({SiteRole::A}, sign * s.e_a);
            int bb = b.add({SiteRole::B}, sign * s.e_b);
            b.hop(a, bb, sign * s.v_ab);
            auto env = b.chain(0, -n, n, s.e_env, s.v, /*skip_zero=*/true);
            b.hop(a, env[n - 1], s.v0);  // site -1
            b.hop(bb, env[n], s.v0);     // site +1
            return b.finish(a, 2);
        }
        case CaseId::FiveSite: {
            std::vector<int> sys;
            for (int k = 0; k < 5; ++k) sys.push_back(b.add({SiteRole::System, 0, k}, 0.0));
            for (int k = 1; k < 5; ++k) b.hop(sys[k - 1], sys[k], sign * s.v_s);
            auto env = b.chain(0, -n, n, s.e_env, s.v);
            for (int k = 0; k < 5; ++k) b.hop(sys[k], at(env, -n, k - 2), s.v0);
            return b.finish(sys[s.five_site_initial], 5);
        }
    }
    throw ConfigError("unknown case id");
}

void check_horizon(const SystemSpec& spec, std::optional<double> horizon) {
    if (!horizon) return;
    int needed = required_env_length(spec.v, *horizon);
    if (spec.case_id == CaseId::FiveSite) needed += 2;  // couplings span coordinates -2..2
    if (spec.n_env < needed) {
        std::ostringstream os;
        os << "n_env=" << spec.n_env << " too small for horizon t_max=" << *horizon
           << " at v=" << spec.v << "; need n_env >= " << needed
           << " (ballistic front speed 2v, margin " << kReflectionMargin << ")";
        throw ConfigError(os.str());
    }
}

}  // namespace

HamiltonianMatrix build_hamiltonian(const SystemSpec& spec, std::optional<double> horizon) {
    spec.validate();
    if (spec.case_id == CaseId::FiveSite && spec.n_env < 2) {
        throw ConfigError("five-site case needs n_env >= 2");
    }
    check_horizon(spec, horizon);
    return assemble(spec, +1.0);
}

HamiltonianMatrix backward_hamiltonian(const SystemSpec& spec, std::optional<double> horizon) {
    spec.validate();
    if (spec.case_id == CaseId::FiveSite && spec.n_env < 2) {
        throw ConfigError("five-site case needs n_env >= 2");
    }
    check_horizon(spec, horizon);
    return assemble(spec, -1.0);
}

Eigen::MatrixXd site_exchange_permutation(const HamiltonianMatrix& h) {
    const auto n = h.dim();
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        SiteLabel image = h.labels[i];
        switch (image.role) {
            case SiteRole::A: image.role = SiteRole::B; break;
            case SiteRole::B: image.role = SiteRole::A; break;
            case SiteRole::System: image.index = 4 - image.index; break;
            case SiteRole::Environment: image.index = -image.index; break;
        }
        int j = h.find(image);
        if (j < 0) throw ConfigError("Hamiltonian has no exchange partner for " + h.labels[i].name());
        p(j, i) = 1.0;
    }
    return p;
}

}  // namespace nmdecay
