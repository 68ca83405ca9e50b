#include "nmdecay/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nmdecay/error.hpp"

namespace nmdecay {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr cplx kI{0.0, 1.0};

// Spec with the system Hamiltonian negated, i.e. the Hamiltonian of the
// backward (time-reversed system) stage.
SystemSpec reversed(SystemSpec s) {
    s.v_ab = -s.v_ab;
    s.e_a = -s.e_a;
    s.e_b = -s.e_b;
    s.v_s = -s.v_s;
    return s;
}

int system_size(CaseId id) {
    switch (id) {
        case CaseId::I:
        case CaseId::II: return 1;
        case CaseId::FiveSite: return 5;
        default: return 2;
    }
}

int initial_index(const SystemSpec& s) {
    return s.case_id == CaseId::FiveSite ? s.five_site_initial : 0;
}

Eigen::MatrixXd system_hamiltonian(const SystemSpec& s) {
    const int k = system_size(s.case_id);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(k, k);
    if (k == 1) {
        h(0, 0) = s.e_a;
    } else if (k == 2) {
        h << s.e_a, -s.v_ab, -s.v_ab, s.e_b;
    } else {
        for (int i = 1; i < k; ++i) h(i - 1, i) = h(i, i - 1) = -s.v_s;
    }
    return h;
}

// Bath self-energy matrix on the system block.
Eigen::MatrixXcd system_self_energy(const SystemSpec& s, cplx z) {
    const int k = system_size(s.case_id);
    const cplx w = z - s.e_env;
    const double c = s.v0 * s.v0;
    Eigen::MatrixXcd sigma = Eigen::MatrixXcd::Zero(k, k);
    switch (s.case_id) {
        case CaseId::I: sigma(0, 0) = c * surface_green(w, s.v); break;
        case CaseId::II: sigma(0, 0) = c * bulk_green(w, s.v); break;
        case CaseId::III: sigma(1, 1) = c * surface_green(w, s.v); break;
        case CaseId::IV: sigma(1, 1) = c * bulk_green(w, s.v); break;
        case CaseId::V:
            sigma(0, 0) = c * bulk_green(w, s.v);
            sigma(1, 1) = sigma(0, 0);
            break;
        case CaseId::VI: {
            const cplx g0 = bulk_green(w, s.v);
            const cplx g1 = bulk_green(w, s.v, 1);
            sigma << c * g0, c * g1, c * g1, c * g0;
            break;
        }
        case CaseId::FiveSite:
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j) sigma(i, j) = c * bulk_green(w, s.v, std::abs(i - j));
            break;
    }
    return sigma;
}

bool in_band(double eps, const SystemSpec& s) { return std::abs(eps - s.e_env) < 2.0 * s.v; }

}  // namespace

std::string_view to_string(Direction d) { return d == Direction::Forward ? "forward" : "backward"; }

std::string_view to_string(PoleOrder o) {
    return o == PoleOrder::Exact ? "exact" : "leading_V0sq";
}

std::string_view to_string(LdosKind k) {
    switch (k) {
        case LdosKind::Surface: return "surface";
        case LdosKind::Bulk: return "bulk";
        case LdosKind::SiteA: return "site_A";
    }
    return "?";
}

// ---------------------------------------------------------------------------

cplx surface_green(cplx z, double v) {
    return (z - kI * std::sqrt(4.0 * v * v - z * z)) / (2.0 * v * v);
}

cplx surface_green(cplx z, double v, double first_energy) {
    return 1.0 / (z - first_energy - v * v * surface_green(z, v));
}

cplx bulk_green(cplx z, double v) { return 1.0 / (z - 2.0 * v * v * surface_green(z, v)); }

cplx bulk_green(cplx z, double v, int distance) {
    const cplx step = -v * surface_green(z, v);
    return bulk_green(z, v) * std::pow(step, std::abs(distance));
}

cplx self_energy(double eps, double v0, double v, BathKind kind) {
    if (std::abs(eps) > 2.0 * v) {
        std::ostringstream os;
        os << "self_energy: eps=" << eps << " lies outside the band [-2v, 2v] (v=" << v
           << "); localized modes are not modelled";
        throw ConfigError(os.str());
    }
    const double root = std::sqrt(std::max(0.0, v * v - 0.25 * eps * eps));
    const cplx surface = (v0 * v0) / (v * v) * cplx(0.5 * eps, -root);
    return kind == BathKind::Surface ? surface : 2.0 * surface;
}

cplx lateral_self_energy(double eps, double v0, double v) {
    if (std::abs(eps) >= 2.0 * v) {
        throw ConfigError("lateral_self_energy: eps must lie inside the open band (-2v, 2v)");
    }
    return v0 * v0 * bulk_green(cplx(eps, 0.0), v);
}

double ldos_surface(double eps, double v) {
    if (std::abs(eps) >= 2.0 * v) return 0.0;
    return std::sqrt(v * v - 0.25 * eps * eps) / (kPi * v * v);
}

double ldos_bulk(double eps, double v) {
    if (std::abs(eps) == 2.0 * v) {
        throw NumericalError("ldos_bulk: van Hove singularity at |eps| = 2v");
    }
    if (std::abs(eps) > 2.0 * v) return 0.0;
    return 1.0 / (2.0 * kPi * std::sqrt(v * v - 0.25 * eps * eps));
}

cplx site_green(const SystemSpec& s, cplx z) { return 1.0 / inverse_site_green(s, z); }

cplx inverse_site_green(const SystemSpec& s, cplx z) {
    const int k = system_size(s.case_id);
    Eigen::MatrixXcd m = -system_self_energy(s, z);
    m -= system_hamiltonian(s).cast<cplx>();
    m.diagonal().array() += z;
    if (k == 1) return m(0, 0);
    if (k == 2) return (m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0)) / m(1, 1);
    const int a = initial_index(s);
    Eigen::VectorXcd unit = Eigen::VectorXcd::Zero(k);
    unit(a) = 1.0;
    const Eigen::VectorXcd column = m.fullPivLu().solve(unit);
    return 1.0 / column(a);
}

double ldos_site_a(double eps, const SystemSpec& s) {
    if (!in_band(eps, s)) return 0.0;
    return -site_green(s, cplx(eps, 0.0)).imag() / kPi;
}

LdosCurve ldos_curve(LdosKind kind, const SystemSpec& s, int points) {
    if (points < 1) throw ConfigError("ldos_curve needs at least one point");
    LdosCurve curve;
    curve.kind = kind;
    curve.grid.reserve(points);
    curve.values.reserve(points);
    const double width = 4.0 * s.v / points;
    for (int i = 0; i < points; ++i) {
        const double eps = -2.0 * s.v + (i + 0.5) * width;
        double value = 0.0;
        switch (kind) {
            case LdosKind::Surface: value = ldos_surface(eps, s.v); break;
            case LdosKind::Bulk: value = ldos_bulk(eps, s.v); break;
            case LdosKind::SiteA: value = ldos_site_a(eps + s.e_env, s); break;
        }
        curve.grid.push_back(kind == LdosKind::SiteA ? eps + s.e_env : eps);
        curve.values.push_back(value);
    }
    return curve;
}

double ldos_integral(LdosKind kind, const SystemSpec& s) {
    using boost::math::quadrature::gauss_kronrod;
    if (kind == LdosKind::SiteA) return BandQuadrature(s, 0.0).mass();
    // eps = 2v sin(theta) absorbs the inverse-square-root edge of the bulk LDoS.
    auto integrand = [&](double theta) {
        const double eps = 2.0 * s.v * std::sin(theta);
        const double jac = 2.0 * s.v * std::cos(theta);
        return jac * (kind == LdosKind::Surface ? ldos_surface(eps, s.v) : ldos_bulk(eps, s.v));
    };
    double err = 0.0;
    return gauss_kronrod<double, 61>::integrate(integrand, -kPi / 2, kPi / 2, 15, 1e-14, &err);
}

// ---------------------------------------------------------------------------

BandQuadrature::BandQuadrature(const SystemSpec& spec, double t_max, double tolerance) {
    constexpr std::size_t kMaxPanels = 1 << 16;
    using Rule = boost::math::quadrature::gauss_kronrod<double, 61>;
    using Gauss = boost::math::quadrature::gauss<double, 30>;
    const double v = spec.v;
    auto energy = [&](double theta) { return spec.e_env + 2.0 * v * std::sin(theta); };
    auto density = [&](double theta) {
        return ldos_site_a(energy(theta), spec) * 2.0 * v * std::cos(theta);
    };

    // Panel boundaries: band edges plus the isolated-system levels, where the
    // resonances sit.
    std::vector<double> cuts{-kPi / 2, kPi / 2};
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> levels(system_hamiltonian(spec));
    for (double e : levels.eigenvalues()) {
        const double x = (e - spec.e_env) / (2.0 * v);
        if (std::abs(x) < 1.0) cuts.push_back(std::asin(x));
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-14; }),
               cuts.end());

    // Each panel spans at most ~1 rad of exp(-i eps t) phase at t_max.
    const double max_width = t_max > 0.0 ? 1.0 / (2.0 * v * t_max) : kPi / 8;
    struct Panel {
        double a, b;
        int depth;
    };
    std::vector<Panel> todo;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i], b = cuts[i + 1];
        const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / max_width)));
        for (int p = 0; p < pieces; ++p) {
            todo.push_back({a + (b - a) * p / pieces, a + (b - a) * (p + 1) / pieces, 0});
        }
    }

    std::vector<Panel> accepted;
    while (!todo.empty()) {
        Panel p = todo.back();
        todo.pop_back();
        // |Kronrod - Gauss| on the panel; computed here because the library's
        // non-adaptive error estimate is not rescaled to the panel width.
        const double kronrod = Rule::integrate(density, p.a, p.b, 0);
        const double err = std::abs(kronrod - Gauss::integrate(density, p.a, p.b));
        // Below ~1e-14 relative the difference is round-off and halving cannot help.
        const double goal = std::max(tolerance * (p.b - p.a) / kPi, 1e-14 * std::abs(kronrod));
        if (err > goal && p.depth < 40) {
            if (todo.size() + accepted.size() > kMaxPanels) {
                throw NumericalError("BandQuadrature: more than " + std::to_string(kMaxPanels) +
                                     " panels without reaching the tolerance");
            }
            const double mid = 0.5 * (p.a + p.b);
            todo.push_back({p.a, mid, p.depth + 1});
            todo.push_back({mid, p.b, p.depth + 1});
        } else {
            accepted.push_back(p);
        }
    }
    std::sort(accepted.begin(), accepted.end(),
              [](const Panel& x, const Panel& y) { return x.a < y.a; });
    panels_ = accepted.size();

    const auto& nodes = Rule::abscissa();
    const auto& weights = Rule::weights();
    for (const Panel& p : accepted) {
        const double c = 0.5 * (p.a + p.b), h = 0.5 * (p.b - p.a);
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            for (double sgn : {-1.0, 1.0}) {
                if (i == 0 && sgn > 0) continue;
                const double theta = c + sgn * h * nodes[i];
                energies_.push_back(energy(theta));
                weighted_.push_back(h * weights[i] * density(theta));
            }
        }
    }
}

cplx BandQuadrature::fourier(double t) const {
    cplx sum = 0.0;
    for (std::size_t k = 0; k < energies_.size(); ++k) {
        sum += weighted_[k] * std::exp(-kI * (energies_[k] * t));
    }
    return sum;
}

double BandQuadrature::mass() const {
    double sum = 0.0;
    for (double w : weighted_) sum += w;
    return sum;
}

// ---------------------------------------------------------------------------

double scfgr_rate(CaseId id, double v_ab, double v, Direction direction) {
    const double w = direction == Direction::Forward ? v_ab : -v_ab;
    if (has_dimer(id) && std::abs(w) >= 2.0 * v) {
        throw ConfigError("scfgr_rate: |v_ab| must lie inside the band (|v_ab| < 2v)");
    }
    const double root = std::sqrt(4.0 * v * v - w * w);
    switch (id) {
        case CaseId::I: return 2.0;
        case CaseId::II: return 1.0;
        case CaseId::III: return 0.5 * root / v;
        case CaseId::IV: return v / root;
        case CaseId::V: return 2.0 * v / root;
        case CaseId::VI: return root / (2.0 * v - w);
        case CaseId::FiveSite: break;
    }
    throw ConfigError("scfgr_rate: no closed form for the five-site case");
}

double wba_rate(CaseId id, double v) {
    const double surface = 2.0 * kPi * v * ldos_surface(0.0, v);  // = 2
    const double bulk = 2.0 * kPi * v * ldos_bulk(0.0, v);        // = 1
    switch (id) {
        case CaseId::I: return surface;
        case CaseId::II: return bulk;
        case CaseId::III: return 0.5 * surface;
        case CaseId::IV: return 0.5 * bulk;
        case CaseId::V:
        case CaseId::VI:
        case CaseId::FiveSite: return bulk;
    }
    return 0.0;
}

double le_rate_prediction(CaseId id, double v_ab, double v) {
    return 0.5 * (scfgr_rate(id, v_ab, v, Direction::Forward) +
                  scfgr_rate(id, v_ab, v, Direction::Backward));
}

PolePrediction leading_order_pole(CaseId id, double v_ab, double v0, double v,
                                  Direction direction) {
    PolePrediction p;
    p.case_id = id;
    p.direction = direction;
    p.order = PoleOrder::LeadingV0Squared;
    p.v0 = v0;
    p.v = v;
    const double unit = v0 * v0 / v;
    p.rate = scfgr_rate(id, v_ab, v, direction) * unit;
    p.gamma0 = 0.5 * p.rate;
    switch (id) {
        case CaseId::I:
        case CaseId::II: p.delta0 = 0.0; break;
        case CaseId::III: p.delta0 = std::abs(v_ab) * (1.0 - 0.25 * unit / v); break;
        case CaseId::VI: p.delta0 = std::abs(v_ab) - 0.5 * unit; break;
        default: p.delta0 = std::abs(v_ab); break;
    }
    return p;
}

namespace {

// Closed-form poles where they exist (cases I-III with zero site energies).
std::vector<cplx> closed_form_candidates(CaseId id, double v_ab, double v0, double v) {
    const double v02 = v0 * v0, v2 = v * v;
    switch (id) {
        case CaseId::I: return {cplx(0.0, -v02 / std::sqrt(v2 - v02))};
        case CaseId::II: {
            const double y2 = 2.0 * v2 * (std::sqrt(1.0 + v02 * v02 / (4.0 * v2 * v2)) - 1.0);
            return {cplx(0.0, -std::sqrt(y2))};
        }
        case CaseId::III: {
            // z^2 (1-c) - w^2 = -i c z sqrt(4V^2 - z^2), squared: quadratic in z^2.
            const double w2 = v_ab * v_ab, c = v02 / (2.0 * v2);
            const double qa = 1.0 - 2.0 * c;
            const double qb = 4.0 * c * c * v2 - 2.0 * (1.0 - c) * w2;
            const cplx disc = std::sqrt(cplx(qb * qb - 4.0 * qa * w2 * w2, 0.0));
            std::vector<cplx> out;
            for (double sgn : {1.0, -1.0}) {
                const cplx root = std::sqrt((-qb + sgn * disc) / (2.0 * qa));
                out.push_back(root);
                out.push_back(-root);
                out.push_back(std::conj(root));
                out.push_back(-std::conj(root));
            }
            return out;
        }
        default: return {};
    }
}

cplx newton_pole(const SystemSpec& s, cplx seed, int& iterations) {
    const double tol = 1e-12 * s.v;
    auto f = [&](cplx z) { return inverse_site_green(s, z); };
    cplx z = seed;
    for (iterations = 1; iterations <= 200; ++iterations) {
        const double h = 1e-6 * std::max(1.0, std::abs(z));
        const cplx df = (f(z + h) - f(z - h)) / (2.0 * h);
        const cplx step = f(z) / df;
        z -= step;
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) break;
        if (std::abs(step) <= tol && std::abs(f(z)) <= 1e-10 * s.v) return z;
    }
    std::ostringstream os;
    os << "gf_poles: Newton refinement did not converge for case " << to_string(s.case_id)
       << " (seed " << seed << ", last z " << z << ", residual " << std::abs(f(z)) << ")";
    throw NumericalError(os.str());
}

}  // namespace

PolePrediction gf_poles(const SystemSpec& spec, Direction direction) {
    spec.validate();
    if (spec.case_id == CaseId::FiveSite) {
        throw ConfigError("gf_poles: only cases I-VI have a single resonance pole");
    }
    const SystemSpec s = direction == Direction::Forward ? spec : reversed(spec);
    const PolePrediction lead = leading_order_pole(spec.case_id, spec.v_ab, spec.v0, spec.v,
                                                   direction);
    const bool plain = spec.e_a == 0.0 && spec.e_b == 0.0 && spec.e_env == 0.0;

    cplx seed(lead.delta0 + spec.e_a, -lead.gamma0);
    if (plain) {
        double best = lead.gamma0 > 0 ? std::abs(inverse_site_green(s, seed)) : 1e300;
        for (cplx c : closed_form_candidates(spec.case_id, s.v_ab, spec.v0, spec.v)) {
            if (c.imag() > 0.0 || c.real() < -1e-14) continue;
            const double r = std::abs(inverse_site_green(s, c));
            if (r < best) {
                best = r;
                seed = c;
            }
        }
    }

    int iterations = 0;
    const cplx z = newton_pole(s, seed, iterations);
    PolePrediction p;
    p.case_id = spec.case_id;
    p.direction = direction;
    p.delta0 = z.real();
    p.gamma0 = -z.imag();
    p.rate = 2.0 * p.gamma0;
    p.order = PoleOrder::Exact;
    p.residual = std::abs(inverse_site_green(s, z));
    p.v0 = spec.v0;
    p.v = spec.v;
    if (p.gamma0 < 0.0) {
        throw NumericalError("gf_poles: refinement landed on a growing (Im > 0) root");
    }
    return p;
}

PolePrediction gf_poles(CaseId id, double v_ab, double v0, double v, Direction direction) {
    SystemSpec s;
    s.case_id = id;
    s.v_ab = v_ab;
    s.v0 = v0;
    s.v = v;
    return gf_poles(s, direction);
}

// ---------------------------------------------------------------------------

PublicBathSplit symmetrize_public(const HamiltonianMatrix& h) {
    const int ia = h.find({SiteRole::A});
    const int ib = h.find({SiteRole::B});
    if (ia < 0 || ib < 0 || h.system_size != 2) {
        throw ConfigError("symmetrize_public: input is not a two-site public-bath Hamiltonian");
    }
    int n = 0;
    while (h.find({SiteRole::Environment, 0, n + 1}) >= 0 &&
           h.find({SiteRole::Environment, 0, -(n + 1)}) >= 0) {
        ++n;
    }
    if (n == 0 || h.find({SiteRole::Environment, 0, 0}) >= 0 ||
        2 + 2 * n != static_cast<int>(h.dim())) {
        throw ConfigError("symmetrize_public: environment is not a mirror-symmetric chain without a centre site");
    }
    const Eigen::MatrixXd p = site_exchange_permutation(h);
    if ((p * h.entries - h.entries * p).cwiseAbs().maxCoeff() != 0.0) {
        throw ConfigError("symmetrize_public: Hamiltonian is not invariant under A<->B, n<->-n");
    }

    // basis[c] = (i, j): (|i> + sign |j>) / sqrt(2)
    const int dim = static_cast<int>(h.dim());
    std::vector<std::pair<int, int>> pairs{{ia, ib}};
    for (int k = 1; k <= n; ++k) {
        pairs.push_back({h.find({SiteRole::Environment, 0, -k}), h.find({SiteRole::Environment, 0, k})});
    }
    const double r = 1.0 / std::sqrt(2.0);
    std::vector<Eigen::Triplet<double>> triplets;
    for (int block = 0; block < 2; ++block) {
        const double sign = block == 0 ? 1.0 : -1.0;
        for (int k = 0; k <= n; ++k) {
            const int col = block * (n + 1) + k;
            triplets.emplace_back(pairs[k].first, col, r);
            triplets.emplace_back(pairs[k].second, col, sign * r);
        }
    }
    PublicBathSplit out;
    out.transform.resize(dim, dim);
    out.transform.setFromTriplets(triplets.begin(), triplets.end());

    // U^T H U with U two-sparse per column.
    auto rotated = [&](int a, int b) {
        const int ba = a / (n + 1), ka = a % (n + 1);
        const int bb = b / (n + 1), kb = b % (n + 1);
        const double sa = ba == 0 ? 1.0 : -1.0, sb = bb == 0 ? 1.0 : -1.0;
        const auto [a1, a2] = pairs[ka];
        const auto [b1, b2] = pairs[kb];
        return 0.5 * (h.entries(a1, b1) + sb * h.entries(a1, b2) + sa * h.entries(a2, b1) +
                      sa * sb * h.entries(a2, b2));
    };

    auto make_block = [&](int block) {
        HamiltonianMatrix m;
        m.entries.resize(n + 1, n + 1);
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= n; ++j) m.entries(i, j) = rotated(block * (n + 1) + i, block * (n + 1) + j);
        m.labels.push_back({SiteRole::A, 0, 0});
        for (int k = 1; k <= n; ++k) m.labels.push_back({SiteRole::Environment, block, k});
        m.initial_site = 0;
        m.system_size = 1;
        return m;
    };
    out.even = make_block(0);
    out.odd = make_block(1);

    double residual = 0.0;
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) residual = std::max(residual, std::abs(rotated(i, n + 1 + j)));
    out.off_block_residual = residual;
    out.initial_weight_even = std::pow(out.transform.coeff(ia, 0), 2);
    out.initial_weight_odd = std::pow(out.transform.coeff(ia, n + 1), 2);
    return out;
}

}  // namespace nmdecay
