// Acceptance run: one PASS/FAIL line per criterion, indented detail lines
// under each, INFO lines for diagnostics that do not gate anything.
// Exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "nmdecay/dynamics.hpp"
#include "nmdecay/error.hpp"
#include "nmdecay/lattice.hpp"
#include "nmdecay/rates.hpp"
#include "nmdecay/spectral.hpp"
#include "nmdecay/spinmap.hpp"

using namespace nmdecay;

namespace {

// Tolerances, all in one place.
constexpr double kTableTolerance = 0.07;           // criterion 1, absolute, V0^2/(hbar V)
constexpr int kTableEnv = 2000;
constexpr double kScfgrTolerance = 1e-3;           // criterion 2 floor
constexpr double kMeanRule = 1.155;                // criterion 3
constexpr double kMeanRuleTolerance = 1e-3;
constexpr double kFittedEcho = 1.20;
constexpr double kFittedEchoTolerance = 0.07;
constexpr double kOracleGap = 1e-3;                // criterion 4
constexpr double kJwtGap = 1e-10;                  // criterion 5
constexpr double kBlockResidual = 1e-12;           // criterion 6, times V
constexpr double kEigenvalueMatch = 1e-10;         // criterion 6, times V
constexpr double kUnitarity = 1e-10;               // criterion 7
constexpr double kPoleResidual = 1e-10;            // criterion 7, times V
constexpr double kScalingResidual = 0.02;
constexpr double kWbaGap = 1e-3;                   // relative
constexpr double kWbaWideBand = 25.0;
constexpr double kFiveSiteTarget = 1.16;           // criterion 8
constexpr double kFiveSiteTolerance = 0.15;
constexpr double kFiveSiteV0 = 0.1;                // in units of V_s

const RunSettings kRun{40.0, 0.05, 0};

int failures = 0;

std::string fmt(double x, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

void verdict(int id, bool pass, const std::string& what) {
    std::cout << (pass ? "PASS" : "FAIL") << " C" << id << " " << what << std::endl;
    if (!pass) ++failures;
}

void detail(const std::string& line) { std::cout << "    " << line << std::endl; }
void info(const std::string& line) { std::cout << "INFO " << line << std::endl; }

SystemSpec spec_for(CaseId id, double v, double v0) {
    SystemSpec s;
    s.case_id = id;
    s.v = v;
    s.v0 = v0;
    return s;
}

std::string rate_text(const std::optional<RateEstimate>& r, const std::string& error) {
    if (!r) return "none (" + error + ")";
    std::string out = fmt(r->rate) + " +- " + fmt(r->combined_error(), 2);
    if (!error.empty()) out += " [rejected, r^2 " + fmt(r->r_squared, 3) + "]";
    return out;
}

double sup_gap(const TimeSeries& a, const TimeSeries& b) {
    double gap = 0.0;
    for (std::size_t k = 0; k < std::min(a.size(), b.size()); ++k) gap = std::max(gap, std::abs(a.p[k] - b.p[k]));
    return gap;
}

// ---------------------------------------------------------------------------

void table1(const Table1Report& report) {
    bool pass = true;
    for (const Table1Row& r : report.rows) {
        const bool ok = r.sp_pass && r.le_pass;
        pass = pass && ok;
        detail(r.label + ": SP " + rate_text(r.fitted.sp, r.fitted.sp_error) + " vs " + fmt(r.ref_sp, 3) +
               ", LE " + rate_text(r.fitted.le, r.fitted.le_error) + " vs " + fmt(r.ref_le, 3) +
               (ok ? "" : "  <-- off"));
    }
    verdict(1, pass, "fitted SP/LE rates within " + fmt(kTableTolerance) + " of the reference table (n_env " +
                         std::to_string(report.run.n_env) + ", V0 = 0.1 V, t_max 40)");

    // The public-bath echo at V = 5 V_AB is the one row with a visibly
    // non-exponential echo; show how it moves with a weaker coupling.
    SystemSpec weak = spec_for(CaseId::VI, 5.0, 0.1);
    const TraceRates r = measure_rates(sized(weak, RunSettings{40.0, 0.05, kTableEnv}), RunSettings{40.0, 0.05, kTableEnv});
    info("VI (V=5V_AB) at V0 = 0.1 V_AB: LE " + rate_text(r.le, r.le_error) + ", SP " +
         rate_text(r.sp, r.sp_error));
}

void scfgr() {
    struct Ref {
        std::string label;
        CaseId id;
        double v;
        Direction dir;
        double value;
        double half_digit;  // half a unit of the last printed digit
    };
    const std::vector<Ref> refs{
        {"I", CaseId::I, 1, Direction::Forward, 2, 0.5},
        {"II", CaseId::II, 1, Direction::Forward, 1, 0.5},
        {"III (V=V_AB)", CaseId::III, 1, Direction::Forward, 0.87, 0.005},
        {"III (V=5V_AB)", CaseId::III, 5, Direction::Forward, 0.995, 0.0005},
        {"IV (V=V_AB)", CaseId::IV, 1, Direction::Forward, 0.577, 0.0005},
        {"IV (V=5V_AB)", CaseId::IV, 5, Direction::Forward, 0.502, 0.0005},
        {"V", CaseId::V, 1, Direction::Forward, 1.15, 0.005},
        {"VI (V=V_AB) fwd", CaseId::VI, 1, Direction::Forward, 1.732, 0.0005},
        {"VI (V=V_AB) bwd", CaseId::VI, 1, Direction::Backward, 0.577, 0.0005},
        {"VI (V=5V_AB) fwd", CaseId::VI, 5, Direction::Forward, 1.106, 0.0005},
        {"VI (V=5V_AB) bwd", CaseId::VI, 5, Direction::Backward, 0.904, 0.0005},
    };
    bool pass = true;
    for (const Ref& r : refs) {
        const double got = scfgr_rate(r.id, 1.0, r.v, r.dir);
        const double tol = std::max(kScfgrTolerance, r.half_digit);
        const bool ok = std::abs(got - r.value) <= tol;
        pass = pass && ok;
        detail(r.label + ": " + fmt(got, 6) + " vs " + fmt(r.value) + " (tol " + fmt(tol) + ")");
    }
    verdict(2, pass, "self-consistent FGR closed forms match the tabulated column");
}

void echo_mean_rule(const Table1Report& report) {
    const double mean = le_rate_prediction(CaseId::VI, 1.0, 1.0);
    const Table1Row* row = nullptr;
    for (const Table1Row& r : report.rows)
        if (r.case_id == CaseId::VI && r.v == 1.0) row = &r;
    const bool mean_ok = std::abs(mean - kMeanRule) <= kMeanRuleTolerance;
    const bool fit_ok = row && row->fitted.le && row->fitted.le_error.empty() &&
                        std::abs(row->fitted.le->rate - kFittedEcho) <= kFittedEchoTolerance;
    detail("mean of forward and backward rates " + fmt(mean, 6) + " vs " + fmt(kMeanRule));
    if (row) detail("fitted echo rate " + rate_text(row->fitted.le, row->fitted.le_error) + " vs " + fmt(kFittedEcho));
    verdict(3, mean_ok && fit_ok, "public bath at V = V_AB: echo rate is the forward/backward mean");
}

void ldos_oracle() {
    bool pass = true;
    for (CaseId id : {CaseId::I, CaseId::II, CaseId::III, CaseId::IV}) {
        const SystemSpec s = sized(spec_for(id, 1.0, 0.1), kRun);
        const double gap = sup_gap(survival_probability(s, kRun.t_max, kRun.dt),
                                   sp_from_ldos(s, kRun.t_max, kRun.dt));
        pass = pass && gap <= kOracleGap;
        detail(std::string(to_string(id)) + ": sup |P_diag - P_ldos| = " + fmt(gap, 3));
    }
    verdict(4, pass, "LDoS Fourier transform reproduces the exact survival probability");
}

void jordan_wigner() {
    const auto times = time_grid(30.0, 0.05);
    double worst = 0.0;
    // With a field the sector matrix is shifted by the vacuum energy, so the
    // two sides no longer diagonalize the same numbers.
    for (double omega : {0.0, 0.3})
        for (auto [i, f] : {std::pair{0, 9}, std::pair{2, 7}, std::pair{4, 4}}) {
            const SpinChainSpec s = SpinChainSpec::uniform(10, 1.0, omega, i, f);
            const double gap = sup_gap(spin_correlation(s, times), single_particle_transfer(s, times));
            worst = std::max(worst, gap);
            detail("m=10, field " + fmt(omega) + ", i=" + std::to_string(i) + ", f=" + std::to_string(f) +
                   ": gap " + fmt(gap, 3));
        }
    verdict(5, worst <= kJwtGap, "ten-spin XY correlation equals the free-fermion propagator");
}

void symmetrization() {
    bool pass = true;
    for (double v : {1.0, 5.0}) {
        SystemSpec s = spec_for(CaseId::VI, v, 0.1 * v);
        s.n_env = 200;
        const HamiltonianMatrix h = build_hamiltonian(s);
        const PublicBathSplit split = symmetrize_public(h);
        std::vector<double> halves;
        for (const HamiltonianMatrix* b : {&split.even, &split.odd}) {
            const Spectrum sb = diagonalize(*b);
            halves.insert(halves.end(), sb.energies.begin(), sb.energies.end());
        }
        std::sort(halves.begin(), halves.end());
        const Spectrum full = diagonalize(h);
        double eig_gap = halves.size() == static_cast<std::size_t>(full.energies.size()) ? 0.0 : INFINITY;
        for (std::size_t k = 0; k < halves.size() && std::isfinite(eig_gap); ++k)
            eig_gap = std::max(eig_gap, std::abs(halves[k] - full.energies[static_cast<Eigen::Index>(k)]));
        const bool ok = split.off_block_residual <= kBlockResidual * v && eig_gap <= kEigenvalueMatch * v;
        pass = pass && ok;
        detail("V=" + fmt(v) + ": off-block " + fmt(split.off_block_residual, 3) + ", eigenvalue gap " +
               fmt(eig_gap, 3));
    }
    verdict(6, pass, "public bath splits into two decoupled half chains with the same spectrum");
}

void properties() {
    bool unitary = true;
    for (CaseId id : {CaseId::I, CaseId::II, CaseId::III, CaseId::IV, CaseId::V, CaseId::VI}) {
        const HamiltonianMatrix h = build_hamiltonian(sized(spec_for(id, 1.0, 0.1), kRun));
        const Spectrum s = diagonalize(h);
        double worst = 0.0;
        for (double t : {0.0, 7.3, 20.0, 40.0}) worst = std::max(worst, std::abs(transfer_probabilities(h, s, t).sum() - 1.0));
        unitary = unitary && worst <= kUnitarity;
        detail("unitarity " + std::string(to_string(id)) + ": " + fmt(worst, 3));
    }

    bool poles = true;
    double worst_pole = 0.0;
    for (CaseId id : {CaseId::I, CaseId::II, CaseId::III, CaseId::IV, CaseId::V, CaseId::VI})
        for (double v : {1.0, 5.0})
            for (Direction d : {Direction::Forward, Direction::Backward}) {
                const PolePrediction p = gf_poles(id, 1.0, 0.1 * v, v, d);
                worst_pole = std::max(worst_pole, p.residual / v);
                poles = poles && p.residual <= kPoleResidual * v;
            }
    detail("largest pole residual / V: " + fmt(worst_pole, 3));

    bool scaling = true;
    for (CaseId id : {CaseId::II, CaseId::III, CaseId::IV}) {
        const SweepResult sw = rate_sweep(spec_for(id, 1.0, 0.1), {0.05, 0.1, 0.15, 0.2}, kRun);
        const bool ok = sw.sp_slope && sw.sp_slope->n_points == 4 && sw.sp_slope->max_relative_residual <= kScalingResidual;
        scaling = scaling && ok;
        detail("V0^2 scaling " + std::string(to_string(id)) + ": " +
               (sw.sp_slope ? "slope " + fmt(sw.sp_slope->slope) + ", max residual " +
                                  fmt(sw.sp_slope->max_relative_residual, 3) + ", points " +
                                  std::to_string(sw.sp_slope->n_points)
                            : std::string("no slope")));
    }

    bool convex = true;
    for (double ratio : {0.2, 0.5, 1.0}) {
        const double v = 1.0 / ratio;
        const double surface = scfgr_rate(CaseId::III, 1.0, v, Direction::Forward);
        const double lateral = scfgr_rate(CaseId::IV, 1.0, v, Direction::Forward);
        const double two_bulk = scfgr_rate(CaseId::V, 1.0, v, Direction::Forward);
        const bool ok = surface < wba_rate(CaseId::III, v) && lateral > wba_rate(CaseId::IV, v) &&
                        two_bulk > wba_rate(CaseId::V, v);
        convex = convex && ok;
        detail("V_AB/V=" + fmt(ratio) + ": III " + fmt(surface) + " < " + fmt(wba_rate(CaseId::III, v)) + ", IV " +
               fmt(lateral) + " > " + fmt(wba_rate(CaseId::IV, v)) + ", V " + fmt(two_bulk) + " > " +
               fmt(wba_rate(CaseId::V, v)));
    }

    bool wide = true;
    for (CaseId id : {CaseId::I, CaseId::II, CaseId::III, CaseId::IV, CaseId::V, CaseId::VI}) {
        const double w = wba_rate(id, kWbaWideBand);
        const double r = le_rate_prediction(id, 1.0, kWbaWideBand);
        const double gap = std::abs(r / w - 1.0);
        wide = wide && gap <= kWbaGap;
        detail("V=25V_AB " + std::string(to_string(id)) + ": echo rate " + fmt(r, 6) + " vs WBA " + fmt(w) +
               ", gap " + fmt(100 * gap, 3) + "%");
    }
    const double fwd = scfgr_rate(CaseId::VI, 1.0, kWbaWideBand, Direction::Forward);
    const double bwd = scfgr_rate(CaseId::VI, 1.0, kWbaWideBand, Direction::Backward);
    info("VI at V=25V_AB, single directions: forward " + fmt(fwd, 6) + ", backward " + fmt(bwd, 6) +
         " (each carries a first-order V_AB/V shift that cancels in the echo)");

    detail(std::string("unitarity ") + (unitary ? "ok" : "off") + ", poles " + (poles ? "ok" : "off") +
           ", scaling " + (scaling ? "ok" : "off") + ", convexity " + (convex ? "ok" : "off") + ", wide band " +
           (wide ? "ok" : "off"));
    verdict(7, unitary && poles && scaling && convex && wide, "property suite");
}

std::vector<std::optional<RateEstimate>> five_site_rates(int initial, const std::vector<double>& ratios) {
    std::vector<std::optional<RateEstimate>> out;
    for (double ratio : ratios) {
        SystemSpec s;
        s.case_id = CaseId::FiveSite;
        s.v_s = 1.0;
        s.v = ratio;
        s.v0 = kFiveSiteV0;
        s.five_site_initial = initial;
        const TraceRates r = measure_rates(s, kRun);
        out.push_back(r.le_error.empty() ? r.le : std::nullopt);
        detail("initial site " + std::to_string(initial) + ", V=" + fmt(ratio) + "V_s: LE " +
               rate_text(r.le, r.le_error));
    }
    return out;
}

void five_site() {
    const std::vector<double> ratios{1.0, 5.0, 8.75};
    const auto mid = five_site_rates(2, ratios);
    bool all = std::all_of(mid.begin(), mid.end(), [](const auto& r) { return r.has_value(); });
    bool monotone = all;
    for (std::size_t k = 1; all && k < mid.size(); ++k) monotone = monotone && mid[k]->rate < mid[k - 1]->rate;
    const bool near = all && std::abs(mid.back()->rate - kFiveSiteTarget) <= kFiveSiteTolerance;
    detail("reference 2.66, 1.54, 1.16; monotone " + std::string(monotone ? "yes" : "no") + ", V=8.75V_s within " +
           fmt(kFiveSiteTolerance) + " of " + fmt(kFiveSiteTarget) + ": " + (near ? "yes" : "no"));
    verdict(8, monotone && near, "five-site chain: rates fall toward the wide-band value (middle-site start)");

    const auto end = five_site_rates(0, ratios);
    std::string line = "five-site with the excitation on an end site:";
    for (std::size_t k = 0; k < end.size(); ++k) line += " " + (end[k] ? fmt(end[k]->rate) : std::string("n/a"));
    info(line);
}

}  // namespace

int main() {
    const auto start = std::chrono::steady_clock::now();
    try {
        Table1Config config;
        config.run = RunSettings{40.0, 0.05, kTableEnv};
        config.tolerance = kTableTolerance;
        const Table1Report report = table1_report(config);

        table1(report);
        scfgr();
        echo_mean_rule(report);
        ldos_oracle();
        jordan_wigner();
        symmetrization();
        properties();
        five_site();
    } catch (const std::exception& e) {
        std::cout << "FAIL aborted: " << e.what() << std::endl;
        return 100;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << " in "
              << fmt(secs, 4) << " s" << std::endl;
    return failures;
}
