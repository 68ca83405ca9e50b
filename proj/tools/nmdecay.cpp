// nmdecay: command-line driver for the decay simulator.
//
//   nmdecay <sp|le|ldos|poles|rates|sweep|table1|jwt-check> [options]
//
// Options can also come from a flat "key = value" file given with --config;
// command-line flags win. Every run writes its outputs plus manifest.json and
// replay.cfg into --out.

#include <chrono>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nmdecay/dynamics.hpp"
#include "nmdecay/error.hpp"
#include "nmdecay/io.hpp"
#include "nmdecay/parallel.hpp"
#include "nmdecay/rates.hpp"
#include "nmdecay/spectral.hpp"
#include "nmdecay/spinmap.hpp"

#ifndef NMDECAY_VERSION
#define NMDECAY_VERSION "dev"
#endif

namespace {

using namespace nmdecay;
using nlohmann::ordered_json;

enum Exit { kOk = 0, kValidation = 1, kAcceptance = 2, kNumerical = 3 };

struct Options {
    std::string case_name = "I";
    double v_ab = 1.0;
    double v0 = 0.1;
    double v = 1.0;
    double e_a = 0.0, e_b = 0.0, e_env = 0.0;
    int n_env = 0;
    double v_s = 1.0;
    int five_initial = 2;
    double t_max = 40.0;
    double dt = 0.05;
    std::string out = ".";
    int threads = 0;

    std::string ldos_kind = "surface";
    int points = 401;
    std::vector<std::string> directions{"forward", "backward"};
    std::vector<double> v0_list{0.05, 0.1, 0.15, 0.2};
    double tolerance = 0.07;
    double v0_ratio = 0.1;
    int table_n_env = 2000;

    int spins = 10;
    double j = 2.0;
    double omega = 0.0;
    int i_site = 0;
    int f_site = -1;
};

SystemSpec make_spec(const Options& o) {
    SystemSpec s;
    s.case_id = parse_case(o.case_name);
    s.v_ab = o.v_ab;
    s.v0 = o.v0;
    s.v = o.v;
    s.e_a = o.e_a;
    s.e_b = o.e_b;
    s.e_env = o.e_env;
    s.v_s = o.v_s;
    s.five_site_initial = o.five_initial;
    RunSettings run{o.t_max, o.dt, o.n_env};
    s = sized(s, run);
    s.validate();
    if (!(o.dt > 0.0) || !(o.t_max > 0.0)) throw ConfigError("tmax and dt must be positive");
    return s;
}

std::string path_in(const Options& o, const std::string& name) {
    return o.out.empty() || o.out == "." ? name : o.out + "/" + name;
}

std::string trace_csv(const TimeSeries& s, const SystemSpec& spec) {
    std::ostringstream os;
    write_timeseries_csv(os, s, {std::string(to_string(spec.case_id)), spec.v0, spec.v});
    return os.str();
}

class Runner {
public:
    Runner(CLI::App& app, Options& o) : app_(app), o_(o) {}

    void manifest(const std::string& command, const ordered_json& extra, double seconds,
                  const std::vector<std::string>& files) {
        ordered_json m;
        m["tool"] = "nmdecay";
        m["version"] = NMDECAY_VERSION;
        m["command"] = command;
        m["config"] = config_echo();
        m["outputs"] = files;
        m["replay"] = "nmdecay " + command + " --config replay.cfg";
        for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
        m["deterministic"] = true;
        m["wall_time_s"] = seconds;
        write_file(path_in(o_, "manifest.json"), m.dump(2) + "\n");
        write_file(path_in(o_, "replay.cfg"), app_.config_to_str(true, false));
    }

private:
    ordered_json config_echo() const {
        ordered_json c;
        c["case"] = o_.case_name;
        c["vab"] = o_.v_ab;
        c["v0"] = o_.v0;
        c["v"] = o_.v;
        c["ea"] = o_.e_a;
        c["eb"] = o_.e_b;
        c["eenv"] = o_.e_env;
        c["n-env"] = o_.n_env;
        c["vs"] = o_.v_s;
        c["five-initial"] = o_.five_initial;
        c["tmax"] = o_.t_max;
        c["dt"] = o_.dt;
        c["out"] = o_.out;
        c["threads"] = thread_count(o_.threads);
        return c;
    }

    CLI::App& app_;
    Options& o_;
};

int cmd_trace(const Options& o, Runner& r, TraceKind kind) {
    const auto start = std::chrono::steady_clock::now();
    const SystemSpec spec = make_spec(o);
    const TimeSeries s = kind == TraceKind::SP ? survival_probability(spec, o.t_max, o.dt)
                                               : loschmidt_echo(spec, o.t_max, o.dt);
    const std::string name = std::string(kind == TraceKind::SP ? "sp_" : "le_") +
                             std::string(to_string(spec.case_id)) + ".csv";
    write_file(path_in(o, name), trace_csv(s, spec));

    ordered_json extra;
    extra["spec"] = to_json(spec);
    extra["n_env_auto"] = o.n_env == 0;
    try {
        const RateEstimate est = trace_rate(s, spec.v0, spec.v, o.dt);
        extra["fit"] = to_json(est);
        std::cout << to_string(kind) << " rate = " << format_number(est.rate, 4) << " +- "
                  << format_number(est.std_error, 2) << " (window " << format_number(est.window_spread, 2)
                  << ") V0^2/(hbar V)  (r^2 "
                  << format_number(est.r_squared, 5) << ")\n";
    } catch (const NumericalError& e) {
        extra["fit_error"] = e.what();
        std::cout << "fit skipped: " << e.what() << "\n";
    }
    std::cout << "wrote " << path_in(o, name) << " (" << s.size() << " samples, n_env=" << spec.n_env
              << ")\n";
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.manifest(std::string(kind == TraceKind::SP ? "sp" : "le"), extra, secs, {name});
    return kOk;
}

int cmd_ldos(const Options& o, Runner& r) {
    const auto start = std::chrono::steady_clock::now();
    LdosKind kind;
    if (o.ldos_kind == "surface") kind = LdosKind::Surface;
    else if (o.ldos_kind == "bulk") kind = LdosKind::Bulk;
    else if (o.ldos_kind == "site_A" || o.ldos_kind == "site") kind = LdosKind::SiteA;
    else throw ConfigError("ldos --kind must be surface, bulk or site_A");
    const SystemSpec spec = make_spec(o);
    const LdosCurve curve = ldos_curve(kind, spec, o.points);
    std::ostringstream os;
    write_ldos_csv(os, curve);
    const std::string name = "ldos_" + std::string(to_string(kind)) + ".csv";
    write_file(path_in(o, name), os.str());
    ordered_json extra;
    extra["kind"] = to_string(kind);
    extra["integral"] = ldos_integral(kind, spec);
    std::cout << "wrote " << path_in(o, name) << " (integral over band "
              << format_number(extra["integral"].get<double>(), 10) << ")\n";
    r.manifest("ldos", extra,
               std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), {name});
    return kOk;
}

int cmd_poles(const Options& o, Runner& r) {
    const auto start = std::chrono::steady_clock::now();
    const SystemSpec spec = make_spec(o);
    ordered_json records = ordered_json::array();
    for (const std::string& d : o.directions) {
        Direction dir;
        if (d == "forward") dir = Direction::Forward;
        else if (d == "backward") dir = Direction::Backward;
        else throw ConfigError("direction must be forward or backward, got '" + d + "'");
        const PolePrediction exact = gf_poles(spec, dir);
        const PolePrediction lead = leading_order_pole(spec.case_id, spec.v_ab, spec.v0, spec.v, dir);
        records.push_back(to_json(exact));
        records.push_back(to_json(lead));
        std::cout << to_string(dir) << ": rate = " << format_number(exact.normalized_rate(), 6)
                  << " V0^2/(hbar V) exact, " << format_number(lead.normalized_rate(), 6)
                  << " leading order\n";
    }
    const std::string name = "poles_" + std::string(to_string(spec.case_id)) + ".json";
    write_file(path_in(o, name), records.dump(2) + "\n");
    r.manifest("poles", {{"spec", to_json(spec)}},
               std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), {name});
    return kOk;
}

int cmd_rates(const Options& o, Runner& r) {
    const auto start = std::chrono::steady_clock::now();
    const SystemSpec spec = make_spec(o);
    const TraceRates rates = measure_rates(spec, {o.t_max, o.dt, spec.n_env});
    ordered_json j;
    j["schema_version"] = kReportSchemaVersion;
    j["spec"] = to_json(spec);
    j["units"] = "V0^2/(hbar V)";
    j["rates"] = to_json(rates);
    if (spec.case_id != CaseId::FiveSite) {
        j["scfgr"] = {{"forward", scfgr_rate(spec.case_id, spec.v_ab, spec.v, Direction::Forward)},
                      {"backward", scfgr_rate(spec.case_id, spec.v_ab, spec.v, Direction::Backward)}};
        j["le_prediction"] = le_rate_prediction(spec.case_id, spec.v_ab, spec.v);
    }
    j["wba"] = wba_rate(spec.case_id, spec.v);
    const std::string name = "rates_" + std::string(to_string(spec.case_id)) + ".json";
    write_file(path_in(o, name), j.dump(2) + "\n");
    auto line = [](const char* tag, const std::optional<RateEstimate>& e, const std::string& err) {
        std::cout << tag << ": ";
        if (e) {
            std::cout << format_number(e->rate, 4) << " +- " << format_number(e->std_error, 2) << " (window "
                      << format_number(e->window_spread, 2) << ")";
        }
        if (!err.empty()) std::cout << (e ? "  [rejected] " : "") << err;
        std::cout << "\n";
    };
    line("SP", rates.sp, rates.sp_error);
    line("LE", rates.le, rates.le_error);
    r.manifest("rates", {{"n_env_auto", o.n_env == 0}},
               std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), {name});
    // The JSON is written either way; a rejected fit is still a numerical failure.
    return rates.sp_error.empty() && rates.le_error.empty() ? kOk : kNumerical;
}

int cmd_sweep(const Options& o, Runner& r) {
    const auto start = std::chrono::steady_clock::now();
    SystemSpec base = make_spec(o);
    const SweepResult sweep = rate_sweep(base, o.v0_list, {o.t_max, o.dt, o.n_env}, o.threads);
    const std::string stem = "sweep_" + std::string(to_string(base.case_id));
    write_file(path_in(o, stem + ".json"), to_json(sweep).dump(2) + "\n");
    std::ostringstream csv;
    write_sweep_csv(csv, sweep);
    write_file(path_in(o, stem + ".csv"), csv.str());
    if (sweep.sp_slope) std::cout << "SP slope " << format_number(sweep.sp_slope->slope, 4) << "\n";
    if (sweep.le_slope) std::cout << "LE slope " << format_number(sweep.le_slope->slope, 4) << "\n";
    r.manifest("sweep", {},
               std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(),
               {stem + ".json", stem + ".csv"});
    return kOk;
}

int cmd_table1(const Options& o, Runner& r) {
    const auto start = std::chrono::steady_clock::now();
    Table1Config cfg;
    cfg.v0_over_v = o.v0_ratio;
    cfg.tolerance = o.tolerance;
    cfg.run = {o.t_max, o.dt, o.table_n_env};
    cfg.threads = o.threads;
    const Table1Report report = table1_report(cfg);
    const std::string text = format_table(report);
    write_file(path_in(o, "table1.json"), to_json(report).dump(2) + "\n");
    write_file(path_in(o, "table1.txt"), text);
    std::cout << text;
    r.manifest("table1", {{"all_pass", report.all_pass()}},
               std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(),
               {"table1.json", "table1.txt"});
    return report.all_pass() ? kOk : kAcceptance;
}

int cmd_jwt(const Options& o, Runner& r) {
    const auto start = std::chrono::steady_clock::now();
    SpinChainSpec spec = SpinChainSpec::uniform(o.spins, o.j, o.omega, o.i_site,
                                                o.f_site < 0 ? o.spins - 1 : o.f_site);
    spec.validate();
    const auto times = time_grid(o.t_max, o.dt);
    const TimeSeries many = spin_correlation(spec, times);
    const TimeSeries single = single_particle_transfer(spec, times);
    double gap = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) gap = std::max(gap, std::abs(many.p[k] - single.p[k]));
    std::ostringstream csv;
    write_timeseries_csv(csv, many, {"spin_chain", 0.0, 0.5 * o.j});
    write_file(path_in(o, "jwt_spin.csv"), csv.str());
    ordered_json j;
    j["m"] = spec.m;
    j["j"] = o.j;
    j["omega"] = o.omega;
    j["i_site"] = spec.i_site;
    j["f_site"] = spec.f_site;
    j["sup_gap"] = gap;
    j["tolerance"] = 1e-10;
    j["pass"] = gap <= 1e-10;
    write_file(path_in(o, "jwt_check.json"), j.dump(2) + "\n");
    std::cout << "spin vs fermion sup-norm gap " << format_number(gap, 3) << "\n";
    r.manifest("jwt-check", {},
               std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(),
               {"jwt_spin.csv", "jwt_check.json"});
    return gap <= 1e-10 ? kOk : kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Non-Markovian decay of a local excitation coupled to tight-binding baths"};
    app.set_version_flag("--version", NMDECAY_VERSION);
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key = value file; flags win");

    app.option_defaults()->always_capture_default();
    Options o;
    app.add_option("--case", o.case_name, "topology: I, II, III, IV, V, VI, FiveSite");
    app.add_option("--vab", o.v_ab, "system hopping V_AB");
    app.add_option("--v0", o.v0, "system-bath hopping V0");
    app.add_option("--v", o.v, "bath hopping V");
    app.add_option("--ea", o.e_a, "site energy of A");
    app.add_option("--eb", o.e_b, "site energy of B");
    app.add_option("--eenv", o.e_env, "bath site energy");
    app.add_option("--n-env", o.n_env, "sites per semi-infinite direction (0 = auto)");
    app.add_option("--vs", o.v_s, "five-site intra-system hopping");
    app.add_option("--five-initial", o.five_initial, "five-site initial site (0..4)");
    app.add_option("--tmax", o.t_max, "horizon in hbar/V_AB");
    app.add_option("--dt", o.dt, "time step");
    app.add_option("--out", o.out, "output directory");
    app.add_option("--threads", o.threads, "worker threads (0 = NMDECAY_THREADS or all cores)");

    // Every option lives on the top-level app so a flat config file can set any of them.
    auto* g_ldos = app.add_option_group("ldos");
    g_ldos->add_option("--kind", o.ldos_kind, "surface, bulk or site_A");
    g_ldos->add_option("--points", o.points, "grid points");
    auto* g_poles = app.add_option_group("poles");
    g_poles->add_option("--directions", o.directions, "forward and/or backward")->delimiter(',');
    auto* g_sweep = app.add_option_group("sweep");
    g_sweep->add_option("--v0-list", o.v0_list, "comma-separated V0 values")->delimiter(',');
    auto* g_table = app.add_option_group("table1");
    g_table->add_option("--tolerance", o.tolerance, "absolute tolerance per rate");
    g_table->add_option("--v0-ratio", o.v0_ratio, "V0 / V for every row");
    g_table->add_option("--table-n-env", o.table_n_env, "chain length per row");
    auto* g_jwt = app.add_option_group("jwt-check");
    g_jwt->add_option("--m", o.spins, "number of spins");
    g_jwt->add_option("--j", o.j, "uniform XY coupling J");
    g_jwt->add_option("--omega", o.omega, "uniform field");
    g_jwt->add_option("--i", o.i_site, "initially flipped spin");
    g_jwt->add_option("--f", o.f_site, "observed spin (-1 = last)");

    auto* sp = app.add_subcommand("sp", "survival probability trace");
    auto* le = app.add_subcommand("le", "Loschmidt echo trace");
    auto* ldos = app.add_subcommand("ldos", "local density of states curve");
    auto* poles = app.add_subcommand("poles", "Green's-function poles");
    auto* rates = app.add_subcommand("rates", "fitted SP and LE rates");
    auto* sweep = app.add_subcommand("sweep", "rates over a list of V0");
    auto* table = app.add_subcommand("table1", "reference table of rates for all cases");
    auto* jwt = app.add_subcommand("jwt-check", "spin chain vs free-fermion propagator");
    for (auto* sub : {sp, le, ldos, poles, rates, sweep, table, jwt}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidation;
    }

    Runner runner(app, o);
    try {
        if (*sp) return cmd_trace(o, runner, TraceKind::SP);
        if (*le) return cmd_trace(o, runner, TraceKind::LE);
        if (*ldos) return cmd_ldos(o, runner);
        if (*poles) return cmd_poles(o, runner);
        if (*rates) return cmd_rates(o, runner);
        if (*sweep) return cmd_sweep(o, runner);
        if (*table) return cmd_table1(o, runner);
        if (*jwt) return cmd_jwt(o, runner);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    }
    return kValidation;
}
