#include "nmdecay/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nmdecay/error.hpp"

namespace nmdecay {

using nlohmann::ordered_json;

std::string format_number(double x, int significant) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", significant, x);
    return buf;
}

void write_timeseries_csv(std::ostream& os, const TimeSeries& s, const TraceHeader& h) {
    os << "# case=" << h.case_id << " v0=" << format_number(h.v0) << " v=" << format_number(h.v)
       << " kind=" << to_string(s.kind) << "\n";
    os << "t,p\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        os << format_number(s.t[i]) << "," << format_number(s.p[i]) << "\n";
    }
}

TimeSeries read_timeseries_csv(std::istream& is, TraceHeader* header) {
    TimeSeries s;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream fields(line.substr(1));
            std::string kv;
            while (fields >> kv) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
                if (key == "kind") s.kind = value == "LE" ? TraceKind::LE : TraceKind::SP;
                if (!header) continue;
                if (key == "case") header->case_id = value;
                if (key == "v0") header->v0 = std::stod(value);
                if (key == "v") header->v = std::stod(value);
            }
            continue;
        }
        if (line == "t,p") continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ConfigError("trace CSV: malformed row '" + line + "'");
        s.t.push_back(std::stod(line.substr(0, comma)));
        s.p.push_back(std::stod(line.substr(comma + 1)));
    }
    return s;
}

void write_ldos_csv(std::ostream& os, const LdosCurve& c) {
    os << "# ldos kind=" << to_string(c.kind) << "\n";
    os << "energy,ldos\n";
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
        os << format_number(c.grid[i]) << "," << format_number(c.values[i]) << "\n";
    }
}

void write_sweep_csv(std::ostream& os, const SweepResult& sweep) {
    os << "# case=" << to_string(sweep.case_id) << " v=" << format_number(sweep.v) << "\n";
    os << "x,rate_sp,rate_le\n";
    for (const SweepPoint& p : sweep.points) {
        const double x = p.v0 * p.v0 / sweep.v;
        auto abs_rate = [&](const std::optional<RateEstimate>& e, const std::string& err) {
            return e && err.empty() ? format_number(e->rate * x) : std::string("nan");
        };
        os << format_number(x) << "," << abs_rate(p.rates.sp, p.rates.sp_error) << ","
           << abs_rate(p.rates.le, p.rates.le_error) << "\n";
    }
}

ordered_json to_json(const SystemSpec& s) {
    ordered_json j;
    j["case"] = to_string(s.case_id);
    j["v_ab"] = s.v_ab;
    j["v0"] = s.v0;
    j["v"] = s.v;
    j["e_a"] = s.e_a;
    j["e_b"] = s.e_b;
    j["e_env"] = s.e_env;
    j["n_env"] = s.n_env;
    if (s.case_id == CaseId::FiveSite) {
        j["v_s"] = s.v_s;
        j["five_site_initial"] = s.five_site_initial;
    }
    return j;
}

ordered_json to_json(const PolePrediction& p) {
    ordered_json j;
    j["case"] = to_string(p.case_id);
    j["direction"] = to_string(p.direction);
    j["delta0"] = p.delta0;
    j["gamma0"] = p.gamma0;
    j["rate"] = p.rate;
    j["rate_normalized"] = p.normalized_rate();
    j["order"] = to_string(p.order);
    j["residual"] = p.residual;
    return j;
}

ordered_json to_json(const RateEstimate& r) {
    ordered_json j;
    j["rate"] = r.rate;
    j["stderr"] = r.std_error;
    j["window_spread"] = r.window_spread;
    j["r_squared"] = r.r_squared;
    j["window"] = {r.window.t_lo, r.window.t_hi};
    j["n_points"] = r.n_points;
    return j;
}

ordered_json to_json(const TraceRates& r) {
    ordered_json j;
    auto one = [](const std::optional<RateEstimate>& e, const std::string& err) {
        ordered_json x = e ? to_json(*e) : ordered_json::object();
        x["accepted"] = e.has_value() && err.empty();
        if (!err.empty()) x["error"] = err;
        return x;
    };
    j["sp"] = one(r.sp, r.sp_error);
    j["le"] = one(r.le, r.le_error);
    return j;
}

ordered_json to_json(const SweepResult& s) {
    ordered_json j;
    j["schema_version"] = kReportSchemaVersion;
    j["case"] = to_string(s.case_id);
    j["v"] = s.v;
    j["points"] = ordered_json::array();
    for (const SweepPoint& p : s.points) {
        ordered_json x;
        x["v0"] = p.v0;
        x["x"] = p.v0 * p.v0 / s.v;
        x["rates"] = to_json(p.rates);
        j["points"].push_back(x);
    }
    auto slope = [](const std::optional<SweepSlope>& sl) {
        if (!sl) return ordered_json();
        ordered_json x;
        x["slope"] = sl->slope;
        x["stderr"] = sl->std_error;
        x["max_relative_residual"] = sl->max_relative_residual;
        x["n_points"] = sl->n_points;
        return x;
    };
    j["sp_slope"] = slope(s.sp_slope);
    j["le_slope"] = slope(s.le_slope);
    return j;
}

ordered_json to_json(const Table1Report& r) {
    ordered_json j;
    j["schema_version"] = kReportSchemaVersion;
    j["units"] = "V0^2/(hbar V)";
    j["v0_over_v"] = r.v0_over_v;
    j["tolerance"] = r.tolerance;
    j["t_max"] = r.run.t_max;
    j["dt"] = r.run.dt;
    j["n_env"] = r.run.n_env;
    j["rows"] = ordered_json::array();
    for (const Table1Row& row : r.rows) {
        ordered_json x;
        x["label"] = row.label;
        x["case"] = to_string(row.case_id);
        x["v"] = row.v;
        x["fitted"] = to_json(row.fitted);
        x["reference"] = {{"sp", row.ref_sp}, {"le", row.ref_le}};
        x["wba"] = row.wba;
        x["scfgr"] = {{"forward", row.scfgr_forward}, {"backward", row.scfgr_backward}};
        x["le_prediction"] = row.le_prediction;
        x["pass"] = {{"sp", row.sp_pass}, {"le", row.le_pass}};
        j["rows"].push_back(x);
    }
    j["all_pass"] = r.all_pass();
    return j;
}

void write_file(const std::string& path, const std::string& text) {
    namespace fs = std::filesystem;
    const fs::path p(path);
    std::error_code ec;
    if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw ConfigError("failed writing '" + path + "'");
}

}  // namespace nmdecay
