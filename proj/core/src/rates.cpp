#include "nmdecay/rates.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "nmdecay/parallel.hpp"

namespace nmdecay {

RateEstimate RateEstimate::normalized(double v0, double v) const {
    RateEstimate r = *this;
    const double unit = v0 * v0 / v;
    r.rate /= unit;
    r.std_error /= unit;
    r.window_spread /= unit;
    return r;
}

double RateEstimate::combined_error() const { return std::hypot(std_error, window_spread); }

double max_rise(const TimeSeries& s) {
    double rise = 0.0;
    for (std::size_t i = 1; i < s.p.size(); ++i) rise = std::max(rise, s.p[i] - s.p[i - 1]);
    return rise;
}

TimeSeries envelope(const TimeSeries& series) {
    if (is_monotone(series)) return series;
    const auto& t = series.t;
    const auto& p = series.p;
    TimeSeries out;
    out.kind = series.kind;
    if (p.size() >= 2 && p[0] >= p[1]) {
        out.t.push_back(t[0]);
        out.p.push_back(p[0]);
    }
    for (std::size_t i = 1; i + 1 < p.size(); ++i) {
        if (!(p[i] > p[i - 1] && p[i] >= p[i + 1])) continue;
        const double h = 0.5 * (t[i + 1] - t[i - 1]);
        const double curv = p[i - 1] - 2.0 * p[i] + p[i + 1];
        double tv = t[i], pv = p[i];
        if (curv < 0.0) {
            const double delta = 0.5 * (p[i - 1] - p[i + 1]) / curv;
            tv = t[i] + delta * h;
            pv = p[i] - 0.25 * (p[i - 1] - p[i + 1]) * delta;
        }
        out.t.push_back(tv);
        out.p.push_back(std::min(pv, 1.0));
    }
    if (out.size() < 4) {
        std::ostringstream os;
        os << "envelope: only " << out.size() << " peaks found in " << series.size()
           << " samples (need 4; is the oscillation resolved?)";
        throw NumericalError(os.str());
    }
    return out;
}

namespace {

struct Sums {
    double n = 0, t = 0, y = 0, tt = 0, ty = 0, yy = 0;

    void add(double ti, double yi) {
        n += 1;
        t += ti;
        y += yi;
        tt += ti * ti;
        ty += ti * yi;
        yy += yi * yi;
    }
    Sums minus(const Sums& o) const {
        return {n - o.n, t - o.t, y - o.y, tt - o.tt, ty - o.ty, yy - o.yy};
    }
    double sxx() const { return tt - t * t / n; }
    double sxy() const { return ty - t * y / n; }
    double syy() const { return yy - y * y / n; }
    double r_squared() const {
        const double syy_ = syy();
        if (syy_ <= 1e-300) return 1.0;
        return sxy() * sxy() / (sxx() * syy_);
    }
};

}  // namespace

namespace {

std::string rejection_message(const RateEstimate& est) {
    std::ostringstream os;
    os << "fit_exponential: r^2 = " << est.r_squared << " < " << kMinRSquared << " on ["
       << est.window.t_lo << ", " << est.window.t_hi << "] (decay is not exponential there)";
    return os.str();
}

}  // namespace

RateEstimate fit_exponential(const TimeSeries& series, const FitWindow& window,
                             const FitOptions& options) {
    std::vector<double> ts, ys;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const double t = series.t[i];
        if (t < window.t_lo || t > window.t_hi || !(series.p[i] > 0.0)) continue;
        ts.push_back(t);
        ys.push_back(std::log(series.p[i]));
    }
    const auto n = static_cast<int>(ts.size());
    if (n < 3) {
        std::ostringstream os;
        os << "fit_exponential: " << n << " usable points in [" << window.t_lo << ", "
           << window.t_hi << "], need at least 3";
        throw NumericalError(os.str());
    }
    // Centred two-pass regression.
    double tm = 0.0, ym = 0.0;
    for (int i = 0; i < n; ++i) {
        tm += ts[i];
        ym += ys[i];
    }
    tm /= n;
    ym /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (int i = 0; i < n; ++i) {
        sxx += (ts[i] - tm) * (ts[i] - tm);
        sxy += (ts[i] - tm) * (ys[i] - ym);
        syy += (ys[i] - ym) * (ys[i] - ym);
    }
    const double slope = sxy / sxx;
    double ssr = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = ys[i] - ym - slope * (ts[i] - tm);
        ssr += r * r;
    }

    RateEstimate est;
    est.rate = -slope;
    est.n_points = n;
    est.window = {ts.front(), ts.back()};
    est.r_squared = syy > 0.0 ? std::clamp(1.0 - ssr / syy, 0.0, 1.0) : 1.0;
    est.std_error = n > 2 ? std::sqrt(ssr / (n - 2) / sxx) : 0.0;
    if (options.grid_dt > 0.0) {
        const double spacing = (ts.back() - ts.front()) / (n - 1);
        est.std_error *= std::sqrt(std::max(1.0, spacing / options.grid_dt));
    }
    if (options.enforce_r_squared && est.r_squared < kMinRSquared) {
        throw FitRejected(rejection_message(est), est);
    }
    return est;
}

RateEstimate fit_exponential_auto(const TimeSeries& series, double t_min,
                                  const FitOptions& options) {
    std::vector<double> ts;
    std::vector<Sums> prefix{Sums{}};
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (series.t[i] < t_min || !(series.p[i] > 0.0)) continue;
        ts.push_back(series.t[i]);
        Sums s = prefix.back();
        s.add(series.t[i], std::log(series.p[i]));
        prefix.push_back(s);
    }
    const std::size_t n = ts.size();
    constexpr std::size_t kMinPoints = 4;
    double best_len = -1.0;
    FitWindow best{};
    for (std::size_t i = 0; i + kMinPoints <= n; ++i) {
        for (std::size_t j = n; j >= i + kMinPoints; --j) {
            const double len = ts[j - 1] - ts[i];
            if (len <= best_len) break;
            const Sums s = prefix[j].minus(prefix[i]);
            if (s.r_squared() >= kAutoWindowRSquared) {
                best_len = len;
                best = {ts[i], ts[j - 1]};
                break;
            }
        }
    }
    if (best_len < 0.0) {
        throw NumericalError("fit_exponential_auto: no window reaches r^2 >= 0.999");
    }
    return fit_exponential(series, best, options);
}

FitWindow default_window(const TimeSeries& env, double v, bool peaks) {
    FitWindow w;
    w.t_lo = 2.0 / v;
    if (peaks) {
        for (double t : env.t) {
            if (t > 0.0) {
                w.t_lo = std::max(w.t_lo, t);
                break;
            }
        }
    }
    w.t_hi = w.t_lo;
    for (std::size_t i = 0; i < env.size(); ++i) {
        if (env.t[i] < w.t_lo) continue;
        if (env.p[i] < kFloorProbability) break;
        w.t_hi = env.t[i];
    }
    return w;
}

void attach_window_spread(RateEstimate& estimate, const TimeSeries& series) {
    const double mid = 0.5 * (estimate.window.t_lo + estimate.window.t_hi);
    FitOptions loose;
    loose.enforce_r_squared = false;
    double spread = 0.0;
    for (const FitWindow half : {FitWindow{estimate.window.t_lo, mid}, FitWindow{mid, estimate.window.t_hi}}) {
        try {
            spread = std::max(spread, std::abs(fit_exponential(series, half, loose).rate - estimate.rate));
        } catch (const NumericalError&) {
            // too few points in this half; it says nothing about sensitivity
        }
    }
    estimate.window_spread = spread;
}

RateEstimate trace_rate(const TimeSeries& series, double v0, double v, double grid_dt) {
    const bool peaks = !is_monotone(series);
    const TimeSeries env = envelope(series);
    const FitWindow window = default_window(env, v, peaks);
    FitOptions options;
    options.grid_dt = grid_dt;
    options.enforce_r_squared = false;
    RateEstimate est = fit_exponential(env, window, options);
    attach_window_spread(est, env);
    est = est.normalized(v0, v);
    if (est.r_squared < kMinRSquared) {
        throw FitRejected(rejection_message(est), est);
    }
    return est;
}

// ---------------------------------------------------------------------------

SystemSpec sized(SystemSpec spec, const RunSettings& run) {
    if (run.n_env > 0) {
        spec.n_env = run.n_env;
    } else {
        spec.n_env = required_env_length(spec.v, run.t_max) + (spec.case_id == CaseId::FiveSite ? 2 : 0);
    }
    return spec;
}

namespace {

void fit_into(const TimeSeries& s, const SystemSpec& spec, double dt,
              std::optional<RateEstimate>& slot, std::string& error) {
    try {
        slot = trace_rate(s, spec.v0, spec.v, dt);
    } catch (const FitRejected& e) {
        slot = e.estimate;
        error = e.what();
    } catch (const NumericalError& e) {
        error = e.what();
    }
}

}  // namespace

TraceRates measure_rates(const SystemSpec& spec, const RunSettings& run) {
    const SystemSpec s = sized(spec, run);
    const Traces traces = simulate(s, run.t_max, run.dt);
    TraceRates out;
    fit_into(traces.sp, s, run.dt, out.sp, out.sp_error);
    fit_into(traces.le, s, run.dt, out.le, out.le_error);
    return out;
}

SweepSlope origin_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.empty()) {
        throw ConfigError("origin_slope: need matching, non-empty x and y");
    }
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    SweepSlope s;
    s.slope = sxy / sxx;
    s.n_points = static_cast<int>(x.size());
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double fit = s.slope * x[i];
        ssr += (y[i] - fit) * (y[i] - fit);
        s.max_relative_residual = std::max(s.max_relative_residual, std::abs(y[i] - fit) / std::abs(fit));
    }
    s.std_error = x.size() > 1 ? std::sqrt(ssr / static_cast<double>(x.size() - 1) / sxx) : 0.0;
    return s;
}

SweepResult rate_sweep(const SystemSpec& base, std::vector<double> v0_list, const RunSettings& run,
                       int threads) {
    if (v0_list.empty()) throw ConfigError("rate_sweep: empty v0 list");
    std::sort(v0_list.begin(), v0_list.end());
    v0_list.erase(std::unique(v0_list.begin(), v0_list.end()), v0_list.end());
    std::vector<SystemSpec> specs;
    for (double v0 : v0_list) {
        SystemSpec s = base;
        s.v0 = v0;
        s = sized(s, run);
        s.validate();
        build_hamiltonian(s, run.t_max);  // surface size errors before any heavy work
        specs.push_back(s);
    }

    SweepResult out;
    out.case_id = base.case_id;
    out.v = base.v;
    auto rates = parallel_map(specs, [&](const SystemSpec& s) { return measure_rates(s, run); },
                              threads);
    std::vector<double> xs_sp, ys_sp, xs_le, ys_le;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const double x = specs[i].v0 * specs[i].v0 / specs[i].v;
        if (rates[i].sp && rates[i].sp_error.empty()) {
            xs_sp.push_back(x);
            ys_sp.push_back(rates[i].sp->rate * x);
        }
        if (rates[i].le && rates[i].le_error.empty()) {
            xs_le.push_back(x);
            ys_le.push_back(rates[i].le->rate * x);
        }
        out.points.push_back({specs[i].v0, std::move(rates[i])});
    }
    if (!xs_sp.empty()) out.sp_slope = origin_slope(xs_sp, ys_sp);
    if (!xs_le.empty()) out.le_slope = origin_slope(xs_le, ys_le);
    return out;
}

// ---------------------------------------------------------------------------

bool Table1Report::all_pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const Table1Row& r) { return r.sp_pass && r.le_pass; });
}

std::vector<Table1Row> table1_reference() {
    auto row = [](std::string label, CaseId id, double v, double sp, double le) {
        Table1Row r;
        r.label = std::move(label);
        r.case_id = id;
        r.v = v;
        r.ref_sp = sp;
        r.ref_le = le;
        return r;
    };
    return {
        row("I", CaseId::I, 1.0, 2.04, 2.04),
        row("II", CaseId::II, 1.0, 1.00, 1.00),
        row("III (V=V_AB)", CaseId::III, 1.0, 0.88, 0.88),
        row("III (V=5V_AB)", CaseId::III, 5.0, 1.00, 1.00),
        row("IV (V=V_AB)", CaseId::IV, 1.0, 0.56, 0.56),
        row("IV (V=5V_AB)", CaseId::IV, 5.0, 0.50, 0.50),
        row("V", CaseId::V, 1.0, 1.16, 1.16),
        row("VI (V=V_AB)", CaseId::VI, 1.0, 1.71, 1.20),
        row("VI (V=5V_AB)", CaseId::VI, 5.0, 1.11, 1.02),
    };
}

Table1Report table1_report(const Table1Config& config) {
    Table1Report report;
    report.v0_over_v = config.v0_over_v;
    report.tolerance = config.tolerance;
    report.run = config.run;
    report.rows = table1_reference();

    std::vector<SystemSpec> specs;
    for (Table1Row& r : report.rows) {
        SystemSpec s;
        s.case_id = r.case_id;
        s.v = r.v;
        s.v0 = config.v0_over_v * r.v;
        specs.push_back(sized(s, config.run));
        r.wba = wba_rate(r.case_id, r.v);
        r.scfgr_forward = scfgr_rate(r.case_id, 1.0, r.v, Direction::Forward);
        r.scfgr_backward = scfgr_rate(r.case_id, 1.0, r.v, Direction::Backward);
        r.le_prediction = le_rate_prediction(r.case_id, 1.0, r.v);
    }
    auto fitted = parallel_map(specs, [&](const SystemSpec& s) { return measure_rates(s, config.run); },
                               config.threads);
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        Table1Row& r = report.rows[i];
        r.fitted = std::move(fitted[i]);
        auto pass = [&](const std::optional<RateEstimate>& e, const std::string& err, double ref) {
            return e && err.empty() && std::abs(e->rate - ref) <= config.tolerance;
        };
        r.sp_pass = pass(r.fitted.sp, r.fitted.sp_error, r.ref_sp);
        r.le_pass = pass(r.fitted.le, r.fitted.le_error, r.ref_le);
    }
    return report;
}

std::string format_table(const Table1Report& report) {
    std::ostringstream os;
    auto cell = [&](const std::optional<RateEstimate>& e, const std::string& err) {
        std::ostringstream c;
        if (!e) {
            c << "n/a";
        } else {
            c << std::fixed << std::setprecision(3) << e->rate << "+-" << std::setprecision(3)
              << e->std_error << (err.empty() ? "" : "!");
        }
        return c.str();
    };
    os << "rates in units V0^2/(hbar V); V0 = " << report.v0_over_v << " V, t_max = " << report.run.t_max
       << ", dt = " << report.run.dt << ", tolerance +-" << report.tolerance << "\n";
    os << std::left << std::setw(15) << "case" << std::setw(16) << "SP fit" << std::setw(16) << "LE fit"
       << std::setw(12) << "ref SP/LE" << std::setw(7) << "WBA" << std::setw(9) << "SCFGR-f"
       << std::setw(9) << "SCFGR-b" << std::setw(9) << "LE mean" << "pass\n";
    for (const Table1Row& r : report.rows) {
        std::ostringstream ref;
        ref << std::fixed << std::setprecision(2) << r.ref_sp << "/" << r.ref_le;
        os << std::left << std::setw(15) << r.label << std::setw(16) << cell(r.fitted.sp, r.fitted.sp_error)
           << std::setw(16) << cell(r.fitted.le, r.fitted.le_error) << std::setw(12) << ref.str()
           << std::fixed << std::setprecision(3) << std::setw(7) << r.wba << std::setw(9)
           << r.scfgr_forward << std::setw(9) << r.scfgr_backward << std::setw(9) << r.le_prediction
           << (r.sp_pass ? "SP " : "sp!") << (r.le_pass ? " LE" : " le!") << "\n";
    }
    os << (report.all_pass() ? "all rows within tolerance" : "some rows outside tolerance") << "\n";
    return os.str();
}

}  // namespace nmdecay
