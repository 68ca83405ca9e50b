// rates.hpp: Decay-rate extraction from SP/LE traces, V0 sweeps and the reference-table report
//
// Rates inside RateEstimate are absolute (1/time, hbar = 1) until normalized()
// rescales them to units of V0^2/(hbar V).

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nmdecay/dynamics.hpp"
#include "nmdecay/error.hpp"
#include "nmdecay/spectral.hpp"

namespace nmdecay {

struct FitWindow {
    double t_lo = 0.0;
    double t_hi = 0.0;
};

struct RateEstimate {
    double rate = 0.0;
    double std_error = 0.0;
    double r_squared = 0.0;
    FitWindow window;
    int n_points = 0;
    /// Largest shift of the rate when only one half of the window is fitted.
    double window_spread = 0.0;

    /// Regression stderr and window sensitivity added in quadrature.
    double combined_error() const;
    /// Same fit expressed in units of v0^2 / v.
    RateEstimate normalized(double v0, double v) const;
};

/// Thrown when a fit exists but fails the r^2 >= 0.99 acceptance threshold.
class FitRejected : public NumericalError {
public:
    FitRejected(const std::string& what, RateEstimate estimate)
        : NumericalError(what), estimate(estimate) {}
    RateEstimate estimate;
};

inline constexpr double kMinRSquared = 0.99;
inline constexpr double kAutoWindowRSquared = 0.999;
inline constexpr double kMonotoneRiseTolerance = 1e-3;
inline constexpr double kFloorProbability = 1e-3;

/// Largest single-step increase of p.
double max_rise(const TimeSeries& s);
inline bool is_monotone(const TimeSeries& s) { return max_rise(s) <= kMonotoneRiseTolerance; }

/// Local maxima of p (strict three-point peaks, vertices refined by a parabola
/// through the neighbours; two-sample plateaus count once). A series with no
/// rise above kMonotoneRiseTolerance is returned unchanged. Throws
/// NumericalError with fewer than 4 peaks.
TimeSeries envelope(const TimeSeries& series);

struct FitOptions {
    /// Sampling step of the underlying grid; stderr is inflated by
    /// sqrt(mean point spacing / grid_dt). Zero disables the inflation.
    double grid_dt = 0.0;
    bool enforce_r_squared = true;
};

/// Least squares on (t, ln p) over points with t in [t_lo, t_hi] and p > 0.
RateEstimate fit_exponential(const TimeSeries& series, const FitWindow& window,
                             const FitOptions& options = {});

/// Longest window with r^2 >= kAutoWindowRSquared and t_lo >= t_min.
RateEstimate fit_exponential_auto(const TimeSeries& series, double t_min,
                                  const FitOptions& options = {});

/// t_lo = max(2/v, first envelope peak after t = 0); t_hi = last point before
/// p falls under kFloorProbability. `peaks` says whether the series holds
/// envelope peaks (SP) or a passed-through monotone trace.
FitWindow default_window(const TimeSeries& envelope_series, double v, bool peaks);

/// Fills `window_spread` of a fit made on `series` by refitting each half window.
void attach_window_spread(RateEstimate& estimate, const TimeSeries& series);

/// Envelope + default window + fit (with window spread), normalized to V0^2/(hbar V).
RateEstimate trace_rate(const TimeSeries& series, double v0, double v, double grid_dt);

// ---------------------------------------------------------------------------

struct RunSettings {
    double t_max = 40.0;
    double dt = 0.05;
    int n_env = 0;  // 0 = auto-size from t_max and v
};

/// The spec with n_env set per RunSettings (auto-sized when 0).
SystemSpec sized(SystemSpec spec, const RunSettings& run);

struct TraceRates {
    std::optional<RateEstimate> sp;
    std::optional<RateEstimate> le;
    std::string sp_error;
    std::string le_error;
};

/// Simulates one spec and fits both traces (failures are recorded, not thrown).
TraceRates measure_rates(const SystemSpec& spec, const RunSettings& run);

struct SweepPoint {
    double v0 = 0.0;
    TraceRates rates;
};

struct SweepSlope {
    double slope = 0.0;      // rate per V0^2/(hbar V)
    double std_error = 0.0;
    double max_relative_residual = 0.0;
    int n_points = 0;
};

struct SweepResult {
    CaseId case_id = CaseId::I;
    double v = 1.0;
    std::vector<SweepPoint> points;  // sorted by v0
    std::optional<SweepSlope> sp_slope;
    std::optional<SweepSlope> le_slope;
};

/// Origin-constrained regression of absolute rate on x = v0^2/v.
SweepSlope origin_slope(const std::vector<double>& x, const std::vector<double>& y);

/// One job per v0 (parallel, deterministic aggregation sorted by v0).
SweepResult rate_sweep(const SystemSpec& base, std::vector<double> v0_list,
                       const RunSettings& run, int threads = 0);

// ---------------------------------------------------------------------------

struct Table1Row {
    std::string label;
    CaseId case_id = CaseId::I;
    double v = 1.0;
    double ref_sp = 0.0;
    double ref_le = 0.0;
    double wba = 0.0;
    double scfgr_forward = 0.0;
    double scfgr_backward = 0.0;
    double le_prediction = 0.0;
    TraceRates fitted;  // normalized
    bool sp_pass = false;
    bool le_pass = false;
};

struct Table1Report {
    double v0_over_v = 0.1;
    double tolerance = 0.07;
    RunSettings run;
    std::vector<Table1Row> rows;

    bool all_pass() const;
};

struct Table1Config {
    double v0_over_v = 0.1;
    double tolerance = 0.07;
    RunSettings run{40.0, 0.05, 2000};
    int threads = 0;
};

/// Reference rows (label, case, V/V_AB, SP, LE) and their expected fitted values.
std::vector<Table1Row> table1_reference();

Table1Report table1_report(const Table1Config& config);

/// Aligned text table mirroring the reference columns.
std::string format_table(const Table1Report& report);

}  // namespace nmdecay
