// io.hpp: CSV and JSON serialization for traces, LDoS curves, poles and reports
//
// Output is deterministic: fixed field order, fixed float formatting.

#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "nmdecay/dynamics.hpp"
#include "nmdecay/rates.hpp"
#include "nmdecay/spectral.hpp"

namespace nmdecay {

inline constexpr int kReportSchemaVersion = 1;

struct TraceHeader {
    std::string case_id;
    double v0 = 0.0;
    double v = 0.0;
};

/// "# case=<id> v0=<..> v=<..> kind=<SP|LE>", then "t,p" rows with 15 significant digits.
void write_timeseries_csv(std::ostream& os, const TimeSeries& series, const TraceHeader& header);
TimeSeries read_timeseries_csv(std::istream& is, TraceHeader* header = nullptr);

void write_ldos_csv(std::ostream& os, const LdosCurve& curve);

/// "x,rate_sp,rate_le" with x = v0^2/v and absolute rates.
void write_sweep_csv(std::ostream& os, const SweepResult& sweep);

std::string format_number(double x, int significant = 15);

nlohmann::ordered_json to_json(const SystemSpec& spec);
nlohmann::ordered_json to_json(const PolePrediction& pole);
nlohmann::ordered_json to_json(const RateEstimate& rate);
nlohmann::ordered_json to_json(const TraceRates& rates);
nlohmann::ordered_json to_json(const SweepResult& sweep);
nlohmann::ordered_json to_json(const Table1Report& report);

/// Writes text to `path`, creating parent directories. Throws ConfigError on failure.
void write_file(const std::string& path, const std::string& text);

}  // namespace nmdecay
