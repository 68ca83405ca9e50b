#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nmdecay/error.hpp"
#include "nmdecay/io.hpp"

using namespace nmdecay;

TEST_SUITE("io") {

TEST_CASE("trace CSV round-trips at 15 significant digits") {
    TimeSeries s;
    s.kind = TraceKind::LE;
    for (int k = 0; k < 50; ++k) {
        s.t.push_back(0.05 * k);
        s.p.push_back(std::exp(-0.013 * k) * (1.0 + 1e-9 * k));
    }
    std::stringstream buf;
    write_timeseries_csv(buf, s, {"VI", 0.1, 1.0});
    TraceHeader h;
    const TimeSeries back = read_timeseries_csv(buf, &h);
    CHECK(h.case_id == "VI");
    CHECK(h.v0 == 0.1);
    CHECK(h.v == 1.0);
    CHECK(back.kind == TraceKind::LE);
    REQUIRE(back.size() == s.size());
    for (std::size_t k = 0; k < s.size(); ++k) {
        CHECK(back.t[k] == doctest::Approx(s.t[k]).epsilon(1e-14));
        CHECK(back.p[k] == doctest::Approx(s.p[k]).epsilon(1e-14));
    }
}

TEST_CASE("trace CSV layout") {
    TimeSeries s;
    s.t = {0.0, 0.05};
    s.p = {1.0, 0.123456789012345678};
    std::ostringstream os;
    write_timeseries_csv(os, s, {"III", 0.1, 5.0});
    CHECK(os.str() == "# case=III v0=0.1 v=5 kind=SP\nt,p\n0,1\n0.05,0.123456789012346\n");
}

TEST_CASE("malformed rows are rejected") {
    std::istringstream in("t,p\n0.1 0.2\n");
    CHECK_THROWS_AS(read_timeseries_csv(in), ConfigError);
}

TEST_CASE("number formatting") {
    CHECK(format_number(1.0 / 3.0) == "0.333333333333333");
    CHECK(format_number(1.0 / 3.0, 3) == "0.333");
    CHECK(format_number(2e-20) == "2e-20");
}

TEST_CASE("rate estimate JSON fields") {
    RateEstimate r;
    r.rate = 0.87;
    r.std_error = 0.004;
    r.window_spread = 0.01;
    r.r_squared = 0.9991;
    r.window = {2.0, 38.5};
    r.n_points = 12;
    const auto j = to_json(r);
    CHECK(j["rate"] == 0.87);
    CHECK(j["stderr"] == 0.004);
    CHECK(j["window_spread"] == 0.01);
    CHECK(j["window"][1] == 38.5);
    CHECK(j["n_points"] == 12);

    TraceRates tr;
    tr.sp = r;
    tr.le_error = "envelope: only 2 peaks";
    const auto t = to_json(tr);
    CHECK(t["sp"]["accepted"] == true);
    CHECK(t["le"]["accepted"] == false);
    CHECK(t["le"]["error"] == "envelope: only 2 peaks");
}

TEST_CASE("spec and pole JSON") {
    SystemSpec s;
    s.case_id = CaseId::FiveSite;
    s.v_s = 0.8;
    const auto j = to_json(s);
    CHECK(j["case"] == to_string(CaseId::FiveSite));
    CHECK(j["v_s"] == 0.8);
    s.case_id = CaseId::II;
    CHECK_FALSE(to_json(s).contains("v_s"));

    PolePrediction p;
    p.case_id = CaseId::VI;
    p.rate = 0.0173;
    p.v0 = 0.1;
    p.v = 1.0;
    CHECK(to_json(p)["rate_normalized"].get<double>() == doctest::Approx(1.73));
}

TEST_CASE("report JSON is schema versioned and ordered") {
    Table1Report r;
    r.rows = table1_reference();
    const auto j = to_json(r);
    CHECK(j["schema_version"] == kReportSchemaVersion);
    CHECK(j.begin().key() == "schema_version");
    CHECK(j["rows"].size() == 9);
    CHECK(j["rows"][7]["reference"]["le"] == 1.20);
    CHECK(j["all_pass"] == false);
    CHECK(to_json(r).dump() == j.dump());
}

TEST_CASE("sweep CSV uses absolute rates against v0^2/v") {
    SweepResult sw;
    sw.case_id = CaseId::II;
    sw.v = 2.0;
    RateEstimate e;
    e.rate = 1.5;  // normalized
    SweepPoint p;
    p.v0 = 0.2;
    p.rates.sp = e;
    p.rates.le_error = "rejected";
    sw.points.push_back(p);
    std::ostringstream os;
    write_sweep_csv(os, sw);
    CHECK(os.str() == "# case=II v=2\nx,rate_sp,rate_le\n0.02,0.03,nan\n");
}

TEST_CASE("write_file creates parent directories") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "nmdecay_io_test" / "nested";
    fs::remove_all(dir.parent_path());
    write_file((dir / "x.txt").string(), "hello\n");
    std::ifstream in(dir / "x.txt");
    std::string line;
    std::getline(in, line);
    CHECK(line == "hello");
    fs::remove_all(dir.parent_path());
}

}  // TEST_SUITE
