#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const fs::path& scratch() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "nmdecay_cli_tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

// Runs the tool inside the scratch directory; returns its exit status.
int run(const std::string& args, const std::string& env = "") {
    const std::string cmd = "cd '" + scratch().string() + "' && " + env + " '" NMDECAY_CLI "' " + args +
                            " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(scratch() / p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

nlohmann::json load(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

}  // namespace

TEST_CASE("identical configs give byte-identical outputs") {
    REQUIRE(run("sp --case IV --v0 0.1 --v 1 --tmax 40 --out det1") == 0);
    REQUIRE(run("sp --case IV --v0 0.1 --v 1 --tmax 40 --out det2") == 0);
    const std::string a = slurp("det1/sp_IV.csv");
    CHECK(!a.empty());
    CHECK(a == slurp("det2/sp_IV.csv"));

    REQUIRE(run("rates --case III --out det3") == 0);
    REQUIRE(run("rates --case III --out det4") == 0);
    CHECK(slurp("det3/rates_III.json") == slurp("det4/rates_III.json"));
}

TEST_CASE("trace CSV starts at p = 1 and the manifest records the auto chain length") {
    REQUIRE(run("sp --case IV --v0 0.1 --v 1 --tmax 40 --out auto") == 0);
    std::istringstream csv(slurp("auto/sp_IV.csv"));
    std::string header, columns, first;
    std::getline(csv, header);
    std::getline(csv, columns);
    std::getline(csv, first);
    CHECK(header == "# case=IV v0=0.1 v=1 kind=SP");
    CHECK(columns == "t,p");
    CHECK(first == "0,1");

    const auto m = load("auto/manifest.json");
    CHECK(m["command"] == "sp");
    CHECK(m["n_env_auto"] == true);
    CHECK(m["config"]["n-env"] == 0);
    CHECK(m["spec"]["n_env"] == 120);
    CHECK(m["outputs"][0] == "sp_IV.csv");
    CHECK(m.contains("wall_time_s"));
    CHECK(m.contains("version"));
}

TEST_CASE("poles for the public bath") {
    REQUIRE(run("poles --case VI --v 1 --vab 1 --v0 0.1 --out poles") == 0);
    const auto j = load("poles/poles_VI.json");
    REQUIRE(j.size() == 4);  // forward exact, forward leading, backward exact, backward leading
    CHECK(j[0]["direction"] == "forward");
    CHECK(j[1]["rate_normalized"].get<double>() == doctest::Approx(std::sqrt(3.0)).epsilon(1e-6));
    CHECK(std::abs(j[0]["rate_normalized"].get<double>() - 1.732) < 0.01);
    CHECK(j[0]["residual"].get<double>() <= 1e-10);
}

TEST_CASE("bulk LDoS curve grows toward the band edges") {
    REQUIRE(run("ldos --kind bulk --v 1 --points 200 --out ldos") == 0);
    std::istringstream csv(slurp("ldos/ldos_bulk.csv"));
    std::string line;
    std::vector<double> values;
    while (std::getline(csv, line)) {
        if (line.empty() || line[0] == '#' || line == "energy,ldos") continue;
        values.push_back(std::stod(line.substr(line.find(',') + 1)));
    }
    REQUIRE(values.size() == 200);
    CHECK(values.front() > 5 * values[100]);
    CHECK(values.back() > 5 * values[100]);
}

TEST_CASE("exit codes") {
    CHECK(run("sp --case III --v0 0.9 --out bad") == 1);       // weak-coupling guard
    CHECK(run("sp --case III --n-env 10 --out bad") == 1);     // reflection guard
    CHECK(run("sp --case VII --out bad") == 1);
    CHECK(run("frobnicate") == 1);
    CHECK(run("rates --case III --tmax 5 --out short") == 3);  // too few envelope peaks to fit
    CHECK(run("sweep --case II --v0-list 0.05,0.1 --out sw", "NMDECAY_THREADS=zero") == 1);
    CHECK(run("table1 --tmax 10 --table-n-env 160 --tolerance 0 --out t1") == 2);
    const auto t = load("t1/table1.json");
    CHECK(t["rows"].size() == 9);
    CHECK(t["all_pass"] == false);
}

TEST_CASE("sweep writes slope JSON and plot CSV") {
    REQUIRE(run("sweep --case II --v0-list 0.1,0.05 --threads 2 --out sweep") == 0);
    const auto j = load("sweep/sweep_II.json");
    CHECK(j["points"][0]["v0"] == 0.05);
    CHECK(std::abs(j["sp_slope"]["slope"].get<double>() - 1.0) < 0.02);
    CHECK(slurp("sweep/sweep_II.csv").rfind("# case=II v=1\nx,rate_sp,rate_le\n", 0) == 0);
}

TEST_CASE("replay.cfg reproduces the run") {
    REQUIRE(run("jwt-check --m 8 --j 1.5 --i 2 --f 6 --out r1") == 0);
    CHECK(load("r1/jwt_check.json")["sup_gap"].get<double>() <= 1e-10);
    REQUIRE(run("jwt-check --config r1/replay.cfg --out r2") == 0);
    CHECK(slurp("r1/jwt_check.json") == slurp("r2/jwt_check.json"));
    CHECK(slurp("r1/jwt_spin.csv") == slurp("r2/jwt_spin.csv"));

    REQUIRE(run("le --case VI --v0 0.1 --out r3") == 0);
    REQUIRE(run("le --config r3/replay.cfg --out r4") == 0);
    CHECK(slurp("r3/le_VI.csv") == slurp("r4/le_VI.csv"));
    const auto m = load("r3/manifest.json");
    CHECK(std::abs(m["fit"]["rate"].get<double>() - 1.20) <= 0.07);
}
