#include <doctest.h>

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

std::string temp_path(const std::string& name) {
    return std::string("/tmp/crtbp_cli_test_") + name;
}

int run_tool(const std::string& args) {
    const std::string cmd = std::string(CRTBP_TOOL_PATH) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("lagrange command emits the symmetric critical value") {
    const std::string out = temp_path("lagrange.json");
    const int rc = run_tool("lagrange --mu 0.5 --out " + out);
    CHECK(rc == 0);
    const auto j = nlohmann::json::parse(slurp(out));
    CHECK(j["c1"].get<double>() == doctest::Approx(-2.0).epsilon(1e-10));
    CHECK(j["header"]["mu"].get<double>() == 0.5);
    CHECK(j["header"].contains("toolkit_version"));
    CHECK(j["header"].contains("seed"));
}

TEST_CASE("certify passes below c1 and rejects the singular level") {
    const std::string out = temp_path("cert.json");
    const int rc =
        run_tool("certify --mu 0.5 --energy -2.2 --samples 2000 --seed 3 --out " + out);
    CHECK(rc == 0);
    const auto j = nlohmann::json::parse(slurp(out));
    CHECK(j["pass"].get<bool>());
    CHECK(j["regime"] == "below_c1");
    // Documented certificate keys.
    for (const char* key : {"mu", "c", "component", "min_xq", "away", "header"})
        CHECK(j.contains(key));
    const auto& away = j["away"];
    for (const char* key :
         {"mu", "c", "component", "n_samples", "min_margin", "argmin_state", "grid_spec", "pass"})
        CHECK(away.contains(key));

    // Exactly the critical level: usage error.
    CHECK(run_tool("certify --mu 0.5 --energy -2.0 --samples 100") == 2);
}

TEST_CASE("certify picks the glued regime above c1") {
    const std::string out = temp_path("cert_glued.json");
    const int rc =
        run_tool("certify --mu 0.5 --energy -1.995 --samples 3000 --seed 5 --out " + out);
    CHECK(rc == 0);
    const auto j = nlohmann::json::parse(slurp(out));
    CHECK(j["regime"] == "glued_above_c1");
    CHECK(j["pass"].get<bool>());
    for (const char* key : {"a", "b", "gamma", "s0", "s1", "min_z", "moon_away", "earth_away"})
        CHECK(j.contains(key));
}

TEST_CASE("identical config and seed give byte-identical outputs") {
    const std::string out1 = temp_path("det1.json");
    const std::string out2 = temp_path("det2.json");
    const std::string args = "certify --mu 0.4 --energy -2.3 --samples 2000 --seed 11 --out ";
    CHECK(run_tool(args + out1) == 0);
    CHECK(run_tool(args + out2) == 0);
    const std::string a = slurp(out1);
    CHECK(!a.empty());
    CHECK(a == slurp(out2));

    const std::string out3 = temp_path("det3.json");
    CHECK(run_tool("certify --mu 0.4 --energy -2.3 --samples 2000 --seed 12 --out " + out3) == 0);
    CHECK(a != slurp(out3));
}

TEST_CASE("config file values load and flags win") {
    const std::string cfg = temp_path("config.cfg");
    {
        std::ofstream os(cfg);
        os << "# comment line\n";
        os << "mu=0.4\n";
        os << "energy=-2.3\n";
        os << "samples=1500\n";
    }
    const std::string out = temp_path("cfg_out.json");
    const int rc = run_tool("certify --config " + cfg + " --samples 800 --out " + out);
    CHECK(rc == 0);
    const auto j = nlohmann::json::parse(slurp(out));
    CHECK(j["mu"].get<double>() == 0.4);
    CHECK(j["n_reg_samples"].get<std::size_t>() == 800); // flag overrides config

    // Malformed config lines are a usage error.
    const std::string bad = temp_path("bad.cfg");
    {
        std::ofstream os(bad);
        os << "mu 0.4\n";
    }
    CHECK(run_tool("certify --config " + bad) == 2);
}

TEST_CASE("hill command writes a labeled CSV grid") {
    const std::string out = temp_path("hill.csv");
    const int rc = run_tool("hill --mu 0.5 --energy -2.2 --grid-n 32 --out " + out);
    CHECK(rc == 0);
    const std::string text = slurp(out);
    CHECK(text.find("q1,q2,q3,label") != std::string::npos);
    CHECK(text.find("moon") != std::string::npos);
    CHECK(text.find("# mu=0.5") != std::string::npos);
}

TEST_CASE("integrate command emits a trajectory with conserved energy") {
    const std::string out = temp_path("traj.csv");
    const int rc = run_tool(
        "integrate --mu 0.5 --state 0.15 0 0 0 -2.11 0 --t-final 2.0 --step-h 0.001 "
        "--stride 100 --out " +
        out);
    CHECK(rc == 0);
    const std::string text = slurp(out);
    CHECK(text.find("t,s,chart,x0") != std::string::npos);

    // Invariant column stays nearly constant.
    std::istringstream in(text);
    std::string line;
    double first = 0.0, last = 0.0;
    bool have_first = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 't') continue;
        std::size_t pos = 0;
        int commas = 0;
        while (commas < 11 && pos != std::string::npos) {
            pos = line.find(',', pos + 1);
            ++commas;
        }
        const double inv = std::stod(line.substr(pos + 1));
        if (!have_first) {
            first = inv;
            have_first = true;
        }
        last = inv;
    }
    CHECK(have_first);
    CHECK(std::abs(last - first) < 1e-9);
}

TEST_CASE("continue command reports the no-blue-sky verdict") {
    const std::string out = temp_path("family.csv");
    const std::string summary = temp_path("family.json");
    const int rc = run_tool("continue --mu 0.5 --radius 0.15 --energy-target -2.35 --steps 14 "
                            "--out " +
                            out + " --summary-out " + summary);
    CHECK(rc == 0);
    const std::string csv = slurp(out);
    CHECK(csv.find("r,c,tau,action,residual,k_local") != std::string::npos);
    const auto j = nlohmann::json::parse(slurp(summary));
    CHECK(j["bound_check"]["verdict"] == "NO_BLUE_SKY");
    CHECK(j["k_estimate"].get<double>() > 0.0);
    CHECK(!j["blue_sky_flagged"].get<bool>());
}

TEST_CASE("unknown options are usage errors") {
    CHECK(run_tool("certify --mu 0.5 --nonsense 1") == 2);
    CHECK(run_tool("") == 2);
}
