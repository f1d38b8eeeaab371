#include "rabiq/runner.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

using namespace rabiq;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    std::random_device rd;
    const fs::path dir = fs::temp_directory_path() / ("rabiq-test-" + name + "-" + std::to_string(rd()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write(const fs::path& file, const std::string& text) {
    std::ofstream(file) << text;
    return file;
}

std::string slurp(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run_in_process(Command cmd, const fs::path& config, unsigned jobs = 1, bool no_cache = false) {
    RunOptions o;
    o.command = cmd;
    o.config_path = config;
    o.jobs = jobs;
    o.no_cache = no_cache;
    std::ostringstream out;
    std::ostringstream err;
    const int code = run(o, out, err);
    return {code, out.str(), err.str()};
}

int cli(const std::string& args) {
    const std::string cmd = std::string(RABIQ_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

double column(const std::string& csv, std::size_t row, std::size_t col) {
    std::istringstream in(csv);
    std::string line;
    for (std::size_t i = 0; i <= row; ++i) {
        std::getline(in, line);
    }
    std::istringstream cells(line);
    std::string cell;
    for (std::size_t i = 0; i <= col; ++i) {
        std::getline(cells, cell, ',');
    }
    return std::stod(cell);
}

}  // namespace

TEST_CASE("simulate a decoupled quench") {
    const auto dir = scratch("simulate");
    const auto cfg = write(dir / "c.yaml", "g_final: 0\nomega_tau: 10\noutput_dir: " + (dir / "out").string() + "\n");
    const auto r = run_in_process(Command::simulate, cfg);
    CHECK(r.code == 0);
    const auto csv = slurp(dir / "out" / "simulate.csv");
    CHECK(csv.rfind("g_final,omega_tau,u_re,u_im,v_re,v_im,constraint_drift,E_r\n", 0) == 0);
    CHECK(std::abs(column(csv, 1, 7)) <= 1e-10);
    CHECK(r.out.find("E_r") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("ensemble CSV schema, determinism and cache soundness") {
    const auto dir = scratch("ensemble");
    const auto cache = dir / "cache";
    ::setenv(kCacheDirEnv, cache.c_str(), 1);
    const auto cfg = write(dir / "c.yaml",
                           "disorder_channel: time\nsigma: 0.1\nn_nodes: 5\nomega_dt: 0.05\n"
                           "omega_tau_min: 10\nomega_tau_max: 100\npoints_per_decade: 4\n"
                           "output_dir: " + (dir / "out").string() + "\n");
    const auto fresh = run_in_process(Command::ensemble, cfg, 1, true);
    REQUIRE(fresh.code == 0);
    const auto a = slurp(dir / "out" / "ensemble.csv");
    CHECK_FALSE(fs::exists(cache));

    std::istringstream lines(a);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "omega_tau,mean_Er,stderr_Er,n_realizations");
    double prev = 0.0;
    int rows = 0;
    while (std::getline(lines, line)) {
        ++rows;
        const double wt = std::stod(line.substr(0, line.find(',')));
        CHECK(wt > prev);
        prev = wt;
        // 12 significant digits: d.ddddddddddde[+-]xx
        const auto second = line.substr(line.find(',') + 1);
        CHECK(second.find('e') == 13);
    }
    CHECK(rows == 5);

    CHECK(run_in_process(Command::ensemble, cfg, 2).code == 0);  // populates the cache
    CHECK(slurp(dir / "out" / "ensemble.csv") == a);
    CHECK(fs::exists(cache));
    CHECK(run_in_process(Command::ensemble, cfg, 1).code == 0);  // cache hit
    CHECK(slurp(dir / "out" / "ensemble.csv") == a);
    fs::remove_all(cache);
    CHECK(run_in_process(Command::ensemble, cfg, 1).code == 0);  // recomputed after clearing
    CHECK(slurp(dir / "out" / "ensemble.csv") == a);

    ::unsetenv(kCacheDirEnv);
    fs::remove_all(dir);
}

TEST_CASE("cache directory defaults under the output directory") {
    ::unsetenv(kCacheDirEnv);
    ExperimentConfig c;
    c.output_dir = "/tmp/x";
    CHECK(cache_dir(c) == fs::path("/tmp/x/.rabiq-cache"));
    ::setenv(kCacheDirEnv, "/tmp/y", 1);
    CHECK(cache_dir(c) == fs::path("/tmp/y"));
    ::unsetenv(kCacheDirEnv);
}

TEST_CASE("predict closed forms") {
    const auto dir = scratch("predict");
    const auto cfg = write(dir / "c.yaml", "g_final: 1\nsigma: 0.1\nomega_tau_min: 1e3\nomega_tau_max: 1e4\n"
                                           "output_dir: " + dir.string() + "\n");
    const auto r = run_in_process(Command::predict, cfg);
    REQUIRE(r.code == 0);
    const auto csv = slurp(dir / "predict.csv");
    CHECK(csv.rfind("omega_tau,apt_Er,kzm_Er,kzm_average_Er,kzm_disorder_averaged_Er,g_hat,g_hat_series\n", 0) == 0);
    CHECK(column(csv, 1, 0) == 1e3);
    CHECK(column(csv, 1, 3) == doctest::Approx(0.019842).epsilon(2e-5));
    CHECK(column(csv, 1, 5) == doctest::Approx(0.99686).epsilon(1e-5));
    CHECK(r.err.empty());

    const auto low = write(dir / "low.yaml", "g_final: 0.5\nomega_tau_min: 10\nomega_tau_max: 1e3\n"
                                             "output_dir: " + dir.string() + "\n");
    const auto w = run_in_process(Command::predict, low);
    CHECK(w.code == 0);
    CHECK(w.err.find("warning") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("fit a CSV") {
    const auto dir = scratch("fit");
    std::string data = "omega_tau,mean_Er,stderr_Er,n_realizations\n";
    for (const double x : {1e3, 2e3, 4e3, 8e3}) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "%.12g,%.17g,0,1\n", x, 3.0 * std::pow(x, -0.5));
        data += buf;
    }
    write(dir / "data.csv", data);
    const auto cfg = write(dir / "c.yaml", "fit_input: " + (dir / "data.csv").string() +
                                               "\noutput_dir: " + dir.string() + "\n");
    const auto r = run_in_process(Command::fit, cfg);
    REQUIRE(r.code == 0);
    const auto csv = slurp(dir / "fit.csv");
    CHECK(column(csv, 1, 0) == doctest::Approx(-0.5).epsilon(1e-10));
    CHECK(column(csv, 1, 4) == 4);

    const auto missing = write(dir / "m.yaml", "output_dir: " + dir.string() + "\n");
    CHECK(run_in_process(Command::fit, missing).code == 1);

    write(dir / "few.csv", "omega_tau,mean_Er\n1e3,1\n2e3,0.5\n");
    const auto few = write(dir / "f.yaml", "fit_input: " + (dir / "few.csv").string() +
                                               "\noutput_dir: " + dir.string() + "\n");
    const auto e = run_in_process(Command::fit, few);
    CHECK(e.code == 2);
    CHECK_FALSE(e.err.empty());
    fs::remove_all(dir);
}

TEST_CASE("verify passes") {
    const auto r = run_in_process(Command::verify, write(scratch("verify") / "c.yaml", "cache: off\n"));
    CHECK(r.code == 0);
    CHECK(r.out.find("FAIL") == std::string::npos);
    CHECK(r.out.find("PASS") != std::string::npos);
}

TEST_CASE("numerical failures exit with status 2 and name the parameters") {
    const auto dir = scratch("numfail");
    const auto cfg = write(dir / "c.yaml",
                           "fixed_scheme: rk4\nomega_dt: 0.5\nomega_tau: 1000\ng_final: 1\n"
                           "output_dir: " + dir.string() + "\ncache: off\n");
    const auto r = run_in_process(Command::simulate, cfg);
    CHECK(r.code == 2);
    CHECK(r.err.find("omega_tau=1000") != std::string::npos);

    const auto ens = write(dir / "e.yaml",
                           "fixed_scheme: rk4\nomega_dt: 0.5\nomega_tau_min: 1000\nomega_tau_max: 2000\n"
                           "sigma: 0.1\nn_nodes: 3\noutput_dir: " + dir.string() + "\ncache: off\n");
    const auto e = run_in_process(Command::ensemble, ens);
    CHECK(e.code == 2);
    CHECK(e.err.find("delta=") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("command-line interface") {
    const auto dir = scratch("cli");
    const auto out = (dir / "out").string();
    write(dir / "ok.yaml", "g_final: 0\nomega_tau: 10\noutput_dir: " + out + "\n");
    write(dir / "bad.yaml", "g_final: 2\n");
    write(dir / "typo.yaml", "gfinal: 0.5\n");

    CHECK(cli("simulate --config " + (dir / "ok.yaml").string()) == 0);
    CHECK(fs::exists(dir / "out" / "simulate.csv"));
    CHECK(cli("simulate --config " + (dir / "bad.yaml").string()) == 1);
    CHECK(cli("simulate --config " + (dir / "typo.yaml").string()) == 1);
    CHECK(cli("simulate --config " + (dir / "missing.yaml").string()) == 1);
    CHECK(cli("frobnicate") == 1);
    CHECK(cli("") == 1);
    CHECK(cli("table --id 7") == 1);
    CHECK(cli("--help") == 0);
    CHECK(cli("predict --output-dir " + out + " --jobs 2 --seed 5") == 0);
    CHECK(fs::exists(dir / "out" / "predict.csv"));
    CHECK(cli("verify --no-cache") == 0);
    fs::remove_all(dir);
}

TEST_CASE("seed override changes Monte Carlo output only") {
    const auto dir = scratch("seed");
    const auto cfg = write(dir / "c.yaml",
                           "averaging: monte_carlo\nn_samples: 4\nsigma: 0.2\nomega_dt: 0.1\n"
                           "omega_tau_min: 10\nomega_tau_max: 20\npoints_per_decade: 4\n"
                           "cache: off\noutput_dir: " + dir.string() + "\n");
    RunOptions o;
    o.command = Command::ensemble;
    o.config_path = cfg;
    std::ostringstream sink;
    o.seed = 1;
    REQUIRE(run(o, sink, sink) == 0);
    const auto a = slurp(dir / "ensemble.csv");
    REQUIRE(run(o, sink, sink) == 0);
    CHECK(slurp(dir / "ensemble.csv") == a);
    o.seed = 2;
    REQUIRE(run(o, sink, sink) == 0);
    CHECK(slurp(dir / "ensemble.csv") != a);
    fs::remove_all(dir);
}
