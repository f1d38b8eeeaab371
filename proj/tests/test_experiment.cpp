#include "rabiq/errors.hpp"
#include "rabiq/experiment.hpp"

#include <doctest.h>

using namespace rabiq;

TEST_CASE("defaults parse from an empty document") {
    CHECK(parse_config("") == ExperimentConfig{});
    CHECK(parse_config("# nothing\n") == ExperimentConfig{});
}

TEST_CASE("all keys parse") {
    const auto c = parse_config(R"(
g_final: 0.9
omega_tau: 2.5e3
omega_tau_min: 100
omega_tau_max: 1e5
points_per_decade: 6
disorder_channel: parameter
sigma: 0.01
averaging: monte_carlo
n_nodes: 17
n_samples: 500
seed: 18446744073709551615
step_mode: adaptive
fixed_scheme: rk4
omega_dt: 0.01
rel_tol: 1e-9
abs_tol: 1e-11
constraint_tol: 1e-7
table_id: 2
sigma_list: [0, 1e-4, 0.1]
windows: [[1e3, 1e4], [1e4, 1e5]]
fit_input: data/ensemble.csv
fit_window_min: 2e3
fit_window_max: 2e4
output_dir: out dir
cache: off
)");
    CHECK(c.g_final == 0.9);
    CHECK(c.omega_tau == 2500.0);
    CHECK(c.omega_tau_min == 100.0);
    CHECK(c.points_per_decade == 6);
    CHECK(c.disorder_channel == DisorderChannel::parameter);
    CHECK(c.averaging == AveragingMode::monte_carlo);
    CHECK(c.n_samples == 500);
    CHECK(c.seed == 18446744073709551615ULL);
    CHECK(c.integrator.step_mode == StepMode::adaptive);
    CHECK(c.integrator.fixed_scheme == FixedScheme::rk4);
    CHECK(c.integrator.constraint_tol == 1e-7);
    CHECK(c.sigma_list == std::vector<double>{0.0, 1e-4, 0.1});
    REQUIRE(c.windows.size() == 2);
    CHECK(c.windows[1] == FitWindow{1e4, 1e5});
    CHECK(c.fit_input == "data/ensemble.csv");
    CHECK(c.output_dir == "out dir");
    CHECK_FALSE(c.cache);

    const auto mc = std::get<MonteCarlo>(c.scheme());
    CHECK(mc.n_samples == 500);
    CHECK(mc.seed == c.seed);
    const auto t = c.table_spec();
    CHECK(t.table_id == 2);
    CHECK(t.sigma_list == c.sigma_list);
    CHECK(t.points_per_decade == 6);
    CHECK(t.cfg == c.integrator);
}

TEST_CASE("table spec falls back to the built-in lists") {
    ExperimentConfig c;
    c.table_id = 2;
    const auto t = c.table_spec();
    CHECK(t.sigma_list == TableSpec::defaults(2).sigma_list);
    CHECK(t.windows == TableSpec::defaults(2).windows);
    CHECK(std::get<Quadrature>(t.scheme).n_nodes == 33);
}

TEST_CASE("round trip is lossless") {
    ExperimentConfig c;
    c.g_final = 0.1 + 0.2;  // not representable in few digits
    c.omega_tau = 1.0 / 3.0 * 1e4;
    c.sigma = 0.1 / 3.0;
    c.disorder_channel = DisorderChannel::time;
    c.integrator.omega_dt = 0.0049999999999999;
    c.sigma_list = {1e-4, 0.123456789012345678};
    c.windows = {{1234.5678901234567, 9876.54321}};
    c.fit_input = "a: tricky # path";
    c.output_dir = "spaces and 'quotes'";
    c.seed = 1ULL << 63;
    c.cache = false;
    CHECK(parse_config(serialize_config(c)) == c);
    CHECK(parse_config(serialize_config(ExperimentConfig{})) == ExperimentConfig{});
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS((void)parse_config("g_final: 1.5"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("g_finale: 0.5"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("g_final: lots"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("disorder_channel: space"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("sigma: 0.5"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("disorder_channel: parameter\nsigma: 0.2"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("n_nodes: 2"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("n_samples: -4"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("omega_dt: 0"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("table_id: 4"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("windows: [1, 2]"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("[1, 2, 3]"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("g_final: [0.5"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("omega_tau_min: 1e4\nomega_tau_max: 1e3"), ConfigError);
    CHECK_THROWS_AS((void)load_config("/nonexistent/rabiq.yaml"), ConfigError);
}

TEST_CASE("cache key") {
    ExperimentConfig a;
    a.sigma = 0.1;
    const auto key = cache_key(a);
    CHECK(key.size() == 64);
    CHECK(cache_key(a) == key);

    ExperimentConfig b = a;
    b.output_dir = "/somewhere/else";
    b.cache = false;
    b.fit_input = "x.csv";
    CHECK(cache_key(b) == key);

    ExperimentConfig c = a;
    c.sigma = 0.1 + 1e-6;
    CHECK(cache_key(c) != key);

    ExperimentConfig d = a;
    d.seed = 1;
    CHECK(cache_key(d) != key);

    ExperimentConfig e = a;
    e.integrator.omega_dt = 2.5e-3;
    CHECK(cache_key(e) != key);

    ExperimentConfig f = a;
    f.windows = {{1e3, 1e4}};
    CHECK(cache_key(f) != key);

    CHECK(canonical_physics(a).find("output_dir") == std::string::npos);
}
