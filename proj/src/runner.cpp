#include "rabiq/runner.hpp"

#include "rabiq/analytics.hpp"
#include "rabiq/disorder.hpp"
#include "rabiq/dynamics.hpp"
#include "rabiq/errors.hpp"
#include "rabiq/scaling.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <thread>
#include <vector>

namespace rabiq {

namespace fs = std::filesystem;

namespace {

/// Files (name -> bytes) and the stdout report of one command.
struct Artifacts {
    std::map<std::string, std::string> files;
    std::string report;
};

std::string fmt(const char* format, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, x);
    return buf;
}

std::string grid_value(double x) { return fmt("%.12g", x); }
std::string energy(double x) { return fmt("%.11e", x); }

const char* channel_name(DisorderChannel c) {
    return c == DisorderChannel::time ? "time" : "parameter";
}

unsigned job_count(unsigned requested) {
    if (requested > 0) {
        return requested;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
    fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw ConfigError("cannot write " + tmp.string());
        }
        out << bytes;
    }
    fs::rename(tmp, path);
}

std::string csv_line(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        line += (i ? "," : "") + cells[i];
    }
    return line + "\n";
}

Artifacts do_simulate(const ExperimentConfig& c) {
    const QuenchSpec spec = c.quench();
    const BogoliubovState s = integrate_quench(spec, c.integrator);
    const double er = residual_energy(s, spec.g_final);

    Artifacts a;
    std::string csv = "g_final,omega_tau,u_re,u_im,v_re,v_im,constraint_drift,E_r\n";
    csv += csv_line({grid_value(spec.g_final), grid_value(spec.omega_tau), energy(s.u.real()),
                     energy(s.u.imag()), energy(s.v.real()), energy(s.v.imag()),
                     energy(s.constraint_drift()), energy(er)});
    a.files["simulate.csv"] = csv;

    std::ostringstream os;
    os << "g_final = " << grid_value(spec.g_final) << ", omega_tau = " << grid_value(spec.omega_tau)
       << "\nu = " << energy(s.u.real()) << " + " << energy(s.u.imag()) << "i"
       << "\nv = " << energy(s.v.real()) << " + " << energy(s.v.imag()) << "i"
       << "\n| |u|^2 - |v|^2 - 1 | = " << energy(s.constraint_drift())
       << "\nE_r = " << energy(er) << " hbar*omega\n";
    a.report = os.str();
    return a;
}

std::string ensemble_csv(const EnsembleResult& r) {
    std::string csv = "omega_tau,mean_Er,stderr_Er,n_realizations\n";
    for (std::size_t i = 0; i < r.omega_tau_grid.size(); ++i) {
        csv += csv_line({grid_value(r.omega_tau_grid[i]), energy(r.mean_Er[i]),
                         energy(r.stderr_Er[i]), std::to_string(r.n_realizations[i])});
    }
    return csv;
}

Artifacts do_ensemble(const ExperimentConfig& c, unsigned jobs) {
    const auto grid = log_grid(c.grid_window(), c.points_per_decade);
    const EnsembleResult r =
        ensemble_sweep(c.g_final, grid, c.model(), c.scheme(), c.integrator, jobs);
    Artifacts a;
    a.files["ensemble.csv"] = ensemble_csv(r);
    std::ostringstream os;
    os << "ensemble: " << channel_name(c.disorder_channel) << " disorder, sigma = "
       << grid_value(c.sigma) << ", " << grid.size() << " grid points in ["
       << grid_value(c.omega_tau_min) << ", " << grid_value(c.omega_tau_max) << "]\n";
    a.report = os.str();
    return a;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, sep)) {
        if (!cell.empty() && cell.back() == '\r') {
            cell.pop_back();
        }
        out.push_back(cell);
    }
    return out;
}

std::vector<DataPoint> read_points(const fs::path& path) {
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line)) {
        throw ConfigError(path.string() + " is empty");
    }
    const auto header = split(line, ',');
    auto column = [&](std::initializer_list<const char*> names) -> std::ptrdiff_t {
        for (std::size_t i = 0; i < header.size(); ++i) {
            for (const char* n : names) {
                if (header[i] == n) {
                    return static_cast<std::ptrdiff_t>(i);
                }
            }
        }
        return -1;
    };
    const auto x_col = column({"omega_tau"});
    const auto y_col = column({"mean_Er", "E_r"});
    if (x_col < 0 || y_col < 0) {
        throw ConfigError(path.string() + ": need columns omega_tau and mean_Er (or E_r)");
    }
    std::vector<DataPoint> points;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") {
            continue;
        }
        const auto cells = split(line, ',');
        const auto need = static_cast<std::size_t>(std::max(x_col, y_col));
        if (cells.size() <= need) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": too few columns");
        }
        try {
            points.push_back({std::stod(cells[static_cast<std::size_t>(x_col)]),
                              std::stod(cells[static_cast<std::size_t>(y_col)])});
        } catch (const std::logic_error&) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": not a number");
        }
    }
    return points;
}

Artifacts do_fit(const ExperimentConfig& c) {
    if (c.fit_input.empty()) {
        throw ConfigError("fit needs an input CSV (config key fit_input or --input)");
    }
    const auto points = read_points(c.fit_input);
    const ScalingFit f = fit_power_law(points, {c.fit_window_min, c.fit_window_max});

    Artifacts a;
    a.files["fit.csv"] = "nu,stderr_nu,log_intercept,r_squared,n_points,window_min,window_max\n" +
                         csv_line({energy(f.nu), energy(f.stderr_nu), energy(f.log_intercept),
                                   energy(f.r_squared), std::to_string(f.n_points),
                                   grid_value(f.window.min), grid_value(f.window.max)});
    std::ostringstream os;
    os << "E_r ~ (omega tau)^nu over [" << grid_value(f.window.min) << ", "
       << grid_value(f.window.max) << "], " << f.n_points << " points\n"
       << "nu = " << fmt("%.4f", f.nu) << " +/- " << fmt("%.4f", f.stderr_nu)
       << ", R^2 = " << fmt("%.6f", f.r_squared) << "\n";
    a.report = os.str();
    return a;
}

Artifacts do_table(const ExperimentConfig& c, unsigned jobs) {
    const TableResult t = reproduce_table(c.table_spec(), jobs);
    const std::string stem = "table_" + std::to_string(c.table_id);

    std::string csv = "sigma,window_min,window_max,nu,stderr_nu,r_squared,n_points,nu_prime\n";
    for (const auto& r : t.rows) {
        csv += csv_line({grid_value(r.sigma), grid_value(r.window.min), grid_value(r.window.max),
                         energy(r.fit.nu), energy(r.fit.stderr_nu), energy(r.fit.r_squared),
                         std::to_string(r.fit.n_points),
                         r.averaged_quench_fit ? energy(r.averaged_quench_fit->nu) : ""});
    }
    Artifacts a;
    a.report = format_table(t);
    a.files[stem + ".csv"] = csv;
    a.files[stem + ".txt"] = a.report;
    return a;
}

Artifacts do_predict(const ExperimentConfig& c, std::ostream& err) {
    if (c.omega_tau_min < 1e2) {
        err << "warning: the closed forms assume omega_tau >> 1; grid starts at "
            << grid_value(c.omega_tau_min) << "\n";
    }
    const auto grid = log_grid(c.grid_window(), c.points_per_decade);
    const bool apt = c.g_final < 1.0;
    const bool time_disorder = c.disorder_channel == DisorderChannel::time && c.sigma > 0.0;

    std::string csv =
        "omega_tau,apt_Er,kzm_Er,kzm_average_Er,kzm_disorder_averaged_Er,g_hat,g_hat_series\n";
    for (const double wt : grid) {
        const double kzm = kzm_residual_energy(wt, 0.0);
        csv += csv_line({grid_value(wt), apt ? energy(apt_residual_energy(c.g_final, wt)) : "",
                         energy(kzm), energy(kzm_averaged_prediction(wt, c.sigma)),
                         energy(time_disorder ? kzm_disorder_averaged(wt, c.sigma) : kzm),
                         energy(freezeout_g(wt).g_hat), energy(freezeout_g_series(wt))});
    }
    Artifacts a;
    a.files["predict.csv"] = csv;
    a.report = "predictions for " + std::to_string(grid.size()) + " values of omega_tau\n";
    return a;
}

struct Check {
    std::string name;
    std::function<std::string()> run;  ///< empty string on success, else the failure detail
};

std::string verify_report(const ExperimentConfig& c, bool& ok) {
    const IntegratorConfig cfg = c.integrator;
    std::vector<Check> checks;

    checks.push_back({"constraint |u|^2 - |v|^2 = 1", [cfg] {
                          for (const double g : {0.0, 0.5, 1.0}) {
                              for (const double wt : {10.0, 100.0, 1000.0}) {
                                  double worst = 0.0;
                                  (void)integrate_quench({g, wt}, cfg, [&](const BogoliubovState& s) {
                                      worst = std::max(worst, s.constraint_drift());
                                  });
                                  if (worst > 1e-8) {
                                      return "drift " + energy(worst) + " at g_final=" +
                                             grid_value(g) + ", omega_tau=" + grid_value(wt);
                                  }
                              }
                          }
                          return std::string();
                      }});
    checks.push_back({"no excitation at g_final = 0", [cfg] {
                          const double er = quench_residual_energy({0.0, 10.0}, cfg);
                          return std::abs(er) <= 1e-10 ? std::string() : "E_r = " + energy(er);
                      }});
    checks.push_back({"adiabatic limit", [cfg] {
                          const double er = quench_residual_energy({0.5, 1e4}, cfg);
                          return er >= 0.0 && er <= 1e-6 ? std::string() : "E_r = " + energy(er);
                      }});
    checks.push_back({"quadrature weights sum to one", [] {
                          for (const auto ch : {DisorderChannel::time, DisorderChannel::parameter}) {
                              for (const double s : {1e-4, 1e-2, 0.1}) {
                                  double sum = 0.0;
                                  for (const auto& r : realizations({ch, s}, Quadrature{33})) {
                                      sum += r.weight;
                                  }
                                  if (std::abs(sum - 1.0) > 1e-12) {
                                      return std::string(channel_name(ch)) + " sigma=" +
                                             grid_value(s) + ": sum " + energy(sum);
                                  }
                              }
                          }
                          return std::string();
                      }});
    checks.push_back({"Monte Carlo draws reproducible", [] {
                          const DisorderModel m{DisorderChannel::parameter, 0.05};
                          const auto a = realizations(m, MonteCarlo{1000, 7});
                          const auto b = realizations(m, MonteCarlo{1000, 7});
                          for (std::size_t i = 0; i < a.size(); ++i) {
                              if (a[i].delta != b[i].delta) {
                                  return "draw " + std::to_string(i) + " differs";
                              }
                          }
                          return std::string();
                      }});
    checks.push_back({"freeze-out root residual", [] {
                          for (double wt = 1e2; wt <= 1e6 * (1 + 1e-12); wt *= std::sqrt(10.0)) {
                              const FreezeOut fo = freezeout_g(wt);
                              const double res = std::abs(freezeout_residual(fo.g_hat, wt));
                              if (res > 1e-10) {
                                  return "residual " + energy(res) + " at omega_tau=" +
                                         grid_value(wt);
                              }
                          }
                          return std::string();
                      }});
    checks.push_back({"cache key ignores output paths", [c] {
                          ExperimentConfig other = c;
                          other.output_dir += "-elsewhere";
                          other.cache = !other.cache;
                          return cache_key(other) == cache_key(c) ? std::string() : "keys differ";
                      }});
    checks.push_back({"config round trip", [c] {
                          return parse_config(serialize_config(c)) == c ? std::string()
                                                                        : "config changed";
                      }});

    std::ostringstream os;
    ok = true;
    for (const auto& check : checks) {
        std::string detail;
        try {
            detail = check.run();
        } catch (const Error& e) {
            detail = e.what();
        }
        if (detail.empty()) {
            os << "PASS  " << check.name << "\n";
        } else {
            ok = false;
            os << "FAIL  " << check.name << ": " << detail << "\n";
        }
    }
    return os.str();
}

std::string describe(const ExperimentConfig& c) {
    std::ostringstream os;
    os << "g_final=" << grid_value(c.g_final) << ", omega_tau=" << grid_value(c.omega_tau)
       << ", grid=[" << grid_value(c.omega_tau_min) << ", " << grid_value(c.omega_tau_max)
       << "], disorder=" << channel_name(c.disorder_channel) << ", sigma=" << grid_value(c.sigma)
       << ", omega_dt=" << grid_value(c.integrator.omega_dt);
    return os.str();
}

std::optional<Artifacts> cache_load(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        return std::nullopt;
    }
    try {
        const auto j = nlohmann::json::parse(in);
        Artifacts a;
        a.files = j.at("files").get<std::map<std::string, std::string>>();
        a.report = j.at("report").get<std::string>();
        return a;
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;  // unreadable entry: recompute and overwrite
    }
}

void cache_store(const fs::path& file, const Artifacts& a) {
    const nlohmann::json j = {{"files", a.files}, {"report", a.report}};
    write_file(file, j.dump());
}

}  // namespace

const char* command_name(Command command) noexcept {
    switch (command) {
        case Command::simulate:
            return "simulate";
        case Command::ensemble:
            return "ensemble";
        case Command::fit:
            return "fit";
        case Command::table:
            return "table";
        case Command::predict:
            return "predict";
        case Command::verify:
            return "verify";
    }
    return "?";
}

ExperimentConfig effective_config(const RunOptions& options) {
    ExperimentConfig c = options.config_path ? load_config(*options.config_path) : ExperimentConfig{};
    if (options.seed) {
        c.seed = *options.seed;
    }
    if (options.table_id) {
        c.table_id = *options.table_id;
    }
    if (options.fit_input) {
        c.fit_input = *options.fit_input;
    }
    if (options.output_dir) {
        c.output_dir = *options.output_dir;
    }
    if (options.no_cache) {
        c.cache = false;
    }
    c.validate();
    return c;
}

fs::path cache_dir(const ExperimentConfig& config) {
    if (const char* env = std::getenv(kCacheDirEnv); env != nullptr && *env != '\0') {
        return env;
    }
    return fs::path(config.output_dir) / ".rabiq-cache";
}

int run(const RunOptions& options, std::ostream& out, std::ostream& err) {
    ExperimentConfig config;
    try {
        config = effective_config(options);
    } catch (const Error& e) {
        err << "config error: " << e.what() << "\n";
        return 1;
    }

    const unsigned jobs = job_count(options.jobs);
    const bool cacheable = config.cache && (options.command == Command::simulate ||
                                            options.command == Command::ensemble ||
                                            options.command == Command::table);
    try {
        if (options.command == Command::verify) {
            bool ok = false;
            out << verify_report(config, ok);
            if (!ok) {
                err << "verify: invariant suite failed for " << describe(config) << "\n";
                return 2;
            }
            return 0;
        }

        fs::path cache_file;
        std::optional<Artifacts> artifacts;
        if (cacheable) {
            cache_file = cache_dir(config) /
                         (std::string(command_name(options.command)) + "-" + cache_key(config) + ".json");
            artifacts = cache_load(cache_file);
        }
        if (!artifacts) {
            switch (options.command) {
                case Command::simulate:
                    artifacts = do_simulate(config);
                    break;
                case Command::ensemble:
                    artifacts = do_ensemble(config, jobs);
                    break;
                case Command::fit:
                    artifacts = do_fit(config);
                    break;
                case Command::table:
                    artifacts = do_table(config, jobs);
                    break;
                case Command::predict:
                    artifacts = do_predict(config, err);
                    break;
                case Command::verify:
                    break;
            }
            if (cacheable) {
                cache_store(cache_file, *artifacts);
            }
        }

        for (const auto& [name, bytes] : artifacts->files) {
            write_file(fs::path(config.output_dir) / name, bytes);
        }
        out << artifacts->report;
        return 0;
    } catch (const RealizationFailure& e) {
        err << "numerical failure: " << e.what() << "\n  delta=" << fmt("%.17g", e.delta())
            << ", omega_tau=" << fmt("%.17g", e.omega_tau()) << "\n  " << describe(config) << "\n";
        return 2;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n  " << describe(config) << "\n";
        return 2;
    } catch (const Error& e) {
        err << "config error: " << e.what() << "\n";
        return 1;
    } catch (const fs::filesystem_error& e) {
        err << "config error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace rabiq
