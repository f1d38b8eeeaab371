#include "rabiq/scaling.hpp"

#include "rabiq/errors.hpp"
#include "rabiq/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace rabiq {

namespace {

constexpr double kWindowSlack = 1e-9;

std::string sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.0e", x);
    return buf;
}

std::string fixed(double x, int digits) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) {
        s.append(width - s.size(), ' ');
    }
    return s;
}

std::string sigma_label(double sigma) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", sigma);
    return buf;
}

std::string window_label(const FitWindow& w) { return "[" + sci(w.min) + ", " + sci(w.max) + "]"; }

std::vector<double> union_grid(const std::vector<FitWindow>& windows, int points_per_decade) {
    std::vector<double> grid;
    for (const auto& w : windows) {
        const auto g = log_grid(w, points_per_decade);
        grid.insert(grid.end(), g.begin(), g.end());
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end(),
                           [](double a, double b) { return std::abs(a - b) <= kWindowSlack * b; }),
               grid.end());
    return grid;
}

std::vector<DataPoint> ordered_curve(double g_final, std::span<const double> grid,
                                     const IntegratorConfig& cfg, unsigned jobs) {
    std::vector<DataPoint> points(grid.size());
    parallel_for(grid.size(), jobs, [&](std::size_t k) {
        // reverse order: longest quench first
        const std::size_t i = grid.size() - 1 - k;
        points[i] = {grid[i], quench_residual_energy({g_final, grid[i]}, cfg)};
    });
    return points;
}

}  // namespace

bool FitWindow::contains(double omega_tau) const noexcept {
    return omega_tau >= min * (1.0 - kWindowSlack) && omega_tau <= max * (1.0 + kWindowSlack);
}

ScalingFit fit_power_law(std::span<const DataPoint> points, FitWindow window) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& p : points) {
        if (!window.contains(p.omega_tau)) {
            continue;
        }
        if (!(p.energy > 0.0) || !(p.omega_tau > 0.0)) {
            std::ostringstream os;
            os << "cannot take the logarithm of E=" << p.energy << " at omega_tau=" << p.omega_tau;
            throw NonPositiveEnergy(os.str());
        }
        xs.push_back(std::log(p.omega_tau));
        ys.push_back(std::log(p.energy));
    }
    if (xs.size() < 3) {
        std::ostringstream os;
        os << "power-law fit needs at least 3 points in " << window_label(window) << ", got "
           << xs.size();
        throw InsufficientData(os.str());
    }

    const auto n = static_cast<double>(xs.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (!(sxx > 0.0)) {
        throw InsufficientData("power-law fit needs at least two distinct omega_tau values");
    }

    ScalingFit fit;
    fit.nu = sxy / sxx;
    fit.log_intercept = my - fit.nu * mx;
    fit.window = window;
    fit.n_points = xs.size();
    double ssr = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (fit.log_intercept + fit.nu * xs[i]);
        ssr += r * r;
    }
    fit.stderr_nu = std::sqrt(ssr / (n - 2.0) / sxx);
    fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ssr / syy, 0.0, 1.0) : 1.0;
    return fit;
}

std::vector<double> log_grid(FitWindow window, int points_per_decade) {
    if (!(window.min > 0.0 && window.max > window.min) || points_per_decade < 1) {
        throw InvalidArgument("log_grid needs 0 < min < max and points_per_decade >= 1");
    }
    const double lo = std::log(window.min);
    const double hi = std::log(window.max);
    const double decades = std::log10(window.max / window.min);
    const auto intervals = std::max<long>(1, std::lround(decades * points_per_decade));
    std::vector<double> grid(static_cast<std::size_t>(intervals) + 1);
    for (long k = 0; k <= intervals; ++k) {
        grid[static_cast<std::size_t>(k)] =
            std::exp(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(intervals));
    }
    grid.front() = window.min;
    grid.back() = window.max;
    return grid;
}

std::vector<DataPoint> to_points(const EnsembleResult& result) {
    std::vector<DataPoint> points(result.omega_tau_grid.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        points[i] = {result.omega_tau_grid[i], result.mean_Er[i]};
    }
    return points;
}

TableSpec TableSpec::defaults(int table_id) {
    TableSpec spec;
    spec.table_id = table_id;
    switch (table_id) {
        case 1:
            spec.sigma_list = {0.01, 0.1, 0.2, 0.3, 0.33};
            spec.windows = {{1e3, 1e4}};
            break;
        case 2:
            spec.sigma_list = {0.0, 1e-4, 1e-3, 1e-2, 0.1};
            spec.windows = {{1e3, 1e4}, {1e4, 1e5}};
            break;
        case 3:
            spec.sigma_list = {0.0, 1e-4, 1e-3, 1e-2, 0.1};
            spec.windows = {{1e3, 1e4}};
            break;
        default:
            throw InvalidArgument("table id must be 1, 2 or 3");
    }
    return spec;
}

void TableSpec::validate() const {
    if (table_id < 1 || table_id > 3) {
        throw InvalidArgument("table id must be 1, 2 or 3");
    }
    if (sigma_list.empty() || windows.empty()) {
        throw InvalidArgument("table needs at least one sigma and one window");
    }
    for (const auto& w : windows) {
        if (!(w.min >= 1e2 * (1.0 - kWindowSlack) && w.max <= 1e5 * (1.0 + kWindowSlack) &&
              w.min < w.max)) {
            throw InvalidArgument("table windows must lie within [1e2, 1e5]");
        }
    }
    if (points_per_decade < 4) {
        throw InvalidArgument("points_per_decade must be at least 4");
    }
    const auto channel = table_id == 1 ? DisorderChannel::time : DisorderChannel::parameter;
    for (const double s : sigma_list) {
        DisorderModel{channel, s}.validate();
    }
    rabiq::validate(scheme);
    cfg.validate();
}

TableResult reproduce_table(const TableSpec& spec, unsigned jobs) {
    spec.validate();
    const auto channel = spec.table_id == 1 ? DisorderChannel::time : DisorderChannel::parameter;
    const std::vector<double> grid = union_grid(spec.windows, spec.points_per_decade);

    TableResult table;
    table.table_id = spec.table_id;
    for (const double sigma : spec.sigma_list) {
        const DisorderModel model{channel, sigma};
        const EnsembleResult ens = ensemble_sweep(1.0, grid, model, spec.scheme, spec.cfg, jobs);
        const auto points = to_points(ens);

        std::vector<DataPoint> averaged;
        if (spec.table_id == 3) {
            averaged = ordered_curve(averaged_g_final(sigma), grid, spec.cfg, jobs);
        }
        for (const auto& w : spec.windows) {
            TableRow row;
            row.sigma = sigma;
            row.window = w;
            row.fit = fit_power_law(points, w);
            if (spec.table_id == 3) {
                row.averaged_quench_fit = fit_power_law(averaged, w);
            }
            table.rows.push_back(row);
        }
    }
    return table;
}

std::string format_table(const TableResult& table) {
    std::ostringstream os;
    constexpr std::size_t kCol = 22;

    std::vector<double> sigmas;
    std::vector<FitWindow> windows;
    for (const auto& r : table.rows) {
        if (std::find(sigmas.begin(), sigmas.end(), r.sigma) == sigmas.end()) {
            sigmas.push_back(r.sigma);
        }
        if (std::find(windows.begin(), windows.end(), r.window) == windows.end()) {
            windows.push_back(r.window);
        }
    }
    auto find_row = [&](double s, const FitWindow& w) -> const TableRow* {
        for (const auto& r : table.rows) {
            if (r.sigma == s && r.window == w) {
                return &r;
            }
        }
        return nullptr;
    };

    std::vector<std::string> header;
    switch (table.table_id) {
        case 1:
            os << "Table 1: disorder in the total quench time (g_final = 1)\n";
            header.emplace_back("dispersion sigma");
            break;
        case 2:
            os << "Table 2: disorder in the quench parameter, g_final = 1 - |delta|\n";
            header.emplace_back("std deviation sigma");
            break;
        default:
            os << "Table 3: disordered quench (nu) vs. disorder-averaged quench (nu')\n";
            header.emplace_back("sigma");
            break;
    }
    for (const auto& w : windows) {
        if (table.table_id == 3) {
            header.push_back("nu " + window_label(w));
            header.push_back("nu' " + window_label(w));
        } else {
            header.push_back("nu " + window_label(w));
        }
    }

    std::string rule;
    for (std::size_t i = 0; i < header.size(); ++i) {
        rule += "+" + std::string(kCol, '-');
    }
    rule += "+\n";
    os << rule;
    for (const auto& h : header) {
        os << "| " << pad(h, kCol - 1);
    }
    os << "|\n" << rule;

    const int digits = table.table_id == 1 ? 3 : 2;
    for (const double s : sigmas) {
        os << "| " << pad(sigma_label(s), kCol - 1);
        for (const auto& w : windows) {
            const TableRow* r = find_row(s, w);
            os << "| " << pad(r ? fixed(r->fit.nu, digits) : "-", kCol - 1);
            if (table.table_id == 3) {
                const bool has = r != nullptr && r->averaged_quench_fit.has_value();
                os << "| " << pad(has ? fixed(r->averaged_quench_fit->nu, digits) : "-", kCol - 1);
            }
        }
        os << "|\n";
    }
    os << rule;
    return os.str();
}

ConvergenceReport convergence_report(const QuenchSpec& base, const DisorderModel& model,
                                     std::span<const std::size_t> counts,
                                     const AveragingScheme& scheme, const IntegratorConfig& cfg,
                                     unsigned jobs) {
    ConvergenceReport report;
    double prev = 0.0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        AveragingScheme s = scheme;
        if (auto* mc = std::get_if<MonteCarlo>(&s)) {
            mc->n_samples = counts[k];
        } else {
            std::get<Quadrature>(s).n_nodes = counts[k];
        }
        const auto reals = realizations(model, s);
        const auto energies = realization_energies(base, model, reals, cfg, jobs);

        ConvergenceRow row;
        row.n = counts[k];
        row.mean_Er = weighted_mean(reals, energies);
        if (std::holds_alternative<MonteCarlo>(s)) {
            row.std_error = sample_standard_error(energies, row.mean_Er);
        }
        row.delta_vs_prev = k == 0 ? 0.0 : std::abs(row.mean_Er - prev);
        prev = row.mean_Er;
        report.rows.push_back(row);
    }
    if (!report.rows.empty()) {
        const auto& last = report.rows.back();
        report.converged = last.delta_vs_prev <= 0.01 * std::abs(last.mean_Er);
    }
    return report;
}

}  // namespace rabiq
