#pragma once

#include "rabiq/disorder.hpp"
#include "rabiq/dynamics.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rabiq {

struct FitWindow {
    double min = 1e3;
    double max = 1e4;

    [[nodiscard]] bool contains(double omega_tau) const noexcept;
    friend bool operator==(const FitWindow&, const FitWindow&) = default;
};

struct DataPoint {
    double omega_tau;
    double energy;
};

/// Power law E = exp(log_intercept) * (omega tau)^nu.
struct ScalingFit {
    double nu = 0.0;
    double log_intercept = 0.0;
    double stderr_nu = 0.0;
    FitWindow window;
    double r_squared = 0.0;
    std::size_t n_points = 0;
};

/// Ordinary least squares on (log omega_tau, log E) for the points inside
/// `window` (endpoints included to a relative 1e-9).
/// Throws InsufficientData (< 3 points) or NonPositiveEnergy.
[[nodiscard]] ScalingFit fit_power_law(std::span<const DataPoint> points, FitWindow window);

/// Log-spaced grid from window.min to window.max with `points_per_decade`
/// intervals per decade; both endpoints are included exactly.
[[nodiscard]] std::vector<double> log_grid(FitWindow window, int points_per_decade);

[[nodiscard]] std::vector<DataPoint> to_points(const EnsembleResult& result);

struct TableSpec {
    int table_id = 1;
    std::vector<double> sigma_list;
    std::vector<FitWindow> windows;
    int points_per_decade = 8;
    AveragingScheme scheme = Quadrature{33};
    IntegratorConfig cfg;

    /// Built-in dispersions and windows of the three tables.
    [[nodiscard]] static TableSpec defaults(int table_id);
    void validate() const;
};

/// Tables 1 and 2 carry one row per (sigma, window). Table 3 carries one
/// row per sigma with the parameter-disorder exponent `fit` and the exponent
/// of the single quench to averaged_g_final(sigma) in `averaged_quench_fit`.
struct TableRow {
    double sigma = 0.0;
    FitWindow window;
    ScalingFit fit;
    std::optional<ScalingFit> averaged_quench_fit;
};

struct TableResult {
    int table_id = 1;
    std::vector<TableRow> rows;
};

/// Table 1: time disorder, g_final = 1. Table 2: parameter disorder.
/// Table 3: parameter disorder vs. the disorder-averaged quench.
[[nodiscard]] TableResult reproduce_table(const TableSpec& spec, unsigned jobs = 1);

/// Fixed-width text table, one row per sigma and one column per window.
[[nodiscard]] std::string format_table(const TableResult& table);

struct ConvergenceRow {
    std::size_t n = 0;
    double mean_Er = 0.0;
    double std_error = 0.0;       ///< Monte Carlo only; zero for quadrature
    double delta_vs_prev = 0.0;   ///< |mean - previous mean|; zero on the first row
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    bool converged = true;  ///< final delta within 1% of the final mean
};

/// Re-evaluates the ensemble mean for each count in `counts` (nodes for
/// quadrature, samples for Monte Carlo; the seed and kind come from `scheme`).
[[nodiscard]] ConvergenceReport convergence_report(const QuenchSpec& base,
                                                   const DisorderModel& model,
                                                   std::span<const std::size_t> counts,
                                                   const AveragingScheme& scheme = Quadrature{},
                                                   const IntegratorConfig& cfg = {},
                                                   unsigned jobs = 1);

}  // namespace rabiq
