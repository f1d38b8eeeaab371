#pragma once

// Experiment configuration: a flat YAML mapping, one scalar (or short list)
// per key. Times are dimensionless omega*t, energies are in hbar*omega.
//
//   g_final            final coupling, [0, 1]
//   omega_tau          quench duration for `simulate` and single ensembles
//   omega_tau_min/max  grid bounds for `ensemble` and `predict`
//   points_per_decade  log-spaced grid density (>= 4 for tables)
//   disorder_channel   time | parameter
//   sigma              disorder dispersion (0 = ordered quench)
//   averaging          quadrature | monte_carlo
//   n_nodes, n_samples, seed
//   step_mode          fixed | adaptive
//   fixed_scheme       magnus4 | rk4
//   omega_dt, rel_tol, abs_tol, constraint_tol
//   table_id, sigma_list, windows ([[min, max], ...])
//   fit_input, fit_window_min, fit_window_max
//   output_dir, cache (on | off)

#include "rabiq/disorder.hpp"
#include "rabiq/dynamics.hpp"
#include "rabiq/scaling.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace rabiq {

enum class AveragingMode { quadrature, monte_carlo };

struct ExperimentConfig {
    double g_final = 1.0;
    double omega_tau = 1e3;
    double omega_tau_min = 1e3;
    double omega_tau_max = 1e4;
    int points_per_decade = 8;

    DisorderChannel disorder_channel = DisorderChannel::time;
    double sigma = 0.0;

    AveragingMode averaging = AveragingMode::quadrature;
    std::size_t n_nodes = 33;
    std::size_t n_samples = 10'000;
    std::uint64_t seed = 0;

    IntegratorConfig integrator;

    int table_id = 1;
    std::vector<double> sigma_list;    ///< empty: the built-in dispersions for table_id
    std::vector<FitWindow> windows;    ///< empty: the built-in windows for table_id

    std::string fit_input;
    double fit_window_min = 1e3;
    double fit_window_max = 1e4;

    std::string output_dir = "rabiq-out";
    bool cache = true;

    [[nodiscard]] QuenchSpec quench() const { return {g_final, omega_tau}; }
    [[nodiscard]] DisorderModel model() const { return {disorder_channel, sigma}; }
    [[nodiscard]] AveragingScheme scheme() const;
    [[nodiscard]] FitWindow grid_window() const { return {omega_tau_min, omega_tau_max}; }
    [[nodiscard]] TableSpec table_spec() const;

    /// Throws ConfigError describing the first invalid field.
    void validate() const;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&);
};

/// Parses YAML text. Unknown keys and malformed values raise ConfigError.
[[nodiscard]] ExperimentConfig parse_config(std::string_view text);
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);

/// YAML text that parse_config maps back to an equal config.
[[nodiscard]] std::string serialize_config(const ExperimentConfig& config);

/// Canonical JSON of the fields that affect computed numbers (paths and the
/// cache switch are excluded).
[[nodiscard]] std::string canonical_physics(const ExperimentConfig& config);

/// SHA-256 hex digest of canonical_physics.
[[nodiscard]] std::string cache_key(const ExperimentConfig& config);

}  // namespace rabiq
