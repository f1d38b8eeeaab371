#pragma once

// Quenched disorder: one disorder value delta is frozen for the whole run and
// observables are averaged over runs.
//
//  * time channel:      tau_delta = tau (1 + delta), delta from a Gaussian
//                       truncated to |delta| <= 3 sigma, sigma in [0, 1/3]
//  * parameter channel: g_final = 1 - |delta|, delta ~ N(0, sigma^2),
//                       sigma in [0, 0.1]

#include "rabiq/dynamics.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace rabiq {

enum class DisorderChannel { time, parameter };

struct DisorderModel {
    DisorderChannel channel = DisorderChannel::time;
    double sigma = 0.0;

    void validate() const;
    [[nodiscard]] bool degenerate() const noexcept { return sigma == 0.0; }
};

struct MonteCarlo {
    std::size_t n_samples = 10'000;
    std::uint64_t seed = 0;
};

struct Quadrature {
    std::size_t n_nodes = 33;
};

using AveragingScheme = std::variant<Quadrature, MonteCarlo>;

void validate(const AveragingScheme& scheme);

struct Realization {
    double delta;
    double weight;
};

/// Density of the time-channel disorder; zero outside |delta| <= 3 sigma.
/// Throws InvalidDispersion for sigma <= 0.
[[nodiscard]] double truncated_gaussian_pdf(double delta, double sigma);

/// The ordered quench that one disorder value turns `base` into.
/// Throws OutOfSupport when delta lies outside the channel's support.
[[nodiscard]] QuenchSpec effective_quench(const DisorderModel& model, const QuenchSpec& base,
                                          double delta);

/// Disorder values and weights. Weights sum to one.
///
/// Monte Carlo draws are i.i.d. with weight 1/n and fully determined by the
/// seed (mt19937_64 plus inverse-CDF sampling). Quadrature rules:
///  * time channel: Gauss-Legendre on [-3 sigma, 3 sigma], weights times the density;
///  * parameter channel: only |delta| matters, so the folded density on
///    delta >= 0 is integrated. One node carries the mass of [0, 1e-4 sigma];
///    the remaining n - 1 nodes are Gauss-Legendre in log(delta) over
///    [1e-4 sigma, 8 sigma]. The logarithmic grading resolves the narrow
///    near-critical region |delta| ~ (omega tau)^(-2/3) where the residual
///    energy changes by orders of magnitude.
/// A degenerate model (sigma = 0) yields the single realization {0, 1}.
[[nodiscard]] std::vector<Realization> realizations(const DisorderModel& model,
                                                    const AveragingScheme& scheme);

/// Disorder average of g_final(delta) = 1 - |delta| over N(0, sigma^2).
[[nodiscard]] double averaged_g_final(double sigma);

struct EnsembleValue {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_realizations = 0;
};

/// Quenched average of the residual energy.
///
/// std_error is the sample standard error for Monte Carlo and
/// |mean(n nodes) - mean(ceil(n/2) nodes)| for quadrature. `jobs` bounds the
/// number of worker threads; the result does not depend on it.
[[nodiscard]] EnsembleValue ensemble_residual_energy(const QuenchSpec& base,
                                                     const DisorderModel& model,
                                                     const AveragingScheme& scheme,
                                                     const IntegratorConfig& cfg = {},
                                                     unsigned jobs = 1);

struct EnsembleResult {
    std::vector<double> omega_tau_grid;
    std::vector<double> mean_Er;
    std::vector<double> stderr_Er;
    std::vector<std::size_t> n_realizations;
    DisorderModel model;
    AveragingScheme scheme;
    double g_final = 1.0;
};

/// ensemble_residual_energy at every grid point. The grid is sorted ascending
/// in the result.
[[nodiscard]] EnsembleResult ensemble_sweep(double g_final, std::span<const double> omega_tau_grid,
                                            const DisorderModel& model,
                                            const AveragingScheme& scheme,
                                            const IntegratorConfig& cfg = {}, unsigned jobs = 1);

/// Residual energy of every realization of `reals` for one base quench, in order.
/// Failures are rethrown as RealizationFailure carrying the offending delta.
[[nodiscard]] std::vector<double> realization_energies(const QuenchSpec& base,
                                                       const DisorderModel& model,
                                                       std::span<const Realization> reals,
                                                       const IntegratorConfig& cfg = {},
                                                       unsigned jobs = 1);

/// sqrt(sum (x - mean)^2 / (n (n - 1))); zero for fewer than two values.
[[nodiscard]] double sample_standard_error(std::span<const double> values, double mean);

/// Weighted mean in index order.
[[nodiscard]] double weighted_mean(std::span<const Realization> reals,
                                   std::span<const double> values);

}  // namespace rabiq
