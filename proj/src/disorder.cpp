#include "rabiq/disorder.hpp"

#include "rabiq/errors.hpp"
#include "rabiq/parallel.hpp"
#include "rabiq/quadrature.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

namespace rabiq {

namespace {

constexpr double kTruncation = 3.0;          // time channel support, in units of sigma
constexpr double kParamLowerCut = 1e-4;      // parameter channel, in units of sigma
constexpr double kParamUpperCut = 8.0;       // tail mass beyond this is ~1e-15
constexpr double kMaxTimeSigma = 1.0 / 3.0;
constexpr double kMaxParamSigma = 0.1;

// Uniform in the open interval (0, 1) from the top 53 bits.
double open_unit(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

std::vector<Realization> normalized(std::vector<Realization> reals) {
    double total = 0.0;
    for (const auto& r : reals) {
        total += r.weight;
    }
    for (auto& r : reals) {
        r.weight /= total;
    }
    return reals;
}

std::vector<Realization> time_quadrature(double sigma, std::size_t n) {
    const double half_width = kTruncation * sigma;
    const QuadratureRule rule = gauss_legendre(n, -half_width, half_width);
    std::vector<Realization> reals(n);
    for (std::size_t i = 0; i < n; ++i) {
        reals[i] = {rule.nodes[i], rule.weights[i] * truncated_gaussian_pdf(rule.nodes[i], sigma)};
    }
    return normalized(std::move(reals));
}

std::vector<Realization> parameter_quadrature(double sigma, std::size_t n) {
    const double lo = kParamLowerCut * sigma;
    const double log_lo = std::log(lo);
    const double log_hi = std::log(kParamUpperCut * sigma);
    const double norm = std::sqrt(2.0 / std::numbers::pi) / sigma;  // folded normal at 0

    std::vector<Realization> reals;
    reals.reserve(n);
    reals.push_back({0.5 * lo, std::erf(kParamLowerCut / std::numbers::sqrt2)});

    const QuadratureRule rule = gauss_legendre(n - 1, log_lo, log_hi);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double delta = std::exp(rule.nodes[i]);
        const double density = norm * std::exp(-0.5 * (delta / sigma) * (delta / sigma));
        reals.push_back({delta, rule.weights[i] * delta * density});
    }
    return normalized(std::move(reals));
}

std::vector<Realization> monte_carlo(const DisorderModel& model, const MonteCarlo& mc) {
    std::mt19937_64 rng(mc.seed);
    std::vector<Realization> reals;
    reals.reserve(mc.n_samples);
    const double weight = 1.0 / static_cast<double>(mc.n_samples);
    const double erf_cut = std::erf(kTruncation / std::numbers::sqrt2);

    while (reals.size() < mc.n_samples) {
        const double p = 2.0 * open_unit(rng) - 1.0;
        double delta = 0.0;
        if (model.channel == DisorderChannel::time) {
            // inverse CDF of the normal truncated to [-3 sigma, 3 sigma]
            delta = model.sigma * std::numbers::sqrt2 * boost::math::erf_inv(p * erf_cut);
            delta = std::clamp(delta, -kTruncation * model.sigma, kTruncation * model.sigma);
        } else {
            delta = model.sigma * std::numbers::sqrt2 * boost::math::erf_inv(p);
            if (std::abs(delta) >= 1.0) {
                continue;  // g_final would leave (0, 1]; redraw
            }
        }
        reals.push_back({delta, weight});
    }
    return reals;
}

std::vector<Realization> quadrature_with(const DisorderModel& model, std::size_t n) {
    return model.channel == DisorderChannel::time ? time_quadrature(model.sigma, n)
                                                  : parameter_quadrature(model.sigma, n);
}

struct Plan {
    std::vector<Realization> primary;
    std::vector<Realization> refinement;  // empty unless quadrature refinement applies
    bool monte_carlo = false;
};

Plan make_plan(const DisorderModel& model, const AveragingScheme& scheme) {
    Plan plan;
    plan.primary = realizations(model, scheme);
    plan.monte_carlo = std::holds_alternative<MonteCarlo>(scheme);
    if (const auto* q = std::get_if<Quadrature>(&scheme); q != nullptr && !model.degenerate()) {
        plan.refinement = quadrature_with(model, (q->n_nodes + 1) / 2);
    }
    return plan;
}

double annotated_energy(const DisorderModel& model, const QuenchSpec& base, double delta,
                        const IntegratorConfig& cfg) {
    const QuenchSpec spec = effective_quench(model, base, delta);
    try {
        return quench_residual_energy(spec, cfg);
    } catch (const NumericalError& e) {
        std::ostringstream os;
        os << "realization delta=" << delta << " (g_final=" << spec.g_final
           << ", omega_tau=" << spec.omega_tau << "): " << e.what();
        throw RealizationFailure(os.str(), delta, spec.omega_tau);
    }
}

EnsembleValue reduce(const Plan& plan, std::span<const double> primary,
                     std::span<const double> refinement) {
    EnsembleValue out;
    out.n_realizations = plan.primary.size();
    out.mean = weighted_mean(plan.primary, primary);
    if (plan.monte_carlo) {
        out.std_error = sample_standard_error(primary, out.mean);
    } else if (!plan.refinement.empty()) {
        out.std_error = std::abs(out.mean - weighted_mean(plan.refinement, refinement));
    }
    return out;
}

}  // namespace

void DisorderModel::validate() const {
    const double max_sigma = channel == DisorderChannel::time ? kMaxTimeSigma : kMaxParamSigma;
    // 1/3 is stored inexactly; accept the nearest double above it too.
    if (!(sigma >= 0.0 && sigma <= max_sigma * (1.0 + 1e-12))) {
        std::ostringstream os;
        os << "sigma=" << sigma << " outside [0, " << max_sigma << "] for the "
           << (channel == DisorderChannel::time ? "time" : "parameter") << " channel";
        throw InvalidDispersion(os.str());
    }
}

void validate(const AveragingScheme& scheme) {
    if (const auto* mc = std::get_if<MonteCarlo>(&scheme)) {
        if (mc->n_samples < 2) {
            throw InvalidScheme("Monte Carlo averaging needs at least 2 samples");
        }
    } else if (std::get<Quadrature>(scheme).n_nodes < 3) {
        throw InvalidScheme("quadrature averaging needs at least 3 nodes");
    }
}

double truncated_gaussian_pdf(double delta, double sigma) {
    if (!(sigma > 0.0)) {
        throw InvalidDispersion("truncated Gaussian needs sigma > 0");
    }
    if (std::abs(delta) > kTruncation * sigma) {
        return 0.0;
    }
    const double z = delta / sigma;
    return std::exp(-0.5 * z * z) /
           (std::sqrt(2.0 * std::numbers::pi) * sigma * std::erf(kTruncation / std::numbers::sqrt2));
}

QuenchSpec effective_quench(const DisorderModel& model, const QuenchSpec& base, double delta) {
    if (model.channel == DisorderChannel::time) {
        if (std::abs(delta) > kTruncation * model.sigma * (1.0 + 1e-12) || !(1.0 + delta > 0.0)) {
            std::ostringstream os;
            os << "delta=" << delta << " outside the time-disorder support |delta| <= "
               << kTruncation * model.sigma;
            throw OutOfSupport(os.str());
        }
        return {base.g_final, base.omega_tau * (1.0 + delta)};
    }
    if (!(std::abs(delta) < 1.0)) {
        std::ostringstream os;
        os << "delta=" << delta << " would give g_final=" << 1.0 - std::abs(delta)
           << " <= 0 for parameter disorder";
        throw OutOfSupport(os.str());
    }
    return {1.0 - std::abs(delta), base.omega_tau};
}

std::vector<Realization> realizations(const DisorderModel& model, const AveragingScheme& scheme) {
    model.validate();
    validate(scheme);
    if (model.degenerate()) {
        return {{0.0, 1.0}};
    }
    if (const auto* mc = std::get_if<MonteCarlo>(&scheme)) {
        return monte_carlo(model, *mc);
    }
    return quadrature_with(model, std::get<Quadrature>(scheme).n_nodes);
}

double averaged_g_final(double sigma) {
    return 1.0 - std::sqrt(2.0 / std::numbers::pi) * sigma;
}

double sample_standard_error(std::span<const double> values, double mean) {
    if (values.size() < 2) {
        return 0.0;
    }
    double ss = 0.0;
    for (const double x : values) {
        ss += (x - mean) * (x - mean);
    }
    const auto n = static_cast<double>(values.size());
    return std::sqrt(ss / (n * (n - 1.0)));
}

double weighted_mean(std::span<const Realization> reals, std::span<const double> values) {
    double sum = 0.0;
    for (std::size_t i = 0; i < reals.size(); ++i) {
        sum += reals[i].weight * values[i];
    }
    return sum;
}

std::vector<double> realization_energies(const QuenchSpec& base, const DisorderModel& model,
                                         std::span<const Realization> reals,
                                         const IntegratorConfig& cfg, unsigned jobs) {
    std::vector<double> energies(reals.size());
    parallel_for(reals.size(), jobs, [&](std::size_t i) {
        energies[i] = annotated_energy(model, base, reals[i].delta, cfg);
    });
    return energies;
}

EnsembleValue ensemble_residual_energy(const QuenchSpec& base, const DisorderModel& model,
                                       const AveragingScheme& scheme, const IntegratorConfig& cfg,
                                       unsigned jobs) {
    const double grid[] = {base.omega_tau};
    const EnsembleResult r = ensemble_sweep(base.g_final, grid, model, scheme, cfg, jobs);
    return {r.mean_Er.front(), r.stderr_Er.front(), r.n_realizations.front()};
}

EnsembleResult ensemble_sweep(double g_final, std::span<const double> omega_tau_grid,
                              const DisorderModel& model, const AveragingScheme& scheme,
                              const IntegratorConfig& cfg, unsigned jobs) {
    cfg.validate();
    std::vector<double> grid(omega_tau_grid.begin(), omega_tau_grid.end());
    std::sort(grid.begin(), grid.end());
    for (const double wt : grid) {
        QuenchSpec{g_final, wt}.validate();
    }
    const Plan plan = make_plan(model, scheme);

    // One job per (grid point, realization); slots are fixed so the reduction
    // below runs in index order whatever the scheduling.
    struct Job {
        std::size_t grid_index;
        const Realization* real;
        double* slot;
    };
    const std::size_t per_point = plan.primary.size() + plan.refinement.size();
    std::vector<double> values(grid.size() * per_point);
    std::vector<Job> work;
    work.reserve(values.size());
    // Longest quenches first for better load balance.
    for (std::size_t gi = grid.size(); gi-- > 0;) {
        double* base_slot = values.data() + gi * per_point;
        for (std::size_t j = 0; j < plan.primary.size(); ++j) {
            work.push_back({gi, &plan.primary[j], base_slot + j});
        }
        for (std::size_t j = 0; j < plan.refinement.size(); ++j) {
            work.push_back({gi, &plan.refinement[j], base_slot + plan.primary.size() + j});
        }
    }

    parallel_for(work.size(), jobs, [&](std::size_t k) {
        const Job& job = work[k];
        *job.slot =
            annotated_energy(model, {g_final, grid[job.grid_index]}, job.real->delta, cfg);
    });

    EnsembleResult result;
    result.model = model;
    result.scheme = scheme;
    result.g_final = g_final;
    result.omega_tau_grid = grid;
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        const std::span<const double> row(values.data() + gi * per_point, per_point);
        const EnsembleValue v = reduce(plan, row.first(plan.primary.size()),
                                       row.subspan(plan.primary.size()));
        result.mean_Er.push_back(v.mean);
        result.stderr_Er.push_back(v.std_error);
        result.n_realizations.push_back(v.n_realizations);
    }
    return result;
}

}  // namespace rabiq
