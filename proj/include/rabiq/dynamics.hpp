#pragma once

// Linear quench of the normal-phase Rabi Hamiltonian in the Heisenberg
// picture. Time is measured as omega*t and energies in units of hbar*omega
// unless PhysicalParams says otherwise.

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

namespace rabiq {

using Complex = std::complex<double>;

enum class EnergyUnit {
    hbar_omega,  ///< E / (hbar omega), dimensionless
    hbar,        ///< E / hbar, i.e. an angular frequency (omega * dimensionless value)
};

struct PhysicalParams {
    double omega = 1.0;  ///< cavity frequency, > 0
    EnergyUnit unit = EnergyUnit::hbar_omega;

    void validate() const;
};

/// g(t) = g_final * t / tau on 0 <= t <= tau.
struct QuenchSpec {
    double g_final = 1.0;    ///< in [0, 1]
    double omega_tau = 1e3;  ///< > 0

    void validate() const;
    [[nodiscard]] double coupling_at(double omega_t) const noexcept {
        return g_final * omega_t / omega_tau;
    }
};

struct BogoliubovState {
    Complex u{1.0, 0.0};
    Complex v{0.0, 0.0};
    double omega_t = 0.0;

    /// | |u|^2 - |v|^2 - 1 |
    [[nodiscard]] double constraint_drift() const noexcept;
};

enum class StepMode { fixed, adaptive };

/// Propagator used in fixed-step mode.
enum class FixedScheme {
    magnus4,  ///< fourth-order Magnus exponential, preserves |u|^2 - |v|^2 exactly
    rk4,      ///< classical Runge-Kutta
};

struct IntegratorConfig {
    StepMode step_mode = StepMode::fixed;
    FixedScheme fixed_scheme = FixedScheme::magnus4;
    double omega_dt = 5e-3;  ///< fixed step; also the initial trial step in adaptive mode
    double rel_tol = 1e-10;  ///< adaptive mode only
    double abs_tol = 1e-12;  ///< adaptive mode only
    double constraint_tol = 1e-8;

    void validate() const;
    friend bool operator==(const IntegratorConfig&, const IntegratorConfig&) = default;
};

struct Derivative {
    Complex du;
    Complex dv;
};

/// Right-hand side of the Bogoliubov equations in rescaled time omega*t.
[[nodiscard]] Derivative rhs(const BogoliubovState& state, double g) noexcept;

/// Integrates from u = 1, v = 0 at omega*t = 0 to omega*t = omega_tau.
/// Throws InvalidSpec, ConstraintViolation or ConvergenceFailure.
[[nodiscard]] BogoliubovState integrate_quench(const QuenchSpec& spec,
                                               const IntegratorConfig& cfg = {});

/// Same integration, reporting every accepted step to `observer`.
/// The constraint is checked at every observed state.
BogoliubovState integrate_quench(const QuenchSpec& spec, const IntegratorConfig& cfg,
                                 const std::function<void(const BogoliubovState&)>& observer);

/// Samples the trajectory at `samples` evenly spaced times (including both ends).
[[nodiscard]] std::vector<BogoliubovState> integrate_trajectory(const QuenchSpec& spec,
                                                                const IntegratorConfig& cfg,
                                                                std::size_t samples);

/// Excess energy above the instantaneous ground state at coupling g_final.
[[nodiscard]] double residual_energy(const BogoliubovState& state, double g_final,
                                     const PhysicalParams& params = {});

/// (sqrt(1 - g^2) - 1) / 2: ground-state energy relative to g = 0.
[[nodiscard]] double ground_energy_shift(double g);

/// 2 sqrt(1 - g^2).
[[nodiscard]] double energy_gap(double g);

/// integrate_quench followed by residual_energy at spec.g_final.
[[nodiscard]] double quench_residual_energy(const QuenchSpec& spec,
                                            const IntegratorConfig& cfg = {});

}  // namespace rabiq
