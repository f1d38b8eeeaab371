#pragma once

// Closed-form slow-quench predictions: adiabatic perturbation theory away from
// the critical point and Kibble-Zurek freeze-out estimates at it. All
// energies are in units of hbar*omega, all times are omega*t.

namespace rabiq {

/// Coupling at which the relaxation time equals the transition time.
struct FreezeOut {
    double g_hat = 0.0;
    double eps_hat = 1.0;  ///< 1 - g_hat, kept separately for precision near g_hat -> 1
    double omega_tau_delta = 0.0;
};

/// g_f^4 / (16 (1 - g_f^2)^(5/2)) * (omega tau)^-2. Valid for g_f << 1 and
/// omega tau >> 1. Throws DomainError for g_f outside [0, 1).
[[nodiscard]] double apt_residual_energy(double g_final, double omega_tau);

/// Residual of the freeze-out condition (1 - g^2)^(3/2) / g - 1 / (2 omega tau_delta).
[[nodiscard]] double freezeout_residual(double g_hat, double omega_tau_delta);

/// Exact freeze-out coupling by bisection. The left side of the condition is
/// monotone on (0, 1) so the root is unique. Throws ConvergenceFailure if the
/// residual does not reach 1e-10.
[[nodiscard]] FreezeOut freezeout_g(double omega_tau_delta);

/// 1 - 1 / (2/3 + 2^(5/3) (omega tau_delta)^(2/3)): linearization of the
/// freeze-out condition around g = 1.
[[nodiscard]] double freezeout_g_series(double omega_tau_delta);

/// Large-time form 1 - 1 / (2^(5/2) (omega tau_delta)^(2/3)) as commonly
/// printed; kept for comparison with freezeout_g_series, whose 2^(5/3)
/// coefficient is the one consistent with kzm_averaged_prediction.
[[nodiscard]] double freezeout_g_series_alt(double omega_tau_delta);

/// APT residual energy evaluated at the freeze-out point:
/// g^2 / (16 (1 - g^2)^(5/2)) * (omega tau_delta)^-2.
[[nodiscard]] double freezeout_residual_energy(const FreezeOut& fo);

/// Kibble-Zurek residual energy of one time-disorder realization:
/// [1 / (4 2^(1/3) (omega tau)^(1/3))] [(1+delta)^(-1/3) - (1+delta)^(-1) / (12 sqrt2 (omega tau)^(2/3))].
/// Throws DomainError for 1 + delta <= 0.
[[nodiscard]] double kzm_residual_energy(double omega_tau, double delta);

/// Leading-order disorder average, (omega tau)^(-1/3) / (4 2^(1/3)); independent of sigma.
[[nodiscard]] double kzm_averaged_prediction(double omega_tau, double sigma);

/// kzm_residual_energy integrated against the truncated-Gaussian time
/// disorder with an n-node quadrature. Reduces to kzm_residual_energy(omega_tau, 0)
/// at sigma = 0.
[[nodiscard]] double kzm_disorder_averaged(double omega_tau, double sigma, unsigned n_nodes = 33);

}  // namespace rabiq
