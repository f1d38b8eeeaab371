#include "rabiq/analytics.hpp"

#include "rabiq/disorder.hpp"
#include "rabiq/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace rabiq {

namespace {

constexpr double kResidualTol = 1e-10;
constexpr int kBisectionBudget = 200;

const double kKzmPrefactor = 1.0 / (4.0 * std::cbrt(2.0));

void require_positive(double omega_tau, const char* what) {
    if (!(omega_tau > 0.0) || !std::isfinite(omega_tau)) {
        std::ostringstream os;
        os << what << ": omega_tau=" << omega_tau << " must be positive and finite";
        throw DomainError(os.str());
    }
}

// (1 - g^2) written as eps (2 - eps) with eps = 1 - g.
double gap_factor(double eps) { return eps * (2.0 - eps); }

}  // namespace

double apt_residual_energy(double g_final, double omega_tau) {
    if (!(g_final >= 0.0 && g_final < 1.0)) {
        std::ostringstream os;
        os << "apt_residual_energy: g_final=" << g_final << " outside [0, 1); APT diverges at 1";
        throw DomainError(os.str());
    }
    require_positive(omega_tau, "apt_residual_energy");
    const double g2 = g_final * g_final;
    return g2 * g2 / (16.0 * std::pow(1.0 - g2, 2.5)) / (omega_tau * omega_tau);
}

double freezeout_residual(double g_hat, double omega_tau_delta) {
    const double eps = 1.0 - g_hat;
    return std::pow(gap_factor(eps), 1.5) / g_hat - 0.5 / omega_tau_delta;
}

FreezeOut freezeout_g(double omega_tau_delta) {
    require_positive(omega_tau_delta, "freezeout_g");
    const double target = 0.5 / omega_tau_delta;
    // In eps = 1 - g the left side (eps (2 - eps))^(3/2) / (1 - eps) increases
    // from 0 to infinity on (0, 1).
    auto lhs = [](double eps) { return std::pow(gap_factor(eps), 1.5) / (1.0 - eps); };

    double lo = 0.0;
    double hi = 1.0;
    for (int i = 0; i < kBisectionBudget; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        (lhs(mid) < target ? lo : hi) = mid;
    }
    const double eps = std::abs(lhs(lo) - target) <= std::abs(lhs(hi) - target) ? lo : hi;
    FreezeOut fo{1.0 - eps, eps, omega_tau_delta};

    const double residual = std::abs(lhs(eps) - target);
    if (!(residual <= kResidualTol) || !(eps > 0.0 && eps < 1.0)) {
        std::ostringstream os;
        os << "freezeout_g: residual " << residual << " above " << kResidualTol
           << " at omega_tau_delta=" << omega_tau_delta;
        throw ConvergenceFailure(os.str());
    }
    return fo;
}

double freezeout_g_series(double omega_tau_delta) {
    require_positive(omega_tau_delta, "freezeout_g_series");
    return 1.0 - 1.0 / (2.0 / 3.0 + std::pow(2.0, 5.0 / 3.0) * std::pow(omega_tau_delta, 2.0 / 3.0));
}

double freezeout_g_series_alt(double omega_tau_delta) {
    require_positive(omega_tau_delta, "freezeout_g_series_alt");
    return 1.0 - 1.0 / (std::pow(2.0, 2.5) * std::pow(omega_tau_delta, 2.0 / 3.0));
}

double freezeout_residual_energy(const FreezeOut& fo) {
    const double gap = gap_factor(fo.eps_hat);
    return fo.g_hat * fo.g_hat / (16.0 * std::pow(gap, 2.5)) /
           (fo.omega_tau_delta * fo.omega_tau_delta);
}

double kzm_residual_energy(double omega_tau, double delta) {
    require_positive(omega_tau, "kzm_residual_energy");
    const double stretch = 1.0 + delta;
    if (!(stretch > 0.0)) {
        std::ostringstream os;
        os << "kzm_residual_energy: 1 + delta = " << stretch << " must be positive";
        throw DomainError(os.str());
    }
    const double correction =
        1.0 / (stretch * 12.0 * std::numbers::sqrt2 * std::pow(omega_tau, 2.0 / 3.0));
    return kKzmPrefactor / std::cbrt(omega_tau) * (1.0 / std::cbrt(stretch) - correction);
}

double kzm_averaged_prediction(double omega_tau, double sigma) {
    require_positive(omega_tau, "kzm_averaged_prediction");
    if (!(sigma >= 0.0 && sigma <= (1.0 / 3.0) * (1.0 + 1e-12))) {
        throw DomainError("kzm_averaged_prediction: sigma outside [0, 1/3]");
    }
    return kKzmPrefactor / std::cbrt(omega_tau);
}

double kzm_disorder_averaged(double omega_tau, double sigma, unsigned n_nodes) {
    const auto reals =
        realizations({DisorderChannel::time, sigma}, Quadrature{n_nodes});
    double sum = 0.0;
    for (const auto& r : reals) {
        sum += r.weight * kzm_residual_energy(omega_tau, r.delta);
    }
    return sum;
}

}  // namespace rabiq
