#include "rabiq/dynamics.hpp"

#include "rabiq/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace rabiq {

namespace {

constexpr Complex kI{0.0, 1.0};
// Drift is checked every this many fixed steps when nobody observes the trajectory.
constexpr long kDriftCheckInterval = 512;
constexpr long kMaxAdaptiveSteps = 2'000'000'000L;

void require_coupling(double g, const char* what) {
    if (!(g >= 0.0 && g <= 1.0)) {
        std::ostringstream os;
        os << what << ": coupling g=" << g << " outside the normal phase [0, 1]";
        throw InvalidCoupling(os.str());
    }
}

void check_drift(const BogoliubovState& s, const QuenchSpec& spec, const IntegratorConfig& cfg) {
    const double drift = s.constraint_drift();
    if (!(drift <= cfg.constraint_tol)) {
        std::ostringstream os;
        os << "constraint drift " << drift << " exceeds " << cfg.constraint_tol
           << " at omega_t=" << s.omega_t << " (g_final=" << spec.g_final
           << ", omega_tau=" << spec.omega_tau << ", omega_dt=" << cfg.omega_dt
           << "); reduce the step";
        throw ConstraintViolation(os.str());
    }
}

// One fourth-order Magnus step. The generator A(t) = -i a sigma_z - b sigma_y
// lives in su(1,1); Omega = x.sigma squares to (x.x) I, so exp(Omega) is
// c0 I + c1 Omega in closed form.
void magnus4_step(BogoliubovState& s, const QuenchSpec& spec, double t, double h) noexcept {
    static const double kGaussOffset = std::sqrt(3.0) / 6.0;
    static const double kCommutatorWeight = std::sqrt(3.0) / 6.0;

    const double g1 = spec.coupling_at(t + (0.5 - kGaussOffset) * h);
    const double g2 = spec.coupling_at(t + (0.5 + kGaussOffset) * h);
    const double b1 = 0.5 * g1 * g1;
    const double b2 = 0.5 * g2 * g2;
    const double a1 = 1.0 - b1;
    const double a2 = 1.0 - b2;

    // Omega = i*z_im sigma_z + y sigma_y + x sigma_x
    const double z_im = -0.5 * h * (a1 + a2);
    const double y = -0.5 * h * (b1 + b2);
    const double x = kCommutatorWeight * h * h * (a2 * b1 - a1 * b2);

    const double mu2 = x * x + y * y - z_im * z_im;
    double c0 = 0.0;
    double c1 = 0.0;
    if (mu2 < -1e-8) {
        const double theta = std::sqrt(-mu2);
        c0 = std::cos(theta);
        c1 = std::sin(theta) / theta;
    } else if (mu2 > 1e-8) {
        const double theta = std::sqrt(mu2);
        c0 = std::cosh(theta);
        c1 = std::sinh(theta) / theta;
    } else {
        c0 = 1.0 + mu2 / 2.0 + mu2 * mu2 / 24.0;
        c1 = 1.0 + mu2 / 6.0 + mu2 * mu2 / 120.0;
    }

    const Complex diag_u{c0, c1 * z_im};
    const Complex diag_v{c0, -c1 * z_im};
    const Complex off_uv{c1 * x, -c1 * y};
    const Complex off_vu{c1 * x, c1 * y};
    const Complex u = s.u;
    const Complex v = s.v;
    s.u = diag_u * u + off_uv * v;
    s.v = off_vu * u + diag_v * v;
}

void rk4_step(BogoliubovState& s, const QuenchSpec& spec, double t, double h) noexcept {
    const double g0 = spec.coupling_at(t);
    const double gm = spec.coupling_at(t + 0.5 * h);
    const double g1 = spec.coupling_at(t + h);

    BogoliubovState tmp = s;
    const Derivative k1 = rhs(s, g0);
    tmp.u = s.u + 0.5 * h * k1.du;
    tmp.v = s.v + 0.5 * h * k1.dv;
    const Derivative k2 = rhs(tmp, gm);
    tmp.u = s.u + 0.5 * h * k2.du;
    tmp.v = s.v + 0.5 * h * k2.dv;
    const Derivative k3 = rhs(tmp, gm);
    tmp.u = s.u + h * k3.du;
    tmp.v = s.v + h * k3.dv;
    const Derivative k4 = rhs(tmp, g1);
    s.u += h / 6.0 * (k1.du + 2.0 * k2.du + 2.0 * k3.du + k4.du);
    s.v += h / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
}

template <class Step>
BogoliubovState run_fixed(const QuenchSpec& spec, const IntegratorConfig& cfg, Step step,
                          const std::function<void(const BogoliubovState&)>* observer) {
    const long n = std::max(1L, static_cast<long>(std::ceil(spec.omega_tau / cfg.omega_dt)));
    const double h = spec.omega_tau / static_cast<double>(n);

    BogoliubovState s;
    if (observer != nullptr) {
        (*observer)(s);
    }
    for (long k = 0; k < n; ++k) {
        step(s, spec, static_cast<double>(k) * h, h);
        s.omega_t = (k + 1 == n) ? spec.omega_tau : static_cast<double>(k + 1) * h;
        if (observer != nullptr) {
            check_drift(s, spec, cfg);
            (*observer)(s);
        } else if ((k + 1) % kDriftCheckInterval == 0) {
            check_drift(s, spec, cfg);
        }
    }
    check_drift(s, spec, cfg);
    return s;
}

// Dormand-Prince 5(4) with standard step-size control.
BogoliubovState run_adaptive(const QuenchSpec& spec, const IntegratorConfig& cfg,
                             const std::function<void(const BogoliubovState&)>* observer) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    struct Pair {
        Complex u, v;
    };
    auto f = [&](double t, const Pair& y) {
        const Derivative d = rhs(BogoliubovState{y.u, y.v, t}, spec.coupling_at(t));
        return Pair{d.du, d.dv};
    };
    auto combine = [](const Pair& y, double h, std::initializer_list<std::pair<double, const Pair*>> terms) {
        Pair out = y;
        for (const auto& [c, k] : terms) {
            out.u += h * c * k->u;
            out.v += h * c * k->v;
        }
        return out;
    };

    BogoliubovState s;
    if (observer != nullptr) {
        (*observer)(s);
    }
    Pair y{s.u, s.v};
    double t = 0.0;
    double h = std::min(cfg.omega_dt, spec.omega_tau);
    Pair k1 = f(t, y);
    long steps = 0;

    while (t < spec.omega_tau) {
        if (++steps > kMaxAdaptiveSteps) {
            throw ConvergenceFailure("adaptive integrator exceeded its step budget");
        }
        const bool last = t + h >= spec.omega_tau;
        if (last) {
            h = spec.omega_tau - t;
        }
        const Pair k2 = f(t + c2 * h, combine(y, h, {{a21, &k1}}));
        const Pair k3 = f(t + c3 * h, combine(y, h, {{a31, &k1}, {a32, &k2}}));
        const Pair k4 = f(t + c4 * h, combine(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
        const Pair k5 =
            f(t + c5 * h, combine(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
        const Pair k6 = f(t + h, combine(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4},
                                                {a65, &k5}}));
        const Pair y_new = combine(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
        const Pair k7 = f(t + h, y_new);
        const Pair err = combine(Pair{}, h, {{e1, &k1}, {e3, &k3}, {e4, &k4}, {e5, &k5},
                                             {e6, &k6}, {e7, &k7}});

        const double sc_u = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y.u), std::abs(y_new.u));
        const double sc_v = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y.v), std::abs(y_new.v));
        const double err_norm = std::max(std::abs(err.u) / sc_u, std::abs(err.v) / sc_v);
        if (!std::isfinite(err_norm)) {
            throw ConvergenceFailure("adaptive integrator produced a non-finite error estimate");
        }

        if (err_norm <= 1.0) {
            t = last ? spec.omega_tau : t + h;
            y = y_new;
            k1 = k7;
            s = BogoliubovState{y.u, y.v, t};
            if (observer != nullptr) {
                check_drift(s, spec, cfg);
                (*observer)(s);
            } else if (steps % kDriftCheckInterval == 0) {
                check_drift(s, spec, cfg);
            }
        }
        const double factor =
            err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
        h *= factor;
        if (h < 1e-14 * std::max(1.0, spec.omega_tau)) {
            throw ConvergenceFailure("adaptive step size underflow");
        }
    }
    check_drift(s, spec, cfg);
    return s;
}

BogoliubovState dispatch(const QuenchSpec& spec, const IntegratorConfig& cfg,
                         const std::function<void(const BogoliubovState&)>* observer) {
    spec.validate();
    cfg.validate();
    if (cfg.step_mode == StepMode::adaptive) {
        return run_adaptive(spec, cfg, observer);
    }
    switch (cfg.fixed_scheme) {
        case FixedScheme::rk4:
            return run_fixed(spec, cfg, rk4_step, observer);
        case FixedScheme::magnus4:
        default:
            return run_fixed(spec, cfg, magnus4_step, observer);
    }
}

}  // namespace

void PhysicalParams::validate() const {
    if (!(omega > 0.0) || !std::isfinite(omega)) {
        throw InvalidArgument("omega must be positive and finite");
    }
}

void QuenchSpec::validate() const {
    if (!(g_final >= 0.0 && g_final <= 1.0)) {
        std::ostringstream os;
        os << "g_final=" << g_final << " outside [0, 1]; only the normal phase is supported";
        throw InvalidSpec(os.str());
    }
    if (!(omega_tau > 0.0) || !std::isfinite(omega_tau)) {
        std::ostringstream os;
        os << "omega_tau=" << omega_tau << " must be positive and finite";
        throw InvalidSpec(os.str());
    }
}

void IntegratorConfig::validate() const {
    if (!(omega_dt > 0.0) || !(rel_tol > 0.0) || !(abs_tol > 0.0) || !(constraint_tol > 0.0)) {
        throw InvalidArgument("integrator step and tolerances must be positive");
    }
}

double BogoliubovState::constraint_drift() const noexcept {
    return std::abs(std::norm(u) - std::norm(v) - 1.0);
}

Derivative rhs(const BogoliubovState& state, double g) noexcept {
    const double half_g2 = 0.5 * g * g;
    const double diag = 1.0 - half_g2;
    return {-kI * (diag * state.u - half_g2 * state.v), kI * (diag * state.v - half_g2 * state.u)};
}

BogoliubovState integrate_quench(const QuenchSpec& spec, const IntegratorConfig& cfg) {
    return dispatch(spec, cfg, nullptr);
}

BogoliubovState integrate_quench(const QuenchSpec& spec, const IntegratorConfig& cfg,
                                 const std::function<void(const BogoliubovState&)>& observer) {
    return dispatch(spec, cfg, &observer);
}

std::vector<BogoliubovState> integrate_trajectory(const QuenchSpec& spec,
                                                  const IntegratorConfig& cfg,
                                                  std::size_t samples) {
    if (samples < 2) {
        throw InvalidArgument("a trajectory needs at least two samples");
    }
    spec.validate();
    std::vector<BogoliubovState> out;
    out.reserve(samples);
    std::size_t next = 0;
    auto target = [&](std::size_t i) {
        return spec.omega_tau * static_cast<double>(i) / static_cast<double>(samples - 1);
    };
    // Records the first state at or past each sample time.
    const std::function<void(const BogoliubovState&)> observer = [&](const BogoliubovState& s) {
        while (next < samples && s.omega_t >= target(next) * (1.0 - 1e-12)) {
            out.push_back(s);
            ++next;
        }
    };
    integrate_quench(spec, cfg, observer);
    return out;
}

double residual_energy(const BogoliubovState& state, double g_final, const PhysicalParams& params) {
    require_coupling(g_final, "residual_energy");
    params.validate();
    const double value = std::norm(state.v) - 0.25 * g_final * g_final * std::norm(state.u + state.v) -
                         ground_energy_shift(g_final);
    return params.unit == EnergyUnit::hbar ? params.omega * value : value;
}

double ground_energy_shift(double g) {
    require_coupling(g, "ground_energy_shift");
    return 0.5 * (std::sqrt(1.0 - g * g) - 1.0);
}

double energy_gap(double g) {
    require_coupling(g, "energy_gap");
    return 2.0 * std::sqrt(1.0 - g * g);
}

double quench_residual_energy(const QuenchSpec& spec, const IntegratorConfig& cfg) {
    return residual_energy(integrate_quench(spec, cfg), spec.g_final);
}

}  // namespace rabiq
