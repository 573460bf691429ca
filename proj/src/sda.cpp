#include "fsikit/sda.hpp"

#include "fsikit/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fsikit {

namespace {

CycleResult checked_cycle(const SwitchedModel& model,
                          const Eigen::VectorXd& x) {
    CycleResult cyc = advance_one_period(model, x);
    if (cyc.dcm)
        throw NumericalError(
            "stroboscopic map undefined: inductor current reached zero (DCM)");
    return cyc;
}

double state_scale(const Eigen::VectorXd& x) {
    return std::max(x.norm(), 1e-9);
}

Eigen::VectorXd fd_column(const SwitchedModel& model,
                          const Eigen::VectorXd& x_star, int j, double step) {
    Eigen::VectorXd xp = x_star;
    Eigen::VectorXd xm = x_star;
    xp(j) += step;
    xm(j) -= step;
    const Eigen::VectorXd fp = checked_cycle(model, xp).x_end;
    const Eigen::VectorXd fm = checked_cycle(model, xm).x_end;
    return (fp - fm) / (2.0 * step);
}

Eigen::MatrixXd map_jacobian(const SwitchedModel& model,
                             const Eigen::VectorXd& x_star, double rel_step) {
    // Central differences with per-state scaled steps.  The trial step is
    // rel_step of the state scale; a second pass then rescales each column so
    // the map moves by ~rel_step * scale in output, which keeps the step well
    // below the map's nonlinearity range even for state components that are
    // tiny in magnitude yet carry large sensitivity (integrator states of a
    // high-gain compensator move the duty cycle by O(1) over a span of
    // 1e-7 of the state norm).
    const int n = model.n;
    const double scale = state_scale(x_star);
    Eigen::MatrixXd J(n, n);
    for (int j = 0; j < n; ++j) {
        const double trial =
            rel_step * std::max(std::abs(x_star(j)), 1e-3 * scale);
        Eigen::VectorXd col = fd_column(model, x_star, j, trial);
        const double sens = col.norm();
        if (sens > 0.0) {
            const double tuned = rel_step * scale / sens;
            if (tuned < 0.5 * trial || tuned > 2.0 * trial)
                col = fd_column(model, x_star, j, tuned);
        }
        J.col(j) = col;
    }
    return J;
}

std::vector<std::complex<double>> eigenvalues_of(const Eigen::MatrixXd& J) {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(J, /*computeEigenvectors=*/false);
    std::vector<std::complex<double>> ev(static_cast<size_t>(J.rows()));
    for (int i = 0; i < J.rows(); ++i)
        ev[static_cast<size_t>(i)] = solver.eigenvalues()(i);
    std::sort(ev.begin(), ev.end(), [](const auto& a, const auto& b) {
        return std::abs(a) > std::abs(b);
    });
    return ev;
}

} // namespace

Eigen::VectorXd stroboscopic_map(const SwitchedModel& model,
                                 const Eigen::VectorXd& x) {
    return checked_cycle(model, x).x_end;
}

Eigen::VectorXd find_periodic_orbit(const SwitchedModel& model) {
    // Undo the deliberate 0.1% perturbation of the simulator's default state.
    return find_periodic_orbit(model, default_initial_state(model) / 1.001);
}

Eigen::VectorXd find_periodic_orbit(const SwitchedModel& model,
                                    const Eigen::VectorXd& seed) {
    if (seed.size() != model.n)
        throw ConfigError("orbit seed has the wrong dimension");
    Eigen::VectorXd x = seed;
    std::vector<double> residuals;
    const int max_iter = 50;
    for (int it = 0; it < max_iter; ++it) {
        const Eigen::VectorXd g = stroboscopic_map(model, x) - x;
        const double res = g.norm();
        residuals.push_back(res);
        if (res < 1e-10 * state_scale(x))
            return x;
        const Eigen::MatrixXd J = map_jacobian(model, x, 1e-6);
        const Eigen::MatrixXd A =
            J - Eigen::MatrixXd::Identity(model.n, model.n);
        const Eigen::VectorXd dx = A.fullPivLu().solve(-g);
        // Backtracking: accept the longest step (full, then halved) that
        // reduces the residual, so the iteration cannot cycle between two
        // basins when the seed is far from the orbit.
        double t = 1.0;
        bool accepted = false;
        for (int k = 0; k < 30; ++k, t *= 0.5) {
            const Eigen::VectorXd cand = x + t * dx;
            try {
                if ((stroboscopic_map(model, cand) - cand).norm() < res) {
                    x = cand;
                    accepted = true;
                    break;
                }
            } catch (const NumericalError&) {
                // candidate stepped into DCM; shorten further
            }
        }
        if (!accepted)
            x += dx; // no improving damped step: take the full Newton step
    }
    std::ostringstream msg;
    msg << "periodic orbit search did not converge in " << max_iter
        << " iterations; residual history:";
    for (double r : residuals)
        msg << ' ' << r;
    throw NumericalError(msg.str());
}

PoincareResult jacobian_eigenvalues(const SwitchedModel& model,
                                    const Eigen::VectorXd& x_star) {
    PoincareResult res;
    res.fixed_point = x_star;
    res.duty_at_fixed_point = checked_cycle(model, x_star).duty;

    const Eigen::MatrixXd J = map_jacobian(model, x_star, 1e-6);
    res.eigenvalues = eigenvalues_of(J);

    // Step-halving robustness check.
    const Eigen::MatrixXd J_half = map_jacobian(model, x_star, 5e-7);
    const auto ev_half = eigenvalues_of(J_half);
    for (size_t i = 0; i < res.eigenvalues.size(); ++i)
        if (std::abs(res.eigenvalues[i] - ev_half[i]) > kEigenvalueTol)
            res.jacobian_warning = true;

    res.dominant = res.eigenvalues.front();
    const double rmax = std::abs(res.dominant);
    res.unstable = rmax > 1.0 + kEigenvalueTol;
    res.marginal = std::abs(rmax - 1.0) <= kEigenvalueTol;
    return res;
}

SdaVerdict sda_verdict(const ConverterConfig& cfg) {
    const SwitchedModel model = build_model(cfg);
    const Eigen::VectorXd x_star = find_periodic_orbit(model);
    SdaVerdict v;
    v.details = jacobian_eigenvalues(model, x_star);
    const double rmax = std::abs(v.details.dominant);
    v.stable = rmax < 1.0 - kEigenvalueTol;
    v.marginal = v.details.marginal;
    return v;
}

double calibrate_control_voltage(const ConverterConfig& cfg) {
    cfg.validate();
    const OperatingPoint op = duty_and_va(cfg);
    const double target = op.D;

    auto duty_for = [&](double vc) {
        ConverterConfig c = cfg;
        c.v_c = vc;
        const SwitchedModel model = build_model(c);
        const Eigen::VectorXd x_star = find_periodic_orbit(model);
        return advance_one_period(model, x_star).duty;
    };

    double v0 = cfg.v_c.has_value() ? *cfg.v_c : estimate_control_voltage(cfg);
    double f0 = duty_for(v0) - target;
    if (std::abs(f0) < 1e-9)
        return v0;
    double v1 = v0 * (f0 > 0.0 ? 0.98 : 1.02);
    double f1 = duty_for(v1) - target;
    for (int it = 0; it < 40; ++it) {
        if (std::abs(f1) < 1e-9)
            return v1;
        const double denom = f1 - f0;
        if (denom == 0.0)
            break;
        double v2 = v1 - f1 * (v1 - v0) / denom;
        // The duty is a shallow function of v_c, so an unguarded secant step
        // can overshoot into v_c <= 0 or a DCM orbit.  Damp the step toward
        // the last good point until the orbit evaluates.
        double f2 = 0.0;
        bool ok = false;
        for (int k = 0; k < 20 && !ok; ++k) {
            if (v2 > 0.0) {
                try {
                    f2 = duty_for(v2) - target;
                    ok = true;
                } catch (const NumericalError&) {
                }
            }
            if (!ok)
                v2 = 0.5 * (v2 + v1);
        }
        if (!ok)
            break;
        v0 = v1;
        f0 = f1;
        v1 = v2;
        f1 = f2;
    }
    if (std::abs(f1) < 1e-6)
        return v1;
    throw NumericalError(
        "control-voltage calibration did not converge to the target duty");
}

} // namespace fsikit
