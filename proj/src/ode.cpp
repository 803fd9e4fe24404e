#include "berry/ode.hpp"
#include "berry/errors.hpp"

#include <boost/numeric/odeint.hpp>

#include <cmath>
#include <string>

namespace berry {

namespace odeint = boost::numeric::odeint;

void integrate_to_times(const OdeRhs& rhs, CVec& x, const std::vector<double>& times,
                        const OdeObserver& obs, OdeTolerance tol) {
    if (times.empty()) return;
    if (times.size() == 1) {
        obs(x, times.front());
        return;
    }
    using stepper_t = odeint::runge_kutta_dopri5<CVec>;
    auto stepper = odeint::make_dense_output(tol.atol, tol.rtol, stepper_t());
    const double span = times.back() - times.front();
    const double dt0 = span > 0 ? span * 1e-6 : 1e-9;
    auto sys = [&](const CVec& y, CVec& dy, double t) { rhs(y, dy, t); };
    auto wrap = [&](const CVec& y, double t) {
        for (const auto& v : y)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw ConvergenceError("non-finite state at t = " + std::to_string(t));
        obs(y, t);
    };
    try {
        odeint::integrate_times(stepper, sys, x, times.begin(), times.end(), dt0, wrap,
                                odeint::max_step_checker(10000000));
    } catch (const ConvergenceError&) {
        throw;
    } catch (const std::exception& ex) {
        throw ConvergenceError(std::string("integrator failure: ") + ex.what());
    }
}

std::vector<double> uniform_times(double t0, double tEnd, double dt) {
    if (!(dt > 0.0)) throw InvalidParameter("output step must be positive");
    std::vector<double> ts;
    const long n = std::lround(std::ceil((tEnd - t0) / dt - 1e-9));
    for (long k = 0; k < n; ++k) ts.push_back(t0 + k * dt);
    ts.push_back(tEnd);
    return ts;
}

} // namespace berry
