#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace berry {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

struct OdeTolerance {
    double rtol = 1e-9;
    double atol = 1e-12;
};

using OdeRhs = std::function<void(const CVec& x, CVec& dxdt, double t)>;
using OdeObserver = std::function<void(const CVec& x, double t)>;

// Adaptive Dormand-Prince integration of x from times.front() through every
// entry of times (ascending). obs is called at each requested time, including
// the first. Throws ConvergenceError on step-size collapse.
void integrate_to_times(const OdeRhs& rhs, CVec& x, const std::vector<double>& times,
                        const OdeObserver& obs, OdeTolerance tol = {});

// Uniform grid t0, t0+dt, ..., ending exactly at tEnd.
std::vector<double> uniform_times(double t0, double tEnd, double dt);

} // namespace berry
