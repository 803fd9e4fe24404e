#include "berry/errors.hpp"
#include "berry/oracle.hpp"

#include <array>
#include <cmath>

namespace berry {

namespace {

// Letters: 0 = |0><0|, 1 = |0><1|, 2 = |1><0|, 3 = |1><1|, with |0> = up (m = +1/2).
struct CountBasis {
    int N;
    std::vector<std::array<int, 4>> counts;
    std::vector<int> table; // dense lookup over (n0, n1, n2)

    explicit CountBasis(int n) : N(n), table(std::size_t(n + 1) * (n + 1) * (n + 1), -1) {
        for (int a = 0; a <= N; ++a)
            for (int b = 0; a + b <= N; ++b)
                for (int c = 0; a + b + c <= N; ++c) {
                    table[key(a, b, c)] = int(counts.size());
                    counts.push_back({a, b, c, N - a - b - c});
                }
    }
    std::size_t key(int a, int b, int c) const { return (std::size_t(a) * (N + 1) + b) * (N + 1) + c; }
    int index(const std::array<int, 4>& n) const {
        for (int v : n)
            if (v < 0) return -1;
        return table[key(n[0], n[1], n[2])];
    }
};

double log_multinomial(int total, const std::array<int, 4>& n) {
    double r = std::lgamma(total + 1.0);
    for (int v : n) r -= std::lgamma(v + 1.0);
    return r;
}

constexpr int letter_ket(int x) { return x >> 1; }
constexpr int letter_bra(int x) { return x & 1; }

} // namespace

EffectiveOracleResult lindblad_effective(const TwistingModel& m, int N, const std::vector<double>& times,
                                         OdeTolerance tol) {
    if (N < 1 || N > 60) throw DimensionError("effective oracle limited to 1 <= N <= 60");
    if (times.empty() || times.front() != 0.0) throw InvalidParameter("times must start at 0");
    const CountBasis cb(N);
    const int D = int(cb.counts.size());
    const double chi = m.chiSign * m.chiCheck, Gc = m.GammaCheck, gd = m.gammaD, gm = m.gammaMinus;
    const cplx I(0.0, 1.0);

    std::vector<cplx> diag(D);
    std::vector<int> feed(D, -1); // index receiving the 11 -> 00 transfer
    std::vector<double> feedFactor(D, 0.0);
    for (int i = 0; i < D; ++i) {
        const auto& n = cb.counts[i];
        const double mL = 0.5 * (n[0] + n[1] - n[2] - n[3]);
        const double mR = 0.5 * (n[0] + n[2] - n[1] - n[3]);
        diag[i] = -I * chi * (mL * mL - mR * mR) - 0.5 * Gc * (mL - mR) * (mL - mR) - 0.5 * gd * (n[1] + n[2]) -
                  gm * (n[3] + 0.5 * (n[1] + n[2]));
        if (n[3] > 0) {
            feed[i] = cb.index({n[0] + 1, n[1], n[2], n[3] - 1});
            feedFactor[i] = n[0] + 1.0;
        }
    }

    CVec c(D, std::pow(0.5, N));
    auto rhs = [&](const CVec& y, CVec& dy, double) {
        for (int i = 0; i < D; ++i) dy[i] = diag[i] * y[i];
        if (gm > 0.0)
            for (int i = 0; i < D; ++i)
                if (feed[i] >= 0) dy[feed[i]] += gm * feedFactor[i] * y[i];
    };

    // Single-atom operators in the (|0>, |1>) basis.
    Eigen::Matrix2cd sx, sy, sz;
    sx << 0, 0.5, 0.5, 0;
    sy << 0, -0.5 * I, 0.5 * I, 0;
    sz << 0.5, 0, 0, -0.5;
    const std::array<Eigen::Matrix2cd, 3> s = {sx, sy, sz};

    EffectiveOracleResult res;
    auto observe = [&](const CVec& y, double t) {
        Eigen::Matrix2cd rho1 = Eigen::Matrix2cd::Zero();
        Eigen::Matrix4cd rho2 = Eigen::Matrix4cd::Zero();
        double tr = 0.0;
        for (int i = 0; i < D; ++i) {
            const auto& n = cb.counts[i];
            if (y[i] == 0.0) continue;
            const int off = n[1] + n[2];
            if (off == 0) tr += std::exp(log_multinomial(N, n)) * y[i].real();
            if (off > 2) continue;
            for (int x = 0; x < 4; ++x) {
                auto r = n;
                if (--r[x] < 0) continue;
                if (r[1] + r[2] == 0)
                    rho1(letter_ket(x), letter_bra(x)) += y[i] * std::exp(log_multinomial(N - 1, r));
                for (int z = 0; z < 4 && N >= 2; ++z) {
                    auto q = r;
                    if (--q[z] < 0 || q[1] + q[2] != 0) continue;
                    rho2(2 * letter_ket(x) + letter_ket(z), 2 * letter_bra(x) + letter_bra(z)) +=
                        y[i] * std::exp(log_multinomial(N - 2, q));
                }
            }
        }
        Eigen::Vector3d mean;
        Eigen::Matrix3d cov;
        for (int a = 0; a < 3; ++a) mean(a) = N * (rho1 * s[a]).trace().real();
        for (int a = 0; a < 3; ++a)
            for (int bb = 0; bb < 3; ++bb) {
                const Eigen::Matrix2cd sab = 0.5 * (s[a] * s[bb] + s[bb] * s[a]);
                Eigen::Matrix4cd kron;
                for (int i1 = 0; i1 < 2; ++i1)
                    for (int j1 = 0; j1 < 2; ++j1)
                        for (int i2 = 0; i2 < 2; ++i2)
                            for (int j2 = 0; j2 < 2; ++j2) kron(2 * i1 + i2, 2 * j1 + j2) = s[a](i1, j1) * s[bb](i2, j2);
                double second = N * (rho1 * sab).trace().real();
                if (N >= 2) second += double(N) * (N - 1) * (rho2 * kron).trace().real();
                cov(a, bb) = second - mean(a) * mean(bb);
            }
        res.times.push_back(t);
        res.meanS.push_back(mean);
        res.xi2.push_back(wineland(mean, cov, N));
        res.traceError.push_back(std::abs(tr - 1.0));
    };
    integrate_to_times(rhs, c, times, observe, tol);
    return res;
}

} // namespace berry
