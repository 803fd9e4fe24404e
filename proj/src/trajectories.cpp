#include "berry/trajectories.hpp"
#include "berry/errors.hpp"
#include "berry/io.hpp"
#include "berry/ode.hpp"
#include "berry/squeezing.hpp"

#include "json.hpp"
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace berry {

void Schedule::validate(int N, double Gamma) const {
    if (!(tEnd > 0.0)) throw InvalidParameter("tEnd must be positive");
    if (tOff < 0.0 || tOff > tEnd) throw InvalidParameter("tOff must lie in [0, tEnd]");
    if (!(dtBase > 0.0)) throw InvalidParameter("dtBase must be positive");
    if (dtBase > (1.0 + 1e-12) / (250.0 * N * Gamma)) throw InvalidParameter("dtBase exceeds 1/(250 N Gamma)");
    if (!(dtShrinkFactor >= 1.0)) throw InvalidParameter("dtShrinkFactor must be >= 1");
    if (shrinkWindowSteps < 0) throw InvalidParameter("shrinkWindowSteps must be >= 0");
    if (nTraj < 1) throw InvalidParameter("nTraj must be >= 1");
    if (dN < 0) throw InvalidParameter("dN must be >= 0");
    if (!(sampleEvery > 0.0)) throw InvalidParameter("sampleEvery must be positive");
    if (!(jumpCap > 0.0 && jumpCap < 1.0)) throw InvalidParameter("jumpCap must lie in (0, 1)");
}

std::vector<double> Schedule::sample_times() const {
    auto t = uniform_times(0.0, tEnd, sampleEvery);
    if (tOff > 0.0 && tOff < tEnd) {
        const bool present = std::any_of(t.begin(), t.end(), [&](double x) { return std::abs(x - tOff) <= 1e-12 * tEnd; });
        if (!present) t.insert(std::upper_bound(t.begin(), t.end(), tOff), tOff);
    }
    return t;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL))) {}

double CounterRng::uniform(std::uint64_t counter) const {
    const std::uint64_t x = splitmix64(key_ + counter * 0x9e3779b97f4a7c15ULL);
    return double(x >> 11) * 0x1.0p-53;
}

namespace {

// Banded generator for one unraveling. r[n] = sqrt((N_J - n)(n + 1)) is the
// J^- element <n|J^-|n+1>, stored in the state's layout. Each sector keeps an
// active n_e range outside of which amplitudes are exactly zero.
class Generator {
public:
    Generator(const SectoredState& psi, double Gamma, double delta, bool track)
        : psi_(psi), Gamma_(Gamma), delta_(delta), track_(track), r_(psi.size(), 0.0), L_(psi.size()),
          tmp_(psi.size()), f_(psi.size()), lo_(psi.sectors()), hi_(psi.sectors()), llo_(psi.sectors()),
          lhi_(psi.sectors()) {
        for (int NJ = psi.lo(); NJ <= psi.hi(); ++NJ) {
            double* r = r_.data() + psi.offset(NJ);
            for (int n = 0; n < NJ; ++n) r[n] = std::sqrt(double(NJ - n) * (n + 1.0));
        }
        reset_ranges(psi.data());
    }

    void set_drive(cplx shift, cplx hJ) {
        c0_ = shift;
        hJ_ = hJ;
    }

    // Active ranges from the nonzero support of x (full sectors if not tracking).
    void reset_ranges(const std::vector<cplx>& x) {
        for (int k = 0; k < psi_.sectors(); ++k) {
            const int NJ = psi_.lo() + k;
            lo_[k] = 0;
            hi_[k] = NJ;
            if (!track_) continue;
            const cplx* xs = x.data() + psi_.offset(NJ);
            while (lo_[k] < hi_[k] && xs[lo_[k]] == 0.0) ++lo_[k];
            while (hi_[k] > lo_[k] && xs[hi_[k]] == 0.0) --hi_[k];
        }
    }

    // x *= scale over the active range, then L = l x over the grown range;
    // returns ||L||^2.
    double jump(cplx* x, cplx* L, double scale) {
        double n2 = 0.0;
        for (int k = 0; k < psi_.sectors(); ++k) {
            const int NJ = psi_.lo() + k;
            const std::size_t o = psi_.offset(NJ);
            cplx* xs = x + o;
            const double* r = r_.data() + o;
            cplx* Ls = L + o;
            if (scale != 1.0)
                for (int n = lo_[k]; n <= hi_[k]; ++n) xs[n] *= scale;
            const int a = std::max(0, lo_[k] - 1), b = std::min(NJ, hi_[k] + 1);
            llo_[k] = a;
            lhi_[k] = b;
            for (int n = a; n <= b; ++n) {
                cplx v = c0_ * xs[n];
                if (n < NJ) v += r[n] * xs[n + 1];
                Ls[n] = v;
                n2 += std::norm(v);
            }
        }
        return n2;
    }

    // Euler update x += dt f(x) in place from L = l x, with the diagonal
    // -delta N_e term applied as an exact phase; returns ||x||^2 and trims
    // negligible edges.
    double euler(cplx* x, const cplx* L, double dt) {
        const cplx I(0.0, 1.0);
        const cplx c0c = std::conj(c0_), hc = std::conj(hJ_);
        const bool drive = hJ_ != 0.0;
        const double g2 = 0.5 * Gamma_ * dt;
        const cplx step = std::polar(1.0, dt * delta_);
        double n2 = 0.0;
        for (int k = 0; k < psi_.sectors(); ++k) {
            const int NJ = psi_.lo() + k;
            const std::size_t o = psi_.offset(NJ);
            cplx* xs = x + o;
            const cplx* Ls = L + o;
            const double* r = r_.data() + o;
            const int a = llo_[k], b = lhi_[k];
            cplx prev = a > 0 ? xs[a - 1] : cplx(0.0, 0.0);
            cplx ph = std::polar(1.0, dt * delta_ * a);
            for (int n = a; n <= b; ++n) {
                const cplx cur = xs[n];
                cplx q = c0c * Ls[n];
                if (n > a) q += r[n - 1] * Ls[n - 1];
                cplx v = cur - g2 * q;
                if (drive) {
                    cplx h = 0.0;
                    if (n > 0) h += hJ_ * r[n - 1] * prev;
                    if (n < NJ) h += hc * r[n] * xs[n + 1];
                    v -= (I * dt) * h;
                }
                v *= ph;
                ph *= step;
                xs[n] = v;
                n2 += std::norm(v);
                prev = cur;
            }
            lo_[k] = a;
            hi_[k] = b;
        }
        if (track_) trim(x);
        return n2;
    }

    // f = -i H_nh x given L = l x, over full sectors.
    void deriv(const cplx* x, const cplx* L, cplx* f) const {
        const cplx I(0.0, 1.0);
        const cplx c0c = std::conj(c0_), hc = std::conj(hJ_);
        const bool drive = hJ_ != 0.0;
        for (int NJ = psi_.lo(); NJ <= psi_.hi(); ++NJ) {
            const std::size_t o = psi_.offset(NJ);
            const cplx* xs = x + o;
            const cplx* Ls = L + o;
            const double* r = r_.data() + o;
            cplx* fs = f + o;
            for (int n = 0; n <= NJ; ++n) {
                cplx q = c0c * Ls[n];
                if (n > 0) q += r[n - 1] * Ls[n - 1];
                cplx v = I * (delta_ * n) * xs[n] - (0.5 * Gamma_) * q;
                if (drive) {
                    cplx h = 0.0;
                    if (n > 0) h += hJ_ * r[n - 1] * xs[n - 1];
                    if (n < NJ) h += hc * r[n] * xs[n + 1];
                    v -= I * h;
                }
                fs[n] = v;
            }
        }
    }

    // After x <- L: zero stale entries outside the computed L range.
    void adopt_jump(cplx* x) {
        for (int k = 0; k < psi_.sectors(); ++k) {
            const int NJ = psi_.lo() + k;
            cplx* xs = x + psi_.offset(NJ);
            for (int n = 0; n < llo_[k]; ++n) xs[n] = 0.0;
            for (int n = lhi_[k] + 1; n <= NJ; ++n) xs[n] = 0.0;
            lo_[k] = llo_[k];
            hi_[k] = lhi_[k];
        }
        if (track_) trim(x);
    }

    std::vector<cplx>& L() { return L_; }
    std::vector<cplx>& tmp() { return tmp_; }
    std::vector<cplx>& f() { return f_; }

private:
    void trim(cplx* x) {
        constexpr double tiny = 1e-30;
        for (int k = 0; k < psi_.sectors(); ++k) {
            cplx* xs = x + psi_.offset(psi_.lo() + k);
            while (lo_[k] < hi_[k] && std::norm(xs[lo_[k]]) < tiny) xs[lo_[k]++] = 0.0;
            while (hi_[k] > lo_[k] && std::norm(xs[hi_[k]]) < tiny) xs[hi_[k]--] = 0.0;
        }
    }

    const SectoredState& psi_;
    double Gamma_, delta_;
    bool track_;
    cplx c0_{0.0, 0.0}, hJ_{0.0, 0.0};
    std::vector<double> r_;
    std::vector<cplx> L_, tmp_, f_;
    std::vector<int> lo_, hi_, llo_, lhi_;
};

void drive_terms(const EffectiveSpinParams& p, Unraveling u, bool on, Generator& g) {
    const cplx Om = on ? p.Omega : cplx(0.0, 0.0);
    if (u == Unraveling::Shifted)
        g.set_drive(cplx(0.0, 1.0) * Om / p.Gamma, 0.0);
    else
        g.set_drive(0.0, 0.5 * Om);
}

} // namespace

TrajectoryOutput evolve_trajectory(SectoredState psi, const EffectiveSpinParams& p, const Schedule& s,
                                   const CounterRng& rng) {
    const int N = psi.N();
    s.validate(N, p.Gamma);
    TrajectoryOutput out;
    out.times = s.sample_times();
    out.moments.reserve(out.times.size());
    out.maxJumpProb.assign(out.times.size(), 0.0);

    psi.normalize();
    const bool midpoint = s.stepper == Stepper::Midpoint;
    Generator g(psi, p.Gamma, p.delta, !midpoint);
    bool driveOn = s.tOff > 0.0;
    drive_terms(p, s.unraveling, driveOn, g);
    const double dtMin = 1e-9 / (N * p.Gamma);

    auto& x = psi.data();
    auto& L = g.L();
    auto& f = g.f();
    auto& tmp = g.tmp();

    out.moments.push_back(state_moments(psi));
    std::size_t si = 0;
    double t = 0.0, scale = 1.0;
    int sinceSwitch = 0;
    std::uint64_t step = 0;

    auto fail = [&](const std::string& why) {
        out.aborted = true;
        out.diagnostic = why + " at t=" + fmt(t);
        psi.normalize();
        out.final = std::move(psi);
        return out;
    };

    while (si + 1 < out.times.size()) {
        const double tNext = out.times[si + 1];
        const double tb = driveOn ? std::min(tNext, s.tOff) : tNext;
        double dt = s.dtBase / (sinceSwitch < s.shrinkWindowSteps ? s.dtShrinkFactor : 1.0);
        bool clipped = false;
        if (t + dt >= tb) {
            dt = tb - t;
            clipped = true;
        }

        const double L2 = g.jump(x.data(), L.data(), scale);
        double prob = p.Gamma * dt * L2;
        while (prob > s.jumpCap) {
            dt *= 0.5;
            prob *= 0.5;
            clipped = false;
            if (dt < dtMin) return fail("dt underflow");
        }
        out.maxJumpProb[si + 1] = std::max(out.maxJumpProb[si + 1], prob);

        double n2;
        const double u = rng.uniform(step++);
        if (u < prob) {
            x.swap(L);
            g.adopt_jump(x.data());
            n2 = L2;
            ++out.jumps;
        } else if (!midpoint) {
            n2 = g.euler(x.data(), L.data(), dt);
        } else {
            g.deriv(x.data(), L.data(), f.data());
            for (std::size_t k = 0; k < x.size(); ++k) tmp[k] = x[k] + (0.5 * dt) * f[k];
            g.jump(tmp.data(), L.data(), 1.0);
            g.deriv(tmp.data(), L.data(), f.data());
            n2 = 0.0;
            for (std::size_t k = 0; k < x.size(); ++k) {
                x[k] += dt * f[k];
                n2 += std::norm(x[k]);
            }
        }
        if (!(n2 > 0.0) || !std::isfinite(n2)) return fail("non-finite state");
        scale = 1.0 / std::sqrt(n2);
        ++out.steps;
        ++sinceSwitch;
        t = clipped ? tb : t + dt;

        if (driveOn && t >= s.tOff) {
            driveOn = false;
            sinceSwitch = 0;
            drive_terms(p, s.unraveling, false, g);
        }
        if (t >= tNext) {
            t = tNext;
            ++si;
            for (auto& v : x) v *= scale;
            scale = 1.0;
            out.moments.push_back(state_moments(psi));
        }
    }
    for (auto& v : x) v *= scale;
    out.final = std::move(psi);
    return out;
}

namespace {

constexpr int kMomentDoubles = 2 * (9 + 81);

void to_doubles(const MomentSet& m, double* d) {
    const double* a = reinterpret_cast<const double*>(m.first.data());
    const double* b = reinterpret_cast<const double*>(m.second.data());
    std::copy(a, a + 18, d);
    std::copy(b, b + 162, d + 18);
}

MomentSet from_doubles(const double* d, double N) {
    MomentSet m;
    m.N = N;
    std::copy(d, d + 18, reinterpret_cast<double*>(m.first.data()));
    std::copy(d + 18, d + kMomentDoubles, reinterpret_cast<double*>(m.second.data()));
    return m;
}

// Neumaier-compensated sums of moment sets, one per (block, sample).
struct BlockSums {
    int blocks = 0, samples = 0;
    std::vector<double> sum, comp;
    std::vector<long> count;

    BlockSums(int b, int s)
        : blocks(b), samples(s), sum(std::size_t(b) * s * kMomentDoubles, 0.0),
          comp(sum.size(), 0.0), count(b, 0) {}

    double* at(std::vector<double>& v, int b, int k) { return v.data() + (std::size_t(b) * samples + k) * kMomentDoubles; }

    void add(int b, const std::vector<MomentSet>& ms) {
        double buf[kMomentDoubles];
        for (int k = 0; k < samples; ++k) {
            to_doubles(ms[k], buf);
            double* s = at(sum, b, k);
            double* c = at(comp, b, k);
            for (int i = 0; i < kMomentDoubles; ++i) {
                const double tsum = s[i] + buf[i];
                if (std::abs(s[i]) >= std::abs(buf[i]))
                    c[i] += (s[i] - tsum) + buf[i];
                else
                    c[i] += (buf[i] - tsum) + s[i];
                s[i] = tsum;
            }
        }
        ++count[b];
    }

    // Sum over blocks with mask (skip < 0 to include all).
    std::vector<double> total(int k, int skip) {
        std::vector<double> r(kMomentDoubles, 0.0);
        for (int b = 0; b < blocks; ++b) {
            if (b == skip) continue;
            const double* s = at(sum, b, k);
            const double* c = at(comp, b, k);
            for (int i = 0; i < kMomentDoubles; ++i) r[i] += s[i] + c[i];
        }
        return r;
    }
};

struct Estimates {
    double xi2dB = NAN, sblockdB = NAN, updowndB = NAN, efrac = NAN;
    CovarianceReport report;
};

Estimates estimate(const MomentSet& m) {
    Estimates e;
    e.efrac = e_fraction(m);
    try {
        e.report = covariance_report(m, bloch_aligned_rotation(m));
        e.xi2dB = e.report.xi2dB;
        e.sblockdB = e.report.xi2SBlockdB;
    } catch (const DegenerateError&) {
    }
    try {
        e.updowndB = to_dB(updown_squeezing(m));
    } catch (const DegenerateError&) {
    }
    return e;
}

double jackknife_se(const std::vector<double>& reps) {
    const int K = int(reps.size());
    if (K < 2) return NAN;
    double mean = 0.0;
    for (double v : reps) mean += v;
    mean /= K;
    double ss = 0.0;
    for (double v : reps) ss += (v - mean) * (v - mean);
    return std::sqrt((K - 1.0) / K * ss);
}

std::string run_key(const EffectiveSpinParams& p, const Schedule& s, double varphi) {
    std::ostringstream o;
    o.precision(17);
    o << p.N << ' ' << p.Omega.real() << ' ' << p.Omega.imag() << ' ' << p.delta << ' ' << p.Gamma << ' ' << s.tOff
      << ' ' << s.tEnd << ' ' << s.dtBase << ' ' << s.dtShrinkFactor << ' ' << s.shrinkWindowSteps << ' ' << s.dN
      << ' ' << s.sampleEvery << ' ' << int(s.stepper) << ' ' << int(s.unraveling) << ' ' << s.jumpCap << ' '
      << varphi;
    return o.str();
}

nlohmann::json checkpoint_json(const std::string& key, const Schedule& s, int N, int next, int aborted, const BlockSums& acc,
                               const std::vector<double>& maxJump, std::uint64_t steps, std::uint64_t jumps,
                               const std::vector<std::string>& diags) {
    nlohmann::json j;
    j["key"] = key;
    j["seed"] = s.seed;
    j["nTraj"] = s.nTraj;
    j["N"] = N;
    j["samples"] = acc.samples;
    j["blocks"] = acc.blocks;
    j["nextTrajectory"] = next;
    j["aborted"] = aborted;
    j["steps"] = steps;
    j["jumps"] = jumps;
    j["sum"] = acc.sum;
    j["comp"] = acc.comp;
    j["count"] = acc.count;
    j["maxJumpProb"] = maxJump;
    j["diagnostics"] = diags;
    return j;
}

} // namespace

EnsembleResult run_ensemble(const EffectiveSpinParams& p, const Schedule& s, const EnsembleOptions& opt) {
    const int N = int(std::lround(p.N));
    s.validate(N, p.Gamma);
    const auto times = s.sample_times();
    const int nS = int(times.size());
    const int K = std::max(1, std::min(opt.blocks, s.nTraj));
    const SectoredState init = init_state(N, s.dN, opt.varphi);
    const std::string key = run_key(p, s, opt.varphi);

    BlockSums acc(K, nS);
    std::vector<double> maxJump(nS, 0.0);
    EnsembleResult res;
    res.nTraj = s.nTraj;
    int next = 0;

    if (!opt.checkpointPath.empty() && std::filesystem::exists(opt.checkpointPath)) {
        std::ifstream in(opt.checkpointPath);
        const auto j = nlohmann::json::parse(in);
        if (j.value("key", std::string()) == key && j.at("seed").get<std::uint64_t>() == s.seed && j.at("nTraj").get<int>() == s.nTraj &&
            j.at("N").get<int>() == N && j.at("samples").get<int>() == nS && j.at("blocks").get<int>() == K) {
            next = j.at("nextTrajectory").get<int>();
            res.nAborted = j.at("aborted").get<int>();
            res.totalSteps = j.at("steps").get<std::uint64_t>();
            res.totalJumps = j.at("jumps").get<std::uint64_t>();
            acc.sum = j.at("sum").get<std::vector<double>>();
            acc.comp = j.at("comp").get<std::vector<double>>();
            acc.count = j.at("count").get<std::vector<long>>();
            maxJump = j.at("maxJumpProb").get<std::vector<double>>();
            res.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
        }
    }

    const int threads = opt.threads > 0 ? opt.threads : omp_get_max_threads();
    const int chunk = std::max(opt.chunk, threads);
    while (next < s.nTraj) {
        const int end = std::min(s.nTraj, next + chunk);
        std::vector<TrajectoryOutput> outs(end - next);
        if (opt.parallel) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
            for (int i = next; i < end; ++i) outs[i - next] = evolve_trajectory(init, p, s, CounterRng(s.seed, i));
        } else {
            for (int i = next; i < end; ++i) outs[i - next] = evolve_trajectory(init, p, s, CounterRng(s.seed, i));
        }
        for (int i = next; i < end; ++i) {
            auto& o = outs[i - next];
            res.totalSteps += o.steps;
            res.totalJumps += o.jumps;
            if (o.aborted) {
                ++res.nAborted;
                res.diagnostics.push_back("trajectory " + std::to_string(i) + ": " + o.diagnostic);
                continue;
            }
            acc.add(int((long long)i * K / s.nTraj), o.moments);
            for (int k = 0; k < nS; ++k) maxJump[k] = std::max(maxJump[k], o.maxJumpProb[k]);
        }
        next = end;
        if (!opt.checkpointPath.empty())
            write_atomic(opt.checkpointPath, checkpoint_json(key, s, N, next, res.nAborted, acc, maxJump, res.totalSteps,
                                                             res.totalJumps, res.diagnostics)
                                                 .dump());
    }

    if (res.nAborted * 100 > s.nTraj)
        throw ConvergenceError(std::to_string(res.nAborted) + " of " + std::to_string(s.nTraj) +
                               " trajectories aborted");

    long nTot = 0;
    for (long c : acc.count) nTot += c;
    if (nTot == 0) throw ConvergenceError("no completed trajectories");

    for (int k = 0; k < nS; ++k) {
        EnsembleSample smp;
        smp.t = times[k];
        smp.maxJumpProb = maxJump[k];
        res.maxJumpProb = std::max(res.maxJumpProb, maxJump[k]);
        auto tot = acc.total(k, -1);
        smp.mean = from_doubles(tot.data(), N);
        smp.mean *= 1.0 / nTot;
        const Estimates e = estimate(smp.mean);
        smp.report = e.report;
        smp.xi2Updown = std::pow(10.0, e.updowndB / 10.0);
        smp.eFraction = e.efrac;

        std::vector<double> rx, rs, ru, re;
        for (int b = 0; b < K; ++b) {
            const long n = nTot - acc.count[b];
            if (acc.count[b] == 0 || n == 0) continue;
            auto part = acc.total(k, b);
            MomentSet m = from_doubles(part.data(), N);
            m *= 1.0 / n;
            smp.leaveOneOut.push_back(m);
            const Estimates eb = estimate(m);
            rx.push_back(eb.xi2dB);
            rs.push_back(eb.sblockdB);
            ru.push_back(eb.updowndB);
            re.push_back(eb.efrac);
        }
        smp.xi2GenSE = jackknife_se(rx);
        smp.xi2SBlockSE = jackknife_se(rs);
        smp.xi2UpdownSE = jackknife_se(ru);
        smp.eFractionSE = jackknife_se(re);
        res.samples.push_back(std::move(smp));
    }
    return res;
}

double jackknife_se(const EnsembleSample& s, const std::function<double(const MomentSet&)>& f) {
    std::vector<double> reps;
    for (const auto& m : s.leaveOneOut) reps.push_back(f(m));
    return jackknife_se(reps);
}

std::string ensemble_csv(const EnsembleResult& r) {
    Csv csv({"t_Gamma", "xi2_gen_dB", "xi2_gen_stderr_dB", "xi2_updown_dB", "e_fraction", "e_fraction_stderr",
             "max_jump_prob", "xi2_sblock_dB", "xi2_sblock_stderr_dB"});
    for (const auto& s : r.samples)
        csv.row({s.t, s.report.xi2dB, s.xi2GenSE, to_dB(s.xi2Updown), s.eFraction, s.eFractionSE, s.maxJumpProb,
                 s.report.xi2SBlockdB, s.xi2SBlockSE});
    return csv.str();
}

} // namespace berry
