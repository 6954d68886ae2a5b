#include "rauzylab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rauzylab/errors.hpp"

namespace rauzylab {

namespace {

double dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

// A near-stationary point of the return map: Lebesgue sample plus burn-in.
std::vector<double> stationary_start(const BaseCell& base, const ReturnWalker& walker,
                                     Rng& rng) {
    for (;;) {
        std::vector<double> x = sample_base_lebesgue(base, rng);
        try {
            for (int i = 0; i < 64; ++i) walker.advance(x);
            return x;
        } catch (const Error&) {
            // heavy-tailed abort: draw again
        }
    }
}

std::vector<long> log_checkpoints(long n, int count) {
    std::vector<long> cp;
    for (int i = 1; i <= count; ++i) {
        long v = static_cast<long>(std::llround(std::pow(double(n), double(i) / count)));
        v = std::max<long>(1, std::min(n, v));
        if (cp.empty() || v > cp.back()) cp.push_back(v);
    }
    if (cp.back() != n) cp.push_back(n);
    return cp;
}

// orbit of the accelerated map, restarted in B on numerical aborts
struct ZOrbit {
    const BaseCell& base;
    Rng& rng;
    ZorichWalker walker;
    int start_vertex;
    int cur_type;

    ZOrbit(const BaseCell& b, Rng& r)
        : base(b), rng(r), walker(b.start_perm), start_vertex(walker.vertex()),
          cur_type(type_index(b.start_type)) {
        restart();
    }

    void restart() {
        walker.reset(base.start_perm, sample_base_lebesgue(base, rng));
        // every point of the cylinder B shares the first induction type
        cur_type = type_index(base.start_type);
    }

    void step() {
        try {
            walker.step();
            cur_type = walker.type();
        } catch (const Error&) {
            restart();
        }
    }

    bool at_start_perm() const { return walker.vertex() == start_vertex; }

    // The accelerated map's types strictly alternate, so its square preserves
    // the two (permutation, type) parity classes.  B's class is the one with
    // the base permutation and the base starting type; membership is read off
    // the state, which keeps it robust against mid-orbit restarts.
    bool at_class() const {
        return walker.vertex() == start_vertex && cur_type == type_index(base.start_type);
    }

    const std::vector<double>& lengths() const { return walker.lengths(); }
};

double ks_distance(const std::vector<double>& emp, const std::vector<double>& ref) {
    double ks = 0.0;
    for (std::size_t i = 0; i < emp.size(); ++i) ks = std::max(ks, std::fabs(emp[i] - ref[i]));
    return ks;
}

std::vector<double> default_t_grid() {
    std::vector<double> g;
    for (double t = 0.1; t <= 4.0 + 1e-9; t += 0.1) g.push_back(t);
    return g;
}

TargetSchedule schedule_from_quantiles(const DistanceCalibration& cal,
                                       const std::vector<double>& q) {
    TargetSchedule ts;
    ts.center = cal.center;
    ts.radii.reserve(q.size());
    ts.measures = q;
    for (double qi : q) ts.radii.push_back(cal.quantile_radius(qi));
    return ts;
}

SbcReport run_sbc(const TargetSchedule& targets, long n,
                  const std::function<double()>& next_distance, std::uint64_t seed) {
    if (static_cast<long>(targets.radii.size()) < n)
        throw DomainError("schedule shorter than the requested orbit");
    if (targets.en(n) - targets.en(n / 2) < 1.0)
        throw EnNotDivergent("summed target measures do not diverge");

    SbcReport rep;
    rep.seed = seed;
    rep.checkpoints = log_checkpoints(n, 24);
    double s = 0.0, e = 0.0;
    std::size_t next_cp = 0;
    rep.running_min = std::numeric_limits<double>::infinity();
    for (long j = 1; j <= n; ++j) {
        double d = next_distance();
        if (d < targets.radii[j - 1]) s += 1.0;
        e += targets.measures[j - 1];
        if (next_cp < rep.checkpoints.size() && j == rep.checkpoints[next_cp]) {
            double ratio = e > 0.0 ? s / e : 0.0;
            rep.ratio.push_back(ratio);
            if (j >= n / 4) rep.running_min = std::min(rep.running_min, ratio);
            ++next_cp;
        }
    }
    rep.final_ratio = rep.ratio.back();
    rep.e_n = e;
    return rep;
}

} // namespace

// --------------------------------------------------------------------------

double polya_aeppli_pmf(double theta, double t, long k) {
    if (!(theta > 0.0) || theta > 1.0) throw ParamOutOfRange("theta must lie in (0, 1]");
    if (!(t >= 0.0)) throw ParamOutOfRange("t must be nonnegative");
    if (k < 0) throw ParamOutOfRange("k must be nonnegative");
    if (k == 0) return std::exp(-theta * t);
    double sum = 0.0;
    for (long i = 1; i <= k; ++i) {
        if (theta == 1.0 && i < k) continue; // (1-theta)^{k-i} vanishes
        double log_term = -theta * t + i * std::log(theta) + i * std::log(theta * t) -
                          std::lgamma(double(i + 1)) + std::lgamma(double(k)) -
                          std::lgamma(double(i)) - std::lgamma(double(k - i + 1));
        if (theta < 1.0) log_term += (k - i) * std::log1p(-theta);
        sum += std::exp(log_term);
    }
    return sum;
}

PointClass classify_center(const BaseCell& base, const BranchInventory& inventory,
                           const std::vector<double>& p0, double match_tol,
                           double ambiguity_tol) {
    if (!base.contains(base.start_perm, p0)) throw DomainError("center outside the base cell");
    PointClass out;
    double best = std::numeric_limits<double>::infinity();
    const Branch* hit = nullptr;
    for (const Branch& br : inventory.branches) {
        std::vector<double> fp = branch_fixed_point(br);
        double d = dist(fp, p0);
        if (d < best) {
            best = d;
            hit = &br;
        }
    }
    if (best < match_tol) {
        out.periodic = true;
        out.period = 1;
        out.jacobian = jacobian_t2(*hit, branch_fixed_point(*hit));
        out.theta = 1.0 - 1.0 / out.jacobian;
        return out;
    }
    if (best < ambiguity_tol)
        throw PeriodDetectionFailed("center inside the periodic-detection ambiguity band");
    return out; // non-periodic defaults: theta = 1
}

// --------------------------------------------------------------------------

double DistanceCalibration::quantile_radius(double q) const {
    const auto n = static_cast<long>(sorted_distances.size());
    double f = q / measure_scale;
    long idx = std::max<long>(0, std::min<long>(n - 1, static_cast<long>(f * n)));
    return sorted_distances[idx];
}

double DistanceCalibration::measure_of_radius(double r) const {
    auto it = std::upper_bound(sorted_distances.begin(), sorted_distances.end(), r);
    return measure_scale * double(it - sorted_distances.begin()) /
           double(sorted_distances.size());
}

DistanceCalibration calibrate_t2(const BaseCell& base, const std::vector<double>& p0,
                                 long samples, std::uint64_t seed) {
    Rng rng(seed, 11);
    ReturnWalker walker(base);
    DistanceCalibration cal;
    cal.center = p0;
    cal.sorted_distances.reserve(samples);
    std::vector<double> x = stationary_start(base, walker, rng);
    for (long i = 0; i < samples; ++i) {
        try {
            walker.advance(x);
        } catch (const Error&) {
            x = stationary_start(base, walker, rng);
        }
        cal.sorted_distances.push_back(dist(x, p0));
    }
    std::sort(cal.sorted_distances.begin(), cal.sorted_distances.end());
    return cal;
}

DistanceCalibration calibrate_g(const BaseCell& base, const std::vector<double>& p0,
                                long samples, std::uint64_t seed) {
    Rng rng(seed, 13);
    DistanceCalibration cal;
    cal.center = p0;
    cal.sorted_distances.reserve(samples);
    ZOrbit orbit(base, rng);
    for (int i = 0; i < 128; ++i) orbit.step();
    // single-step sampling with state-based class membership: the class is
    // visited on alternating steps, so the class probability measure is twice
    // the per-step rate
    cal.measure_scale = 2.0;
    for (long i = 0; i < samples; ++i) {
        orbit.step();
        double d = orbit.at_class() ? dist(orbit.lengths(), p0)
                                    : std::numeric_limits<double>::infinity();
        cal.sorted_distances.push_back(d);
    }
    std::sort(cal.sorted_distances.begin(), cal.sorted_distances.end());
    return cal;
}

// --------------------------------------------------------------------------

double ScalingLaw::u(double n, double t) const {
    return (log_c + std::log(n) - std::log(t)) / dim;
}

double ScalingLaw::b(double n) const { return (log_c + std::log(n)) / dim; }

double ScalingLaw::exceed_measure(double u_level) const {
    return std::exp(log_c - dim * u_level);
}

ScalingLaw fit_scaling(const DistanceCalibration& cal, double dim, double q_lo, double q_hi) {
    ScalingLaw law;
    law.dim = dim;
    const int points = 12;
    double acc = 0.0;
    int used = 0;
    for (int i = 0; i < points; ++i) {
        double q = q_lo * std::pow(q_hi / q_lo, double(i) / (points - 1));
        double r = cal.quantile_radius(q);
        if (!(r > 0.0) || !std::isfinite(r)) continue;
        acc += std::log(q) - dim * std::log(r);
        ++used;
    }
    if (used < 3) throw InsufficientSamples("too few usable quantiles for the scaling fit");
    law.log_c = acc / used;
    return law;
}

bool scaling_conditions_hold(const ScalingLaw& law) {
    // sup over a decade ladder of the two normalizing-constant defects, probed
    // at shrinking relative offsets eps
    for (double eps : {1e-1, 1e-2, 1e-3}) {
        double worst_b = 0.0;
        for (double n = 1e3; n <= 1e7; n *= 10.0) {
            worst_b = std::max(worst_b, law.a() * std::fabs(law.b(n + eps * n) - law.b(n)));
            // a_n is constant in n, so the second condition's defect is 0
        }
        if (eps == 1e-3 && worst_b > 0.01) return false;
    }
    return true;
}

// --------------------------------------------------------------------------

double TargetSchedule::en(long n) const {
    n = std::min<long>(n, static_cast<long>(measures.size()));
    double e = 0.0;
    for (long j = 0; j < n; ++j) e += measures[j];
    return e;
}

TargetSchedule nested_balls(const DistanceCalibration& cal, double c, long n, double q_cap) {
    std::vector<double> q(n);
    for (long j = 1; j <= n; ++j) q[j - 1] = std::min(q_cap, c / double(j));
    return schedule_from_quantiles(cal, q);
}

TargetSchedule nested_balls(const ScalingLaw& law, const std::vector<double>& center,
                            double c, long n, double q_cap) {
    TargetSchedule out;
    out.center = center;
    out.radii.resize(n);
    out.measures.resize(n);
    for (long j = 1; j <= n; ++j) {
        double q = std::min(q_cap, c / double(j));
        out.measures[j - 1] = q;
        out.radii[j - 1] = std::exp((std::log(q) - law.log_c) / law.dim);
    }
    return out;
}

TargetSchedule fixed_ball(const DistanceCalibration& cal, double measure, long n) {
    return schedule_from_quantiles(cal, std::vector<double>(n, measure));
}

TargetSchedule convergent_balls(const DistanceCalibration& cal, double c, long n) {
    std::vector<double> q(n);
    for (long j = 1; j <= n; ++j) q[j - 1] = std::min(0.25, c / double(j * j));
    return schedule_from_quantiles(cal, q);
}

SbcReport sbc_ratio_t2(const BaseCell& base, const TargetSchedule& targets, long n,
                       std::uint64_t seed) {
    Rng rng(seed, 21);
    ReturnWalker walker(base);
    std::vector<double> x = stationary_start(base, walker, rng);
    auto next = [&]() {
        try {
            walker.advance(x);
        } catch (const Error&) {
            x = stationary_start(base, walker, rng);
        }
        return dist(x, targets.center);
    };
    return run_sbc(targets, n, next, seed);
}

SbcReport sbc_ratio_g(const BaseCell& base, const TargetSchedule& targets, long n,
                      std::uint64_t seed) {
    Rng rng(seed, 23);
    ZOrbit orbit(base, rng);
    for (int i = 0; i < 128; ++i) orbit.step();
    auto next = [&]() {
        orbit.step();
        orbit.step();
        // a mid-pair restart can leave the orbit on the opposite parity
        // class; one realignment step restores the squared-map sampling
        if (!orbit.at_class()) orbit.step();
        return orbit.at_class() ? dist(orbit.lengths(), targets.center)
                                : std::numeric_limits<double>::infinity();
    };
    return run_sbc(targets, n, next, seed);
}

SbcReport sbc_ratio_t1(const BaseCell& base, const TargetSchedule& targets, long n,
                       std::uint64_t seed) {
    Rng rng(seed, 25);
    ZOrbit orbit(base, rng);
    for (int i = 0; i < 128; ++i) orbit.step();
    auto next = [&]() {
        orbit.step();
        return orbit.at_start_perm() ? dist(orbit.lengths(), targets.center)
                                     : std::numeric_limits<double>::infinity();
    };
    return run_sbc(targets, n, next, seed);
}

// --------------------------------------------------------------------------

namespace {

EvlReport run_evl(const ScalingLaw& law, const PointClass& pc, long n, long trials,
                  const std::function<double(Rng&)>& trial_min_distance, std::uint64_t seed,
                  std::uint64_t stream_base) {
    EvlReport rep;
    rep.center_class = pc;
    rep.theta_ref = pc.theta;
    rep.n = n;
    rep.trials = trials;
    rep.t_grid = default_t_grid();

    std::vector<double> thresholds(rep.t_grid.size());
    for (std::size_t i = 0; i < rep.t_grid.size(); ++i)
        thresholds[i] = std::exp(-law.u(double(n), rep.t_grid[i]));

    std::vector<long> below(rep.t_grid.size(), 0);
    for (long tr = 0; tr < trials; ++tr) {
        Rng rng(seed, stream_base + static_cast<std::uint64_t>(tr));
        double dmin = trial_min_distance(rng);
        for (std::size_t i = 0; i < thresholds.size(); ++i)
            if (dmin >= thresholds[i]) ++below[i]; // M_n <= u_n(t)
    }
    rep.empirical.resize(rep.t_grid.size());
    rep.reference.resize(rep.t_grid.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < rep.t_grid.size(); ++i) {
        rep.empirical[i] = double(below[i]) / double(trials);
        rep.reference[i] = std::exp(-rep.theta_ref * rep.t_grid[i]);
        if (rep.empirical[i] > 0.05 && rep.empirical[i] < 0.95) {
            num += rep.t_grid[i] * (-std::log(rep.empirical[i]));
            den += rep.t_grid[i] * rep.t_grid[i];
        }
    }
    rep.theta_hat = den > 0.0 ? num / den : 1.0;
    rep.ks = ks_distance(rep.empirical, rep.reference);
    return rep;
}

} // namespace

EvlReport evl_t2(const BaseCell& base, const BranchInventory& classify_inv,
                 const std::vector<double>& p0, long n, long trials, std::uint64_t seed,
                 long cal_samples) {
    PointClass pc = classify_center(base, classify_inv, p0);
    if (cal_samples <= 0) cal_samples = std::max<long>(200000, 20 * n);
    DistanceCalibration cal = calibrate_t2(base, p0, cal_samples, seed ^ 0xe11ull);
    ScalingLaw law = fit_scaling(cal, double(base.start_perm.size()) - 1.0);

    ReturnWalker walker(base);
    auto trial = [&](Rng& rng) {
        std::vector<double> x = stationary_start(base, walker, rng);
        double dmin = std::numeric_limits<double>::infinity();
        for (long j = 0; j < n; ++j) {
            try {
                walker.advance(x);
            } catch (const Error&) {
                x = stationary_start(base, walker, rng);
            }
            dmin = std::min(dmin, dist(x, p0));
        }
        return dmin;
    };
    return run_evl(law, pc, n, trials, trial, seed, 1000);
}

EvlReport evl_t1(const BaseCell& base, const BranchInventory& classify_inv,
                 const std::vector<double>& p0, long n, long trials, std::uint64_t seed,
                 long cal_samples) {
    PointClass pc = classify_center(base, classify_inv, p0);
    if (cal_samples <= 0) cal_samples = std::max<long>(200000, 20 * n);
    DistanceCalibration cal = calibrate_g(base, p0, cal_samples, seed ^ 0xe12ull);
    ScalingLaw law = fit_scaling(cal, double(base.start_perm.size()) - 1.0);
    // the scaling uses the whole-space probability measure: half the class mass
    law.log_c += std::log(0.5);

    auto trial = [&](Rng& rng) {
        ZOrbit orbit(base, rng);
        for (int i = 0; i < 128; ++i) orbit.step();
        double dmin = std::numeric_limits<double>::infinity();
        for (long j = 0; j < n; ++j) {
            orbit.step();
            if (orbit.at_start_perm()) dmin = std::min(dmin, dist(orbit.lengths(), p0));
        }
        return dmin;
    };
    return run_evl(law, pc, n, trials, trial, seed, 2000);
}

// --------------------------------------------------------------------------

ReppReport repp_t2(const BaseCell& base, const BranchInventory& classify_inv,
                   const std::vector<double>& p0, long n, double t, long trials,
                   std::uint64_t seed, long cal_samples) {
    ReppReport rep;
    PointClass pc = classify_center(base, classify_inv, p0);
    rep.theta_ref = pc.theta;
    rep.t = t;
    rep.n = n;
    rep.trials = trials;

    if (cal_samples <= 0) cal_samples = std::max<long>(200000, 20 * n);
    DistanceCalibration cal = calibrate_t2(base, p0, cal_samples, seed ^ 0xadd1ull);
    ScalingLaw law = fit_scaling(cal, double(base.start_perm.size()) - 1.0);
    double radius = std::exp(-law.u(double(n), 1.0)); // exceedance probability 1/n
    long window = static_cast<long>(std::llround(t * double(n)));

    ReturnWalker walker(base);
    rep.counts.resize(trials);
    double sum = 0.0, sq = 0.0;
    for (long tr = 0; tr < trials; ++tr) {
        Rng rng(seed, 3000 + static_cast<std::uint64_t>(tr));
        std::vector<double> x = stationary_start(base, walker, rng);
        long count = 0;
        for (long j = 0; j < window; ++j) {
            try {
                walker.advance(x);
            } catch (const Error&) {
                x = stationary_start(base, walker, rng);
            }
            if (dist(x, p0) < radius) ++count;
        }
        rep.counts[tr] = count;
        sum += double(count);
        sq += double(count) * double(count);
    }
    rep.mean = sum / double(trials);
    double var = sq / double(trials) - rep.mean * rep.mean;
    rep.var_over_mean = rep.mean > 0.0 ? var / rep.mean : 0.0;

    long kmax = *std::max_element(rep.counts.begin(), rep.counts.end());
    std::vector<double> emp(kmax + 1, 0.0);
    for (long c : rep.counts) emp[c] += 1.0 / double(trials);
    for (long k = 0; k <= kmax; ++k) {
        double ref_p = std::exp(-t + k * std::log(t) - std::lgamma(double(k + 1)));
        double ref_pa = polya_aeppli_pmf(rep.theta_ref, t, k);
        if (ref_p > 1e-6) rep.chi2_poisson += (emp[k] - ref_p) * (emp[k] - ref_p) / ref_p;
        if (ref_pa > 1e-6) rep.chi2_polya += (emp[k] - ref_pa) * (emp[k] - ref_pa) / ref_pa;
    }
    return rep;
}

// --------------------------------------------------------------------------

HittingReport hitting_return_stats(const BaseCell& base, const BranchInventory& classify_inv,
                                   const std::vector<double>& p0, double target_measure,
                                   long trials, std::uint64_t seed, long cal_samples) {
    HittingReport rep;
    rep.center_class = classify_center(base, classify_inv, p0);
    rep.trials = trials;
    double theta = rep.center_class.theta;

    DistanceCalibration cal = calibrate_t2(base, p0, cal_samples, seed ^ 0x41d1ull);
    double radius = cal.quantile_radius(target_measure);
    rep.measure_u = cal.measure_of_radius(radius);
    if (!(radius > 0.0) || rep.measure_u * double(cal_samples) < 50)
        throw TargetTooSmall("target ball too small for the calibration resolution");

    rep.t_grid = default_t_grid();
    double t_max = rep.t_grid.back();
    long cap = static_cast<long>(std::ceil(t_max / rep.measure_u)) + 1;

    ReturnWalker walker(base);
    auto scaled_entry_time = [&](std::vector<double> x, Rng& rng) {
        for (long j = 1; j <= cap; ++j) {
            try {
                walker.advance(x);
            } catch (const Error&) {
                x = stationary_start(base, walker, rng);
            }
            if (dist(x, p0) < radius) return double(j) * rep.measure_u;
        }
        return std::numeric_limits<double>::infinity();
    };

    std::vector<double> hit_times(trials), ret_times(trials);
    for (long tr = 0; tr < trials; ++tr) {
        Rng rng(seed, 4000 + static_cast<std::uint64_t>(tr));
        hit_times[tr] = scaled_entry_time(stationary_start(base, walker, rng), rng);
    }
    // return starts: stationary points conditioned on the target
    {
        Rng rng(seed, 4999);
        std::vector<double> x = stationary_start(base, walker, rng);
        long found = 0, steps = 0;
        long step_cap = 50 * cap * trials;
        while (found < trials) {
            try {
                walker.advance(x);
            } catch (const Error&) {
                x = stationary_start(base, walker, rng);
            }
            if (dist(x, p0) < radius) {
                Rng trial_rng(seed, 5000 + static_cast<std::uint64_t>(found));
                ret_times[found++] = scaled_entry_time(x, trial_rng);
            }
            if (++steps > step_cap)
                throw TargetTooSmall("too few orbit visits to the target for return starts");
        }
    }

    auto cdf = [&](const std::vector<double>& times) {
        std::vector<double> out(rep.t_grid.size(), 0.0);
        for (double tau : times)
            for (std::size_t i = 0; i < rep.t_grid.size(); ++i)
                if (tau <= rep.t_grid[i]) out[i] += 1.0 / double(trials);
        return out;
    };
    rep.hitting_cdf = cdf(hit_times);
    rep.return_cdf = cdf(ret_times);

    std::vector<double> ref_h(rep.t_grid.size()), ref_r(rep.t_grid.size());
    for (std::size_t i = 0; i < rep.t_grid.size(); ++i) {
        double e = 1.0 - std::exp(-theta * rep.t_grid[i]);
        ref_h[i] = e;
        ref_r[i] = (1.0 - theta) + theta * e;
    }
    rep.ks_hitting = ks_distance(rep.hitting_cdf, ref_h);
    rep.ks_return = ks_distance(rep.return_cdf, ref_r);
    rep.return_initial_mass = rep.return_cdf.front();
    return rep;
}

// --------------------------------------------------------------------------

double FlowTarget::delta(double s) const { return c * std::pow(std::max(s, 1.0), -gamma); }

FlowSbcReport flow_sbc(const BaseCell& base, const FlowTarget& target, double horizon,
                       std::uint64_t seed, int seminorm_ladder) {
    if (!base.contains(base.start_perm, target.center_x))
        throw DomainError("flow target center outside the base cell");
    if (!(target.gamma > 0.0) || target.gamma >= 0.5)
        throw ParamOutOfRange("gamma must lie in (0, 1/2)");
    double dmax = target.delta(1.0);
    double lo = double(target.strip), hi = double(target.strip) + 1.0;
    double roof_center = roof_r2(base, target.center_x).r2;
    if (target.center_u - dmax < lo || target.center_u + dmax > hi ||
        target.center_u + dmax > std::min(hi, roof_center))
        throw TargetStraddlesStrip("target ball leaves its unit strip");

    FlowSbcReport rep;

    // local law measure(B_delta) = kappa * delta^2 under the normalized
    // suspension measure, fitted from a stationary base orbit
    const long cal_n = 20000;
    Rng rng(seed, 61);
    ReturnWalker walker(base);
    std::vector<double> x = stationary_start(base, walker, rng);
    std::vector<double> cal_dx(cal_n), cal_roof(cal_n);
    double roof_sum = 0.0;
    std::vector<double> pt;
    for (long i = 0; i < cal_n; ++i) {
        double r;
        for (;;) {
            pt = x;
            try {
                r = walker.advance(x);
                break;
            } catch (const Error&) {
                x = stationary_start(base, walker, rng);
            }
        }
        roof_sum += r;
        cal_dx[i] = dist(pt, target.center_x);
        cal_roof[i] = r;
    }
    (void)pt;
    // mean fiber window of a ball of width delta, under the normalized
    // suspension measure
    auto ball_measure = [&](double delta) {
        double mass = 0.0;
        for (long i = 0; i < cal_n; ++i) {
            double w2 = delta * delta - cal_dx[i] * cal_dx[i];
            if (w2 <= 0.0) continue;
            double w = std::sqrt(w2);
            double a = std::max(target.center_u - w, 0.0);
            double b = std::min(target.center_u + w, cal_roof[i]);
            if (b > a) mass += b - a;
        }
        return mass / roof_sum;
    };
    // the pure-quadratic coefficient, reported as a diagnostic; small balls
    // follow measure(B_delta) = kappa * delta^2, wide ones saturate the base
    {
        std::vector<double> deltas = {target.delta(horizon),
                                      target.delta(std::sqrt(std::max(horizon, 1.0))), dmax};
        double num = 0.0, den = 0.0;
        for (double d : deltas) {
            num += ball_measure(d) * d * d;
            den += std::pow(d, 4.0);
        }
        rep.kappa = num / den;
    }

    // E_T = integral of measure(B_{delta(s)}) ds, by trapezoid quadrature on a
    // geometric grid; the ball can be wider than the base for small s, where
    // the quadratic local law overshoots badly
    {
        double hz = std::max(horizon, 1.0);
        const int grid = 160;
        double prev_s = 0.0, prev_mu = ball_measure(target.delta(1.0));
        double e_t = 0.0;
        for (int k = 1; k <= grid; ++k) {
            double s = std::pow(hz, double(k) / double(grid));
            double mu = ball_measure(target.delta(s));
            e_t += 0.5 * (prev_mu + mu) * (s - prev_s);
            prev_s = s;
            prev_mu = mu;
        }
        rep.e_t = e_t;
    }

    // occupation time of the shrinking ball along one flow trajectory,
    // integrated in closed form within each roof segment
    x = stationary_start(base, walker, rng);
    std::vector<double> next;
    double roof = 0.0;
    auto pair_step = [&]() { // roof of the current x and the following point
        for (;;) {
            next = x;
            try {
                roof = walker.advance(next);
                return;
            } catch (const Error&) {
                x = stationary_start(base, walker, rng);
            }
        }
    };
    pair_step();
    double u0 = rng.uniform() * roof;
    double s_a = 0.0;
    double occupancy = 0.0;
    double u_start = u0;
    while (s_a < horizon) {
        double seg = roof - u_start;
        double dx = dist(x, target.center_x);
        double s_star = s_a + (target.center_u - u_start); // where u(s) = center_u
        double d_here = target.delta(std::max(s_star, 1.0));
        double w2 = d_here * d_here - dx * dx;
        if (w2 > 0.0) {
            double w = std::sqrt(w2);
            double a = std::max({s_star - w, s_a, 0.0});
            double b = std::min({s_star + w, s_a + seg, horizon});
            if (b > a) {
                occupancy += b - a;
                ++rep.hits;
            }
        }
        s_a += seg;
        u_start = 0.0;
        x = std::move(next);
        pair_step();
    }
    rep.ratio = occupancy / rep.e_t;

    if (seminorm_ladder > 0) {
        // the induced observables: u-window length of the target at flow time
        // n * mean-roof, as functions on the base
        double r_bar = roof_sum / double(cal_n);
        std::vector<double> eps_ladder = {0.25, 0.125, 0.0625};
        for (int k = 0; k < seminorm_ladder; ++k) {
            double s_n = std::max(1.0, horizon * double(k + 1) / double(seminorm_ladder));
            double d_n = target.delta(s_n);
            Observable psi = [&, d_n](const std::vector<double>& p) {
                double dx = dist(p, target.center_x);
                double w2 = d_n * d_n - dx * dx;
                if (w2 <= 0.0) return 0.0;
                double w = std::sqrt(w2);
                double r = roof_r2(base, p).r2;
                double a = std::max(target.center_u - w, 0.0);
                double b = std::min(target.center_u + w, r);
                return std::max(0.0, b - a);
            };
            rep.psi_seminorms.push_back(
                quasi_holder_seminorm(base, psi, 0.5, 0.25, eps_ladder, 48).value);
        }
        (void)r_bar;
    }
    return rep;
}

FlowEvlReport flow_evl(const BaseCell& base, const BranchInventory& classify_inv,
                       const std::vector<double>& x0, double u0, double horizon, long trials,
                       std::uint64_t seed, long cal_samples) {
    FlowEvlReport rep;
    PointClass pc = classify_center(base, classify_inv, x0);
    rep.theta_ref = pc.theta;
    rep.trials = trials;

    // calibrate the fiber-maximized observable under the base measure
    Rng rng(seed, 71);
    DistanceCalibration cal;
    cal.center = x0;
    const long cal_n = cal_samples;
    cal.sorted_distances.reserve(cal_n);
    ReturnWalker walker(base);
    std::vector<double> x = stationary_start(base, walker, rng);
    std::vector<double> pt;
    double roof_sum = 0.0;
    for (long i = 0; i < cal_n; ++i) {
        double r;
        for (;;) {
            pt = x;
            try {
                r = walker.advance(x);
                break;
            } catch (const Error&) {
                x = stationary_start(base, walker, rng);
            }
        }
        roof_sum += r;
        double dx = dist(pt, x0);
        double du = u0 < r ? 0.0 : u0 - r;
        cal.sorted_distances.push_back(std::sqrt(dx * dx + du * du));
    }
    std::sort(cal.sorted_distances.begin(), cal.sorted_distances.end());
    rep.r_bar = roof_sum / double(cal_n);

    ScalingLaw law = fit_scaling(cal, double(base.start_perm.size()) - 1.0);
    if (!scaling_conditions_hold(law))
        throw ScalingConditionsFail("normalizing sequences fail the flow-passage conditions");

    double n_eff = std::floor(horizon / rep.r_bar);
    rep.t_grid = default_t_grid();
    std::vector<double> thresholds(rep.t_grid.size());
    for (std::size_t i = 0; i < rep.t_grid.size(); ++i)
        thresholds[i] = std::exp(-law.u(n_eff, rep.t_grid[i]));

    std::vector<long> below(rep.t_grid.size(), 0);
    for (long tr = 0; tr < trials; ++tr) {
        Rng trng(seed, 7000 + static_cast<std::uint64_t>(tr));
        std::vector<double> p = stationary_start(base, walker, trng);
        std::vector<double> pnext;
        double roof = 0.0;
        auto pair_step = [&]() {
            for (;;) {
                pnext = p;
                try {
                    roof = walker.advance(pnext);
                    return;
                } catch (const Error&) {
                    p = stationary_start(base, walker, trng);
                }
            }
        };
        pair_step();
        double u_start = trng.uniform() * roof;
        double elapsed = 0.0;
        double dmin = std::numeric_limits<double>::infinity();
        while (elapsed < horizon) {
            double seg = std::min(roof - u_start, horizon - elapsed);
            double a = u_start, b = u_start + seg;
            double du = u0 < a ? a - u0 : (u0 > b ? u0 - b : 0.0);
            double dx = dist(p, x0);
            dmin = std::min(dmin, std::sqrt(dx * dx + du * du));
            elapsed += seg;
            if (elapsed >= horizon) break;
            u_start = 0.0;
            p = std::move(pnext);
            pair_step();
        }
        for (std::size_t i = 0; i < thresholds.size(); ++i)
            if (dmin >= thresholds[i]) ++below[i];
    }
    rep.empirical.resize(rep.t_grid.size());
    rep.reference.resize(rep.t_grid.size());
    for (std::size_t i = 0; i < rep.t_grid.size(); ++i) {
        rep.empirical[i] = double(below[i]) / double(trials);
        rep.reference[i] = std::exp(-rep.theta_ref * rep.t_grid[i]);
    }
    rep.ks = ks_distance(rep.empirical, rep.reference);
    return rep;
}

} // namespace rauzylab
