#include "rauzylab/ulam.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rauzylab {

namespace {

long boxes_total(int d, int resolution) {
    long c = 1;
    for (int i = 0; i + 1 < d; ++i) c *= resolution;
    return c;
}

long box_of(const std::vector<double>& u, int d, int resolution) {
    long idx = 0;
    for (int i = 0; i + 1 < d; ++i) {
        long k = static_cast<long>(u[i] * resolution);
        if (k < 0) k = 0;
        if (k >= resolution) k = resolution - 1;
        idx = idx * resolution + k;
    }
    return idx;
}

// uniform sample of the chart simplex restricted to a grid box; false if the
// box misses the simplex
bool sample_box(long box, int d, int resolution, Rng& rng, std::vector<double>& out,
                int attempts = 64) {
    std::vector<double> corner(d - 1);
    long idx = box;
    for (int i = d - 2; i >= 0; --i) {
        corner[i] = static_cast<double>(idx % resolution) / resolution;
        idx /= resolution;
    }
    for (int a = 0; a < attempts; ++a) {
        double sum = 0.0;
        out.assign(d, 0.0);
        for (int i = 0; i + 1 < d; ++i) {
            out[i] = corner[i] + rng.uniform() / resolution;
            sum += out[i];
        }
        if (sum < 1.0) {
            out[d - 1] = 1.0 - sum;
            return true;
        }
    }
    return false;
}

struct LineFit {
    double slope = 0.0, intercept = 0.0, r2 = 0.0;
};

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
    LineFit f;
    double n = static_cast<double>(xs.size());
    if (n < 2) return f;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
        syy += ys[i] * ys[i];
    }
    double den = n * sxx - sx * sx;
    if (den == 0) return f;
    f.slope = (n * sxy - sx * sy) / den;
    f.intercept = (sy - f.slope * sx) / n;
    double sst = syy - sy * sy / n;
    double num = (n * sxy - sx * sy);
    f.r2 = sst > 0 ? num * num / (den * n * sst) : 1.0;
    return f;
}

} // namespace

long UlamOperator::box_of_chart(const std::vector<double>& u) const {
    return box_of(u, base.matrix.size(), resolution);
}

int UlamOperator::cell_of_point(const std::vector<double>& x) const {
    auto u = base.to_chart(x);
    long b = box_of_chart(u);
    return active_index[b];
}

UlamOperator build_ulam(const BaseCell& base, const BranchInventory& inventory, int resolution,
                        int samples_per_cell, std::uint64_t seed) {
    const int d = base.matrix.size();
    const double coverage = mc_covered_fraction(base, inventory.n2_max, 4000, seed ^ 0x9e3779b9u);
    if (coverage < 0.99)
        throw CoverageTooLow("return-time tail coverage below 99% at the inventory depth");

    UlamOperator op;
    op.base = base;
    op.resolution = resolution;
    op.samples_per_cell = samples_per_cell;

    const long total = boxes_total(d, resolution);
    op.active_index.assign(total, -1);
    Rng probe(seed, 1);
    std::vector<double> u;
    for (long b = 0; b < total; ++b)
        if (sample_box(b, d, resolution, probe, u)) {
            op.active_index[b] = static_cast<int>(op.active.size());
            op.active.push_back(b);
        }

    const long m = op.cell_count();
    op.rows.assign(m, std::vector<double>(m, 0.0));
    long lost = 0, assigned = 0;
    for (long i = 0; i < m; ++i) {
        Rng rng(seed, 100 + i);
        long row_hits = 0;
        for (int s = 0; s < samples_per_cell; ++s) {
            if (!sample_box(op.active[i], d, resolution, rng, u)) break;
            auto x = base.from_chart(u);
            try {
                auto r = first_return(base, x);
                int j = op.cell_of_point(r.point);
                if (j < 0) {
                    ++lost;
                    continue;
                }
                op.rows[i][j] += 1.0;
                ++row_hits;
                ++assigned;
            } catch (const Error&) {
                ++lost;
            }
        }
        if (row_hits == 0) {
            // isolated sliver cell: make it absorbing into itself
            op.rows[i][i] = 1.0;
            row_hits = 1;
        }
        for (double& v : op.rows[i]) v /= static_cast<double>(row_hits);
    }
    op.unassigned_fraction =
        assigned + lost > 0 ? static_cast<double>(lost) / static_cast<double>(assigned + lost) : 0.0;
    return op;
}

SpectralReport spectral_analysis(const UlamOperator& op) {
    const long m = op.cell_count();
    Eigen::MatrixXd p(m, m);
    for (long i = 0; i < m; ++i)
        for (long j = 0; j < m; ++j) p(i, j) = op.rows[i][j];

    Eigen::EigenSolver<Eigen::MatrixXd> solver(p.transpose());
    if (solver.info() != Eigen::Success) throw NoConvergence("eigensolver failed");

    auto vals = solver.eigenvalues();
    std::vector<std::pair<double, long>> mods(m);
    for (long k = 0; k < m; ++k) mods[k] = {std::abs(vals[k]), k};
    std::sort(mods.begin(), mods.end(), std::greater<>());

    SpectralReport rep;
    rep.leading_eigenvalue = vals[mods[0].second].real();
    rep.gap = m > 1 ? 1.0 - mods[1].first : 1.0;
    for (long k = 0; k < m; ++k)
        if (std::abs(vals[k]) > 1.0 - 1e-3) rep.unit_circle_eigs.push_back(vals[k]);

    Eigen::VectorXcd hv = solver.eigenvectors().col(mods[0].second);
    rep.h_b.resize(m);
    double total = 0.0;
    for (long k = 0; k < m; ++k) {
        rep.h_b[k] = hv[k].real();
        total += rep.h_b[k];
    }
    for (double& v : rep.h_b) v /= total;
    // Perron vector of a stochastic matrix is real and of one sign; if the
    // solver handed back the negative representative, the division flipped it
    return rep;
}

CorrelationReport correlation_decay(const BaseCell& base, const Observable& phi,
                                    const Observable& psi, int n_max, long orbit_len,
                                    std::uint64_t seed) {
    if (orbit_len < 100 * n_max) throw InsufficientSamples("orbit too short for n_max");
    Rng rng(seed);
    std::vector<double> fs, gs;
    fs.reserve(orbit_len);
    gs.reserve(orbit_len);
    auto x = sample_base_lebesgue(base, rng);
    long burn = 64;
    for (long k = 0; k < orbit_len + burn;) {
        try {
            auto r = first_return(base, x);
            x = r.point;
            if (k >= burn) {
                fs.push_back(phi(x));
                gs.push_back(psi(x));
            }
            ++k;
        } catch (const Error&) {
            x = sample_base_lebesgue(base, rng); // restart after an aborted burst
        }
    }
    CorrelationReport rep;
    rep.samples = static_cast<long>(fs.size());
    double mf = std::accumulate(fs.begin(), fs.end(), 0.0) / rep.samples;
    double mg = std::accumulate(gs.begin(), gs.end(), 0.0) / rep.samples;
    rep.mean_phi = mf;
    rep.mean_psi = mg;
    for (int n = 0; n <= n_max; ++n) {
        double s = 0.0;
        long cnt = rep.samples - n;
        for (long k = 0; k < cnt; ++k) s += fs[k] * gs[k + n];
        rep.cor.push_back(s / cnt - mf * mg);
    }
    // geometric fit on the clearly-resolved prefix
    double noise = 3.0 / std::sqrt(static_cast<double>(rep.samples));
    std::vector<double> xs, ys;
    for (int n = 0; n <= n_max; ++n) {
        if (std::fabs(rep.cor[n]) < noise) break;
        xs.push_back(n);
        ys.push_back(std::log(std::fabs(rep.cor[n])));
    }
    auto f = fit_line(xs, ys);
    rep.rate = xs.size() >= 2 ? std::exp(f.slope) : 0.0;
    rep.r2 = f.r2;
    return rep;
}

GCorrelationReport g_correlation_decay(const BaseCell& base, const Observable& phi,
                                       const Observable& psi, int n_max, long orbit_len,
                                       std::uint64_t seed) {
    if (orbit_len < 100 * n_max) throw InsufficientSamples("orbit too short for n_max");
    Rng rng(seed);

    // one long orbit of the squared accelerated map, started inside B so the
    // whole orbit stays in B's type-parity class
    std::vector<double> fs, gs;
    std::vector<char> in_b;
    Permutation p = base.start_perm;
    auto lam = sample_base_lebesgue(base, rng);
    for (long k = 0; k < orbit_len;) {
        try {
            auto s1 = zorich_step(p, std::move(lam));
            auto s2 = zorich_step(s1.end_perm, std::move(s1.end_lengths));
            p = s2.end_perm;
            lam = s2.end_lengths;
            bool inside = base.contains(p, lam);
            in_b.push_back(inside);
            fs.push_back(inside ? phi(lam) : 0.0);
            gs.push_back(inside ? psi(lam) : 0.0);
            ++k;
        } catch (const Error&) {
            p = base.start_perm;
            lam = sample_base_lebesgue(base, rng);
        }
    }

    GCorrelationReport rep;
    rep.samples = static_cast<long>(fs.size());
    rep.mean_phi = std::accumulate(fs.begin(), fs.end(), 0.0) / rep.samples;
    rep.mean_psi = std::accumulate(gs.begin(), gs.end(), 0.0) / rep.samples;
    rep.mu_b = std::accumulate(in_b.begin(), in_b.end(), 0.0) / rep.samples;

    // return-time tail (in G-steps) under the induced invariant measure,
    // from the same orbit: gaps between consecutive visits to B
    std::vector<double> tail(std::max(400, 2 * n_max + 3), 0.0);
    long visits = 0, last = -1;
    for (long k = 0; k < rep.samples; ++k) {
        if (!in_b[k]) continue;
        if (last >= 0) {
            long gap = k - last;
            for (long t = 1; t < std::min<long>(gap, tail.size()); ++t) tail[t] += 1.0;
            ++visits;
        }
        last = k;
    }
    if (visits > 0)
        for (double& t : tail) t /= visits;

    for (int n = 0; n <= n_max; ++n) {
        double s = 0.0;
        long cnt = rep.samples - n;
        for (long k = 0; k < cnt; ++k) s += fs[k] * gs[k + n];
        rep.raw.push_back(s / cnt);

        double corr = 0.0;
        for (std::size_t m = n + 1; m < tail.size(); ++m) corr += tail[m];
        rep.c_n.push_back(1.0 + corr / rep.mu_b);
        rep.residual.push_back(std::fabs(rep.raw[n] - rep.c_n[n] * rep.mean_phi * rep.mean_psi));
    }
    return rep;
}

SeminormEstimate quasi_holder_seminorm(const BaseCell& base, const Observable& f, double alpha,
                                       double eps0, const std::vector<double>& eps_ladder,
                                       int resolution) {
    const int d = base.matrix.size();
    const double cell = 1.0 / resolution;
    for (double e : eps_ladder)
        if (e < cell) throw LadderTooFine("eps below the grid scale");

    // sample f at chart cell centers (d=2: a line of cells; d>=3: boxes
    // clipped to the simplex)
    const long total = boxes_total(d, resolution);
    std::vector<double> vals(total, 0.0);
    std::vector<char> ok(total, 0);
    Rng rng(17);
    std::vector<double> u;
    for (long b = 0; b < total; ++b) {
        if (!sample_box(b, d, resolution, rng, u)) continue;
        vals[b] = f(base.from_chart(u));
        ok[b] = 1;
    }

    SeminormEstimate est;
    est.alpha = alpha;
    est.eps0 = eps0;
    est.resolution = resolution;
    for (double eps : eps_ladder) {
        if (eps > eps0) continue;
        int w = static_cast<int>(std::ceil(eps * resolution));
        double integral = 0.0;
        long counted = 0;
        // Chebyshev window of w cells in each chart direction
        for (long b = 0; b < total; ++b) {
            if (!ok[b]) continue;
            // decode box coordinates
            std::vector<long> c(d - 1);
            long idx = b;
            for (int i = d - 2; i >= 0; --i) {
                c[i] = idx % resolution;
                idx /= resolution;
            }
            double lo = 1e300, hi = -1e300;
            // enumerate neighbour boxes within the window
            std::vector<long> nb(d - 1, 0);
            std::function<void(int)> walk = [&](int dim) {
                if (dim == d - 1) {
                    long j = 0;
                    for (int i = 0; i + 1 < d; ++i) j = j * resolution + nb[i];
                    if (ok[j]) {
                        lo = std::min(lo, vals[j]);
                        hi = std::max(hi, vals[j]);
                    }
                    return;
                }
                for (long k = std::max<long>(0, c[dim] - w);
                     k <= std::min<long>(resolution - 1, c[dim] + w); ++k) {
                    nb[dim] = k;
                    walk(dim + 1);
                }
            };
            walk(0);
            if (hi >= lo) {
                integral += hi - lo;
                ++counted;
            }
        }
        if (counted == 0) continue;
        integral /= counted; // chart volume normalised to 1
        est.value = std::max(est.value, std::pow(eps, -alpha) * integral);
    }
    return est;
}

} // namespace rauzylab
