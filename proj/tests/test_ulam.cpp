#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "rauzylab/ulam.hpp"

using namespace rauzylab;

namespace {

const BaseCell& base2() {
    static BaseCell b = [] {
        std::vector<double> lam = {1.0, std::sqrt(2.0)};
        double s = lam[0] + lam[1];
        lam[0] /= s;
        lam[1] /= s;
        return select_base(Permutation::parse("AB/BA"), lam, 5);
    }();
    return b;
}

// depth 20 captures > 99% of return-time mass; the mass floor only trims the
// branch list, not the depth used by the coverage gate
const BranchInventory& inv2() {
    static BranchInventory inv = enumerate_branches(base2(), 20, 1e-4);
    return inv;
}

const UlamOperator& op32() {
    static UlamOperator op = build_ulam(base2(), inv2(), 32, 400, 7);
    return op;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

} // namespace

TEST_CASE("ulam rows are stochastic and grid scales") {
    const auto& op = op32();
    CHECK(op.cell_count() == 32); // d=2 chart is one coordinate
    for (const auto& row : op.rows) {
        double s = std::accumulate(row.begin(), row.end(), 0.0);
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        for (double v : row) CHECK(v >= 0.0);
    }
    CHECK(op.unassigned_fraction < 0.02);

    // Monte Carlo rows: doubling the per-cell sample count moves entries by
    // less than a few standard errors
    UlamOperator lo = build_ulam(base2(), inv2(), 8, 400, 11);
    UlamOperator hi = build_ulam(base2(), inv2(), 8, 800, 11);
    for (long i = 0; i < lo.cell_count(); ++i)
        for (long j = 0; j < lo.cell_count(); ++j)
            CHECK(std::fabs(lo.rows[i][j] - hi.rows[i][j]) < 2.0 / std::sqrt(400.0));
}

TEST_CASE("ulam rejects inventories too shallow to cover B") {
    BranchInventory shallow = enumerate_branches(base2(), 6, 1e-4);
    CHECK_THROWS_AS(build_ulam(base2(), shallow, 8, 50, 1), CoverageTooLow);
}

TEST_CASE("ulam degenerate single-cell grid") {
    UlamOperator op = build_ulam(base2(), inv2(), 1, 64, 3);
    REQUIRE(op.cell_count() == 1);
    CHECK(op.rows[0][0] == doctest::Approx(1.0));
    SpectralReport rep = spectral_analysis(op);
    CHECK(rep.leading_eigenvalue == doctest::Approx(1.0));
}

TEST_CASE("spectral analysis: perron data") {
    SpectralReport rep = spectral_analysis(op32());
    CHECK(std::fabs(rep.leading_eigenvalue - 1.0) < 1e-10);
    CHECK(rep.gap > 0.0);
    // only the leading eigenvalue sits near the unit circle
    REQUIRE(rep.unit_circle_eigs.size() == 1);
    CHECK(std::abs(rep.unit_circle_eigs[0] - std::complex<double>(1.0, 0.0)) < 1e-9);
    // strictly positive invariant density, total mass 1
    double total = 0.0;
    for (double v : rep.h_b) {
        CHECK(v > 0.0);
        total += v;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    // stationarity: h P = h to solver precision
    const auto& op = op32();
    for (long j = 0; j < op.cell_count(); ++j) {
        double s = 0.0;
        for (long i = 0; i < op.cell_count(); ++i) s += rep.h_b[i] * op.rows[i][j];
        CHECK(s == doctest::Approx(rep.h_b[j]).epsilon(1e-8));
    }
}

TEST_CASE("ulam duality against orbit averages") {
    // <phi . T2, 1_cell> under the invariant measure equals row-weighted mass:
    // test P's action against direct orbit statistics of phi and phi . T2
    const auto& op = op32();
    SpectralReport rep = spectral_analysis(op);

    Observable phi = [](const std::vector<double>& x) { return x[0]; };
    // cell-averaged phi
    std::vector<double> phicell(op.cell_count());
    for (long i = 0; i < op.cell_count(); ++i)
        phicell[i] = (i + 0.5) / op.cell_count(); // chart coordinate of center

    // E[phi . T2] = sum_i h_i sum_j P_ij phi_j
    double lhs = 0.0;
    for (long i = 0; i < op.cell_count(); ++i) lhs += rep.h_b[i] * dot(op.rows[i], phicell);
    double rhs = dot(rep.h_b, phicell); // stationarity: same integral
    CHECK(lhs == doctest::Approx(rhs).epsilon(3.0 / std::sqrt(400.0)));

    // cross-check the stationary integral against a long direct orbit of the
    // return map (independent of the discretisation)
    Rng rng(99);
    auto x = sample_base_lebesgue(base2(), rng);
    double acc = 0.0;
    long n = 20000;
    for (long k = 0; k < n;) {
        try {
            auto r = first_return(base2(), x);
            x = r.point;
            acc += base2().to_chart(x)[0];
            ++k;
        } catch (const Error&) {
            x = sample_base_lebesgue(base2(), rng);
        }
    }
    CHECK(rhs == doctest::Approx(acc / n).epsilon(0.05));
}

TEST_CASE("ulam refinement stability") {
    UlamOperator coarse = build_ulam(base2(), inv2(), 16, 600, 5);
    UlamOperator fine = build_ulam(base2(), inv2(), 32, 600, 5);
    auto hc = spectral_analysis(coarse).h_b;
    auto hf = spectral_analysis(fine).h_b;
    // aggregate the fine density back onto the coarse grid; L1 distance small
    double l1 = 0.0;
    for (long i = 0; i < coarse.cell_count(); ++i) {
        double m = hf[2 * i] + hf[2 * i + 1];
        l1 += std::fabs(m - hc[i]);
    }
    CHECK(l1 < 0.05);
}

TEST_CASE("correlation decay of the return map") {
    Observable one = [](const std::vector<double>&) { return 1.0; };
    Observable phi = [](const std::vector<double>& x) { return x[0]; };

    // constants are uncorrelated with everything
    CorrelationReport flat = correlation_decay(base2(), one, one, 5, 4000, 21);
    for (double c : flat.cor) CHECK(std::fabs(c) < 1e-12);

    CorrelationReport rep = correlation_decay(base2(), phi, phi, 8, 60000, 21);
    // Cor(0) is the variance
    double var_direct = 0.0;
    {
        Rng rng(22);
        auto x = sample_base_lebesgue(base2(), rng);
        std::vector<double> vals;
        for (long k = 0; k < 60000;) {
            try {
                x = first_return(base2(), x).point;
                vals.push_back(x[0]);
                ++k;
            } catch (const Error&) {
                x = sample_base_lebesgue(base2(), rng);
            }
        }
        double m = std::accumulate(vals.begin(), vals.end(), 0.0) / vals.size();
        for (double v : vals) var_direct += (v - m) * (v - m);
        var_direct /= vals.size();
    }
    CHECK(rep.cor[0] == doctest::Approx(var_direct).epsilon(3.0 / std::sqrt(60000.0) / var_direct));
    // correlations decay and the geometric fit holds on the resolved prefix
    CHECK(std::fabs(rep.cor[4]) < std::fabs(rep.cor[0]));
    if (rep.rate > 0.0) {
        CHECK(rep.rate < 1.0);
        CHECK(rep.r2 > 0.8);
    }

    CHECK_THROWS_AS(correlation_decay(base2(), phi, phi, 100, 500, 1), InsufficientSamples);
}

TEST_CASE("accelerated-map correlations with renewal correction") {
    Observable one = [](const std::vector<double>&) { return 1.0; };
    Observable phi = [](const std::vector<double>& x) { return x[0]; };

    GCorrelationReport rep = g_correlation_decay(base2(), phi, phi, 6, 120000, 31);
    CHECK(rep.mu_b > 0.0);
    CHECK(rep.mu_b < 1.0);
    // correction factors decrease to 1 as the lag grows
    for (std::size_t n = 1; n < rep.c_n.size(); ++n) CHECK(rep.c_n[n] <= rep.c_n[n - 1] + 1e-12);
    for (double c : rep.c_n) CHECK(c >= 1.0 - 1e-12);
    // indicator of B: the corrected product approaches the correlation integral
    // with a constant-times-polynomial error, so residuals decrease in n
    GCorrelationReport ind = g_correlation_decay(base2(), one, one, 6, 120000, 31);
    for (std::size_t n = 3; n < ind.residual.size(); ++n)
        CHECK(ind.residual[n] < ind.residual[n - 1] + 0.005);
    CHECK(ind.residual.back() < 0.5 * ind.residual[2]);
    // the orbit measure of B agrees with the mean of its indicator
    CHECK(ind.mean_phi == doctest::Approx(ind.mu_b).epsilon(1e-12));
}

TEST_CASE("orbit measure of B agrees with the accelerated-map histogram") {
    Observable one = [](const std::vector<double>&) { return 1.0; };
    GCorrelationReport rep = g_correlation_decay(base2(), one, one, 2, 80000, 41);

    const Permutation pi = Permutation::parse("AB/BA");
    RauzyClass rc = rauzy_class(pi);
    Rng rng(5);
    std::vector<std::pair<Permutation, std::vector<double>>> seeds;
    for (int s = 0; s < 4; ++s) seeds.emplace_back(pi, sample_simplex(2, rng));
    const int res = 256;
    Mu1Estimate est = estimate_mu1(rc, seeds, 100000, res);

    // B is an interval in the first length coordinate: its endpoints are the
    // images of the chart vertices
    double a = base2().from_chart({0.0, 1.0})[0];
    double b = base2().from_chart({1.0, 0.0})[0];
    if (a > b) std::swap(a, b);
    int eps = type_index(base2().start_type);
    double mass = 0.0;
    for (long c = 0; c < est.grid.cells(); ++c) {
        double lo = static_cast<double>(c) / res, hi = lo + 1.0 / res;
        double frac = (std::min(hi, b) - std::max(lo, a)) * res;
        if (frac <= 0.0) continue;
        double mid = lo + 0.5 / res;
        mass += std::min(frac, 1.0) * est.mass_at(eps, pi, {mid, 1.0 - mid});
    }
    // 3-standard-error band for each estimate plus edge-cell smoothing slack
    double se_orbit = std::sqrt(rep.mu_b * (1.0 - rep.mu_b) / rep.samples);
    double se_hist = std::sqrt(mass * (1.0 - mass) / est.samples[eps]);
    double tol = std::max(3.0 * (se_orbit + se_hist) + 2.0 / res, 0.02);
    CHECK(std::fabs(rep.mu_b - mass) < tol);
}

TEST_CASE("oscillation seminorm") {
    Observable constant = [](const std::vector<double>&) { return 3.0; };
    std::vector<double> ladder = {0.25, 0.125, 0.0625};
    SeminormEstimate zero = quasi_holder_seminorm(base2(), constant, 0.5, 0.25, ladder, 64);
    CHECK(zero.value == doctest::Approx(0.0));

    // indicator of half the chart: osc integral ~ 2 eps, so value ~ sup 2 eps^{1-alpha}
    Observable half = [](const std::vector<double>& x) {
        return base2().to_chart(x)[0] < 0.5 ? 1.0 : 0.0;
    };
    SeminormEstimate a = quasi_holder_seminorm(base2(), half, 0.5, 0.25, ladder, 64);
    SeminormEstimate b = quasi_holder_seminorm(base2(), half, 0.5, 0.25, ladder, 128);
    CHECK(a.value > 0.0);
    CHECK(a.value == doctest::Approx(b.value).epsilon(0.15));

    // seminorm is homogeneous in the jump height
    Observable half3 = [&](const std::vector<double>& x) { return 3.0 * half(x); };
    SeminormEstimate c = quasi_holder_seminorm(base2(), half3, 0.5, 0.25, ladder, 64);
    CHECK(c.value == doctest::Approx(3.0 * a.value).epsilon(1e-9));

    CHECK_THROWS_AS(quasi_holder_seminorm(base2(), half, 0.5, 0.25, {0.001}, 64), LadderTooFine);
}
