#include "rauzylab/induced.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rauzylab {

SymbolStep symbol_step(const ZSymbol& s) {
    int eps = type_index(s.type);
    Permutation p = s.perm;
    IntMatrix m = IntMatrix::identity(p.size());
    for (long k = 0; k < s.n1; ++k) {
        int winner = p.last_symbol(eps);
        int loser = p.last_symbol(1 - eps);
        m = m * elementary_theta(p.size(), winner, loser);
        p = rauzy_move(p, s.type);
    }
    return SymbolStep{std::move(m), std::move(p)};
}

IntMatrix half_simplex_vertices(const Permutation& p, Type t) {
    int eps = type_index(t);
    int winner = p.last_symbol(eps);
    int loser = p.last_symbol(1 - eps);
    IntMatrix v = IntMatrix::identity(p.size());
    v(winner, loser) = 1;
    return v;
}

double subsimplex_mass(const IntMatrix& m) {
    BigInt det = m.determinant();
    if (det < 0) det = -det;
    Rational prod(1);
    for (const BigInt& s : m.column_sums()) prod *= Rational(s);
    return to_double(Rational(det) / prod);
}

namespace {

// permutation and type of the state reached after reading the word
std::pair<Permutation, Type> word_end(const std::vector<ZSymbol>& word) {
    const ZSymbol& last = word.back();
    return {symbol_step(last).end_perm, opposite(last.type)};
}

std::vector<double> normalized(std::vector<double> v) {
    double s = std::accumulate(v.begin(), v.end(), 0.0);
    for (double& x : v) x /= s;
    return v;
}

} // namespace

bool BaseCell::contains(const Permutation& p, const std::vector<double>& x) const {
    if (!(p == start_perm)) return false;
    auto w = inverse.apply(x);
    bool pos = true, neg = true;
    for (double v : w) {
        if (v <= 0) pos = false;
        if (v >= 0) neg = false;
    }
    return pos || neg;
}

std::vector<double> BaseCell::to_chart(const std::vector<double>& x) const {
    return normalized(inverse.apply(x));
}

std::vector<double> BaseCell::from_chart(const std::vector<double>& u) const {
    return normalized(matrix.apply(u));
}

BaseCell make_base(const std::vector<ZSymbol>& word) {
    if (word.empty()) throw DomainError("empty base itinerary");
    BaseCell b;
    b.word = word;
    b.start_perm = word.front().perm;
    b.start_type = word.front().type;
    int d = b.start_perm.size();
    IntMatrix a = IntMatrix::identity(d);
    for (const ZSymbol& s : word) a = a * symbol_step(s).matrix;
    auto [ep, et] = word_end(word);
    b.end_perm = ep;
    b.end_type = et;
    b.matrix = a * half_simplex_vertices(ep, et);
    if (!b.matrix.strictly_positive())
        throw DomainError("base cylinder matrix is not strictly positive");
    b.inverse = b.matrix.unimodular_inverse();
    b.mass = subsimplex_mass(b.matrix);
    b.center.assign(d, 0.0);
    for (int j = 0; j < d; ++j) {
        std::vector<double> col(d);
        for (int i = 0; i < d; ++i) col[i] = static_cast<double>(b.matrix(i, j));
        col = normalized(std::move(col));
        for (int i = 0; i < d; ++i) b.center[i] += col[i] / d;
        b.vertices.push_back(std::move(col));
    }
    return b;
}

BaseCell select_base(const Permutation& perm, std::vector<double> lambda, int max_depth) {
    std::vector<ZSymbol> word;
    Permutation p = perm;
    for (int depth = 1; depth <= max_depth; ++depth) {
        auto step = zorich_step(p, std::move(lambda));
        word.push_back(ZSymbol{p, step.start_type, step.n1});
        p = step.end_perm;
        lambda = std::move(step.end_lengths);
        IntMatrix a = IntMatrix::identity(perm.size());
        for (const ZSymbol& s : word) a = a * symbol_step(s).matrix;
        auto [ep, et] = word_end(word);
        if ((a * half_simplex_vertices(ep, et)).strictly_positive()) return make_base(word);
    }
    throw DepthExceeded("no strictly positive cylinder matrix within max_depth");
}

const Branch* BranchInventory::find(const std::vector<ZSymbol>& word) const {
    for (const Branch& b : branches)
        if (b.word == word) return &b;
    return nullptr;
}

const Branch* BranchInventory::locate(const std::vector<double>& x) const {
    for (const Branch& b : branches) {
        auto v = b.inverse.apply(x);
        auto w = base.inverse.apply(v);
        bool pos = true, neg = true;
        for (double c : w) {
            if (c <= 0) pos = false;
            if (c >= 0) neg = false;
        }
        if (pos || neg) return &b;
    }
    return nullptr;
}

BranchInventory enumerate_branches(const BaseCell& base, long n2_max, double mass_floor_rel) {
    BranchInventory inv;
    inv.base = base;
    inv.n2_max = n2_max;
    const double floor_mass = mass_floor_rel * base.mass;
    const int nb = base.n_b();

    IntMatrix a_word = IntMatrix::identity(base.start_perm.size());
    for (const ZSymbol& s : base.word) a_word = a_word * symbol_step(s).matrix;
    const IntMatrix a_word_inv = a_word.unimodular_inverse();

    struct Node {
        std::vector<ZSymbol> word; // includes the base word as prefix
        IntMatrix a;               // product over all symbols of `word`
        Permutation end_perm;
        Type end_type;
    };

    std::vector<Node> stack;
    stack.push_back(Node{base.word, a_word, base.end_perm, base.end_type});

    while (!stack.empty()) {
        Node node = std::move(stack.back());
        stack.pop_back();
        if (static_cast<long>(node.word.size()) - nb >= n2_max) continue;

        int misses = 0;
        // scan the burst length incrementally: each n1 extends the previous
        // step matrix by one elementary factor
        int eps = type_index(node.end_type);
        Permutation burst_perm = node.end_perm;
        IntMatrix burst_a = node.a;
        for (long n1 = 1; misses < 3; ++n1) {
            burst_a = burst_a * elementary_theta(burst_perm.size(), burst_perm.last_symbol(eps),
                                                 burst_perm.last_symbol(1 - eps));
            burst_perm = rauzy_move(burst_perm, node.end_type);

            ZSymbol sym{node.end_perm, node.end_type, n1};
            Node child;
            child.word = node.word;
            child.word.push_back(sym);
            child.a = burst_a;
            child.end_perm = burst_perm;
            child.end_type = opposite(node.end_type);

            double cyl_mass =
                subsimplex_mass(child.a * half_simplex_vertices(child.end_perm, child.end_type));
            if (cyl_mass < floor_mass) {
                ++misses;
                continue;
            }
            misses = 0;

            // does the word now end with the base itinerary?  the first such
            // occurrence marks a first return; the subtree below it belongs
            // to later returns and is not explored
            bool harvest =
                std::equal(child.word.end() - nb, child.word.end(), base.word.begin());

            if (harvest) {
                Branch br;
                br.n2 = static_cast<long>(child.word.size()) - nb;
                br.word.assign(child.word.begin(), child.word.begin() + br.n2);
                br.matrix = child.a * a_word_inv; // strip the trailing base word
                br.inverse = br.matrix.unimodular_inverse();
                br.mass = subsimplex_mass(br.matrix * base.matrix);
                inv.covered_mass += br.mass;
                inv.branches.push_back(std::move(br));
            } else {
                stack.push_back(std::move(child));
            }
        }
    }

    std::sort(inv.branches.begin(), inv.branches.end(), [](const Branch& a, const Branch& b) {
        if (a.n2 != b.n2) return a.n2 < b.n2;
        for (std::size_t i = 0; i < a.word.size(); ++i) {
            if (a.word[i].n1 != b.word[i].n1) return a.word[i].n1 < b.word[i].n1;
            if (!(a.word[i].perm == b.word[i].perm)) return a.word[i].perm < b.word[i].perm;
        }
        return false;
    });
    for (std::size_t i = 0; i < inv.branches.size(); ++i)
        inv.branches[i].id = static_cast<int>(i);
    inv.uncovered_mass = base.mass - inv.covered_mass;
    return inv;
}

ReturnResult first_return(const BaseCell& base, const std::vector<double>& x,
                          const BranchInventory* inventory, long cap) {
    ReturnResult res;
    Permutation p = base.start_perm;
    std::vector<double> lam = x;
    for (long k = 0; k < cap; ++k) {
        auto step = zorich_step(p, std::move(lam));
        res.word.push_back(ZSymbol{p, step.start_type, step.n1});
        p = step.end_perm;
        lam = std::move(step.end_lengths);
        if (base.contains(p, lam)) {
            res.n2 = k + 1;
            res.point = std::move(lam);
            if (inventory) {
                const Branch* b = inventory->find(res.word);
                if (b) res.branch_id = b->id;
            }
            return res;
        }
    }
    throw ReturnCapExceeded("no return to the base within the step cap");
}

ReturnWalker::ReturnWalker(const BaseCell& base) : d_(base.start_perm.size()) {
    RauzyClass rc = rauzy_class(base.start_perm);
    start_vertex_ = rc.index_of(base.start_perm);
    int nv = static_cast<int>(rc.vertices.size());
    last_.resize(nv);
    move_.resize(nv);
    for (int v = 0; v < nv; ++v) {
        last_[v] = {rc.vertices[v].last_symbol(0), rc.vertices[v].last_symbol(1)};
        for (int eps = 0; eps < 2; ++eps)
            move_[v][eps] = rc.edges.at({v, eps});
    }
    inverse_.resize(static_cast<std::size_t>(d_) * d_);
    inverse_zero_.resize(inverse_.size());
    for (int i = 0; i < d_; ++i)
        for (int j = 0; j < d_; ++j) {
            inverse_[i * d_ + j] = static_cast<double>(base.inverse(i, j));
            inverse_zero_[i * d_ + j] = base.inverse(i, j) == 0;
        }
}

double ReturnWalker::advance(std::vector<double>& x, long cap) const {
    double* lam = x.data();
    int v = start_vertex_;
    double roof = 0.0;
    long burst_len = 0;
    double total = 0.0;
    for (int i = 0; i < d_; ++i) total += lam[i];
    double l0 = lam[last_[v][0]], l1 = lam[last_[v][1]];
    if (std::fabs(l0 - l1) <= 1e-12 * total) throw TieError("lambda_{a(0)} == lambda_{a(1)}");
    int burst_type = l0 > l1 ? 0 : 1;
    for (long n2 = 0; n2 < cap;) {
        if (++burst_len > kZorichBurstCap) throw BurstTooLong("n1 exceeded burst cap");
        for (int i = 0; i < d_; ++i)
            if (lam[i] < kDegeneracyFloor * total)
                throw NearDegenerate("length below relative floor 1e-13");
        if (std::fabs(total - 1.0) > 1e-9) throw NotNormalized("|lambda| != 1");
        int winner = last_[v][burst_type], loser = last_[v][1 - burst_type];
        double lose = lam[loser];
        lam[winner] -= lose;
        double factor = total - lose;
        for (int i = 0; i < d_; ++i) lam[i] /= factor;
        roof -= std::log1p(-lose / total);
        v = move_[v][burst_type];

        total = 0.0;
        for (int i = 0; i < d_; ++i) total += lam[i];
        l0 = lam[last_[v][0]];
        l1 = lam[last_[v][1]];
        if (std::fabs(l0 - l1) <= 1e-12 * total)
            throw TieError("lambda_{a(0)} == lambda_{a(1)}");
        int now = l0 > l1 ? 0 : 1;
        if (now == burst_type) continue;
        burst_type = now;
        burst_len = 0;
        ++n2;
        if (v == start_vertex_) {
            // sign test in the cell chart; all coordinates on one side
            bool pos = true, neg = true;
            for (int i = 0; i < d_; ++i) {
                double w = 0.0;
                for (int j = 0; j < d_; ++j)
                    if (!inverse_zero_[i * d_ + j]) w += inverse_[i * d_ + j] * lam[j];
                if (w <= 0) pos = false;
                if (w >= 0) neg = false;
                if (!pos && !neg) break;
            }
            if (pos || neg) return roof;
        }
    }
    throw ReturnCapExceeded("no return to the base within the step cap");
}

ZorichWalker::ZorichWalker(const Permutation& start) : d_(start.size()) {
    RauzyClass rc = rauzy_class(start);
    vertices_ = rc.vertices;
    int nv = static_cast<int>(vertices_.size());
    last_.resize(nv);
    move_.resize(nv);
    for (int v = 0; v < nv; ++v) {
        last_[v] = {vertices_[v].last_symbol(0), vertices_[v].last_symbol(1)};
        for (int eps = 0; eps < 2; ++eps)
            move_[v][eps] = rc.edges.at({v, eps});
    }
    vertex_ = rc.index_of(start);
    lengths_.assign(d_, 1.0 / d_);
    type_ = -1;
}

int ZorichWalker::vertex_of(const Permutation& p) const {
    auto it = std::lower_bound(vertices_.begin(), vertices_.end(), p);
    if (it == vertices_.end() || !(*it == p)) return -1;
    return static_cast<int>(it - vertices_.begin());
}

void ZorichWalker::reset(const Permutation& p, std::vector<double> lengths) {
    int v = vertex_of(p);
    if (v < 0) throw DomainError("permutation outside the walker's class");
    vertex_ = v;
    lengths_ = std::move(lengths);
    type_ = -1;
}

void ZorichWalker::step(long cap) {
    double* lam = lengths_.data();
    double total = 0.0;
    for (int i = 0; i < d_; ++i) total += lam[i];
    double l0 = lam[last_[vertex_][0]], l1 = lam[last_[vertex_][1]];
    if (std::fabs(l0 - l1) <= 1e-12 * total) throw TieError("lambda_{a(0)} == lambda_{a(1)}");
    int start_type = l0 > l1 ? 0 : 1;
    int current = start_type;
    long n1 = 0;
    while (current == start_type) {
        if (n1 >= cap) throw BurstTooLong("n1 exceeded burst cap");
        for (int i = 0; i < d_; ++i)
            if (lam[i] < kDegeneracyFloor * total)
                throw NearDegenerate("length below relative floor 1e-13");
        if (std::fabs(total - 1.0) > 1e-9) throw NotNormalized("|lambda| != 1");
        int winner = last_[vertex_][current], loser = last_[vertex_][1 - current];
        double lose = lam[loser];
        lam[winner] -= lose;
        double factor = total - lose;
        for (int i = 0; i < d_; ++i) lam[i] /= factor;
        vertex_ = move_[vertex_][current];
        ++n1;
        total = 0.0;
        for (int i = 0; i < d_; ++i) total += lam[i];
        l0 = lam[last_[vertex_][0]];
        l1 = lam[last_[vertex_][1]];
        if (std::fabs(l0 - l1) <= 1e-12 * total)
            throw TieError("lambda_{a(0)} == lambda_{a(1)}");
        current = l0 > l1 ? 0 : 1;
    }
    type_ = current;
}

double jacobian_t2(const Branch& branch, const std::vector<double>& x) {
    auto v = branch.inverse.apply(x);
    double s = 0.0;
    for (double c : v) s += std::fabs(c);
    int d = static_cast<int>(x.size());
    BigInt det = branch.matrix.determinant();
    double absdet = std::fabs(static_cast<double>(det));
    return 1.0 / (absdet * std::pow(s, d));
}

std::vector<double> branch_fixed_point(const Branch& branch, int iterations) {
    int d = branch.matrix.size();
    std::vector<double> v(d, 1.0 / d);
    for (int k = 0; k < iterations; ++k) {
        v = branch.matrix.apply(v);
        double s = std::accumulate(v.begin(), v.end(), 0.0);
        for (double& c : v) c /= s;
    }
    return v;
}

std::vector<double> sample_base_lebesgue(const BaseCell& base, Rng& rng) {
    // in the chart u the density of Lebesgue-on-B is proportional to
    // 1/|A u|^d; |A u| is linear in u, minimised at a vertex (column sum)
    int d = base.matrix.size();
    double smin = 1e300;
    for (const BigInt& c : base.matrix.column_sums())
        smin = std::min(smin, static_cast<double>(c));
    for (;;) {
        auto u = sample_simplex(d, rng);
        auto x = base.matrix.apply(u);
        double s = std::accumulate(x.begin(), x.end(), 0.0);
        if (rng.uniform() < std::pow(smin / s, d)) {
            for (double& c : x) c /= s;
            return x;
        }
    }
}

double mc_covered_fraction(const BaseCell& base, long n2_max, int samples, std::uint64_t seed) {
    Rng rng(seed);
    int within = 0;
    for (int k = 0; k < samples; ++k) {
        auto x = sample_base_lebesgue(base, rng);
        try {
            if (first_return(base, x).n2 <= n2_max) ++within;
        } catch (const Error&) {
            // aborted orbits count as uncovered
        }
    }
    return static_cast<double>(within) / samples;
}

std::vector<double> sample_simplex(int d, Rng& rng) {
    std::vector<double> v(d);
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
        v[i] = rng.exponential(1.0);
        s += v[i];
    }
    for (double& c : v) c /= s;
    return v;
}

namespace {

double euclid(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

} // namespace

DistortionReport distortion_diagnostics(const BaseCell& base, const BranchInventory& inventory,
                                        int samples, std::uint64_t seed) {
    if (inventory.branches.empty() || samples < 10)
        throw InsufficientSamples("need a nonempty inventory and at least 10 samples");
    Rng rng(seed);
    const int d = base.start_perm.size();

    // expansion over n-fold cylinders: pick a random composite inverse branch,
    // push two points through it, and compare distances before/after
    std::vector<double> mean_log_ratio(3, 0.0);
    std::vector<long> counts(3, 0);
    DistortionReport rep;
    for (int s = 0; s < samples; ++s) {
        int n = 1 + static_cast<int>(rng.uniform_index(3));
        IntMatrix m = IntMatrix::identity(d);
        for (int j = 0; j < n; ++j)
            m = m * inventory.branches[rng.uniform_index(inventory.branches.size())].matrix;
        auto z1 = base.from_chart(sample_simplex(d, rng));
        auto z2 = base.from_chart(sample_simplex(d, rng));
        std::vector<double> x1 = m.apply(z1), x2 = m.apply(z2);
        double s1 = std::accumulate(x1.begin(), x1.end(), 0.0);
        double s2 = std::accumulate(x2.begin(), x2.end(), 0.0);
        for (double& c : x1) c /= s1;
        for (double& c : x2) c /= s2;
        double dx = euclid(x1, x2), dz = euclid(z1, z2);
        if (dx <= 0 || dz <= 0) continue;
        mean_log_ratio[n - 1] += std::log(dz / dx);
        counts[n - 1] += 1;
        rep.sample_pairs += 1;
    }
    // least-squares line through (n, mean log ratio): slope = log theta
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int pts = 0;
    for (int n = 1; n <= 3; ++n) {
        if (counts[n - 1] == 0) continue;
        double y = mean_log_ratio[n - 1] / counts[n - 1];
        sx += n;
        sy += y;
        sxx += n * n;
        sxy += n * y;
        ++pts;
    }
    if (pts < 2) throw InsufficientSamples("not enough cylinder depths sampled");
    double slope = (pts * sxy - sx * sy) / (pts * sxx - sx * sx);
    double intercept = (sy - slope * sx) / pts;
    rep.theta_hat = std::exp(slope);
    rep.c_hat = std::exp(intercept);

    // log-Jacobian Lipschitz constant over same-branch pairs
    std::vector<double> ratios;
    for (int s = 0; s < samples; ++s) {
        const Branch& br = inventory.branches[rng.uniform_index(inventory.branches.size())];
        auto z1 = base.from_chart(sample_simplex(d, rng));
        auto z2 = base.from_chart(sample_simplex(d, rng));
        auto x1 = normalized(br.matrix.apply(z1));
        auto x2 = normalized(br.matrix.apply(z2));
        double dz = euclid(z1, z2);
        if (dz <= 0) continue;
        double dl = std::fabs(std::log(jacobian_t2(br, x1)) - std::log(jacobian_t2(br, x2)));
        ratios.push_back(dl / dz);
    }
    std::sort(ratios.begin(), ratios.end());
    rep.d1_hat = ratios.empty() ? 0.0 : ratios[static_cast<std::size_t>(0.99 * (ratios.size() - 1))];

    // comparability of m(B_k) * Jac with m(B)
    double vmax = 0.0, vmin = 1e300;
    for (int s = 0; s < samples; ++s) {
        const Branch& br = inventory.branches[rng.uniform_index(inventory.branches.size())];
        auto x = normalized(br.matrix.apply(base.from_chart(sample_simplex(d, rng))));
        double v = br.mass * jacobian_t2(br, x) / base.mass;
        vmax = std::max(vmax, v);
        vmin = std::min(vmin, v);
    }
    rep.d2_hat = std::max(vmax, 1.0 / vmin);
    return rep;
}

} // namespace rauzylab
