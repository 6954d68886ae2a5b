#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "rauzylab/rng.hpp"
#include "rauzylab/zorich.hpp"

namespace rauzylab {

inline constexpr long kReturnCap = 100000;
inline constexpr double kBranchMassFloor = 1e-10; // relative to m(B)

// One accelerated induction step as a symbolic letter: starting permutation,
// starting type, and the burst length.  This triple determines the step's
// matrix and end permutation.
struct ZSymbol {
    Permutation perm;
    Type type;
    long n1;

    bool operator==(const ZSymbol& o) const {
        return n1 == o.n1 && type == o.type && perm == o.perm;
    }
};

struct SymbolStep {
    IntMatrix matrix;     // product of the n1 elementary factors
    Permutation end_perm; // permutation after the burst
};

// Deterministic replay of the letter: n1 moves of the fixed type.
SymbolStep symbol_step(const ZSymbol& s);

// Vertex matrix of the half-simplex {lambda_{a(eps)} > lambda_{a(1-eps)}}:
// identity with the loser column replaced by e_winner + e_loser.
IntMatrix half_simplex_vertices(const Permutation& p, Type t);

// Lebesgue mass of normalize(M * simplex) relative to the whole simplex.
double subsimplex_mass(const IntMatrix& m);

// A contracting cylinder B = image of an inverse branch of the accelerated
// map, chosen so that its matrix is strictly positive (Hilbert-metric
// contraction).  B is itself a closed simplex inside one Markov cell.
struct BaseCell {
    std::vector<ZSymbol> word; // itinerary of length n_B
    IntMatrix matrix;          // strictly positive, det +-1
    IntMatrix inverse;
    Permutation start_perm;
    Type start_type;
    Permutation end_perm; // state data after the word
    Type end_type;
    double mass = 0.0;
    std::vector<std::vector<double>> vertices; // d corner points on the simplex
    std::vector<double> center;

    int n_b() const { return static_cast<int>(word.size()); }
    bool contains(const Permutation& p, const std::vector<double>& x) const;

    // chart u = normalize(inverse * x) maps B onto the standard simplex
    std::vector<double> to_chart(const std::vector<double>& x) const;
    std::vector<double> from_chart(const std::vector<double>& u) const;
};

BaseCell make_base(const std::vector<ZSymbol>& word);

// Follows the accelerated orbit of the seed and returns the shortest initial
// itinerary whose cylinder matrix is strictly positive.
BaseCell select_base(const Permutation& perm, std::vector<double> lambda, int max_depth);

// First-return branch: the set B_k of points of B returning after n2
// accelerated steps with a common itinerary.  The inverse branch
// I_k = normalize(matrix * .) maps B onto B_k.
struct Branch {
    int id = -1;
    std::vector<ZSymbol> word; // length n2
    long n2 = 0;
    IntMatrix matrix;
    IntMatrix inverse;
    double mass = 0.0; // m(B_k)
};

struct BranchInventory {
    BaseCell base;
    std::vector<Branch> branches; // shortlex in (n2, discovery order)
    long n2_max = 0;
    // Lebesgue mass held by the enumerated branches.  The remainder mixes two
    // effects: returns longer than n2_max and small cylinders lost to the
    // mass floor.  The floor loss shrinks very slowly (~floor^0.1), so the
    // practical completeness measure is the Monte Carlo return-time tail
    // (mc_covered_fraction below), not this difference.
    double covered_mass = 0.0;
    double uncovered_mass = 0.0;

    const Branch* find(const std::vector<ZSymbol>& word) const;
    const Branch* locate(const std::vector<double>& x) const; // which B_k holds x
};

BranchInventory enumerate_branches(const BaseCell& base, long n2_max,
                                   double mass_floor_rel = kBranchMassFloor);

struct ReturnResult {
    std::vector<double> point; // T2 x, on the unit simplex
    long n2 = 0;
    std::vector<ZSymbol> word;
    int branch_id = -1; // resolved against the inventory when provided
};

ReturnResult first_return(const BaseCell& base, const std::vector<double>& x,
                          const BranchInventory* inventory = nullptr, long cap = kReturnCap);

// Return-map evaluator with precomputed class tables: follows the identical
// trajectory as first_return but without per-step permutation and matrix
// construction, so long orbit statistics run at memory speed.  advance also
// accumulates the expansion time of the walk (the suspension roof at x).
class ReturnWalker {
public:
    explicit ReturnWalker(const BaseCell& base);

    // Moves x in place to its next return to B; returns the roof value.
    double advance(std::vector<double>& x, long cap = kReturnCap) const;

private:
    int start_vertex_ = 0;
    int d_ = 0;
    std::vector<std::array<int, 2>> last_;  // vertex -> last symbol of each row
    std::vector<std::array<int, 2>> move_;  // vertex, type -> next vertex
    std::vector<double> inverse_;           // chart matrix as doubles, row-major
    std::vector<bool> inverse_zero_;
};

// Accelerated-map evaluator over the same precomputed tables, for long
// single-step orbits.  Follows the identical trajectory as zorich_step.
class ZorichWalker {
public:
    explicit ZorichWalker(const Permutation& start);

    void reset(const Permutation& p, std::vector<double> lengths);
    void step(long cap = kZorichBurstCap); // one accelerated move
    int vertex() const { return vertex_; }
    int type() const { return type_; }     // classify type of the current state (-1 after reset)
    int vertex_of(const Permutation& p) const;
    const std::vector<double>& lengths() const { return lengths_; }

private:
    int d_ = 0;
    int vertex_ = 0;
    int type_ = 0; // current induction type, maintained across steps
    std::vector<double> lengths_;
    std::vector<Permutation> vertices_;
    std::vector<std::array<int, 2>> last_;
    std::vector<std::array<int, 2>> move_;
};

// Jacobian of the forward return map on branch k at x in B_k, in the simplex
// chart: the map is y = normalize(inverse * x), with derivative determinant
// |det A|^{-1} |A^{-1}x|^{-d} for the branch matrix A (|.| the 1-norm).
double jacobian_t2(const Branch& branch, const std::vector<double>& x);

// Perron direction of the branch matrix, normalised to the simplex: the
// unique fixed point of the return map inside B_k.
std::vector<double> branch_fixed_point(const Branch& branch, int iterations = 200);

// uniform sample from normalize(M * simplex) in its own chart coordinates
std::vector<double> sample_simplex(int d, Rng& rng);

// Lebesgue-uniform sample from B (rejection against the chart distortion)
std::vector<double> sample_base_lebesgue(const BaseCell& base, Rng& rng);

// Monte Carlo estimate of the Lebesgue fraction of B returning within n2_max
// accelerated steps — the practical coverage measure for an inventory.
double mc_covered_fraction(const BaseCell& base, long n2_max, int samples, std::uint64_t seed);

struct DistortionReport {
    double c_hat = 0.0;      // expansion prefactor
    double theta_hat = 0.0;  // per-step expansion factor (> 1)
    double d1_hat = 0.0;     // log-Jacobian Lipschitz estimate
    double d2_hat = 0.0;     // measure/Jacobian comparability band
    long sample_pairs = 0;
};

DistortionReport distortion_diagnostics(const BaseCell& base, const BranchInventory& inventory,
                                        int samples, std::uint64_t seed);

} // namespace rauzylab
