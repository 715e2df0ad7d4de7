#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "chains/coupling.hpp"
#include "chains/kernels.hpp"
#include "chains/rng.hpp"

// Random-label decompositions of the pair coupling. A label carries all the
// randomness of one update step; given the label, the new pair of symbols is
// a deterministic function of a finite window of the two pasts (or of the
// full pasts, for hybrid residual labels).
//
// Two constructions:
//  - discrete: exact level decomposition of the majority family. Level 0
//    (probability 2*eps) ignores the past and has two intervals, forcing
//    (1,1) or (2,2); level m_k (probability (1-2*eps)*lambda_k) reads the
//    length-m_k windows and forces the pair of majority symbols.
//  - hybrid: layered minorization of any attractive kernel up to window
//    depth K. One uniform u drives the quantile update
//    a = min{a : u < P(x_0 <= a | past)}; level k claims the set of
//    uniforms whose quantile is already settled by every depth-k window
//    (both extreme tail completions agree) and by no shallower depth.
//    What no finite depth settles (weight rho) is the residual, resolved
//    against the exact cumulatives of the full pasts. Both pasts of a pair
//    share the label, so the pair law at any two pasts is exactly the
//    maximal coupling, and attractiveness makes every level monotone in
//    its window.
//
// For the discrete construction residual() is only an enumeration cutoff
// (levels()/depth() stop once the remaining weight drops below 1e-14);
// sampling itself inverts the full geometric level law and stays exact.

namespace chains {

enum class DecompositionMode { discrete, hybrid };

struct Label {
    enum class Kind : std::uint8_t { discrete, hybrid };
    static constexpr long long residual_level = -1;

    Kind kind = Kind::discrete;
    long long level = 0;  // discrete: window length (0 skips the past); hybrid: 0..K or residual_level
    int interval = 1;     // discrete only: 1-based interval within the level
    double u = 0.0;       // hybrid only: the global uniform; levels own disjoint subsets of [0,1)
};

// two equal-length windows, most recent symbol first
struct PairWindow {
    std::span<const Symbol> left, right;
};

// lexicographic cell thresholds of one level kernel: r(a, b) is the mass of
// all cells up to and including (a, b) in (a-major, b-minor) order, with
// r(1, 0) = 0 and r(a, 0) = r(a-1, s); a uniform u lands in cell (a, b)
// when r(a, b-1) <= u < r(a, b)
struct Thresholds {
    int s = 2;
    std::vector<double> cum;  // cum[i] = mass of cells 0..i, i = (a-1)*s + (b-1)

    double r(int a, int b) const;
};

struct UpdateStats {
    long long ambiguity_events = 0;  // uniform within 1e-12 of a threshold (left cell taken)
    long long residual_labels = 0;
};

struct MonotonicityReport {
    bool passed = false;
    long long trials = 0;
    long long order_violations = 0;  // output pair not ordered low <= high
    long long cross_violations = 0;  // outputs not monotone across comparable pair pasts
};

class Decomposition {
public:
    DecompositionMode mode() const { return mode_; }
    const Kernel& kernel() const { return kernel_; }
    int alphabet_size() const { return kernel_.alphabet_size(); }

    // discrete: number of enumerated window levels; hybrid: depth K
    long long depth() const { return depth_; }
    std::vector<long long> levels() const;
    double weight(long long level) const;
    double residual() const { return residual_; }
    bool monotone_verified() const { return monotone_verified_; }

    CellTable level_kernel(long long level, PairWindow h) const;
    Thresholds level_thresholds(long long level, PairWindow h) const;

    // label uniforms that select (and, for hybrid levels, resolve) this
    // level, as sorted disjoint half-open intervals partitioning its weight
    std::vector<std::pair<double, double>> level_intervals(long long level) const;

    Label sample_label(rng::SubStream& g) const;

    // one update step: consumes the label, reads the two pasts, returns the
    // ordered pair of new symbols
    std::pair<Symbol, Symbol> apply(PastView left, PastView right, const Label& label,
                                    UpdateStats* stats = nullptr) const;

    // entropy (nats) of the label law; discrete construction only
    double label_entropy() const;

    MonotonicityReport verify_monotonicity(long long trials, std::uint64_t seed) const;

    friend Decomposition bk_decompose(const Kernel& kernel);
    friend Decomposition greedy_decompose(const Kernel& kernel, int depth, long long gate_trials,
                                          std::uint64_t gate_seed);

private:
    explicit Decomposition(Kernel kernel) : kernel_(std::move(kernel)) {}

    std::pair<Symbol, Symbol> quantile_pair(PastView left, PastView right, double u,
                                            UpdateStats* stats) const;

    Kernel kernel_;
    DecompositionMode mode_ = DecompositionMode::discrete;
    long long depth_ = 0;
    double residual_ = 0.0;
    bool monotone_verified_ = false;

    // discrete payload
    double eps_ = 0.0, r_ = 0.0;

    // hybrid payload: level k owns disjoint uniform intervals; on each
    // interval the quantile is one fixed symbol per depth-k window
    std::vector<double> lambda_;
    std::vector<std::vector<std::pair<double, double>>> ivs_;
    std::vector<std::vector<Symbol>> sym_;  // [level][interval * s^level + window code]
};

// exact level decomposition of a majority kernel (throws InvalidParams for
// any other family)
Decomposition bk_decompose(const Kernel& kernel);

// layered minorization of an attractive kernel up to window depth K.
// Construction runs the monotonicity gate (gate_trials random comparable
// pair pasts driven by common labels) and throws MonotonicityUnverified on
// any violation; gate_trials = 0 skips the gate and leaves the decomposition
// unusable for sampling until verify_monotonicity is consulted explicitly.
Decomposition greedy_decompose(const Kernel& kernel, int depth, long long gate_trials = 20000,
                               std::uint64_t gate_seed = 0xb0a71e5ull);

}  // namespace chains
