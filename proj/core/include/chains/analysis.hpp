#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "chains/alphabet.hpp"
#include "chains/kernels.hpp"

// Concentration bounds and their empirical counterparts, uniqueness criteria,
// relative-entropy-rate estimation, and the i.i.d.-block renewal oracle.

namespace chains {

// coordinatewise oscillations delta_j of a functional f of (X_1, ..., X_n)
struct LipschitzSpec {
    std::vector<double> delta;

    double l1() const;
    double l2sq() const;
    void validate() const;

    // empirical mean of a k-block functional h over n - k + 1 positions;
    // every coordinate enters at most k blocks, so delta_j <= k h_osc / (n-k+1)
    static LipschitzSpec block_mean(long long n, long long k, double h_osc);
    // f depends on one coordinate only
    static LipschitzSpec single_site(long long n, long long site, double osc);
};

struct BoundValue {
    double raw = 0.0;     // the exponential bound itself (may exceed 1)
    double capped = 0.0;  // min(raw, 1), the reported probability bound
};

// deviation bound for an exact-sampling functional:
// 4 exp{ -2 eps^2 / (9 (1 + E[theta])^2 ||delta f||_2^2) }
BoundValue cftp_concentration_bound(double mean_theta, double epsilon, const LipschitzSpec& spec);

// empirical or analytic tail of the coalescence time
struct ThetaTail {
    std::vector<double> prob_geq;  // prob_geq[j-1] = P(theta >= j), nonincreasing
    double mean = 0.0;

    static ThetaTail from_sample(std::span<const long long> thetas, long long depth);

    void validate() const;
    double geq(long long j) const;       // j = 0 gives 1; throws InsufficientTail past depth
    double gt_upper(long long r) const;  // valid upper bound for P(theta > r) from stored entries
    double sum_geq(long long r1) const;  // sum_{j=1}^{r1} P(theta >= j); needs depth >= r1
};

struct FpBound {
    bool premise_ok = false;
    double premise_lhs = 0.0;  // upper bound on P(theta_1 > r_1) + P(theta_2 > r_2)
    double premise_rhs = 0.0;  // eps / (6 ||delta f||_1)
    BoundValue bound;          // 4 exp{ -2 eps^2 / (9 (1 + r_2 + sum_{j<=r_1} P(theta_1 >= j))^2 ||delta f||_2^2) }
};

// finite-stopping-time deviation bound; with r_2 = 0 and the full tail summed
// to E[theta] it reduces exactly to cftp_concentration_bound
FpBound fp_concentration_bound(const ThetaTail& tail, long long r1, long long r2, double epsilon,
                               const LipschitzSpec& spec);

// 95% by default
std::pair<double, double> wilson_interval(long long successes, long long runs,
                                          double z = 1.959963984540054);

struct DeviationEstimate {
    long long runs = 0;
    long long exceed = 0;
    double fraction = 0.0;
    double wilson_lo = 0.0;
    double wilson_hi = 0.0;
    double sample_mean = 0.0;
    double epsilon = 0.0;
};

// fraction of values deviating from their own sample mean by more than
// epsilon, with a 95% Wilson interval; requires >= 100 runs
DeviationEstimate empirical_deviation(std::span<const double> values, double epsilon);

using BlockFunctional = std::function<double(std::span<const Symbol>)>;

struct ErgodicPoint {
    long long n = 0;
    double frequency = 0.0;
    double wilson_hi = 0.0;
};

struct ErgodicReport {
    std::vector<ErgodicPoint> points;
    double slope = 0.0;  // least-squares slope of log frequency vs n (zeros floored)
    bool decaying = false;
};

// deviation frequency of the k-block time average from reference_mean at each
// window length in n_grid, one window per replica
ErgodicReport ergodic_rate_check(const std::vector<std::vector<Symbol>>& replicas,
                                 const BlockFunctional& h, long long k, double epsilon,
                                 std::vector<long long> n_grid, double reference_mean);

struct KlEstimate {
    double rate = 0.0;  // per-symbol relative entropy over (n+1)-blocks, nats
    long long blocks_x = 0, blocks_y = 0;
    long long cells = 0;
    double alpha = 0.5;
    double bias_floor = 0.0;  // cells (1/blocks_x + 1/blocks_y) / (n+1)
};

// add-alpha smoothed plug-in estimate over non-overlapping (n+1)-blocks;
// identical samples give exactly 0
KlEstimate relative_entropy_rate(std::span<const Symbol> xs, std::span<const Symbol> ys, int s,
                                 long long n, double alpha = 0.5);

enum class Verdict { satisfied, violated, inconclusive };
const char* to_string(Verdict v);

struct CriterionResult {
    Verdict verdict = Verdict::inconclusive;
    double quantity = 0.0;
    std::string note;
};

// Three sufficient uniqueness conditions, each judged on whether the
// condition itself holds (violated means the condition fails, which decides
// nothing about the chain):
//  - decay_exponent: logit coefficients xi_n = c n^{-alpha} need alpha > 3/2
//    (geometric decay passes outright; other families are out of scope)
//  - oscillation_sum: sum over coordinates of the per-symbol oscillation
//    bound must be < 1
//  - product_divergence: sum_k prod_{i<k} (1 - var_i) must diverge; judged
//    from dyadic partial sums with a log-log slope heuristic, three-valued
//    because finitely many terms cannot always decide
struct UniquenessReport {
    CriterionResult decay_exponent;
    CriterionResult oscillation_sum;
    CriterionResult product_divergence;
};

UniquenessReport uniqueness_criteria(const Kernel& kernel);

struct RenewalOracle {
    std::vector<Symbol> trajectory;          // blocks (1, 2, 2, ..., 2) concatenated, trimmed
    std::vector<long long> block_lengths;    // complete blocks only
    double mean_block_length = 0.0;          // sum_k prod_{i<k} (1 - p_i)
};

// i.i.d.-block construction of the renewal chain; throws InfiniteMeanBlock
// when the survival products do not sum
RenewalOracle renewal_block_oracle(const PSequence& p, long long length, std::uint64_t seed);

// lengths of the (1, 2, ..., 2) blocks in a trajectory; the leading partial
// block and a trailing unterminated run are dropped
std::vector<long long> block_lengths(std::span<const Symbol> trajectory);

struct ChiSquareResult {
    double statistic = 0.0;
    long long dof = 0;
    double p_value = 1.0;
    long long cells = 0;  // after pooling
};

// two-sample homogeneity test; consecutive cells are pooled until each group
// holds at least min_pool combined counts
ChiSquareResult two_sample_chi_square(std::span<const long long> a, std::span<const long long> b,
                                      long long min_pool = 10);

// goodness of fit against exact cell probabilities (pooled the same way)
ChiSquareResult chi_square_gof(std::span<const long long> counts, std::span<const double> probs,
                               long long min_pool = 10);

}  // namespace chains
