#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "chains/decomposition.hpp"
#include "chains/kernels.hpp"
#include "chains/rng.hpp"

// Exact sampling by coupling from the past. Labels are pure functions of
// (seed, time index), so every backward restart rereads the same randomness;
// runs start from the two constant extremal pasts, whose updates bracket
// every other start under the verified monotonicity of the decomposition.
// theta(i) is the smallest depth j such that the pair started at time i - j
// has coalesced by time i; it is found by doubling and then binary search,
// and is itself a first-class outcome (a run that exceeds the horizon
// reports that instead of a value).

namespace chains {

class LabelStream {
public:
    LabelStream(const Decomposition& dec, std::uint64_t seed)
        : dec_(&dec), seed_(seed) {}

    const Label& at(long long t);
    long long labels_materialized() const { return count_; }
    std::uint64_t seed() const { return seed_; }
    const Decomposition& decomposition() const { return *dec_; }

private:
    const Decomposition* dec_;
    std::uint64_t seed_;
    std::vector<Label> fwd_, bwd_;
    std::vector<std::uint8_t> fwd_set_, bwd_set_;
    long long count_ = 0;
};

// spec of one update step on a pair of pasts (delegates to the decomposition)
std::pair<Symbol, Symbol> update_F(const Decomposition& dec, PastView left, PastView right,
                                   const Label& label, UpdateStats* stats = nullptr);

struct PairState {
    Past left, right;
};

// applies the labels at times from..to (inclusive) to the pair, prepending
// each output symbol
PairState iterate(const Decomposition& dec, PairState state, LabelStream& labels,
                  long long from, long long to, UpdateStats* stats = nullptr);

struct UpdateDiagnostics {
    long long updates = 0;
    long long ambiguity_events = 0;   // uniform within 1e-12 of a cell threshold
    long long residual_labels = 0;
    long long absorption_rechecks = 0;
    long long absorption_failures = 0;  // deeper restart disagreed with the coalesced value
};

struct CftpOptions {
    long long horizon = 1'000'000;
    bool recheck_absorption = false;  // rerun from depth theta + 5 and compare
};

struct ThetaResult {
    bool coalesced = false;
    long long theta = 0;  // smallest coalescing depth, or the horizon when censored
    Symbol value = 0;
};

ThetaResult theta(const Decomposition& dec, LabelStream& labels, long long at,
                  const CftpOptions& options = {}, UpdateDiagnostics* diag = nullptr);

struct CftpRun {
    std::vector<Symbol> window;      // exact stationary values at times 0..n-1
    std::vector<long long> theta;    // per-position coalescence depth
    bool complete = true;
    long long exceeded_at = -1;      // first position whose search hit the horizon
    std::uint64_t seed = 0;
    long long horizon = 0;
    long long labels_materialized = 0;
    long long max_theta = 0;
    double mean_theta = 0.0;
    UpdateDiagnostics diagnostics;
};

// exact stationary window of length n; a horizon hit truncates the window
// and reports the position rather than guessing
CftpRun sample_stationary(const Decomposition& dec, long long n, std::uint64_t seed,
                          const CftpOptions& options = {});

// plain forward simulation started from a fixed past (approximate reference
// dynamics, not an exact stationary sample)
std::vector<Symbol> forward_fixed_past(const Kernel& kernel, PastView start, long long n,
                                       std::uint64_t seed);

struct SurvivalPoint {
    long long n = 0;
    double survival = 0.0;  // P(theta > n) estimate
    double se = 0.0;
};

struct SurvivalCurve {
    std::vector<long long> theta;  // per replica, censored at horizon + 1
    long long horizon = 0;
    long long censored = 0;
    std::vector<SurvivalPoint> points;  // monotone: all points share one sample
};

// distribution of theta at time 0 across independent label streams;
// an empty grid defaults to {0, 1, 2, 4, ..., horizon}
SurvivalCurve coalescence_curve(const Decomposition& dec, long long horizon, long long replicas,
                                std::vector<long long> grid, std::uint64_t seed, int workers = 1);

struct PhaseGapPoint {
    long long n = 0;
    double gap = 0.0;  // mean centered-value difference, top start minus bottom
    double se = 0.0;   // paired standard error
};

struct PhaseGap {
    std::vector<PhaseGapPoint> points;
    long long replicas = 0;
};

// forward coupling of the two extremal starts sharing one uniform per step;
// a gap bounded away from zero as n grows is the signature of multiple
// compatible chains, decay to zero the signature of uniqueness.
// Values are centered symbols 2a - s - 1 (spins, for a binary alphabet).
PhaseGap phase_gap(const Kernel& kernel, std::vector<long long> n_grid, long long replicas,
                   std::uint64_t seed, int workers = 1);

}  // namespace chains
