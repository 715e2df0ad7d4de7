#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chains/kernels.hpp"

// Experiment configuration and subcommand dispatch. Reports embed the
// library version and a digest of the canonical config serialization, so a
// (config, seed) pair pins the full output byte for byte; the timestamp is
// the one excluded field.

namespace chains {

struct DecompositionConfig {
    std::string mode = "auto";  // auto | discrete | greedy
    int K = 6;                  // greedy pair-window depth
    int J = -1;                 // majority level cutoff override, -1 = kernel default
};

struct RunConfig {
    long long n = 100;        // window length per replica
    long long replicas = 200;
    long long horizon_limit = 1'000'000;
    std::uint64_t seed = 1;
};

struct AnalysisConfig {
    std::vector<double> epsilons{0.05};
    std::string functional = "mean";  // mean | single_site
    long long block = 4;              // largest relative-entropy block parameter
};

struct ExperimentConfig {
    KernelSpec kernel;
    DecompositionConfig decomposition;
    RunConfig run;
    AnalysisConfig analysis;

    static ExperimentConfig from_json(const std::string& text);
    static ExperimentConfig from_file(const std::string& path);

    std::string to_json() const;  // canonical form, the digest input
    std::string digest() const;   // FNV-1a 64 of to_json(), 16 hex chars
    void validate() const;
};

// runs one subcommand of {sample, theta, decompose, coupling-check, phases,
// concentration, entropy-rate, criteria}; writes report.json and the
// subcommand's CSVs under out_dir and prints a one-line summary.
// Returns 0, or 2 when a backward search hit the horizon (the partial
// report is still written). Configuration problems throw.
int run_subcommand(const std::string& name, const ExperimentConfig& config,
                   const std::string& out_dir, int workers = 1);

}  // namespace chains
