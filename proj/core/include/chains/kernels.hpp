#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "chains/alphabet.hpp"
#include "chains/errors.hpp"

// Kernel families. Every kernel evaluates upper cumulatives natively:
// cum(1,x) = 1 and cum(s+1,x) = 0 are pinned, interior values come from the
// family formula, and prob(a,x) := cum(a,x) - cum(a+1,x). Normalization and
// cumulative consistency are then exact by telescoping, not by tolerance.

namespace chains {

// strictly increasing odd window lengths m_1 < m_2 < ...; a rule, not a list,
// because level mass is geometric and sampling reaches arbitrary levels.
// Values saturate at 2^62 (only order comparisons ever see saturated values).
struct MSequence {
    enum class Kind { odd, explicit_list, geometric, superexp };
    Kind kind = Kind::odd;
    std::vector<std::uint64_t> values;  // explicit_list (continued as consecutive odds)
    std::uint64_t base = 1;             // geometric / superexp
    double factor = 2.0;                // geometric ratio, or superexp factor

    std::uint64_t value(std::uint64_t k) const;  // k >= 1
    void validate() const;
};

struct BkSpec {
    double epsilon = 0.1;  // in (0, 1/2)
    double r = 0.75;       // in (2/3, 1); lambda_k = (1-r) r^{k-1}, sum = 1
    MSequence m;
    int truncation_depth = -1;  // J; -1 = smallest J with r^J < 1e-14

    int depth() const;  // resolved J
};

// xi_n coefficients for the logit family
struct XiSequence {
    enum class Kind { geometric, power_law };
    Kind kind = Kind::geometric;
    double c = 0.5;
    double rho = 0.5;    // geometric: xi_n = c rho^n
    double alpha = 2.0;  // power_law: xi_n = c n^{-alpha}, alpha > 1

    double value(std::uint64_t n) const;     // n >= 1
    double tail_sum(std::uint64_t m) const;  // sum_{n > m} xi_n, exact closed form
    void validate() const;
};

struct AutoregressiveSpec {
    // P(a|x) = psi(a (sum_n xi_n x_{-n} + gamma)) with psi(t) = 1/(1+e^{-2t});
    // psi(t) + psi(-t) = 1 and sup|psi'| = 1/2
    XiSequence xi;
    double gamma = 0.0;
};

// nonincreasing stopping probabilities p_0 >= p_1 >= ... in [0,1]
struct PSequence {
    enum class Kind { harmonic, geometric, constant, explicit_list };
    Kind kind = Kind::constant;
    double a = 2.0, b = 2.0, cap = 0.5;        // harmonic: min(cap, a/(i+b))
    double base = 0.5, ratio = 0.5, floor_ = 0.0;  // geometric: floor + (base-floor) ratio^i
    double value_ = 0.5;                       // constant
    std::vector<double> values;                // explicit_list
    double tail = 0.0;                         // explicit_list continuation value

    double value(std::uint64_t i) const;
    double limit() const;
    void validate() const;
};

struct RenewalSpec {
    PSequence p;  // P(-1|x) = p_{ell(x)}, P(-1| all-plus) = lim p_i
};

struct MarkovSpec {
    int order = 1;     // k0 >= 0
    int alphabet = 2;  // s >= 2
    std::vector<std::vector<double>> rows;  // s^k0 rows of length s, each summing to 1 (1e-12)
};

using KernelSpec = std::variant<BkSpec, AutoregressiveSpec, RenewalSpec, MarkovSpec>;

// majority of a +-1 window, ties resolved to +1
int maj(std::span<const int> window);

// count of leading +1 symbols; nullopt on the all-plus past (infinite)
std::optional<long long> ell(PastView x);

class Kernel {
public:
    explicit Kernel(KernelSpec spec);  // validates; throws InvalidParams

    int alphabet_size() const { return s_; }
    const KernelSpec& spec() const { return spec_; }
    const char* family() const;

    // a in [1, s+1]; nonincreasing in a; exact 1 / 0 at the ends
    double cum(int a, PastView x) const;
    double prob(int a, PastView x) const { return cum(a, x) - cum(a + 1, x); }

    // upper bound on var_k = sup{ |prob(b,x)-prob(b,y)| : x,y agree to depth k }
    double var_bound(std::uint64_t k) const;
    // upper bound on osc_n = sum_a sup{ |prob(a,x)-prob(a,y)| : x,y differ at n only }
    double osc_bound(std::uint64_t n) const;

    bool attractive() const { return attractive_; }

    // BK: dropped level mass beyond depth J, (1-2eps) r^J; 0 for other families
    double truncation_residual() const;

    // sharper in-family variation bound used by the uniqueness criteria
    // (BK keeps the (1-2eps) factor that the reported var_bound rounds away)
    double var_sharp(std::uint64_t k) const;

private:
    KernelSpec spec_;
    int s_;
    bool attractive_;
    std::vector<std::vector<double>> markov_cum_;  // per row: cum[a-1], a = 1..s+1

    double cum_interior(int a, PastView x) const;
};

struct AttractivenessReport {
    struct Violation {
        Past low, high;
        int symbol;
        double gap;
    };
    bool passed = true;
    long pairs_checked = 0;
    std::vector<Violation> violations;  // capped at 16
};

// samples random ordered past pairs (meet/join closure, extremes included) and
// checks cum(a, low) <= cum(a, high) + 1e-12 for every a
AttractivenessReport check_attractive(const Kernel& kernel, long pairs, std::uint64_t seed);

// JSON (de)serialization; schema documented in docs/formats.md
KernelSpec kernel_spec_from_json(const std::string& text);
std::string kernel_spec_to_json(const KernelSpec& spec);

}  // namespace chains
