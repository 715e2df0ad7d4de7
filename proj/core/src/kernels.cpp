#include "chains/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "chains/rng.hpp"

namespace chains {

namespace {

constexpr std::uint64_t kMSat = 1ull << 62;  // window-length saturation
constexpr double kLambdaPsi = 0.5;           // sup |psi'| for psi(t) = 1/(1+e^{-2t})

std::uint64_t next_odd(std::uint64_t v) { return v | 1ull; }

// incremental enumeration of (k, m_k); O(1) per step for every kind
struct MCursor {
    const MSequence& seq;
    std::uint64_t k = 0;
    std::uint64_t m = 0;

    explicit MCursor(const MSequence& s) : seq(s) {}

    void advance() {
        ++k;
        switch (seq.kind) {
            case MSequence::Kind::odd:
                m = 2 * k - 1;
                break;
            case MSequence::Kind::explicit_list:
                m = k <= seq.values.size() ? seq.values[k - 1] : m + 2;
                break;
            case MSequence::Kind::geometric: {
                if (k == 1) { m = seq.base; break; }
                const double next = seq.factor * static_cast<double>(m);
                m = next >= static_cast<double>(kMSat) ? kMSat | 1ull
                                                       : std::max(m + 2, next_odd(static_cast<std::uint64_t>(std::ceil(next))));
                break;
            }
            case MSequence::Kind::superexp: {
                if (k == 1) { m = seq.base; break; }
                const double next = seq.factor * static_cast<double>(m) * std::ldexp(1.0, static_cast<int>(std::min<std::uint64_t>(k - 1, 62)));
                m = next >= static_cast<double>(kMSat) ? kMSat | 1ull
                                                       : std::max(m + 2, next_odd(static_cast<std::uint64_t>(std::ceil(next))));
                break;
            }
        }
    }
};

double psi2t(double t) { return 1.0 / (1.0 + std::exp(-2.0 * t)); }

// Euler-Maclaurin tail of the Hurwitz zeta; abs error well under 1e-14 for
// alpha in (1, ~60], q >= 1
double hurwitz_zeta(double alpha, double q) {
    constexpr int N = 16;
    double sum = 0.0;
    for (int i = 0; i < N; ++i) sum += std::pow(q + i, -alpha);
    const double w = q + N;
    sum += std::pow(w, 1.0 - alpha) / (alpha - 1.0);
    sum += 0.5 * std::pow(w, -alpha);
    sum += alpha * std::pow(w, -alpha - 1.0) / 12.0;
    sum -= alpha * (alpha + 1.0) * (alpha + 2.0) * std::pow(w, -alpha - 3.0) / 720.0;
    sum += alpha * (alpha + 1.0) * (alpha + 2.0) * (alpha + 3.0) * (alpha + 4.0) *
           std::pow(w, -alpha - 5.0) / 30240.0;
    return sum;
}

}  // namespace

std::uint64_t MSequence::value(std::uint64_t k) const {
    if (k < 1) throw InvalidParams("m sequence index must be >= 1");
    MCursor cur(*this);
    for (std::uint64_t i = 0; i < k; ++i) cur.advance();
    return cur.m;
}

void MSequence::validate() const {
    switch (kind) {
        case Kind::odd:
            break;
        case Kind::explicit_list: {
            if (values.empty()) throw InvalidParams("explicit m list must be nonempty");
            std::uint64_t prev = 0;
            for (const auto v : values) {
                if (v % 2 == 0) throw InvalidParams("m values must be odd");
                if (v <= prev) throw InvalidParams("m values must be strictly increasing");
                prev = v;
            }
            break;
        }
        case Kind::geometric:
        case Kind::superexp:
            if (base % 2 == 0 || base == 0) throw InvalidParams("m base must be a positive odd integer");
            if (!(factor > 1.0)) throw InvalidParams("m growth factor must exceed 1");
            break;
    }
}

int BkSpec::depth() const {
    if (truncation_depth > 0) return truncation_depth;
    int J = static_cast<int>(std::floor(std::log(1e-14) / std::log(r))) + 1;
    while (std::pow(r, J) >= 1e-14) ++J;
    return J;
}

double XiSequence::value(std::uint64_t n) const {
    return kind == Kind::geometric ? c * std::pow(rho, static_cast<double>(n))
                                   : c * std::pow(static_cast<double>(n), -alpha);
}

double XiSequence::tail_sum(std::uint64_t m) const {
    if (kind == Kind::geometric) return c * std::pow(rho, static_cast<double>(m + 1)) / (1.0 - rho);
    return c * hurwitz_zeta(alpha, static_cast<double>(m + 1));
}

void XiSequence::validate() const {
    if (!(c > 0.0)) throw InvalidParams("xi scale c must be positive");
    if (kind == Kind::geometric) {
        if (!(rho > 0.0 && rho < 1.0)) throw InvalidParams("xi geometric ratio must lie in (0,1)");
    } else {
        if (!(alpha > 1.0)) throw InvalidParams("xi power-law exponent must exceed 1 (summability)");
    }
}

double PSequence::value(std::uint64_t i) const {
    switch (kind) {
        case Kind::harmonic: return std::min(cap, a / (static_cast<double>(i) + b));
        case Kind::geometric: return floor_ + (base - floor_) * std::pow(ratio, static_cast<double>(i));
        case Kind::constant: return value_;
        case Kind::explicit_list: return i < values.size() ? values[i] : tail;
    }
    return 0.0;
}

double PSequence::limit() const {
    switch (kind) {
        case Kind::harmonic: return 0.0;
        case Kind::geometric: return floor_;
        case Kind::constant: return value_;
        case Kind::explicit_list: return tail;
    }
    return 0.0;
}

void PSequence::validate() const {
    auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
    switch (kind) {
        case Kind::harmonic:
            if (!(a > 0.0) || !(b > 0.0) || !in01(cap)) throw InvalidParams("harmonic p needs a,b > 0 and cap in [0,1]");
            break;
        case Kind::geometric:
            if (!in01(base) || !in01(floor_) || floor_ > base || !(ratio > 0.0 && ratio < 1.0))
                throw InvalidParams("geometric p needs 0 <= floor <= base <= 1 and ratio in (0,1)");
            break;
        case Kind::constant:
            if (!in01(value_)) throw InvalidParams("constant p must lie in [0,1]");
            break;
        case Kind::explicit_list: {
            if (values.empty()) throw InvalidParams("explicit p list must be nonempty");
            double prev = 1.0;
            for (const double v : values) {
                if (!in01(v) || v > prev + 1e-15) throw InvalidParams("p values must be nonincreasing in [0,1]");
                prev = v;
            }
            if (!in01(tail) || tail > values.back() + 1e-15) throw InvalidParams("p tail must continue nonincreasing");
            break;
        }
    }
}

int maj(std::span<const int> window) {
    if (window.empty()) throw InvalidParams("majority of an empty window");
    long long sum = 0;
    for (const int v : window) sum += v;
    return sum >= 0 ? +1 : -1;
}

std::optional<long long> ell(PastView x) {
    for (std::size_t i = 0; i < x.prefix.size(); ++i)
        if (x.prefix[i] == sym_minus) return static_cast<long long>(i);
    if (x.tail == sym_minus) return static_cast<long long>(x.prefix.size());
    return std::nullopt;
}

namespace {

// count of levels with m_k <= w
std::uint64_t m_count_leq(const MSequence& seq, std::uint64_t w) {
    if (seq.kind == MSequence::Kind::odd) return w == 0 ? 0 : (w + 1) / 2;
    MCursor cur(seq);
    std::uint64_t n = 0;
    for (;;) {
        cur.advance();
        if (cur.m > w) return n;
        ++n;
        if (n > (w + 1) / 2 + 2) return n;  // unreachable; growth is at least +2
    }
}

// P(+1 | x) for the BK kernel, exact whenever the level enumeration reaches the
// depth past which every majority equals the tail sign (error <= r^J otherwise)
double bk_plus_prob(const BkSpec& bk, PastView x) {
    const std::size_t m = x.prefix.size();
    const int tv = spin_of(x.tail);

    long long total = 0;
    for (std::size_t i = 0; i < m; ++i) total += spin_of(x.prefix[i]);

    // windows of length >= beyond carry the tail's majority
    const long long mm = static_cast<long long>(m);
    const long long beyond = tv > 0 ? std::max(mm + 1, mm - total) : std::max(mm + 1, mm + total + 1);

    const int J = bk.depth();
    const double r = bk.r;
    double plus_mass = 0.0;
    double lam = 1.0 - r;  // lambda_k = (1-r) r^{k-1}
    double rem = 1.0;      // r^{k-1} on entry to level k

    long long psum = 0;
    std::size_t pos = 0;
    MCursor cur(bk.m);
    for (int k = 1; k <= J; ++k) {
        cur.advance();
        if (cur.m >= static_cast<std::uint64_t>(beyond)) break;
        long long sw;
        if (cur.m <= m) {
            while (pos < cur.m) psum += spin_of(x.prefix[pos++]);
            sw = psum;
        } else {
            sw = total + static_cast<long long>(cur.m - m) * tv;
        }
        if (sw >= 0) plus_mass += lam;
        rem *= r;
        lam *= r;
    }
    if (tv > 0) plus_mass += rem;  // all remaining windows share the tail majority

    return bk.epsilon + (1.0 - 2.0 * bk.epsilon) * plus_mass;
}

double ar_plus_prob(const AutoregressiveSpec& ar, PastView x) {
    const std::size_t m = x.prefix.size();
    double field = 0.0;
    if (ar.xi.kind == XiSequence::Kind::geometric) {
        double xi = ar.xi.c * ar.xi.rho;
        for (std::size_t n = 1; n <= m; ++n, xi *= ar.xi.rho) field += xi * spin_of(x.prefix[n - 1]);
    } else {
        for (std::size_t n = 1; n <= m; ++n) field += ar.xi.value(n) * spin_of(x.prefix[n - 1]);
    }
    field += spin_of(x.tail) * ar.xi.tail_sum(m);
    return psi2t(field + ar.gamma);
}

double renewal_plus_prob(const RenewalSpec& rs, PastView x) {
    const auto l = ell(x);
    const double pm = l ? rs.p.value(static_cast<std::uint64_t>(*l)) : rs.p.limit();
    return 1.0 - pm;
}

std::size_t markov_row_index(const MarkovSpec& mk, PastView x) {
    std::size_t idx = 0, pw = 1;
    for (int d = 1; d <= mk.order; ++d) {
        const int v = static_cast<int>(x.at(static_cast<std::size_t>(d))) - 1;
        if (v < 0 || v >= mk.alphabet) throw InvalidParams("past symbol outside kernel alphabet");
        idx += static_cast<std::size_t>(v) * pw;
        pw *= static_cast<std::size_t>(mk.alphabet);
    }
    return idx;
}

void decode_history(std::size_t idx, int order, int s, std::vector<int>& out) {
    out.resize(static_cast<std::size_t>(order));
    for (int d = 0; d < order; ++d) {
        out[static_cast<std::size_t>(d)] = static_cast<int>(idx % static_cast<std::size_t>(s));
        idx /= static_cast<std::size_t>(s);
    }
}

}  // namespace

Kernel::Kernel(KernelSpec spec) : spec_(std::move(spec)), s_(2), attractive_(true) {
    if (const auto* bk = std::get_if<BkSpec>(&spec_)) {
        if (!(bk->epsilon > 0.0 && bk->epsilon < 0.5)) throw InvalidParams("bk epsilon must lie in (0, 1/2)");
        if (!(bk->r > 2.0 / 3.0 && bk->r < 1.0)) throw InvalidParams("bk ratio r must lie in (2/3, 1)");
        bk->m.validate();
        if (bk->truncation_depth == 0 || bk->truncation_depth < -1)
            throw InvalidParams("bk truncation depth must be positive (or -1 for automatic)");
    } else if (const auto* ar = std::get_if<AutoregressiveSpec>(&spec_)) {
        ar->xi.validate();
        if (!std::isfinite(ar->gamma)) throw InvalidParams("gamma must be finite");
    } else if (const auto* rs = std::get_if<RenewalSpec>(&spec_)) {
        rs->p.validate();
    } else {
        const auto& mk = std::get<MarkovSpec>(spec_);
        if (mk.order < 0) throw InvalidParams("markov order must be >= 0");
        if (mk.alphabet < 2) throw InvalidParams("markov alphabet must have at least two symbols");
        s_ = mk.alphabet;
        std::size_t nrows = 1;
        for (int d = 0; d < mk.order; ++d) {
            nrows *= static_cast<std::size_t>(mk.alphabet);
            if (nrows > (1u << 24)) throw StateSpaceTooLarge("markov history space too large");
        }
        if (mk.rows.size() != nrows) throw InvalidParams("markov table must have alphabet^order rows");
        markov_cum_.resize(nrows);
        for (std::size_t ri = 0; ri < nrows; ++ri) {
            const auto& row = mk.rows[ri];
            if (row.size() != static_cast<std::size_t>(s_)) throw InvalidParams("markov row width must equal alphabet size");
            double sum = 0.0;
            for (const double v : row) {
                if (!(v >= 0.0)) throw InvalidParams("markov entries must be nonnegative");
                sum += v;
            }
            if (std::abs(sum - 1.0) > 1e-12) throw InvalidParams("markov row must sum to 1 within 1e-12");
            auto& cum = markov_cum_[ri];
            cum.assign(static_cast<std::size_t>(s_) + 1, 0.0);
            for (int a = s_; a >= 2; --a) cum[static_cast<std::size_t>(a - 1)] = cum[static_cast<std::size_t>(a)] + row[static_cast<std::size_t>(a - 1)];
            cum[0] = 1.0;
        }
        // attractiveness: cum(a|.) monotone over comparable histories
        std::vector<int> h1, h2;
        attractive_ = true;
        for (std::size_t i = 0; i < nrows && attractive_; ++i) {
            decode_history(i, mk.order, s_, h1);
            for (std::size_t j = 0; j < nrows && attractive_; ++j) {
                decode_history(j, mk.order, s_, h2);
                bool le = true;
                for (int d = 0; d < mk.order; ++d) le = le && h1[static_cast<std::size_t>(d)] <= h2[static_cast<std::size_t>(d)];
                if (!le) continue;
                for (int a = 2; a <= s_; ++a)
                    if (markov_cum_[i][static_cast<std::size_t>(a - 1)] > markov_cum_[j][static_cast<std::size_t>(a - 1)] + 1e-12)
                        attractive_ = false;
            }
        }
    }
}

const char* Kernel::family() const {
    switch (spec_.index()) {
        case 0: return "bk";
        case 1: return "binary_autoregressive";
        case 2: return "renewal_ell";
        default: return "finite_markov";
    }
}

double Kernel::cum_interior(int a, PastView x) const {
    if (s_ == 2) {
        // binary families evaluate one number: P(+1 | x)
        if (const auto* bk = std::get_if<BkSpec>(&spec_)) return bk_plus_prob(*bk, x);
        if (const auto* ar = std::get_if<AutoregressiveSpec>(&spec_)) return ar_plus_prob(*ar, x);
        if (const auto* rs = std::get_if<RenewalSpec>(&spec_)) return renewal_plus_prob(*rs, x);
    }
    const auto& mk = std::get<MarkovSpec>(spec_);
    return markov_cum_[markov_row_index(mk, x)][static_cast<std::size_t>(a - 1)];
}

double Kernel::cum(int a, PastView x) const {
    if (a < 1 || a > s_ + 1) throw InvalidParams("cum symbol out of range");
    if (a == 1) return 1.0;
    if (a == s_ + 1) return 0.0;
    return cum_interior(a, x);
}

double Kernel::var_bound(std::uint64_t k) const {
    if (const auto* bk = std::get_if<BkSpec>(&spec_))
        return std::pow(bk->r, static_cast<double>(m_count_leq(bk->m, k)));
    if (const auto* ar = std::get_if<AutoregressiveSpec>(&spec_))
        return 2.0 * kLambdaPsi * ar->xi.tail_sum(k);
    if (const auto* rs = std::get_if<RenewalSpec>(&spec_))
        return rs->p.value(k) - rs->p.limit();
    const auto& mk = std::get<MarkovSpec>(spec_);
    if (k >= static_cast<std::uint64_t>(mk.order)) return 0.0;
    double worst = 0.0;
    std::vector<int> h1, h2;
    const std::size_t nrows = markov_cum_.size();
    for (std::size_t i = 0; i < nrows; ++i) {
        decode_history(i, mk.order, s_, h1);
        for (std::size_t j = i + 1; j < nrows; ++j) {
            decode_history(j, mk.order, s_, h2);
            bool agree = true;
            for (std::uint64_t d = 0; d < k && agree; ++d) agree = h1[static_cast<std::size_t>(d)] == h2[static_cast<std::size_t>(d)];
            if (!agree) continue;
            for (int a = 2; a <= s_; ++a)
                worst = std::max(worst, std::abs(markov_cum_[i][static_cast<std::size_t>(a - 1)] - markov_cum_[j][static_cast<std::size_t>(a - 1)]));
            for (int a = 1; a <= s_; ++a) {
                const double pi = markov_cum_[i][static_cast<std::size_t>(a - 1)] - markov_cum_[i][static_cast<std::size_t>(a)];
                const double pj = markov_cum_[j][static_cast<std::size_t>(a - 1)] - markov_cum_[j][static_cast<std::size_t>(a)];
                worst = std::max(worst, std::abs(pi - pj));
            }
        }
    }
    return worst;
}

double Kernel::osc_bound(std::uint64_t n) const {
    if (n < 1) throw InvalidParams("oscillation index must be >= 1");
    if (const auto* bk = std::get_if<BkSpec>(&spec_)) {
        // a single flip can flip every majority window that covers coordinate n
        const double tail_mass = std::pow(bk->r, static_cast<double>(m_count_leq(bk->m, n - 1)));
        return 2.0 * (1.0 - 2.0 * bk->epsilon) * tail_mass;
    }
    if (const auto* ar = std::get_if<AutoregressiveSpec>(&spec_))
        return 4.0 * kLambdaPsi * ar->xi.value(n);
    if (const auto* rs = std::get_if<RenewalSpec>(&spec_))
        return 2.0 * (rs->p.value(n - 1) - rs->p.limit());
    const auto& mk = std::get<MarkovSpec>(spec_);
    if (n > static_cast<std::uint64_t>(mk.order)) return 0.0;
    std::vector<int> h1, h2;
    const std::size_t nrows = markov_cum_.size();
    std::vector<double> per_symbol(static_cast<std::size_t>(s_), 0.0);
    for (std::size_t i = 0; i < nrows; ++i) {
        decode_history(i, mk.order, s_, h1);
        for (std::size_t j = i + 1; j < nrows; ++j) {
            decode_history(j, mk.order, s_, h2);
            bool flip_only_n = true;
            for (int d = 0; d < mk.order && flip_only_n; ++d) {
                const bool same = h1[static_cast<std::size_t>(d)] == h2[static_cast<std::size_t>(d)];
                flip_only_n = (d + 1 == static_cast<int>(n)) ? !same : same;
            }
            if (!flip_only_n) continue;
            for (int a = 1; a <= s_; ++a) {
                const double pi = markov_cum_[i][static_cast<std::size_t>(a - 1)] - markov_cum_[i][static_cast<std::size_t>(a)];
                const double pj = markov_cum_[j][static_cast<std::size_t>(a - 1)] - markov_cum_[j][static_cast<std::size_t>(a)];
                per_symbol[static_cast<std::size_t>(a - 1)] = std::max(per_symbol[static_cast<std::size_t>(a - 1)], std::abs(pi - pj));
            }
        }
    }
    double total = 0.0;
    for (const double v : per_symbol) total += v;
    return total;
}

double Kernel::truncation_residual() const {
    if (const auto* bk = std::get_if<BkSpec>(&spec_))
        return (1.0 - 2.0 * bk->epsilon) * std::pow(bk->r, bk->depth());
    return 0.0;
}

double Kernel::var_sharp(std::uint64_t k) const {
    if (const auto* bk = std::get_if<BkSpec>(&spec_))
        return (1.0 - 2.0 * bk->epsilon) * std::pow(bk->r, static_cast<double>(m_count_leq(bk->m, k)));
    return var_bound(k);
}

AttractivenessReport check_attractive(const Kernel& kernel, long pairs, std::uint64_t seed) {
    rng::SubStream g(seed, 0x41545452u);
    const int s = kernel.alphabet_size();
    auto random_past = [&]() {
        const std::size_t len = static_cast<std::size_t>(g.next_u64() % 13);
        std::vector<Symbol> p(len);
        for (auto& v : p) v = static_cast<Symbol>(1 + g.next_u64() % static_cast<std::uint64_t>(s));
        const Symbol tail = static_cast<Symbol>(1 + g.next_u64() % static_cast<std::uint64_t>(s));
        return Past(std::move(p), tail);
    };

    AttractivenessReport rep;
    for (long i = 0; i < pairs; ++i) {
        Past low, high;
        if (i % 97 == 0) {
            low = Past::constant(sym_minus);
            high = Past::constant(static_cast<Symbol>(s));
        } else {
            const Past a = random_past(), b = random_past();
            low = meet(a.view(), b.view());
            high = join(a.view(), b.view());
        }
        ++rep.pairs_checked;
        for (int a = 2; a <= s; ++a) {
            const double cl = kernel.cum(a, low.view());
            const double ch = kernel.cum(a, high.view());
            if (cl > ch + 1e-12) {
                rep.passed = false;
                if (rep.violations.size() < 16)
                    rep.violations.push_back({low, high, a, cl - ch});
            }
        }
    }
    return rep;
}

}  // namespace chains
