#include "chains/cftp.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <thread>

#include "chains/errors.hpp"

namespace chains {

namespace {

// one growing trajectory with O(1) spin window sums (binary alphabet)
struct SpinSide {
    Symbol base = 1;
    Symbol last = 1;
    std::vector<long long> cs;  // cs[g] = spin sum of the g generated symbols

    void reset(Symbol b, long long cap) {
        base = b;
        last = b;
        cs.clear();
        cs.reserve(static_cast<std::size_t>(cap) + 1);
        cs.push_back(0);
    }
    long long wsum(long long m) const {
        const long long g = static_cast<long long>(cs.size()) - 1;
        const long long take = std::min(m, g);
        return cs[static_cast<std::size_t>(g)] - cs[static_cast<std::size_t>(g - take)]
               + (m - take) * static_cast<long long>(spin_of(base));
    }
    void push(Symbol a) {
        cs.push_back(cs.back() + spin_of(a));
        last = a;
    }
};

// one growing trajectory kept as an explicit most-recent-first buffer
struct BufSide {
    std::vector<Symbol> buf;
    std::size_t pos = 0;
    Symbol base = 1;
    Symbol last = 1;

    void reset(Symbol b, long long cap) {
        base = b;
        last = b;
        buf.assign(static_cast<std::size_t>(cap) + 1, b);
        pos = buf.size();
    }
    PastView view() const {
        return PastView{std::span<const Symbol>(buf.data() + pos, buf.size() - pos), base};
    }
    void push(Symbol a) {
        buf[--pos] = a;
        last = a;
    }
};

struct AttemptOut {
    bool coalesced = false;
    Symbol value = 0;
};

AttemptOut attempt(const Decomposition& dec, LabelStream& labels, long long at, long long depth,
                   UpdateDiagnostics* diag, UpdateStats& stats) {
    const Symbol bot = 1;
    const Symbol top = static_cast<Symbol>(dec.alphabet_size());
    AttemptOut out;
    if (dec.mode() == DecompositionMode::discrete) {
        SpinSide lo, hi;
        lo.reset(bot, depth + 1);
        hi.reset(top, depth + 1);
        for (long long t = at - depth; t <= at; ++t) {
            const Label& lab = labels.at(t);
            Symbol a, b;
            if (lab.level == 0) {
                a = b = (lab.interval == 1 ? Symbol{1} : Symbol{2});
            } else {
                a = lo.wsum(lab.level) >= 0 ? Symbol{2} : Symbol{1};
                b = hi.wsum(lab.level) >= 0 ? Symbol{2} : Symbol{1};
            }
            lo.push(a);
            hi.push(b);
            if (diag) ++diag->updates;
        }
        out.coalesced = lo.last == hi.last;
        out.value = lo.last;
        return out;
    }
    BufSide lo, hi;
    lo.reset(bot, depth + 1);
    hi.reset(top, depth + 1);
    for (long long t = at - depth; t <= at; ++t) {
        const Label& lab = labels.at(t);
        const auto [a, b] = dec.apply(lo.view(), hi.view(), lab, &stats);
        lo.push(a);
        hi.push(b);
        if (diag) ++diag->updates;
    }
    out.coalesced = lo.last == hi.last;
    out.value = lo.last;
    return out;
}

Symbol draw_from_cum(const Kernel& kernel, PastView v, double u) {
    for (int a = kernel.alphabet_size(); a >= 2; --a)
        if (u < kernel.cum(a, v)) return static_cast<Symbol>(a);
    return 1;
}

// incremental majority-kernel evaluation along a growing trajectory:
// O(level count) per step instead of a fresh walk over the whole past
class BkSim {
public:
    BkSim(const BkSpec& spec, PastView start, long long cap) {
        eps_ = spec.epsilon;
        dd_ = 1.0 - 2.0 * spec.epsilon;
        const long long levels = spec.depth();
        m_.resize(static_cast<std::size_t>(levels));
        lam_.resize(static_cast<std::size_t>(levels));
        double w = 1.0 - spec.r;
        for (long long k = 1; k <= levels; ++k) {
            m_[static_cast<std::size_t>(k - 1)] = spec.m.value(k);
            lam_[static_cast<std::size_t>(k - 1)] = w;
            w *= spec.r;
        }
        rem_ = std::pow(spec.r, static_cast<double>(levels));
        start_len_ = static_cast<long long>(start.prefix.size());
        sp_.resize(static_cast<std::size_t>(start_len_) + 1, 0);
        for (long long i = 0; i < start_len_; ++i)
            sp_[static_cast<std::size_t>(i + 1)] = sp_[static_cast<std::size_t>(i)] + spin_of(start.prefix[static_cast<std::size_t>(i)]);
        tv_ = spin_of(start.tail);
        cs_.reserve(static_cast<std::size_t>(cap) + 1);
        cs_.push_back(0);
    }

    double plus_prob() const {
        const long long g = static_cast<long long>(cs_.size()) - 1;
        double plus = 0.0;
        for (std::size_t i = 0; i < m_.size(); ++i)
            if (wsum(m_[i], g) >= 0) plus += lam_[i];
        if (tv_ > 0) plus += rem_;  // truncated deep windows follow the tail sign
        return eps_ + dd_ * plus;
    }

    void push(Symbol a) { cs_.push_back(cs_.back() + spin_of(a)); }

private:
    long long wsum(long long m, long long g) const {
        long long take = std::min(m, g);
        long long w = cs_[static_cast<std::size_t>(g)] - cs_[static_cast<std::size_t>(g - take)];
        long long rem = m - take;
        take = std::min(rem, start_len_);
        w += sp_[static_cast<std::size_t>(take)];
        rem -= take;
        return w + rem * tv_;
    }

    double eps_ = 0.0, dd_ = 0.0, rem_ = 0.0;
    std::vector<long long> m_;
    std::vector<double> lam_;
    std::vector<long long> sp_, cs_;
    long long start_len_ = 0;
    int tv_ = 1;
};

void run_partitioned(long long replicas, int workers, const std::function<void(long long, long long)>& body) {
    if (workers <= 1 || replicas <= 1) {
        body(0, replicas);
        return;
    }
    const int n = static_cast<int>(std::min<long long>(workers, replicas));
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(static_cast<std::size_t>(n));
    for (int w = 0; w < n; ++w) {
        const long long lo = replicas * w / n;
        const long long hi = replicas * (w + 1) / n;
        pool.emplace_back([&, w, lo, hi] {
            try {
                body(lo, hi);
            } catch (...) {
                errs[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

}  // namespace

const Label& LabelStream::at(long long t) {
    auto& vec = t >= 0 ? fwd_ : bwd_;
    auto& set = t >= 0 ? fwd_set_ : bwd_set_;
    const std::size_t i = t >= 0 ? static_cast<std::size_t>(t) : static_cast<std::size_t>(-1 - t);
    if (i >= vec.size()) {
        vec.resize(i + 1);
        set.resize(i + 1, 0);
    }
    if (!set[i]) {
        rng::SubStream g(seed_, rng::time_id(t));
        vec[i] = dec_->sample_label(g);
        set[i] = 1;
        ++count_;
    }
    return vec[i];
}

std::pair<Symbol, Symbol> update_F(const Decomposition& dec, PastView left, PastView right,
                                   const Label& label, UpdateStats* stats) {
    return dec.apply(left, right, label, stats);
}

PairState iterate(const Decomposition& dec, PairState state, LabelStream& labels,
                  long long from, long long to, UpdateStats* stats) {
    for (long long t = from; t <= to; ++t) {
        const Label& lab = labels.at(t);
        const auto [a, b] = dec.apply(state.left.view(), state.right.view(), lab, stats);
        auto prepend = [](const Past& p, Symbol sym) {
            const PastView v = p.view();
            std::vector<Symbol> prefix;
            prefix.reserve(v.prefix.size() + 1);
            prefix.push_back(sym);
            prefix.insert(prefix.end(), v.prefix.begin(), v.prefix.end());
            return Past(std::move(prefix), v.tail);
        };
        state.left = prepend(state.left, a);
        state.right = prepend(state.right, b);
    }
    return state;
}

ThetaResult theta(const Decomposition& dec, LabelStream& labels, long long at,
                  const CftpOptions& options, UpdateDiagnostics* diag) {
    if (!dec.monotone_verified())
        throw MonotonicityUnverified("decomposition lacks a verified monotone update");
    if (options.horizon < 0) throw InvalidParams("horizon must be >= 0");
    UpdateStats stats;
    ThetaResult out;
    AttemptOut best;
    const AttemptOut first = attempt(dec, labels, at, 0, diag, stats);
    if (first.coalesced) {
        out.coalesced = true;
        out.theta = 0;
        out.value = first.value;
        best = first;
    } else {
        long long prev_fail = 0;
        long long j = 1;
        bool found = false;
        while (options.horizon >= 1) {
            j = std::min(j, options.horizon);
            const AttemptOut res = attempt(dec, labels, at, j, diag, stats);
            if (res.coalesced) {
                best = res;
                found = true;
                break;
            }
            prev_fail = j;
            if (j >= options.horizon) break;
            j *= 2;
        }
        if (!found) {
            out.coalesced = false;
            out.theta = options.horizon;
            out.value = 0;
            if (diag) {
                diag->ambiguity_events += stats.ambiguity_events;
                diag->residual_labels += stats.residual_labels;
            }
            return out;
        }
        long long lo = prev_fail + 1, hi = j;
        while (lo < hi) {
            const long long mid = lo + (hi - lo) / 2;
            const AttemptOut res = attempt(dec, labels, at, mid, diag, stats);
            if (res.coalesced) {
                hi = mid;
                best = res;
            } else {
                lo = mid + 1;
            }
        }
        out.coalesced = true;
        out.theta = hi;
        out.value = best.value;
    }
    if (options.recheck_absorption && out.coalesced && out.theta + 5 <= options.horizon) {
        const AttemptOut re = attempt(dec, labels, at, out.theta + 5, diag, stats);
        if (diag) {
            ++diag->absorption_rechecks;
            if (!re.coalesced || re.value != out.value) ++diag->absorption_failures;
        }
    }
    if (diag) {
        diag->ambiguity_events += stats.ambiguity_events;
        diag->residual_labels += stats.residual_labels;
    }
    return out;
}

CftpRun sample_stationary(const Decomposition& dec, long long n, std::uint64_t seed,
                          const CftpOptions& options) {
    if (n < 0) throw InvalidParams("window length must be >= 0");
    CftpRun run;
    run.seed = seed;
    run.horizon = options.horizon;
    LabelStream labels(dec, seed);
    run.window.reserve(static_cast<std::size_t>(n));
    run.theta.reserve(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i) {
        const ThetaResult th = theta(dec, labels, i, options, &run.diagnostics);
        if (!th.coalesced) {
            run.complete = false;
            run.exceeded_at = i;
            break;
        }
        run.window.push_back(th.value);
        run.theta.push_back(th.theta);
    }
    run.labels_materialized = labels.labels_materialized();
    double sum = 0.0;
    for (const long long t : run.theta) {
        run.max_theta = std::max(run.max_theta, t);
        sum += static_cast<double>(t);
    }
    run.mean_theta = run.theta.empty() ? 0.0 : sum / static_cast<double>(run.theta.size());
    return run;
}

std::vector<Symbol> forward_fixed_past(const Kernel& kernel, PastView start, long long n,
                                       std::uint64_t seed) {
    if (n < 0) throw InvalidParams("length must be >= 0");
    rng::SubStream g(seed, 0x464f5257ull);
    std::vector<Symbol> out;
    out.reserve(static_cast<std::size_t>(n));
    const int s = kernel.alphabet_size();

    if (const auto* rs = std::get_if<RenewalSpec>(&kernel.spec())) {
        long long run_len = -1;  // -1 encodes an infinite leading run
        if (const auto e = ell(start)) run_len = *e;
        for (long long i = 0; i < n; ++i) {
            const double p_low = run_len < 0 ? rs->p.limit() : rs->p.value(run_len);
            const Symbol a = g.next_u01() < 1.0 - p_low ? Symbol{2} : Symbol{1};
            out.push_back(a);
            run_len = a == 2 ? (run_len < 0 ? -1 : run_len + 1) : 0;
        }
        return out;
    }
    if (const auto* ms = std::get_if<MarkovSpec>(&kernel.spec())) {
        std::vector<Symbol> w(static_cast<std::size_t>(ms->order));
        for (int d = 0; d < ms->order; ++d) w[static_cast<std::size_t>(d)] = start.at(d + 1);
        for (long long i = 0; i < n; ++i) {
            const PastView v{w, start.tail};
            const Symbol a = draw_from_cum(kernel, v, g.next_u01());
            for (int d = ms->order - 1; d >= 1; --d) w[static_cast<std::size_t>(d)] = w[static_cast<std::size_t>(d - 1)];
            if (ms->order > 0) w[0] = a;
            out.push_back(a);
        }
        return out;
    }
    if (const auto* ar = std::get_if<AutoregressiveSpec>(&kernel.spec());
        ar && ar->xi.kind == XiSequence::Kind::geometric) {
        // field recursion: S' = c * spin + rho * S
        const long long len = static_cast<long long>(start.prefix.size());
        double field = static_cast<double>(spin_of(start.tail)) * ar->xi.tail_sum(len);
        for (long long d = len; d >= 1; --d)
            field += ar->xi.value(d) * static_cast<double>(spin_of(start.at(d)));
        for (long long i = 0; i < n; ++i) {
            const double plus = 1.0 / (1.0 + std::exp(-2.0 * (field + ar->gamma)));
            const Symbol a = g.next_u01() < plus ? Symbol{2} : Symbol{1};
            out.push_back(a);
            field = ar->xi.c * static_cast<double>(spin_of(a)) + ar->xi.rho * field;
        }
        return out;
    }
    if (const auto* bk = std::get_if<BkSpec>(&kernel.spec())) {
        BkSim sim(*bk, start, n);
        for (long long i = 0; i < n; ++i) {
            const Symbol a = g.next_u01() < sim.plus_prob() ? Symbol{2} : Symbol{1};
            out.push_back(a);
            sim.push(a);
        }
        return out;
    }
    // generic: most-recent-first buffer filled backward
    const std::size_t plen = start.prefix.size();
    std::vector<Symbol> buf(static_cast<std::size_t>(n) + plen);
    std::copy(start.prefix.begin(), start.prefix.end(), buf.begin() + static_cast<std::ptrdiff_t>(n));
    std::size_t pos = static_cast<std::size_t>(n);
    for (long long i = 0; i < n; ++i) {
        const PastView v{std::span<const Symbol>(buf.data() + pos, buf.size() - pos), start.tail};
        const Symbol a = draw_from_cum(kernel, v, g.next_u01());
        buf[--pos] = a;
        out.push_back(a);
    }
    (void)s;
    return out;
}

SurvivalCurve coalescence_curve(const Decomposition& dec, long long horizon, long long replicas,
                                std::vector<long long> grid, std::uint64_t seed, int workers) {
    if (horizon < 0 || replicas < 1) throw InvalidParams("bad curve parameters");
    if (grid.empty()) {
        grid.push_back(0);
        for (long long v = 1; v < horizon; v *= 2) grid.push_back(v);
        if (horizon >= 1) grid.push_back(horizon);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    for (const long long v : grid)
        if (v < 0 || v > horizon) throw InvalidParams("grid point outside [0, horizon]");

    SurvivalCurve curve;
    curve.horizon = horizon;
    curve.theta.assign(static_cast<std::size_t>(replicas), 0);
    const CftpOptions options{horizon, false};
    run_partitioned(replicas, workers, [&](long long lo, long long hi) {
        for (long long rep = lo; rep < hi; ++rep) {
            LabelStream labels(dec, rng::derive(seed, static_cast<std::uint64_t>(rep)));
            const ThetaResult th = theta(dec, labels, 0, options, nullptr);
            curve.theta[static_cast<std::size_t>(rep)] = th.coalesced ? th.theta : horizon + 1;
        }
    });
    std::vector<long long> sorted = curve.theta;
    std::sort(sorted.begin(), sorted.end());
    curve.censored = static_cast<long long>(sorted.end()
                                            - std::upper_bound(sorted.begin(), sorted.end(), horizon));
    const double rr = static_cast<double>(replicas);
    for (const long long n : grid) {
        const double above = static_cast<double>(sorted.end()
                                                 - std::upper_bound(sorted.begin(), sorted.end(), n));
        const double p = above / rr;
        curve.points.push_back(SurvivalPoint{n, p, std::sqrt(std::max(0.0, p * (1.0 - p) / rr))});
    }
    return curve;
}

PhaseGap phase_gap(const Kernel& kernel, std::vector<long long> n_grid, long long replicas,
                   std::uint64_t seed, int workers) {
    if (replicas < 1) throw InvalidParams("replicas must be >= 1");
    std::sort(n_grid.begin(), n_grid.end());
    n_grid.erase(std::unique(n_grid.begin(), n_grid.end()), n_grid.end());
    if (n_grid.empty() || n_grid.front() < 1) throw InvalidParams("phase grid needs steps >= 1");
    const long long n_max = n_grid.back();
    const int s = kernel.alphabet_size();
    const std::size_t gn = n_grid.size();

    std::vector<double> diffs(static_cast<std::size_t>(replicas) * gn, 0.0);
    run_partitioned(replicas, workers, [&](long long lo_rep, long long hi_rep) {
        const Past bot = Past::constant(1);
        const Past top = Past::constant(static_cast<Symbol>(s));
        for (long long rep = lo_rep; rep < hi_rep; ++rep) {
            rng::SubStream g(rng::derive(seed, static_cast<std::uint64_t>(rep)), 0x50474150ull);
            std::size_t gi = 0;
            auto record = [&](long long t, Symbol a_lo, Symbol a_hi) {
                while (gi < gn && n_grid[gi] == t) {
                    diffs[static_cast<std::size_t>(rep) * gn + gi] =
                        static_cast<double>(2 * a_hi - 2 * a_lo);
                    ++gi;
                }
            };
            if (const auto* bk = std::get_if<BkSpec>(&kernel.spec())) {
                BkSim lo_sim(*bk, bot.view(), n_max), hi_sim(*bk, top.view(), n_max);
                for (long long t = 1; t <= n_max; ++t) {
                    const double u = g.next_u01();
                    const Symbol a = u < lo_sim.plus_prob() ? Symbol{2} : Symbol{1};
                    const Symbol b = u < hi_sim.plus_prob() ? Symbol{2} : Symbol{1};
                    lo_sim.push(a);
                    hi_sim.push(b);
                    record(t, a, b);
                }
            } else {
                std::vector<Symbol> buf_lo(static_cast<std::size_t>(n_max), 1);
                std::vector<Symbol> buf_hi(static_cast<std::size_t>(n_max), static_cast<Symbol>(s));
                std::size_t pos = static_cast<std::size_t>(n_max);
                for (long long t = 1; t <= n_max; ++t) {
                    const PastView vlo{std::span<const Symbol>(buf_lo.data() + pos, buf_lo.size() - pos), 1};
                    const PastView vhi{std::span<const Symbol>(buf_hi.data() + pos, buf_hi.size() - pos),
                                       static_cast<Symbol>(s)};
                    const double u = g.next_u01();
                    const Symbol a = draw_from_cum(kernel, vlo, u);
                    const Symbol b = draw_from_cum(kernel, vhi, u);
                    --pos;
                    buf_lo[pos] = a;
                    buf_hi[pos] = b;
                    record(t, a, b);
                }
            }
        }
    });

    PhaseGap out;
    out.replicas = replicas;
    for (std::size_t gi = 0; gi < gn; ++gi) {
        double sum = 0.0, sumsq = 0.0;
        for (long long rep = 0; rep < replicas; ++rep) {
            const double d = diffs[static_cast<std::size_t>(rep) * gn + gi];
            sum += d;
            sumsq += d * d;
        }
        const double mean = sum / static_cast<double>(replicas);
        double se = 0.0;
        if (replicas > 1) {
            const double var = std::max(0.0, (sumsq - static_cast<double>(replicas) * mean * mean)
                                                 / static_cast<double>(replicas - 1));
            se = std::sqrt(var / static_cast<double>(replicas));
        }
        out.points.push_back(PhaseGapPoint{n_grid[gi], mean, se});
    }
    return out;
}

}  // namespace chains
