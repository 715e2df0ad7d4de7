#include "chains/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "chains/errors.hpp"

namespace chains {

namespace {

constexpr double kThresholdTol = 1e-12;
constexpr double kEnumerationCut = 1e-14;

long long spin_window_sum(PastView v, long long m) {
    const long long g = std::min<long long>(m, static_cast<long long>(v.prefix.size()));
    long long sum = 0;
    for (long long d = 1; d <= g; ++d) sum += spin_of(v.at(d));
    sum += (m - g) * static_cast<long long>(spin_of(v.tail));
    return sum;
}

std::size_t window_code(PastView v, int len, int s) {
    std::size_t idx = 0, base = 1;
    for (int d = 1; d <= len; ++d) {
        idx += static_cast<std::size_t>(v.at(d) - 1) * base;
        base *= static_cast<std::size_t>(s);
    }
    return idx;
}

std::size_t span_code(std::span<const Symbol> w, int len, int s) {
    std::size_t idx = 0, base = 1;
    for (int d = 0; d < len; ++d) {
        if (w[static_cast<std::size_t>(d)] < 1 || w[static_cast<std::size_t>(d)] > s)
            throw InvalidParams("window symbol out of range");
        idx += static_cast<std::size_t>(w[static_cast<std::size_t>(d)] - 1) * base;
        base *= static_cast<std::size_t>(s);
    }
    return idx;
}

Past random_past(rng::SubStream& g, int s) {
    const std::size_t len = static_cast<std::size_t>(g.next_u64() % 13);
    std::vector<Symbol> prefix(len);
    for (auto& sym : prefix) sym = static_cast<Symbol>(1 + g.next_u64() % static_cast<std::uint64_t>(s));
    const Symbol tail = static_cast<Symbol>(1 + g.next_u64() % static_cast<std::uint64_t>(s));
    return Past(std::move(prefix), tail);
}

// sorted disjoint half-open intervals within [0, 1)
using Iv = std::pair<double, double>;

std::vector<Iv> merge_union(std::vector<Iv> v) {
    std::sort(v.begin(), v.end());
    std::vector<Iv> out;
    for (const Iv& iv : v) {
        if (iv.second <= iv.first) continue;
        if (!out.empty() && iv.first <= out.back().second)
            out.back().second = std::max(out.back().second, iv.second);
        else
            out.push_back(iv);
    }
    return out;
}

std::vector<Iv> complement01(const std::vector<Iv>& v) {
    std::vector<Iv> out;
    double lo = 0.0;
    for (const Iv& iv : v) {
        if (iv.first > lo) out.emplace_back(lo, iv.first);
        lo = std::max(lo, iv.second);
    }
    if (lo < 1.0) out.emplace_back(lo, 1.0);
    return out;
}

std::vector<Iv> intersect(const std::vector<Iv>& a, const std::vector<Iv>& b) {
    std::vector<Iv> out;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const double lo = std::max(a[i].first, b[j].first);
        const double hi = std::min(a[i].second, b[j].second);
        if (hi > lo) out.emplace_back(lo, hi);
        if (a[i].second < b[j].second) ++i; else ++j;
    }
    return out;
}

double measure(const std::vector<Iv>& v) {
    double m = 0.0;
    for (const Iv& iv : v) m += iv.second - iv.first;
    return m;
}

// index of the interval containing u, or -1
long long locate(const std::vector<Iv>& ivs, double u) {
    const auto it = std::upper_bound(ivs.begin(), ivs.end(), u,
                                     [](double x, const Iv& iv) { return x < iv.second; });
    if (it == ivs.end() || u < it->first) return -1;
    return it - ivs.begin();
}

}  // namespace

double Thresholds::r(int a, int b) const {
    if (a < 1 || a > s || b < 0 || b > s) throw InvalidParams("threshold index out of range");
    if (b == 0) return a == 1 ? 0.0 : cum[static_cast<std::size_t>((a - 1) * s - 1)];
    return cum[static_cast<std::size_t>((a - 1) * s + b - 1)];
}

std::vector<long long> Decomposition::levels() const {
    std::vector<long long> out;
    out.push_back(0);
    if (mode_ == DecompositionMode::hybrid) {
        for (long long k = 1; k <= depth_; ++k) out.push_back(k);
    } else {
        const auto& m = std::get<BkSpec>(kernel_.spec()).m;
        for (long long k = 1; k <= depth_; ++k) out.push_back(m.value(k));
    }
    return out;
}

double Decomposition::weight(long long level) const {
    if (mode_ == DecompositionMode::hybrid) {
        if (level < 0 || level > depth_) throw LevelOutOfRange("no such level");
        return lambda_[static_cast<std::size_t>(level)];
    }
    if (level == 0) return 2.0 * eps_;
    const auto& m = std::get<BkSpec>(kernel_.spec()).m;
    double w = (1.0 - 2.0 * eps_) * (1.0 - r_);
    for (long long k = 1; k <= 4096; ++k) {
        const long long mk = m.value(k);
        if (mk == level) return w;
        if (mk > level) break;
        w *= r_;
    }
    throw LevelOutOfRange("level is not a window length of this decomposition");
}

CellTable Decomposition::level_kernel(long long level, PairWindow h) const {
    const int s = alphabet_size();
    std::vector<double> cells(static_cast<std::size_t>(s) * static_cast<std::size_t>(s), 0.0);
    if (mode_ == DecompositionMode::hybrid) {
        if (level < 0 || level > depth_) throw LevelOutOfRange("no such level");
        if (h.left.size() < static_cast<std::size_t>(level) || h.right.size() < static_cast<std::size_t>(level))
            throw InvalidParams("pair window shorter than level depth");
        const double lam = lambda_[static_cast<std::size_t>(level)];
        if (lam <= 0.0) {
            // weightless level; report a diagonal placeholder
            for (int a = 1; a <= s; ++a)
                cells[static_cast<std::size_t>((a - 1) * s + (a - 1))] = 1.0 / static_cast<double>(s);
            return CellTable::from_values(s, std::move(cells));
        }
        std::size_t nh = 1;
        for (long long d = 0; d < level; ++d) nh *= static_cast<std::size_t>(s);
        const std::size_t il = span_code(h.left, static_cast<int>(level), s);
        const std::size_t ir = span_code(h.right, static_cast<int>(level), s);
        const auto& ivs = ivs_[static_cast<std::size_t>(level)];
        const auto& sym = sym_[static_cast<std::size_t>(level)];
        for (std::size_t i = 0; i < ivs.size(); ++i) {
            const Symbol a = sym[i * nh + il];
            const Symbol b = sym[i * nh + ir];
            cells[static_cast<std::size_t>((a - 1) * s + (b - 1))] += ivs[i].second - ivs[i].first;
        }
        for (double& c : cells) c /= lam;
        return CellTable::from_values(s, std::move(cells));
    }
    if (level == 0) {
        cells[0] = 0.5;
        cells[3] = 0.5;
        return CellTable::from_values(s, std::move(cells));
    }
    if (level < 0) throw LevelOutOfRange("no such level");
    if (h.left.size() < static_cast<std::size_t>(level) || h.right.size() < static_cast<std::size_t>(level))
        throw InvalidParams("pair window shorter than level window");
    long long sl = 0, sr = 0;
    for (long long d = 0; d < level; ++d) {
        sl += spin_of(h.left[static_cast<std::size_t>(d)]);
        sr += spin_of(h.right[static_cast<std::size_t>(d)]);
    }
    const int a = sl >= 0 ? 2 : 1;
    const int b = sr >= 0 ? 2 : 1;
    cells[static_cast<std::size_t>((a - 1) * 2 + (b - 1))] = 1.0;
    return CellTable::from_values(s, std::move(cells));
}

Thresholds Decomposition::level_thresholds(long long level, PairWindow h) const {
    const CellTable table = level_kernel(level, h);
    Thresholds t;
    t.s = table.alphabet_size();
    t.cum.resize(table.raw().size());
    double c = 0.0;
    for (std::size_t i = 0; i < t.cum.size(); ++i) {
        c += table.raw()[i];
        t.cum[i] = c;
    }
    return t;
}

std::vector<std::pair<double, double>> Decomposition::level_intervals(long long level) const {
    if (mode_ == DecompositionMode::hybrid) {
        if (level < 0 || level > depth_) throw LevelOutOfRange("no such level");
        return ivs_[static_cast<std::size_t>(level)];
    }
    if (level == 0) return {{0.0, eps_}, {eps_, 2.0 * eps_}};
    // level m_k selects when the label uniform lands in the k-th geometric slab
    const auto& m = std::get<BkSpec>(kernel_.spec()).m;
    const double base = 1.0 - 2.0 * eps_;
    double lo = 2.0 * eps_;
    for (long long k = 1; k <= 4096; ++k) {
        const long long mk = m.value(k);
        const double hi = 2.0 * eps_ + base * (1.0 - std::pow(r_, static_cast<double>(k)));
        if (mk == level) return {{lo, hi}};
        if (mk > level) break;
        lo = hi;
    }
    throw LevelOutOfRange("level is not a window length of this decomposition");
}

Label Decomposition::sample_label(rng::SubStream& g) const {
    if (mode_ == DecompositionMode::discrete) {
        const double u = g.next_u01();
        Label lab;
        lab.kind = Label::Kind::discrete;
        if (u < eps_) {
            lab.level = 0;
            lab.interval = 1;
        } else if (u < 2.0 * eps_) {
            lab.level = 0;
            lab.interval = 2;
        } else {
            // level law over k >= 1 is geometric with ratio r; invert its cdf
            const double v = (u - 2.0 * eps_) / (1.0 - 2.0 * eps_);
            long long k = 1 + static_cast<long long>(std::floor(std::log1p(-v) / std::log(r_)));
            if (k < 1) k = 1;
            lab.level = std::get<BkSpec>(kernel_.spec()).m.value(k);
            lab.interval = 1;
        }
        return lab;
    }
    const double v = g.next_u01();
    Label lab;
    lab.kind = Label::Kind::hybrid;
    lab.u = v;
    lab.level = Label::residual_level;
    for (long long k = 0; k <= depth_; ++k) {
        if (locate(ivs_[static_cast<std::size_t>(k)], v) >= 0) {
            lab.level = k;
            break;
        }
    }
    return lab;
}

std::pair<Symbol, Symbol> Decomposition::quantile_pair(PastView left, PastView right, double u,
                                                       UpdateStats* stats) const {
    const int s = alphabet_size();
    bool grazed = false;
    const auto side = [&](PastView v) {
        int a = s;
        for (int c = 1; c < s; ++c) {
            const double f = 1.0 - kernel_.cum(c + 1, v);
            if (u < f + kThresholdTol) {
                a = c;
                if (u > f - kThresholdTol) grazed = true;
                break;
            }
        }
        return static_cast<Symbol>(a);
    };
    const Symbol a = side(left);
    const Symbol b = side(right);
    if (stats && grazed) ++stats->ambiguity_events;
    return {a, b};
}

std::pair<Symbol, Symbol> Decomposition::apply(PastView left, PastView right, const Label& label,
                                               UpdateStats* stats) const {
    if (mode_ == DecompositionMode::discrete) {
        if (label.kind != Label::Kind::discrete) throw InvalidParams("label kind mismatch");
        if (label.level == 0) {
            if (label.interval == 1) return {1, 1};
            if (label.interval == 2) return {2, 2};
            throw InvalidParams("bad interval for the past-free level");
        }
        if (label.level < 0) throw LevelOutOfRange("bad discrete level");
        const Symbol a = spin_window_sum(left, label.level) >= 0 ? Symbol{2} : Symbol{1};
        const Symbol b = spin_window_sum(right, label.level) >= 0 ? Symbol{2} : Symbol{1};
        return {a, b};
    }
    if (label.kind != Label::Kind::hybrid) throw InvalidParams("label kind mismatch");
    if (!(label.u >= 0.0 && label.u < 1.0)) throw InvalidParams("label uniform outside [0,1)");
    if (label.level == Label::residual_level) {
        // exact quantiles of the full pasts settle what no window depth did
        if (stats) ++stats->residual_labels;
        return quantile_pair(left, right, label.u, stats);
    }
    if (label.level < 0 || label.level > depth_) throw LevelOutOfRange("bad hybrid level");
    const int s = alphabet_size();
    const auto& ivs = ivs_[static_cast<std::size_t>(label.level)];
    const long long i = locate(ivs, label.u);
    if (i < 0) throw InvalidParams("label uniform is not resolvable at this level");
    const std::size_t ui = static_cast<std::size_t>(i);
    if (stats && (label.u - ivs[ui].first < kThresholdTol || ivs[ui].second - label.u < kThresholdTol))
        ++stats->ambiguity_events;
    std::size_t nh = 1;
    for (long long d = 0; d < label.level; ++d) nh *= static_cast<std::size_t>(s);
    const std::size_t il = window_code(left, static_cast<int>(label.level), s);
    const std::size_t ir = window_code(right, static_cast<int>(label.level), s);
    const auto& sym = sym_[static_cast<std::size_t>(label.level)];
    return {sym[ui * nh + il], sym[ui * nh + ir]};
}

double Decomposition::label_entropy() const {
    if (mode_ != DecompositionMode::discrete)
        throw NotDiscrete("label entropy has a closed form only for the discrete construction");
    const double a = (1.0 - 2.0 * eps_) * (1.0 - r_);
    return -2.0 * eps_ * std::log(eps_) - a * std::log(a) / (1.0 - r_)
           - a * r_ * std::log(r_) / ((1.0 - r_) * (1.0 - r_));
}

MonotonicityReport Decomposition::verify_monotonicity(long long trials, std::uint64_t seed) const {
    MonotonicityReport rep;
    rep.trials = trials;
    const int s = alphabet_size();
    rng::SubStream g(seed, 0x67617465ull);
    for (long long t = 0; t < trials; ++t) {
        const Past p1 = random_past(g, s), p2 = random_past(g, s);
        const Past p3 = random_past(g, s), p4 = random_past(g, s);
        const Past x = meet(p1.view(), p2.view());
        const Past x2 = join(p1.view(), p2.view());
        const Past lo34 = meet(p3.view(), p4.view());
        const Past hi34 = join(p3.view(), p4.view());
        const Past y = join(x.view(), lo34.view());
        const Past y2 = join(x2.view(), hi34.view());
        const Label label = sample_label(g);
        const auto [a1, b1] = apply(x.view(), y.view(), label);
        const auto [a2, b2] = apply(x2.view(), y2.view(), label);
        if (a1 > b1 || a2 > b2) ++rep.order_violations;
        if (a1 > a2 || b1 > b2) ++rep.cross_violations;
    }
    rep.passed = rep.order_violations == 0 && rep.cross_violations == 0;
    return rep;
}

Decomposition bk_decompose(const Kernel& kernel) {
    const auto* bk = std::get_if<BkSpec>(&kernel.spec());
    if (!bk) throw InvalidParams("discrete decomposition exists only for the majority family");
    Decomposition dec(kernel);
    dec.mode_ = DecompositionMode::discrete;
    dec.eps_ = bk->epsilon;
    dec.r_ = bk->r;
    // enumeration cutoff: keep levels until the remaining weight drops below 1e-14
    long long j = static_cast<long long>(
        std::ceil(std::log(kEnumerationCut / (1.0 - 2.0 * bk->epsilon)) / std::log(bk->r)));
    if (j < 1) j = 1;
    while ((1.0 - 2.0 * bk->epsilon) * std::pow(bk->r, static_cast<double>(j)) >= kEnumerationCut) ++j;
    dec.depth_ = j;
    dec.residual_ = (1.0 - 2.0 * bk->epsilon) * std::pow(bk->r, static_cast<double>(j));
    dec.monotone_verified_ = true;  // majority of a window and the diagonal level preserve order
    return dec;
}

Decomposition greedy_decompose(const Kernel& kernel, int depth, long long gate_trials,
                               std::uint64_t gate_seed) {
    if (depth < 0) throw InvalidParams("depth must be >= 0");
    if (!kernel.attractive()) throw NotAttractive("layered minorization needs an attractive kernel");
    const int s = kernel.alphabet_size();
    if (std::pow(static_cast<double>(s), static_cast<double>(depth)) > 2e6)
        throw StateSpaceTooLarge("window state space exceeds 2e6");

    Decomposition dec(kernel);
    dec.mode_ = DecompositionMode::hybrid;
    dec.depth_ = depth;
    dec.lambda_.assign(static_cast<std::size_t>(depth) + 1, 0.0);
    dec.ivs_.resize(static_cast<std::size_t>(depth) + 1);
    dec.sym_.resize(static_cast<std::size_t>(depth) + 1);

    // level k claims the uniforms whose quantile every depth-k window
    // settles (the extreme tail completions agree, so all completions do)
    // and that no shallower depth claimed; zones where the two completions
    // still disagree stay open for deeper levels or the residual
    std::vector<Iv> unassigned{{0.0, 1.0}};
    std::vector<Symbol> window;
    std::vector<double> fbot;
    for (int k = 0; k <= depth; ++k) {
        std::size_t nh = 1;
        for (int d = 0; d < k; ++d) nh *= static_cast<std::size_t>(s);
        const std::size_t nb = static_cast<std::size_t>(s) - 1;
        fbot.assign(std::max<std::size_t>(nh * nb, 1), 0.0);
        std::vector<Iv> zones;
        window.assign(static_cast<std::size_t>(k), Symbol{1});
        for (std::size_t ih = 0; ih < nh; ++ih) {
            std::size_t code = ih;
            for (int d = 0; d < k; ++d) {
                window[static_cast<std::size_t>(d)] = static_cast<Symbol>(1 + code % static_cast<std::size_t>(s));
                code /= static_cast<std::size_t>(s);
            }
            const PastView bot{window, Symbol{1}};
            const PastView top{window, static_cast<Symbol>(s)};
            for (int a = 1; a < s; ++a) {
                // lower cum F(a|.) falls as the past rises, so the bottom
                // completion is the upper end of the bracket
                const double fmin = 1.0 - kernel.cum(a + 1, top);
                const double fmax = 1.0 - kernel.cum(a + 1, bot);
                fbot[ih * nb + static_cast<std::size_t>(a - 1)] = fmax;
                if (fmax > fmin) zones.emplace_back(fmin, fmax);
            }
        }
        std::vector<Iv> claim = intersect(unassigned, complement01(merge_union(std::move(zones))));
        // measure-zero slivers go to the residual, which resolves them exactly
        std::erase_if(claim, [](const Iv& iv) { return iv.second - iv.first <= 1e-15; });
        unassigned = intersect(unassigned, complement01(claim));
        dec.lambda_[static_cast<std::size_t>(k)] = measure(claim);
        auto& sym = dec.sym_[static_cast<std::size_t>(k)];
        sym.assign(claim.size() * nh, Symbol{1});
        for (std::size_t i = 0; i < claim.size(); ++i) {
            const double mid = 0.5 * (claim[i].first + claim[i].second);
            for (std::size_t ih = 0; ih < nh; ++ih) {
                int a = s;
                for (int c = 1; c < s; ++c) {
                    if (mid < fbot[ih * nb + static_cast<std::size_t>(c - 1)]) {
                        a = c;
                        break;
                    }
                }
                sym[i * nh + ih] = static_cast<Symbol>(a);
            }
        }
        dec.ivs_[static_cast<std::size_t>(k)] = std::move(claim);
    }

    dec.residual_ = std::clamp(measure(unassigned), 0.0, 1.0);

    if (gate_trials > 0) {
        const MonotonicityReport rep = dec.verify_monotonicity(gate_trials, gate_seed);
        if (!rep.passed)
            throw MonotonicityUnverified("label monotonicity gate failed: "
                                         + std::to_string(rep.order_violations) + " order and "
                                         + std::to_string(rep.cross_violations) + " cross violations in "
                                         + std::to_string(rep.trials) + " trials");
        dec.monotone_verified_ = true;
    }
    return dec;
}

}  // namespace chains
