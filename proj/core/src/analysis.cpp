#include "chains/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "chains/errors.hpp"
#include "chains/rng.hpp"

namespace chains {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// regularized incomplete gamma Q(a, x), for chi-square p-values
double gammp_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gammq_cf(double a, double x) {
    constexpr double fpmin = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / fpmin;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < fpmin) d = fpmin;
        c = b + an / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double gammq(double a, double x) {
    if (a <= 0.0 || x < 0.0) throw InvalidParams("bad incomplete gamma arguments");
    if (x == 0.0) return 1.0;
    return x < a + 1.0 ? 1.0 - gammp_series(a, x) : gammq_cf(a, x);
}

double chi_p_value(double statistic, long long dof) {
    if (dof <= 0) return 1.0;
    return gammq(0.5 * static_cast<double>(dof), 0.5 * statistic);
}

}  // namespace

double LipschitzSpec::l1() const {
    double s = 0.0;
    for (const double d : delta) s += d;
    return s;
}

double LipschitzSpec::l2sq() const {
    double s = 0.0;
    for (const double d : delta) s += d * d;
    return s;
}

void LipschitzSpec::validate() const {
    if (delta.empty()) throw InvalidParams("empty oscillation vector");
    for (const double d : delta)
        if (!(d >= 0.0) || !std::isfinite(d)) throw InvalidParams("oscillations must be finite and >= 0");
}

LipschitzSpec LipschitzSpec::block_mean(long long n, long long k, double h_osc) {
    if (n < 1 || k < 1 || k > n || !(h_osc >= 0.0)) throw InvalidParams("bad block-mean preset");
    LipschitzSpec spec;
    spec.delta.assign(static_cast<std::size_t>(n),
                      static_cast<double>(k) * h_osc / static_cast<double>(n - k + 1));
    return spec;
}

LipschitzSpec LipschitzSpec::single_site(long long n, long long site, double osc) {
    if (n < 1 || site < 1 || site > n || !(osc >= 0.0)) throw InvalidParams("bad single-site preset");
    LipschitzSpec spec;
    spec.delta.assign(static_cast<std::size_t>(n), 0.0);
    spec.delta[static_cast<std::size_t>(site - 1)] = osc;
    return spec;
}

BoundValue cftp_concentration_bound(double mean_theta, double epsilon, const LipschitzSpec& spec) {
    if (!(mean_theta >= 0.0)) throw InvalidParams("mean theta must be >= 0");
    if (!(epsilon > 0.0)) throw InvalidParams("epsilon must be > 0");
    spec.validate();
    const double l2sq = spec.l2sq();
    BoundValue out;
    if (l2sq == 0.0) {
        out.raw = 0.0;
        out.capped = 0.0;
        return out;
    }
    const double denom = 9.0 * (1.0 + mean_theta) * (1.0 + mean_theta) * l2sq;
    out.raw = 4.0 * std::exp(-2.0 * epsilon * epsilon / denom);
    out.capped = std::min(1.0, out.raw);
    return out;
}

ThetaTail ThetaTail::from_sample(std::span<const long long> thetas, long long depth) {
    if (thetas.empty() || depth < 0) throw InvalidParams("empty theta sample");
    ThetaTail tail;
    tail.prob_geq.reserve(static_cast<std::size_t>(depth));
    const double n = static_cast<double>(thetas.size());
    double mean = 0.0;
    for (const long long t : thetas) mean += static_cast<double>(t);
    tail.mean = mean / n;
    for (long long j = 1; j <= depth; ++j) {
        long long count = 0;
        for (const long long t : thetas)
            if (t >= j) ++count;
        tail.prob_geq.push_back(static_cast<double>(count) / n);
    }
    return tail;
}

void ThetaTail::validate() const {
    double prev = 1.0;
    for (const double p : prob_geq) {
        if (!(p >= 0.0) || p > prev + 1e-12) throw InvalidParams("theta tail must be nonincreasing in [0,1]");
        prev = p;
    }
    if (!(mean >= 0.0)) throw InvalidParams("theta mean must be >= 0");
}

double ThetaTail::geq(long long j) const {
    if (j <= 0) return 1.0;
    if (j > static_cast<long long>(prob_geq.size()))
        throw InsufficientTail("theta tail shorter than requested index");
    return prob_geq[static_cast<std::size_t>(j - 1)];
}

double ThetaTail::gt_upper(long long r) const {
    // P(theta > r) <= P(theta >= j) for any j <= r + 1; use the deepest entry
    const long long j = std::min<long long>(r + 1, static_cast<long long>(prob_geq.size()));
    return geq(j);
}

double ThetaTail::sum_geq(long long r1) const {
    if (r1 > static_cast<long long>(prob_geq.size()))
        throw InsufficientTail("theta tail shorter than r1");
    double s = 0.0;
    for (long long j = 1; j <= r1; ++j) s += prob_geq[static_cast<std::size_t>(j - 1)];
    return s;
}

FpBound fp_concentration_bound(const ThetaTail& tail, long long r1, long long r2, double epsilon,
                               const LipschitzSpec& spec) {
    if (r1 < 0 || r2 < 0) throw InvalidParams("stopping bounds must be >= 0");
    if (!(epsilon > 0.0)) throw InvalidParams("epsilon must be > 0");
    spec.validate();
    tail.validate();
    FpBound out;
    const double l1 = spec.l1();
    const double l2sq = spec.l2sq();
    out.premise_lhs = tail.gt_upper(r1) + tail.gt_upper(r2);
    out.premise_rhs = l1 > 0.0 ? epsilon / (6.0 * l1) : kInf;
    out.premise_ok = out.premise_lhs <= out.premise_rhs;
    if (l2sq == 0.0) {
        out.bound = BoundValue{0.0, 0.0};
        return out;
    }
    const double factor = 1.0 + static_cast<double>(r2) + tail.sum_geq(r1);
    const double denom = 9.0 * factor * factor * l2sq;
    out.bound.raw = 4.0 * std::exp(-2.0 * epsilon * epsilon / denom);
    out.bound.capped = std::min(1.0, out.bound.raw);
    return out;
}

std::pair<double, double> wilson_interval(long long successes, long long runs, double z) {
    if (runs <= 0 || successes < 0 || successes > runs) throw InvalidParams("bad Wilson inputs");
    const double n = static_cast<double>(runs);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

DeviationEstimate empirical_deviation(std::span<const double> values, double epsilon) {
    if (values.size() < 100) throw InvalidParams("need at least 100 runs");
    if (!(epsilon > 0.0)) throw InvalidParams("epsilon must be > 0");
    DeviationEstimate est;
    est.runs = static_cast<long long>(values.size());
    est.epsilon = epsilon;
    double mean = 0.0;
    for (const double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    est.sample_mean = mean;
    for (const double v : values)
        if (std::abs(v - mean) > epsilon) ++est.exceed;
    est.fraction = static_cast<double>(est.exceed) / static_cast<double>(est.runs);
    const auto [lo, hi] = wilson_interval(est.exceed, est.runs);
    est.wilson_lo = lo;
    est.wilson_hi = hi;
    return est;
}

ErgodicReport ergodic_rate_check(const std::vector<std::vector<Symbol>>& replicas,
                                 const BlockFunctional& h, long long k, double epsilon,
                                 std::vector<long long> n_grid, double reference_mean) {
    if (replicas.empty()) throw InvalidParams("no replicas");
    if (k < 1) throw InvalidParams("block length must be >= 1");
    if (!(epsilon > 0.0)) throw InvalidParams("epsilon must be > 0");
    std::sort(n_grid.begin(), n_grid.end());
    n_grid.erase(std::unique(n_grid.begin(), n_grid.end()), n_grid.end());
    if (n_grid.empty() || n_grid.front() < k) throw InvalidParams("window grid must start at >= k");
    const long long n_max = n_grid.back();
    for (const auto& rep : replicas)
        if (static_cast<long long>(rep.size()) < n_max)
            throw InvalidParams("replica shorter than the largest window");

    const double rr = static_cast<double>(replicas.size());
    std::vector<long long> exceed(n_grid.size(), 0);
    std::vector<double> ps(static_cast<std::size_t>(n_max - k + 2));
    for (const auto& rep : replicas) {
        ps[0] = 0.0;
        for (long long j = 0; j + k <= n_max; ++j)
            ps[static_cast<std::size_t>(j + 1)] =
                ps[static_cast<std::size_t>(j)]
                + h(std::span<const Symbol>(rep.data() + j, static_cast<std::size_t>(k)));
        for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
            const long long n = n_grid[gi];
            const double avg = ps[static_cast<std::size_t>(n - k + 1)] / static_cast<double>(n - k + 1);
            if (std::abs(avg - reference_mean) > epsilon) ++exceed[gi];
        }
    }

    ErgodicReport report;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
        const double freq = static_cast<double>(exceed[gi]) / rr;
        const double hi = wilson_interval(exceed[gi], static_cast<long long>(replicas.size())).second;
        report.points.push_back(ErgodicPoint{n_grid[gi], freq, hi});
        const double x = static_cast<double>(n_grid[gi]);
        const double y = std::log(std::max(freq, 0.5 / rr));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double m = static_cast<double>(n_grid.size());
    const double det = m * sxx - sx * sx;
    report.slope = det > 0.0 ? (m * sxy - sx * sy) / det : 0.0;
    report.decaying = n_grid.size() >= 2 && report.slope < 0.0;
    return report;
}

KlEstimate relative_entropy_rate(std::span<const Symbol> xs, std::span<const Symbol> ys, int s,
                                 long long n, double alpha) {
    if (s < 2) throw InvalidParams("alphabet size must be >= 2");
    if (n < 0 || n > 12) throw BlockTooLong("block parameter must be in [0, 12]");
    if (!(alpha > 0.0)) throw InvalidParams("smoothing must be > 0");
    long long cells = 1;
    for (long long i = 0; i <= n; ++i) {
        cells *= s;
        if (cells > (1ll << 22)) throw BlockTooLong("too many block cells to estimate");
    }
    const long long width = n + 1;
    const long long bx = static_cast<long long>(xs.size()) / width;
    const long long by = static_cast<long long>(ys.size()) / width;
    if (bx < 1 || by < 1) throw InvalidParams("samples shorter than one block");

    auto count_blocks = [&](std::span<const Symbol> v, long long blocks) {
        std::vector<long long> c(static_cast<std::size_t>(cells), 0);
        for (long long b = 0; b < blocks; ++b) {
            long long code = 0, base = 1;
            for (long long i = 0; i < width; ++i) {
                const Symbol a = v[static_cast<std::size_t>(b * width + i)];
                if (a < 1 || a > s) throw InvalidParams("symbol out of range in sample");
                code += static_cast<long long>(a - 1) * base;
                base *= s;
            }
            ++c[static_cast<std::size_t>(code)];
        }
        return c;
    };
    const std::vector<long long> cx = count_blocks(xs, bx);
    const std::vector<long long> cy = count_blocks(ys, by);

    const double mx = static_cast<double>(bx) + alpha * static_cast<double>(cells);
    const double my = static_cast<double>(by) + alpha * static_cast<double>(cells);
    double kl = 0.0;
    for (long long i = 0; i < cells; ++i) {
        const double px = (static_cast<double>(cx[static_cast<std::size_t>(i)]) + alpha) / mx;
        const double py = (static_cast<double>(cy[static_cast<std::size_t>(i)]) + alpha) / my;
        kl += px * std::log(px / py);
    }
    KlEstimate est;
    est.rate = kl / static_cast<double>(width);
    est.blocks_x = bx;
    est.blocks_y = by;
    est.cells = cells;
    est.alpha = alpha;
    est.bias_floor = static_cast<double>(cells)
                     * (1.0 / static_cast<double>(bx) + 1.0 / static_cast<double>(by))
                     / static_cast<double>(width);
    return est;
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::satisfied: return "satisfied";
        case Verdict::violated: return "violated";
        default: return "inconclusive";
    }
}

UniquenessReport uniqueness_criteria(const Kernel& kernel) {
    UniquenessReport report;

    // coefficient decay exponent: only meaningful for the logit family
    if (const auto* ar = std::get_if<AutoregressiveSpec>(&kernel.spec())) {
        if (ar->xi.kind == XiSequence::Kind::power_law) {
            report.decay_exponent.quantity = ar->xi.alpha;
            report.decay_exponent.verdict =
                ar->xi.alpha > 1.5 ? Verdict::satisfied : Verdict::violated;
            report.decay_exponent.note = "power-law coefficients need exponent > 3/2";
        } else {
            report.decay_exponent.quantity = kInf;
            report.decay_exponent.verdict = Verdict::satisfied;
            report.decay_exponent.note = "geometric coefficients beat every power law";
        }
    } else {
        report.decay_exponent.verdict = Verdict::inconclusive;
        report.decay_exponent.note = "criterion speaks only about logit coefficient decay";
    }

    // sum over coordinates of the per-symbol oscillation bound, < 1 required
    {
        double sum = 0.0;
        std::string note;
        if (const auto* ar = std::get_if<AutoregressiveSpec>(&kernel.spec())) {
            sum = ar->xi.tail_sum(0);  // per-coordinate oscillation is exactly xi_n
            note = "sum of logit coefficients";
        } else if (const auto* bk = std::get_if<BkSpec>(&kernel.spec())) {
            // per-symbol oscillation at depth n is (1-2eps) r^{#{m_j <= n-1}};
            // summed by level ranges: (m_{c+1} - m_c) r^c
            double acc = 0.0;
            double pw = 1.0;
            double prev_m = 0.0;
            bool diverged = false;
            for (long long c = 0; c < 4096; ++c) {
                const double mc1 = static_cast<double>(bk->m.value(static_cast<std::uint64_t>(c + 1)));
                acc += (mc1 - prev_m) * pw;
                prev_m = mc1;
                if (acc > 1e12) {
                    diverged = true;
                    break;
                }
                pw *= bk->r;
                if (pw * 1e12 < 1.0 && mc1 * pw < 1e-9) break;
            }
            sum = diverged ? kInf : (1.0 - 2.0 * bk->epsilon) * acc;
            note = "window-weighted geometric level mass";
        } else if (const auto* rs = std::get_if<RenewalSpec>(&kernel.spec())) {
            switch (rs->p.kind) {
                case PSequence::Kind::constant: sum = 0.0; break;
                case PSequence::Kind::geometric:
                    sum = (rs->p.base - rs->p.floor_) / (1.0 - rs->p.ratio);
                    break;
                case PSequence::Kind::harmonic: sum = rs->p.a > 0.0 ? kInf : 0.0; break;
                case PSequence::Kind::explicit_list: {
                    sum = 0.0;
                    for (const double v : rs->p.values) sum += v - rs->p.tail;
                    break;
                }
            }
            note = "sum of stopping-probability excesses over their limit";
        } else {
            // finite order: conservative total-variation sum over its window
            const auto* ms = std::get_if<MarkovSpec>(&kernel.spec());
            for (int d = 1; d <= ms->order; ++d) sum += kernel.osc_bound(static_cast<std::uint64_t>(d));
            note = "total oscillation over the finite window (conservative)";
        }
        report.oscillation_sum.quantity = sum;
        report.oscillation_sum.verdict = sum < 1.0 ? Verdict::satisfied : Verdict::violated;
        report.oscillation_sum.note = note;
    }

    // divergence of sum_k prod_{i<k} (1 - var_i), judged from dyadic partials
    {
        constexpr long long k_half = 8192, k_full = 16384;
        double t = 1.0;
        double sum = 0.0, sum_half = 0.0;
        for (long long k = 0; k < k_full; ++k) {
            sum += t;  // term k is the product over i < k
            if (k + 1 == k_half) sum_half = sum;
            t *= std::max(0.0, 1.0 - kernel.var_sharp(static_cast<std::uint64_t>(k)));
        }
        const double beta = sum_half > 0.0 ? std::log2(sum / sum_half) : 0.0;
        report.product_divergence.quantity = sum;
        char buf[96];
        std::snprintf(buf, sizeof buf, "dyadic growth exponent %.3f, last product %.3g", beta, t);
        report.product_divergence.note = buf;
        if (t > 1e-3 || beta >= 0.9)
            report.product_divergence.verdict = Verdict::satisfied;
        else if (beta <= 0.1)
            report.product_divergence.verdict = Verdict::violated;
        else
            report.product_divergence.verdict = Verdict::inconclusive;
    }
    return report;
}

RenewalOracle renewal_block_oracle(const PSequence& p, long long length, std::uint64_t seed) {
    if (length < 0) throw InvalidParams("length must be >= 0");
    p.validate();

    // mean block length = sum_k prod_{i<k} (1 - p_i); decide convergence from
    // dyadic increments of the partial sums
    constexpr long long k18 = 1ll << 18, k19 = 1ll << 19, k20 = 1ll << 20;
    double prod = 1.0, q = 0.0, q18 = 0.0, q19 = 0.0;
    for (long long k = 0; k < k20; ++k) {
        q += prod;
        if (k + 1 == k18) q18 = q;
        if (k + 1 == k19) q19 = q;
        prod *= 1.0 - p.value(static_cast<std::uint64_t>(k));
        if (prod < 1e-300) prod = 0.0;
    }
    const double inc_prev = q19 - q18;
    const double inc_last = q - q19;
    double mean = q;
    if (inc_last > 1e-9 * std::max(1.0, q)) {
        const double ratio = inc_prev > 0.0 ? inc_last / inc_prev : 1.0;
        if (ratio > 0.75)
            throw InfiniteMeanBlock("survival products do not sum: mean block length diverges");
        mean = q + inc_last * ratio / (1.0 - ratio);
    }

    RenewalOracle oracle;
    oracle.mean_block_length = mean;
    oracle.trajectory.reserve(static_cast<std::size_t>(length));
    rng::SubStream g(seed, 0x424c4f43ull);
    while (static_cast<long long>(oracle.trajectory.size()) < length) {
        long long k = 0;
        while (g.next_u01() >= p.value(static_cast<std::uint64_t>(k))) ++k;
        oracle.block_lengths.push_back(k + 1);
        oracle.trajectory.push_back(sym_minus);
        for (long long i = 0; i < k; ++i) oracle.trajectory.push_back(sym_plus);
    }
    if (static_cast<long long>(oracle.trajectory.size()) > length) {
        oracle.block_lengths.pop_back();
        oracle.trajectory.resize(static_cast<std::size_t>(length));
    }
    return oracle;
}

std::vector<long long> block_lengths(std::span<const Symbol> trajectory) {
    std::vector<long long> lens;
    std::size_t i = 0;
    while (i < trajectory.size() && trajectory[i] != sym_minus) ++i;
    while (i < trajectory.size()) {
        std::size_t j = i + 1;
        while (j < trajectory.size() && trajectory[j] == sym_plus) ++j;
        if (j == trajectory.size()) break;  // unterminated run: length unknown
        lens.push_back(static_cast<long long>(j - i));
        i = j;
    }
    return lens;
}

ChiSquareResult two_sample_chi_square(std::span<const long long> a, std::span<const long long> b,
                                      long long min_pool) {
    if (a.size() != b.size() || a.empty()) throw InvalidParams("count vectors must match");
    double na = 0.0, nb = 0.0;
    for (const long long v : a) na += static_cast<double>(v);
    for (const long long v : b) nb += static_cast<double>(v);
    if (na <= 0.0 || nb <= 0.0) throw InvalidParams("both samples need mass");
    const double k1 = std::sqrt(nb / na), k2 = std::sqrt(na / nb);

    std::vector<std::pair<double, double>> groups;
    double ga = 0.0, gb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ga += static_cast<double>(a[i]);
        gb += static_cast<double>(b[i]);
        if (ga + gb >= static_cast<double>(min_pool)) {
            groups.emplace_back(ga, gb);
            ga = gb = 0.0;
        }
    }
    if (ga + gb > 0.0) {
        if (groups.empty()) {
            groups.emplace_back(ga, gb);
        } else {
            groups.back().first += ga;
            groups.back().second += gb;
        }
    }

    ChiSquareResult res;
    res.cells = static_cast<long long>(groups.size());
    for (const auto& [xa, xb] : groups) {
        const double tot = xa + xb;
        if (tot <= 0.0) continue;
        const double d = k1 * xa - k2 * xb;
        res.statistic += d * d / tot;
    }
    res.dof = res.cells - 1;
    res.p_value = chi_p_value(res.statistic, res.dof);
    return res;
}

ChiSquareResult chi_square_gof(std::span<const long long> counts, std::span<const double> probs,
                               long long min_pool) {
    if (counts.size() != probs.size() || counts.empty()) throw InvalidParams("counts and probabilities must match");
    double n = 0.0, psum = 0.0;
    for (const long long c : counts) n += static_cast<double>(c);
    for (const double p : probs) {
        if (!(p >= 0.0)) throw InvalidParams("negative cell probability");
        psum += p;
    }
    if (std::abs(psum - 1.0) > 1e-9) throw InvalidParams("cell probabilities must sum to 1");
    if (n <= 0.0) throw InvalidParams("empty sample");

    std::vector<std::pair<double, double>> groups;  // observed, expected
    double go = 0.0, ge = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        go += static_cast<double>(counts[i]);
        ge += n * probs[i];
        if (ge >= static_cast<double>(min_pool)) {
            groups.emplace_back(go, ge);
            go = ge = 0.0;
        }
    }
    if (ge > 0.0 || go > 0.0) {
        if (groups.empty()) {
            groups.emplace_back(go, ge);
        } else {
            groups.back().first += go;
            groups.back().second += ge;
        }
    }

    ChiSquareResult res;
    res.cells = static_cast<long long>(groups.size());
    for (const auto& [obs, exp] : groups) {
        if (exp <= 0.0) {
            if (obs > 0.0) res.statistic = kInf;
            continue;
        }
        const double d = obs - exp;
        res.statistic += d * d / exp;
    }
    res.dof = res.cells - 1;
    res.p_value = std::isinf(res.statistic) ? 0.0 : chi_p_value(res.statistic, res.dof);
    return res;
}

}  // namespace chains
