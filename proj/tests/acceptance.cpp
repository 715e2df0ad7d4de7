// End-to-end acceptance gate. Each check prints one PASS/FAIL line with the
// measured quantity and its pinned tolerance; the exit code is the number of
// failures. argv[1] = CLI binary, argv[2] = scratch directory.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "chains/analysis.hpp"
#include "chains/cftp.hpp"
#include "chains/coupling.hpp"
#include "chains/decomposition.hpp"
#include "chains/kernels.hpp"
#include "chains/rng.hpp"

namespace fs = std::filesystem;
using namespace chains;
using rng::SubStream;
using rng::derive;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

Past random_past(SubStream& g, std::size_t max_prefix) {
    const std::size_t len = g.next_u64() % (max_prefix + 1);
    std::vector<Symbol> pre(len);
    for (auto& sym : pre) sym = static_cast<Symbol>(1 + (g.next_u64() & 1));
    return Past(std::move(pre), static_cast<Symbol>(1 + (g.next_u64() & 1)));
}

std::vector<Kernel> family_panel() {
    std::vector<Kernel> out;
    out.emplace_back(KernelSpec{BkSpec{}});
    AutoregressiveSpec ar;
    ar.gamma = 0.1;
    out.emplace_back(KernelSpec{ar});
    RenewalSpec rn;
    rn.p.kind = PSequence::Kind::harmonic;
    out.emplace_back(KernelSpec{rn});
    MarkovSpec mk;
    mk.rows = {{0.6, 0.4}, {0.3, 0.7}};
    out.emplace_back(KernelSpec{mk});
    return out;
}

Kernel bk_kernel(double eps, double r) {
    BkSpec spec;
    spec.epsilon = eps;
    spec.r = r;
    return Kernel{KernelSpec{spec}};
}

Kernel markov1() {
    MarkovSpec spec;
    spec.rows = {{0.6, 0.4}, {0.3, 0.7}};
    return Kernel{KernelSpec{spec}};
}

Kernel markov2() {
    MarkovSpec spec;
    spec.order = 2;
    spec.rows = {{0.7, 0.3}, {0.5, 0.5}, {0.6, 0.4}, {0.3, 0.7}};
    return Kernel{KernelSpec{spec}};
}

std::vector<Symbol> window_of(PastView x, std::size_t len) {
    std::vector<Symbol> w(len);
    for (std::size_t d = 1; d <= len; ++d) w[d - 1] = x.at(d);
    return w;
}

double mixture_error(const Decomposition& dec, const Kernel& kernel, PastView x, PastView y) {
    const int s = kernel.alphabet_size();
    std::vector<double> mix(static_cast<std::size_t>(s) * static_cast<std::size_t>(s), 0.0);
    const auto levels = dec.levels();
    const std::size_t max_len = static_cast<std::size_t>(levels.back());
    const std::vector<Symbol> xw = window_of(x, max_len);
    const std::vector<Symbol> yw = window_of(y, max_len);
    for (const long long level : levels) {
        const PairWindow h{std::span<const Symbol>(xw).first(static_cast<std::size_t>(level)),
                           std::span<const Symbol>(yw).first(static_cast<std::size_t>(level))};
        const CellTable t = dec.level_kernel(level, h);
        const double w = dec.weight(level);
        for (std::size_t i = 0; i < mix.size(); ++i) mix[i] += w * t.raw()[i];
    }
    const CellTable joint = coupling_joint(kernel, x, y);
    double err = 0.0;
    for (std::size_t i = 0; i < mix.size(); ++i)
        err = std::max(err, std::abs(mix[i] - joint.raw()[i]));
    return err;
}

// ---------------------------------------------------------------------------

Outcome check_coupling_marginals() {
    double worst = 0.0;
    SubStream g(1001, 0x434f5550);
    for (const Kernel& kernel : family_panel()) {
        for (int trial = 0; trial < 1000; ++trial) {
            const Past x = random_past(g, 12);
            const Past y = random_past(g, 12);
            const CellTable t = coupling_joint(kernel, x.view(), y.view());
            const CouplingMarginals m = coupling_marginals(t);
            for (int a = 1; a <= kernel.alphabet_size(); ++a) {
                worst = std::max(worst, std::abs(m.left[static_cast<std::size_t>(a - 1)] -
                                                 kernel.prob(a, x.view())));
                worst = std::max(worst, std::abs(m.right[static_cast<std::size_t>(a - 1)] -
                                                 kernel.prob(a, y.view())));
            }
        }
    }
    return {worst <= 1e-10, fmt("max marginal error %.3g (tol 1e-10)", worst)};
}

Outcome check_comonotone() {
    double worst_id = 0.0, worst_ord = 0.0;
    SubStream g(1002, 0x434f5551);
    for (const Kernel& kernel : family_panel()) {
        for (int trial = 0; trial < 1000; ++trial) {
            const Past x = random_past(g, 12);
            const CellTable same = coupling_joint(kernel, x.view(), x.view());
            for (int a = 1; a <= kernel.alphabet_size(); ++a)
                for (int b = 1; b <= kernel.alphabet_size(); ++b)
                    if (a != b) worst_id = std::max(worst_id, same.at(a, b));

            const Past u = random_past(g, 12);
            const Past v = random_past(g, 12);
            const Past lo = meet(u.view(), v.view());
            const Past hi = join(u.view(), v.view());
            const CellTable ord = coupling_joint(kernel, lo.view(), hi.view());
            for (int a = 2; a <= kernel.alphabet_size(); ++a)
                for (int b = 1; b < a; ++b) worst_ord = std::max(worst_ord, ord.at(a, b));
        }
    }
    const bool pass = worst_id <= 1e-12 && worst_ord <= 1e-12;
    return {pass, fmt("identical off-diagonal %.3g, ordered below-diagonal %.3g (tol 1e-12)",
                      worst_id, worst_ord)};
}

Outcome check_level_decomposition() {
    const Kernel kernel = bk_kernel(0.2, 0.75);
    const Decomposition dec = bk_decompose(kernel);

    bool weights_exact = dec.weight(0) == 2.0 * 0.2;
    double lam = (1.0 - 2.0 * 0.2) * (1.0 - 0.75);
    for (long long k = 1; k <= 40; ++k) {
        weights_exact = weights_exact && dec.weight(2 * k - 1) == lam;
        lam *= 0.75;
    }

    const double tol = kernel.truncation_residual() + 1e-12;
    double worst = 0.0;
    SubStream g(1003, 0x434f5552);
    for (int trial = 0; trial < 1000; ++trial) {
        const Past u = random_past(g, 10);
        const Past v = random_past(g, 10);
        const Past lo = meet(u.view(), v.view());
        const Past hi = join(u.view(), v.view());
        worst = std::max(worst, mixture_error(dec, kernel, lo.view(), hi.view()));
    }
    const bool pass = weights_exact && worst <= tol;
    return {pass, fmt("weights exact %s, mixture error %.3g (tol %.3g)",
                      weights_exact ? "yes" : "NO", worst, tol)};
}

Outcome check_greedy_exact() {
    double worst = 0.0, worst_residual = 0.0;

    const Kernel k1 = markov1();
    const Decomposition d1 = greedy_decompose(k1, 1);
    worst_residual = std::max(worst_residual, d1.residual());
    for (Symbol xs : {Symbol{1}, Symbol{2}})
        for (Symbol ys : {Symbol{1}, Symbol{2}}) {
            const Past x = Past::constant(xs);
            const Past y = Past::constant(ys);
            worst = std::max(worst, mixture_error(d1, k1, x.view(), y.view()));
        }

    const Kernel k2 = markov2();
    const Decomposition d2 = greedy_decompose(k2, 2);
    worst_residual = std::max(worst_residual, d2.residual());
    for (int xc = 0; xc < 4; ++xc)
        for (int yc = 0; yc < 4; ++yc) {
            const Past x({static_cast<Symbol>(1 + (xc & 1)), static_cast<Symbol>(1 + (xc >> 1))}, 1);
            const Past y({static_cast<Symbol>(1 + (yc & 1)), static_cast<Symbol>(1 + (yc >> 1))}, 1);
            worst = std::max(worst, mixture_error(d2, k2, x.view(), y.view()));
        }

    const bool pass = worst_residual <= 1e-12 && worst <= 1e-10;
    return {pass, fmt("residual %.3g (tol 1e-12), mixture error %.3g (tol 1e-10)",
                      worst_residual, worst)};
}

Outcome check_update_law() {
    struct Case {
        const char* name;
        Decomposition dec;
    };
    std::vector<Case> cases;
    cases.push_back({"bk", bk_decompose(bk_kernel(0.2, 0.75))});
    {
        AutoregressiveSpec ar;
        ar.gamma = 0.1;
        cases.push_back({"logit", greedy_decompose(Kernel{KernelSpec{ar}}, 6)});
    }
    {
        RenewalSpec rn;
        rn.p.kind = PSequence::Kind::harmonic;
        cases.push_back({"renewal", greedy_decompose(Kernel{KernelSpec{rn}}, 6)});
    }
    cases.push_back({"markov", greedy_decompose(markov1(), 1)});

    const PairPast pairs[] = {
        {Past::constant(1), Past::constant(2)},
        {Past({1, 2, 1, 1}, 1), Past({2, 2, 1, 2}, 2)},
        {Past({1, 1, 2, 2, 1, 1}, 2), Past({1, 2, 2, 2, 1, 2}, 2)},
    };

    double min_p = 1.0;
    std::string where = "-";
    std::uint64_t stream = 0;
    for (const Case& c : cases) {
        const int s = c.dec.alphabet_size();
        for (const PairPast& pp : pairs) {
            SubStream g(1005, 0x474f4600 + stream++);
            std::vector<long long> counts(static_cast<std::size_t>(s) * static_cast<std::size_t>(s), 0);
            for (int i = 0; i < 1000000; ++i) {
                const Label lab = c.dec.sample_label(g);
                const auto [a, b] =
                    update_F(c.dec, pp.left.view(), pp.right.view(), lab);
                ++counts[static_cast<std::size_t>((a - 1) * s + (b - 1))];
            }
            const CellTable joint =
                coupling_joint(c.dec.kernel(), pp.left.view(), pp.right.view());
            const std::vector<double> probs(joint.raw().begin(), joint.raw().end());
            const ChiSquareResult res = chi_square_gof(counts, probs);
            if (res.p_value < min_p) {
                min_p = res.p_value;
                where = c.name;
            }
        }
    }
    return {min_p >= 1e-3, fmt("min GOF p-value %.4g at %s (reject below 1e-3)",
                               min_p, where.c_str())};
}

Outcome check_two_state_law() {
    const Decomposition dec = greedy_decompose(markov1(), 1);
    constexpr long long reps = 100000;
    long long plus = 0;
    for (long long rep = 0; rep < reps; ++rep) {
        LabelStream labels(dec, derive(1006, static_cast<std::uint64_t>(rep)));
        const ThetaResult res = theta(dec, labels, 0);
        if (!res.coalesced) return {false, "a replica failed to coalesce"};
        if (res.value == 2) ++plus;
    }
    const double pi = 4.0 / 7.0;
    const double freq = static_cast<double>(plus) / static_cast<double>(reps);
    const double tol = 3.0 * std::sqrt(pi * (1 - pi) / static_cast<double>(reps));
    return {std::abs(freq - pi) <= tol,
            fmt("freq(+) %.5f vs 4/7 = %.5f (tol %.5f)", freq, pi, tol)};
}

Outcome check_sandwich() {
    const Decomposition dec = bk_decompose(bk_kernel(0.2, 0.75));
    long long violations = 0;
    for (std::uint64_t rep = 0; rep < 100000; ++rep) {
        LabelStream labels(dec, derive(1007, rep));
        PairState state{Past::constant(1), Past::constant(2)};
        for (long long t = -15; t <= 0; ++t) {
            state = iterate(dec, state, labels, t, t);
            if (!leq(state.left.view(), state.right.view())) ++violations;
        }
    }
    return {violations == 0, fmt("%lld order violations in 1.6e6 steps (tol 0)",
                                 violations)};
}

Outcome check_concentration() {
    const Decomposition dec = bk_decompose(bk_kernel(0.2, 0.75));
    constexpr long long reps = 10000, n = 1000;
    std::vector<double> means;
    means.reserve(reps);
    double tsum = 0.0, tsumsq = 0.0;
    long long tcount = 0;
    for (long long rep = 0; rep < reps; ++rep) {
        const CftpRun run = sample_stationary(dec, n, derive(1008, static_cast<std::uint64_t>(rep)));
        if (!run.complete) return {false, "a replica hit the horizon"};
        double m = 0.0;
        for (const Symbol a : run.window) m += spin_of(a);
        means.push_back(m / static_cast<double>(n));
        for (const long long th : run.theta) {
            const double v = static_cast<double>(th);
            tsum += v;
            tsumsq += v * v;
            ++tcount;
        }
    }
    const double tmean = tsum / static_cast<double>(tcount);
    const double tvar = std::max(0.0, tsumsq / static_cast<double>(tcount) - tmean * tmean);
    const double tmean_hi =
        tmean + 1.959963984540054 * std::sqrt(tvar / static_cast<double>(tcount));

    const double eps = 0.05;
    const DeviationEstimate dev = empirical_deviation(means, eps);
    const LipschitzSpec spec = LipschitzSpec::block_mean(n, 1, 2.0);
    const BoundValue bound = cftp_concentration_bound(tmean_hi, eps, spec);
    const bool pass = dev.wilson_hi <= bound.capped;
    return {pass, fmt("deviation wilson hi %.4g <= bound %.4g (raw %.4g, E[theta] hi %.4g)",
                      dev.wilson_hi, bound.capped, bound.raw, tmean_hi)};
}

Outcome check_phase_contrast() {
    const Decomposition unique = bk_decompose(bk_kernel(0.2, 0.75));
    const SurvivalCurve su = coalescence_curve(unique, 1000, 2000, {1000}, 1009);
    const double s_unique = su.points.back().survival;

    BkSpec pt;
    pt.epsilon = 0.05;
    pt.r = 0.75;
    pt.m.kind = MSequence::Kind::superexp;
    pt.m.base = 1;
    pt.m.factor = 10.0;
    const Decomposition slow = bk_decompose(Kernel{KernelSpec{pt}});
    const SurvivalCurve sp = coalescence_curve(slow, 10000, 1000, {10000}, 1010);
    const double s_trans = sp.points.back().survival;

    const bool pass = s_unique < 0.05 && s_trans >= 0.5;
    return {pass, fmt("survival: fast-window %.4f (< 0.05), explosive-window %.4f (>= 0.5)",
                      s_unique, s_trans)};
}

Outcome check_label_entropy() {
    const double eps = 0.1, r = 0.75;
    const Decomposition dec = bk_decompose(bk_kernel(eps, r));
    double direct = -2 * eps * std::log(eps);
    double lam = (1 - 2 * eps) * (1 - r);
    for (int k = 1; k <= 200; ++k) {
        direct -= lam * std::log(lam);
        lam *= r;
    }
    const double diff = std::abs(dec.label_entropy() - direct);
    return {diff <= 1e-9, fmt("entropy %.12f vs direct sum, diff %.3g (tol 1e-9)",
                              dec.label_entropy(), diff)};
}

Outcome check_renewal_blocks() {
    RenewalSpec rn;
    rn.p.kind = PSequence::Kind::harmonic;
    const Kernel kernel{KernelSpec{rn}};
    constexpr long long length = 250000;
    const std::vector<Symbol> traj =
        forward_fixed_past(kernel, Past::constant(1).view(), length, 1011);
    const std::vector<long long> lens = block_lengths(traj);
    const RenewalOracle oracle = renewal_block_oracle(rn.p, length, 1012);
    if (lens.size() < 100000 || oracle.block_lengths.size() < 100000)
        return {false, fmt("too few blocks: %zu vs %zu", lens.size(),
                           oracle.block_lengths.size())};

    constexpr std::size_t hist_max = 48;
    std::vector<long long> ha(hist_max + 1, 0), hb(hist_max + 1, 0);
    for (const long long v : lens) ++ha[std::min<std::size_t>(static_cast<std::size_t>(v), hist_max)];
    for (const long long v : oracle.block_lengths)
        ++hb[std::min<std::size_t>(static_cast<std::size_t>(v), hist_max)];
    const ChiSquareResult res = two_sample_chi_square(ha, hb);
    return {res.p_value > 1e-3,
            fmt("%zu vs %zu blocks, p %.4g (reject below 1e-3)", lens.size(),
                oracle.block_lengths.size(), res.p_value)};
}

Outcome check_entropy_rate_self() {
    // Each replica window contributes exactly one block per block length
    // (prefix truncation), so block counts are independent across replicas.
    // That is the regime the smoothing-bias floor models; cutting many blocks
    // from one long window inflates the estimate by the chain's
    // autocorrelation time, which no sample size brings back under the floor.
    const Decomposition dec = bk_decompose(bk_kernel(0.2, 0.75));
    constexpr long long reps = 4000, len = 7;
    std::vector<std::vector<Symbol>> xs_w, ys_w;
    for (long long rep = 0; rep < reps; ++rep) {
        CftpRun a = sample_stationary(dec, len, derive(1013, static_cast<std::uint64_t>(rep)));
        CftpRun b = sample_stationary(dec, len, derive(1014, static_cast<std::uint64_t>(rep)));
        if (!a.complete || !b.complete) return {false, "a replica hit the horizon"};
        xs_w.push_back(std::move(a.window));
        ys_w.push_back(std::move(b.window));
    }
    double worst_ratio = 0.0;
    long long worst_n = -1;
    for (long long blk = 0; blk <= 6; ++blk) {
        std::vector<Symbol> xs, ys;
        for (const auto& w : xs_w) xs.insert(xs.end(), w.begin(), w.begin() + blk + 1);
        for (const auto& w : ys_w) ys.insert(ys.end(), w.begin(), w.begin() + blk + 1);
        const KlEstimate est = relative_entropy_rate(xs, ys, 2, blk);
        const double ratio = est.rate / est.bias_floor;
        if (ratio > worst_ratio) {
            worst_ratio = ratio;
            worst_n = blk;
        }
    }
    return {worst_ratio <= 2.0, fmt("max rate/bias-floor %.3f at block %lld (tol 2)",
                                    worst_ratio, worst_n)};
}

// --- CLI reproducibility ----------------------------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string strip_timestamp(const std::string& text) {
    std::istringstream in(text);
    std::string out, line;
    while (std::getline(in, line))
        if (line.find("\"timestamp\"") == std::string::npos) out += line + "\n";
    return out;
}

int run_cli(const std::string& cli, const std::string& sub, const fs::path& cfg,
            const fs::path& out) {
    const std::string cmd = "\"" + cli + "\" " + sub + " --config \"" + cfg.string() +
                            "\" --out \"" + out.string() + "\" >/dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    if (st == -1) return -1;
    if (WIFEXITED(st)) return WEXITSTATUS(st);
    return -2;
}

bool compare_runs(const fs::path& a, const fs::path& b, std::string& why) {
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(a)) names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    std::vector<std::string> bnames;
    for (const auto& e : fs::directory_iterator(b)) bnames.push_back(e.path().filename().string());
    std::sort(bnames.begin(), bnames.end());
    if (names != bnames) {
        why = "file sets differ";
        return false;
    }
    if (names.empty()) {
        why = "no outputs";
        return false;
    }
    for (const std::string& name : names) {
        std::string left = slurp(a / name);
        std::string right = slurp(b / name);
        if (name == "report.json") {
            left = strip_timestamp(left);
            right = strip_timestamp(right);
        }
        if (left != right) {
            why = name + " differs";
            return false;
        }
    }
    return true;
}

Outcome check_cli_reproducible(const std::string& cli, const fs::path& scratch) {
    if (cli.empty()) return {false, "no CLI binary path supplied"};
    fs::create_directories(scratch);

    const std::string base = R"({
  "kernel": {"family": "finite_markov", "order": 1, "alphabet": 2,
             "rows": [[0.6, 0.4], [0.3, 0.7]]},
  "decomposition": {"mode": "greedy", "K": 2},
  "run": {"n": 16, "replicas": 50, "horizon_limit": 10000, "seed": 7},
  "analysis": {"epsilons": [0.05], "functional": "mean", "block": 2}
})";
    const std::string conc = R"({
  "kernel": {"family": "finite_markov", "order": 1, "alphabet": 2,
             "rows": [[0.6, 0.4], [0.3, 0.7]]},
  "decomposition": {"mode": "greedy", "K": 2},
  "run": {"n": 60, "replicas": 120, "horizon_limit": 10000, "seed": 7},
  "analysis": {"epsilons": [0.05, 0.1], "functional": "mean", "block": 2}
})";
    const std::string ent = R"({
  "kernel": {"family": "finite_markov", "order": 1, "alphabet": 2,
             "rows": [[0.6, 0.4], [0.3, 0.7]]},
  "decomposition": {"mode": "greedy", "K": 2},
  "run": {"n": 84, "replicas": 40, "horizon_limit": 10000, "seed": 7},
  "analysis": {"epsilons": [0.05], "functional": "mean", "block": 2}
})";
    const fs::path base_cfg = scratch / "base.json";
    const fs::path conc_cfg = scratch / "conc.json";
    const fs::path ent_cfg = scratch / "ent.json";
    std::ofstream(base_cfg) << base;
    std::ofstream(conc_cfg) << conc;
    std::ofstream(ent_cfg) << ent;

    struct Job {
        const char* sub;
        const fs::path* cfg;
    };
    const Job jobs[] = {
        {"sample", &base_cfg},        {"theta", &base_cfg},    {"decompose", &base_cfg},
        {"coupling-check", &base_cfg}, {"criteria", &base_cfg}, {"phases", &base_cfg},
        {"concentration", &conc_cfg}, {"entropy-rate", &ent_cfg},
    };
    for (const Job& job : jobs) {
        const fs::path da = scratch / (std::string(job.sub) + "_a");
        const fs::path db = scratch / (std::string(job.sub) + "_b");
        fs::remove_all(da);
        fs::remove_all(db);
        const int ca = run_cli(cli, job.sub, *job.cfg, da);
        const int cb = run_cli(cli, job.sub, *job.cfg, db);
        if (ca != cb || ca != 0)
            return {false, fmt("%s exit codes %d / %d", job.sub, ca, cb)};
        std::string why;
        if (!compare_runs(da, db, why))
            return {false, fmt("%s outputs differ: %s", job.sub, why.c_str())};
    }
    return {true, "8 subcommands, byte-identical reports and CSVs, equal exit codes"};
}

}  // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "";
    const fs::path scratch = argc > 2 ? argv[2] : "acceptance_scratch";

    struct Entry {
        const char* name;
        std::function<Outcome()> run;
    };
    const Entry entries[] = {
        {"coupling-marginals", check_coupling_marginals},
        {"comonotone-coupling", check_comonotone},
        {"level-decomposition-exact", check_level_decomposition},
        {"greedy-exact-at-order", check_greedy_exact},
        {"update-law-gof", check_update_law},
        {"two-state-stationary-law", check_two_state_law},
        {"sandwich-monotonicity", check_sandwich},
        {"concentration-bound", check_concentration},
        {"phase-contrast", check_phase_contrast},
        {"label-entropy", check_label_entropy},
        {"renewal-block-law", check_renewal_blocks},
        {"entropy-rate-self", check_entropy_rate_self},
        {"cli-reproducibility", [&] { return check_cli_reproducible(cli, scratch); }},
    };

    int failures = 0;
    int idx = 0;
    for (const Entry& entry : entries) {
        ++idx;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = entry.run();
        } catch (const std::exception& ex) {
            out = {false, std::string("exception: ") + ex.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s %2d %-26s %s [%.1fs]\n", out.pass ? "PASS" : "FAIL", idx, entry.name,
                    out.detail.c_str(), secs);
        std::fflush(stdout);
        if (!out.pass) ++failures;
    }
    std::printf("%d/13 criteria passed\n", 13 - failures);
    return failures;
}
