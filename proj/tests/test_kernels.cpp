#include <doctest.h>

#include <cmath>
#include <vector>

#include "chains/errors.hpp"
#include "chains/kernels.hpp"

using namespace chains;

namespace {

// independent majority-kernel evaluation: walk every level explicitly and
// give the dropped geometric mass to the tail's sign
double bk_plus_direct(const BkSpec& spec, PastView x) {
    const int J = spec.depth();
    double level_mass = 0.0;
    double lam = 1.0 - spec.r;
    for (int k = 1; k <= J; ++k) {
        const std::uint64_t m = spec.m.value(static_cast<std::uint64_t>(k));
        const std::uint64_t len = std::min<std::uint64_t>(m, x.prefix.size());
        long long head = 0;
        for (std::uint64_t d = 1; d <= len; ++d) head += spin_of(x.at(d));
        const double total = static_cast<double>(head)
                             + static_cast<double>(m - len) * spin_of(x.tail);
        if (total >= 0.0) level_mass += lam;
        lam *= spec.r;
    }
    double tail_mass = 0.0;
    if (x.tail == sym_plus) tail_mass = std::pow(spec.r, J);
    return spec.epsilon + (1.0 - 2.0 * spec.epsilon) * (level_mass + tail_mass);
}

std::vector<Past> all_pasts(int prefix_len) {
    std::vector<Past> out;
    for (int tail = 1; tail <= 2; ++tail) {
        for (int code = 0; code < (1 << prefix_len); ++code) {
            std::vector<Symbol> pre(static_cast<std::size_t>(prefix_len));
            for (int d = 0; d < prefix_len; ++d)
                pre[static_cast<std::size_t>(d)] = static_cast<Symbol>(1 + ((code >> d) & 1));
            out.emplace_back(std::move(pre), static_cast<Symbol>(tail));
        }
    }
    return out;
}

bool agree_to_depth(PastView x, PastView y, int k) {
    for (int d = 1; d <= k; ++d)
        if (x.at(static_cast<std::size_t>(d)) != y.at(static_cast<std::size_t>(d))) return false;
    return true;
}

}  // namespace

TEST_CASE("window sequences follow their growth rules") {
    SUBCASE("consecutive odds") {
        MSequence m;
        CHECK(m.value(1) == 1);
        CHECK(m.value(2) == 3);
        CHECK(m.value(7) == 13);
    }
    SUBCASE("explicit list continues as consecutive odds") {
        MSequence m;
        m.kind = MSequence::Kind::explicit_list;
        m.values = {3, 7};
        CHECK(m.value(1) == 3);
        CHECK(m.value(2) == 7);
        CHECK(m.value(3) == 9);
        CHECK(m.value(4) == 11);
    }
    SUBCASE("geometric stays odd and strictly increasing") {
        MSequence m;
        m.kind = MSequence::Kind::geometric;
        m.base = 1;
        m.factor = 2.0;
        CHECK(m.value(1) == 1);
        CHECK(m.value(2) == 3);
        CHECK(m.value(3) == 7);
        CHECK(m.value(4) == 15);
        std::uint64_t prev = 0;
        for (std::uint64_t k = 1; k <= 80; ++k) {
            const std::uint64_t v = m.value(k);
            CHECK(v >= prev);
            if (prev < (1ull << 61)) CHECK(v > prev);  // strict until saturation
            CHECK(v % 2 == 1);
            prev = v;
        }
    }
    SUBCASE("superexponential growth dominates m_k 2^k") {
        MSequence m;
        m.kind = MSequence::Kind::superexp;
        m.base = 1;
        m.factor = 10.0;
        CHECK(m.value(1) == 1);
        CHECK(m.value(2) == 21);
        CHECK(m.value(3) == 841);
        // m_9 would exceed the saturation cap, so the growth claim stops at m_8
        for (std::uint64_t k = 1; k <= 7; ++k) {
            const double lhs = static_cast<double>(m.value(k + 1));
            const double rhs =
                10.0 * static_cast<double>(m.value(k)) * std::ldexp(1.0, static_cast<int>(k));
            CHECK(lhs >= rhs);
        }
        CHECK(m.value(9) == m.value(12));
    }
    SUBCASE("saturation keeps order comparisons sane") {
        MSequence m;
        m.kind = MSequence::Kind::geometric;
        m.base = 3;
        m.factor = 1e6;
        const std::uint64_t v20 = m.value(20);
        CHECK(v20 == m.value(30));
        CHECK(v20 > (1ull << 61));
    }
    SUBCASE("bad parameters are rejected") {
        MSequence m;
        m.kind = MSequence::Kind::geometric;
        m.factor = 1.0;
        CHECK_THROWS_AS(m.validate(), InvalidParams);
    }
}

TEST_CASE("majority helper resolves ties upward") {
    const int w1[] = {1, -1};
    CHECK(maj(w1) == 1);
    const int w2[] = {-1, -1, 1};
    CHECK(maj(w2) == -1);
    const int w3[] = {1, 1, -1};
    CHECK(maj(w3) == 1);
}

TEST_CASE("majority kernel matches the direct per-level walk") {
    BkSpec spec;
    spec.epsilon = 0.1;
    spec.r = 0.75;
    const Kernel kernel{KernelSpec{spec}};
    CHECK(std::string(kernel.family()) == "bk");
    CHECK(kernel.attractive());

    for (const Past& x : all_pasts(7)) {
        const double direct = bk_plus_direct(spec, x.view());
        CHECK(kernel.cum(2, x.view()) == doctest::Approx(direct).epsilon(1e-12));
        // normalization is exact by construction
        CHECK(kernel.prob(1, x.view()) + kernel.prob(2, x.view()) == 1.0);
        CHECK(kernel.cum(1, x.view()) == 1.0);
        CHECK(kernel.cum(3, x.view()) == 0.0);
    }
}

TEST_CASE("majority kernel handles saturated windows") {
    BkSpec spec;
    spec.epsilon = 0.05;
    spec.r = 0.75;
    spec.m.kind = MSequence::Kind::superexp;
    spec.m.base = 1;
    spec.m.factor = 10.0;
    const Kernel kernel{KernelSpec{spec}};
    const Past mostly_minus({2, 2}, 1);
    const double p = kernel.cum(2, mostly_minus.view());
    // every window beyond the prefix sees the minus tail's majority
    // except m_1 = 1 and the prefix-dominated short windows
    CHECK(p > 0.0);
    CHECK(p < 1.0);
    CHECK(kernel.prob(1, mostly_minus.view()) + kernel.prob(2, mostly_minus.view()) == 1.0);
}

TEST_CASE("truncation depth solves the residual inequality") {
    BkSpec spec;
    spec.epsilon = 0.1;
    spec.r = 0.75;
    const int J = spec.depth();
    CHECK(std::pow(spec.r, J) < 1e-14);
    CHECK(std::pow(spec.r, J - 1) >= 1e-14);

    spec.truncation_depth = 40;
    CHECK(spec.depth() == 40);

    const Kernel kernel{KernelSpec{spec}};
    CHECK(kernel.truncation_residual() ==
          doctest::Approx((1.0 - 2 * spec.epsilon) * std::pow(spec.r, 40)).epsilon(1e-12));
}

TEST_CASE("majority variation bound is a certified envelope") {
    BkSpec spec;
    spec.epsilon = 0.1;
    spec.r = 0.75;
    SUBCASE("closed form on the odd window rule") {
        const Kernel kernel{KernelSpec{spec}};
        // windows 1 and 3 are pinned after agreeing on 4 coordinates
        CHECK(kernel.var_bound(4) == doctest::Approx(0.5625).epsilon(1e-15));
        CHECK(kernel.var_sharp(4) == doctest::Approx(0.45).epsilon(1e-15));
        CHECK(kernel.var_bound(0) == 1.0);
    }
    SUBCASE("brute force never exceeds the bound") {
        spec.m.kind = MSequence::Kind::explicit_list;
        spec.m.values = {1, 3};
        spec.truncation_depth = 40;
        const Kernel kernel{KernelSpec{spec}};
        const auto pasts = all_pasts(7);
        std::vector<double> plus;
        plus.reserve(pasts.size());
        for (const Past& x : pasts) plus.push_back(kernel.cum(2, x.view()));
        for (int k = 0; k <= 5; ++k) {
            double sup = 0.0;
            for (std::size_t i = 0; i < pasts.size(); ++i)
                for (std::size_t j = i + 1; j < pasts.size(); ++j) {
                    if (!agree_to_depth(pasts[i].view(), pasts[j].view(), k)) continue;
                    sup = std::max(sup, std::abs(plus[i] - plus[j]));
                }
            CHECK(sup <= kernel.var_bound(static_cast<std::uint64_t>(k)) + 1e-12);
        }
    }
}

TEST_CASE("majority oscillation bound is sharp where one window reacts") {
    BkSpec spec;
    spec.epsilon = 0.1;
    spec.r = 0.75;
    spec.m.kind = MSequence::Kind::explicit_list;
    spec.m.values = {1};
    spec.truncation_depth = 40;
    const Kernel kernel{KernelSpec{spec}};

    // flipping the most recent symbol flips the window-1 majority outright
    CHECK(kernel.osc_bound(1) == doctest::Approx(2 * (1 - 2 * spec.epsilon)).epsilon(1e-12));

    double sup = 0.0;
    for (const Past& x : all_pasts(6)) {
        std::vector<Symbol> pre = x.prefix();
        pre[0] = pre[0] == 1 ? Symbol{2} : Symbol{1};
        const Past y(std::move(pre), x.tail());
        sup = std::max(sup, 2.0 * std::abs(kernel.cum(2, x.view()) - kernel.cum(2, y.view())));
    }
    // window 1 always flips outright; the longer windows (the explicit list
    // continues as consecutive odds) need a tied majority to react, so the
    // measured supremum sits between that single-window term and the bound
    CHECK(sup >= 2 * (1 - 2 * spec.epsilon) * 0.25 - 1e-12);
    CHECK(sup <= kernel.osc_bound(1) + 1e-12);

    // two windows: flips at depth 2 only touch the length-3 window
    spec.m.values = {1, 3};
    const Kernel k2{KernelSpec{spec}};
    CHECK(k2.osc_bound(2) == doctest::Approx(2 * 0.8 * 0.75).epsilon(1e-12));
    double sup2 = 0.0;
    for (const Past& x : all_pasts(6)) {
        std::vector<Symbol> pre = x.prefix();
        pre[1] = pre[1] == 1 ? Symbol{2} : Symbol{1};
        const Past y(std::move(pre), x.tail());
        sup2 = std::max(sup2, 2.0 * std::abs(k2.cum(2, x.view()) - k2.cum(2, y.view())));
    }
    CHECK(sup2 <= k2.osc_bound(2) + 1e-12);
}

TEST_CASE("logit kernel evaluates the sigmoid of the weighted past") {
    AutoregressiveSpec spec;
    spec.xi.kind = XiSequence::Kind::geometric;
    spec.xi.c = 0.5;
    spec.xi.rho = 0.5;
    spec.gamma = 0.1;
    const Kernel kernel{KernelSpec{spec}};
    CHECK(std::string(kernel.family()) == "binary_autoregressive");
    CHECK(kernel.attractive());

    // all-plus past: the field is the full coefficient sum plus the drift
    const Past top = Past::constant(2);
    const double field = spec.xi.tail_sum(0) + spec.gamma;
    CHECK(kernel.cum(2, top.view()) ==
          doctest::Approx(1.0 / (1.0 + std::exp(-2.0 * field))).epsilon(1e-12));

    // mixed prefix: directly reweight the coordinates
    const Past x({2, 1, 1}, 2);
    double f = spec.gamma;
    f += spec.xi.value(1) - spec.xi.value(2) - spec.xi.value(3);
    f += spec.xi.tail_sum(3);
    CHECK(kernel.cum(2, x.view()) ==
          doctest::Approx(1.0 / (1.0 + std::exp(-2.0 * f))).epsilon(1e-12));
    CHECK(kernel.prob(1, x.view()) + kernel.prob(2, x.view()) == 1.0);
}

TEST_CASE("coefficient tails have exact closed forms") {
    XiSequence geo;
    geo.c = 0.5;
    geo.rho = 0.5;
    CHECK(geo.tail_sum(0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(geo.tail_sum(3) == doctest::Approx(0.0625).epsilon(1e-15));

    XiSequence pw;
    pw.kind = XiSequence::Kind::power_law;
    pw.c = 1.0;
    pw.alpha = 2.0;
    CHECK(pw.value(3) == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
    // the zeta tails come from a finite Euler-Maclaurin stretch, so allow
    // a little more room than for the geometric closed forms
    CHECK(pw.tail_sum(0) == doctest::Approx(1.6449340668482264).epsilon(1e-10));
    CHECK(pw.tail_sum(10) == doctest::Approx(0.09516633568168574).epsilon(1e-10));
}

TEST_CASE("logit variation bound covers the brute-force supremum") {
    AutoregressiveSpec spec;
    spec.xi.c = 0.5;
    spec.xi.rho = 0.5;
    const Kernel kernel{KernelSpec{spec}};
    CHECK(kernel.var_bound(2) == doctest::Approx(spec.xi.tail_sum(2)).epsilon(1e-13));

    const auto pasts = all_pasts(7);
    std::vector<double> plus;
    plus.reserve(pasts.size());
    for (const Past& x : pasts) plus.push_back(kernel.cum(2, x.view()));
    for (int k = 0; k <= 4; ++k) {
        double sup = 0.0;
        for (std::size_t i = 0; i < pasts.size(); ++i)
            for (std::size_t j = i + 1; j < pasts.size(); ++j) {
                if (!agree_to_depth(pasts[i].view(), pasts[j].view(), k)) continue;
                sup = std::max(sup, std::abs(plus[i] - plus[j]));
            }
        CHECK(sup <= kernel.var_bound(static_cast<std::uint64_t>(k)) + 1e-12);
    }
}

TEST_CASE("renewal kernel reads the run of leading plus symbols") {
    CHECK(ell(Past({2, 2, 1}, 1).view()) == 2);
    CHECK(ell(Past({1}, 2).view()) == 0);
    CHECK(ell(Past({2, 2}, 1).view()) == 2);
    CHECK(!ell(Past::constant(2).view()).has_value());
    CHECK(ell(Past({2, 2}, 2).view()) == std::nullopt);

    RenewalSpec spec;
    spec.p.kind = PSequence::Kind::explicit_list;
    spec.p.values = {0.5, 0.4};
    spec.p.tail = 0.3;
    const Kernel kernel{KernelSpec{spec}};
    CHECK(std::string(kernel.family()) == "renewal_ell");
    CHECK(kernel.attractive());
    CHECK(kernel.prob(1, Past({2, 2, 1}, 1).view()) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(kernel.prob(1, Past({1}, 2).view()) == doctest::Approx(0.5).epsilon(1e-15));
    // all-plus past takes the limiting stopping probability
    CHECK(kernel.prob(1, Past::constant(2).view()) == doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("stopping sequences validate monotonicity") {
    PSequence p;
    p.kind = PSequence::Kind::explicit_list;
    p.values = {0.3, 0.5};
    p.tail = 0.1;
    CHECK_THROWS_AS(p.validate(), InvalidParams);

    PSequence h;
    h.kind = PSequence::Kind::harmonic;
    CHECK(h.value(0) == doctest::Approx(0.5));
    CHECK(h.value(3) == doctest::Approx(0.4));
    CHECK(h.limit() == doctest::Approx(0.0));
    h.validate();
}

TEST_CASE("finite-order kernel reproduces its rows and certifies order") {
    MarkovSpec spec;
    spec.order = 1;
    spec.alphabet = 2;
    spec.rows = {{0.6, 0.4}, {0.3, 0.7}};
    const Kernel kernel{KernelSpec{spec}};
    CHECK(std::string(kernel.family()) == "finite_markov");
    CHECK(kernel.attractive());
    CHECK(kernel.prob(2, Past::constant(1).view()) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(kernel.prob(2, Past::constant(2).view()) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(kernel.var_bound(0) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(kernel.var_bound(1) == 0.0);
    CHECK(kernel.var_bound(5) == 0.0);

    MarkovSpec bad = spec;
    bad.rows = {{0.3, 0.7}, {0.6, 0.4}};  // upper cumulative decreases in the past
    const Kernel nk{KernelSpec{bad}};
    CHECK(!nk.attractive());

    MarkovSpec broken = spec;
    broken.rows = {{0.6, 0.5}, {0.3, 0.7}};
    CHECK_THROWS_AS(Kernel{KernelSpec{broken}}, InvalidParams);
}

TEST_CASE("attractiveness sampler accepts monotone kernels and indicts others") {
    BkSpec bk;
    const AttractivenessReport good = check_attractive(Kernel{KernelSpec{bk}}, 500, 99);
    CHECK(good.passed);
    CHECK(good.pairs_checked == 500);
    CHECK(good.violations.empty());

    MarkovSpec bad;
    bad.order = 1;
    bad.alphabet = 2;
    bad.rows = {{0.3, 0.7}, {0.6, 0.4}};
    const AttractivenessReport report = check_attractive(Kernel{KernelSpec{bad}}, 500, 99);
    CHECK(!report.passed);
    CHECK(!report.violations.empty());
    CHECK(report.violations.front().gap > 0.0);
}

TEST_CASE("kernel parameter validation rejects out-of-range families") {
    BkSpec bk;
    bk.epsilon = 0.5;
    CHECK_THROWS_AS(Kernel{KernelSpec{bk}}, InvalidParams);
    bk.epsilon = 0.1;
    bk.r = 0.5;  // level mass must stay summable against the window growth
    CHECK_THROWS_AS(Kernel{KernelSpec{bk}}, InvalidParams);

    XiSequence xi;
    xi.kind = XiSequence::Kind::power_law;
    xi.alpha = 1.0;
    CHECK_THROWS_AS(xi.validate(), InvalidParams);
}
