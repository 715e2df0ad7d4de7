#include "chains/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace chains {

namespace {

constexpr double kClamp = 1e-14;
constexpr double kMassTol = 1e-12;

}  // namespace

CellTable CellTable::from_values(int s, std::vector<double> cells) {
    if (s < 2) throw InvalidParams("cell table needs alphabet size >= 2");
    if (cells.size() != static_cast<std::size_t>(s) * static_cast<std::size_t>(s))
        throw InvalidParams("cell table has wrong cell count");
    double total = 0.0;
    for (double& c : cells) {
        if (!(c >= -kClamp))
            throw NumericalIntegrity("coupling cell below -1e-14: " + std::to_string(c));
        if (c < 0.0) c = 0.0;
        total += c;
    }
    if (std::abs(total - 1.0) > kMassTol)
        throw NumericalIntegrity("coupling cells sum to " + std::to_string(total));
    return CellTable(s, std::move(cells));
}

std::vector<double> CellTable::left_marginal() const {
    std::vector<double> m(static_cast<std::size_t>(s_), 0.0);
    for (int a = 1; a <= s_; ++a)
        for (int b = 1; b <= s_; ++b) m[static_cast<std::size_t>(a - 1)] += at(a, b);
    return m;
}

std::vector<double> CellTable::right_marginal() const {
    std::vector<double> m(static_cast<std::size_t>(s_), 0.0);
    for (int a = 1; a <= s_; ++a)
        for (int b = 1; b <= s_; ++b) m[static_cast<std::size_t>(b - 1)] += at(a, b);
    return m;
}

std::string CellTable::to_csv() const {
    std::string out;
    char buf[40];
    for (int a = 1; a <= s_; ++a) {
        for (int b = 1; b <= s_; ++b) {
            std::snprintf(buf, sizeof buf, "%.17g", at(a, b));
            out += buf;
            out += (b == s_) ? '\n' : ',';
        }
    }
    return out;
}

double coupling_cum(const Kernel& kernel, int a, int b, PastView x, PastView y) {
    return std::min(kernel.cum(a, x), kernel.cum(b, y));
}

CellTable coupling_joint(const Kernel& kernel, PastView x, PastView y) {
    const int s = kernel.alphabet_size();
    // cumx[a], cumy[b] for a, b in 1..s+1; endpoints are exactly 1 and 0, so
    // identical pasts telescope to an exactly diagonal table
    std::vector<double> cumx(static_cast<std::size_t>(s) + 2), cumy(static_cast<std::size_t>(s) + 2);
    for (int a = 1; a <= s + 1; ++a) {
        cumx[static_cast<std::size_t>(a)] = kernel.cum(a, x);
        cumy[static_cast<std::size_t>(a)] = kernel.cum(a, y);
    }
    auto cc = [&](int a, int b) {
        return std::min(cumx[static_cast<std::size_t>(a)], cumy[static_cast<std::size_t>(b)]);
    };
    std::vector<double> cells;
    cells.reserve(static_cast<std::size_t>(s) * static_cast<std::size_t>(s));
    for (int a = 1; a <= s; ++a)
        for (int b = 1; b <= s; ++b)
            cells.push_back(cc(a, b) - cc(a + 1, b) - cc(a, b + 1) + cc(a + 1, b + 1));
    return CellTable::from_values(s, std::move(cells));
}

CouplingMarginals coupling_marginals(const CellTable& table) {
    return CouplingMarginals{table.left_marginal(), table.right_marginal()};
}

Interval joint_cum_bracket(const Kernel& kernel, int a, int b,
                           std::span<const Symbol> left_prefix,
                           std::span<const Symbol> right_prefix) {
    const int s = kernel.alphabet_size();
    if (a < 1 || a > s + 1 || b < 1 || b > s + 1)
        throw InvalidParams("bracket symbols out of range");
    if (!kernel.attractive())
        throw NotAttractive("tail bracket requires an attractive kernel");
    const Symbol bot = 1;
    const Symbol top = static_cast<Symbol>(s);
    PastView xlo{left_prefix, bot}, xhi{left_prefix, top};
    PastView ylo{right_prefix, bot}, yhi{right_prefix, top};
    Interval out;
    out.lo = std::min(kernel.cum(a, xlo), kernel.cum(b, ylo));
    out.hi = std::min(kernel.cum(a, xhi), kernel.cum(b, yhi));
    if (out.lo > out.hi + 1e-12)
        throw NumericalIntegrity("tail bracket inverted");
    if (out.lo > out.hi) out.lo = out.hi;
    return out;
}

}  // namespace chains
