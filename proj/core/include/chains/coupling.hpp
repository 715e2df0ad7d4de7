#pragma once

#include <span>
#include <string>
#include <vector>

#include "chains/alphabet.hpp"
#include "chains/errors.hpp"
#include "chains/kernels.hpp"

// The maximal monotone pair coupling. Its cumulative is
//   P((x0 >= a, y0 >= b) | (x, y)) = cum(a, x) /\ cum(b, y)
// and joint cells follow by the four-term difference. Cells of a probability
// table are clamped to zero when within -1e-14 (float noise only); anything
// more negative is a genuine defect and raises NumericalIntegrity.

namespace chains {

struct Interval {
    double lo = 0.0, hi = 0.0;

    double width() const { return hi - lo; }
    bool contains(double v) const { return lo <= v && v <= hi; }
};

class CellTable {
public:
    // validates: clamps cells in [-1e-14, 0) to 0, rejects anything lower,
    // requires total mass 1 within 1e-12
    static CellTable from_values(int s, std::vector<double> cells);

    int alphabet_size() const { return s_; }
    double at(int a, int b) const { return cells_[idx(a, b)]; }
    std::span<const double> raw() const { return cells_; }

    std::vector<double> left_marginal() const;   // row sums: P(a | x)
    std::vector<double> right_marginal() const;  // column sums: P(b | y)

    // s rows by s columns, row index = left symbol a
    std::string to_csv() const;

private:
    CellTable(int s, std::vector<double> cells) : s_(s), cells_(std::move(cells)) {}
    std::size_t idx(int a, int b) const {
        return static_cast<std::size_t>(a - 1) * static_cast<std::size_t>(s_) + static_cast<std::size_t>(b - 1);
    }

    int s_;
    std::vector<double> cells_;
};

struct CouplingMarginals {
    std::vector<double> left, right;
};

// cumulative of the coupling at (a, b); a, b in [1, s+1]
double coupling_cum(const Kernel& kernel, int a, int b, PastView x, PastView y);

// full s x s cell table of the coupling given a fully specified pair past
CellTable coupling_joint(const Kernel& kernel, PastView x, PastView y);

CouplingMarginals coupling_marginals(const CellTable& table);

// bracket of coupling_cum over every tail completion of two finite prefixes:
// lo evaluates both tails at the bottom symbol, hi at the top; requires an
// attractive kernel (throws NotAttractive)
Interval joint_cum_bracket(const Kernel& kernel, int a, int b,
                           std::span<const Symbol> left_prefix,
                           std::span<const Symbol> right_prefix);

}  // namespace chains
