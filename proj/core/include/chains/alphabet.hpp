#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

// Symbols are 1-based values in {1..s}. Binary families use the fixed coding
// -1 <-> 1, +1 <-> 2, so the coordinatewise order on symbol values matches the
// spin order. A past assigns a symbol to every negative coordinate; it is
// represented as a finite prefix (most recent first: prefix[0] = x_{-1})
// followed by an infinite constant tail.

namespace chains {

using Symbol = std::uint8_t;

inline constexpr Symbol sym_minus = 1;  // spin -1
inline constexpr Symbol sym_plus = 2;   // spin +1

constexpr int spin_of(Symbol a) { return a == sym_minus ? -1 : +1; }
constexpr Symbol sym_of_spin(int v) { return v < 0 ? sym_minus : sym_plus; }

struct PastView {
    std::span<const Symbol> prefix;  // prefix[i] = x_{-(i+1)}
    Symbol tail = sym_minus;

    // x_{-depth}, depth >= 1
    Symbol at(std::size_t depth) const {
        return depth <= prefix.size() ? prefix[depth - 1] : tail;
    }
};

class Past {
public:
    Past() : tail_(sym_minus) {}
    Past(std::vector<Symbol> prefix, Symbol tail) : prefix_(std::move(prefix)), tail_(tail) {}

    // the constant past (t, t, t, ...)
    static Past constant(Symbol t) { return Past({}, t); }

    const std::vector<Symbol>& prefix() const { return prefix_; }
    Symbol tail() const { return tail_; }
    PastView view() const { return {std::span<const Symbol>(prefix_), tail_}; }

    bool operator==(const Past& o) const = default;

private:
    std::vector<Symbol> prefix_;
    Symbol tail_;
};

enum class Order { equal, less, greater, incomparable };

// coordinatewise comparison; exact because beyond both prefixes only the
// constant tails are compared
Order compare(PastView x, PastView y);

inline bool leq(PastView x, PastView y) {
    const Order o = compare(x, y);
    return o == Order::equal || o == Order::less;
}

// coordinatewise min / max; the result is again prefix + constant tail
Past meet(PastView x, PastView y);
Past join(PastView x, PastView y);

struct PairPast {
    Past left, right;
};

}  // namespace chains
