#include "chains/alphabet.hpp"

#include <algorithm>

namespace chains {

Order compare(PastView x, PastView y) {
    const std::size_t m = std::max(x.prefix.size(), y.prefix.size());
    bool le = true, ge = true;
    for (std::size_t d = 1; d <= m; ++d) {
        const Symbol a = x.at(d), b = y.at(d);
        le = le && a <= b;
        ge = ge && a >= b;
        if (!le && !ge) return Order::incomparable;
    }
    // beyond both prefixes only the tails matter
    le = le && x.tail <= y.tail;
    ge = ge && x.tail >= y.tail;
    if (le && ge) return Order::equal;
    if (le) return Order::less;
    if (ge) return Order::greater;
    return Order::incomparable;
}

static Past combine(PastView x, PastView y, bool take_min) {
    const std::size_t m = std::max(x.prefix.size(), y.prefix.size());
    std::vector<Symbol> p(m);
    for (std::size_t d = 1; d <= m; ++d)
        p[d - 1] = take_min ? std::min(x.at(d), y.at(d)) : std::max(x.at(d), y.at(d));
    const Symbol t = take_min ? std::min(x.tail, y.tail) : std::max(x.tail, y.tail);
    // trim prefix entries that already equal the tail
    while (!p.empty() && p.back() == t) p.pop_back();
    return Past(std::move(p), t);
}

Past meet(PastView x, PastView y) { return combine(x, y, true); }
Past join(PastView x, PastView y) { return combine(x, y, false); }

}  // namespace chains
