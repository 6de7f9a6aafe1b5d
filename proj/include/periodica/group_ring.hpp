#pragma once

// Integer group ring of Z^d and its l1 completion with finitely supported
// representatives. An L1Element carries a certified `tail`: the true
// infinite-support element differs from the stored one by at most `tail`
// in l1 norm. Arithmetic propagates tails conservatively and folds the
// floating-point roundoff of each operation into the tail as well.

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <gmpxx.h>

#include "periodica/errors.hpp"
#include "periodica/zd_group.hpp"

namespace periodica {

namespace detail {
// Canonical term storage: sorted by enumeration order, no zeros.
template <typename C>
using TermVec = std::vector<std::pair<GroupElement, C>>;

template <typename C>
void normalize_terms(TermVec<C>& t) {
    std::sort(t.begin(), t.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    size_t w = 0;
    for (size_t r = 0; r < t.size(); ++r) {
        if (w > 0 && t[w - 1].first == t[r].first) {
            t[w - 1].second += t[r].second;
        } else {
            t[w++] = t[r];
        }
    }
    t.resize(w);
    std::erase_if(t, [](const auto& p) { return p.second == C(0); });
}
}  // namespace detail

class GroupRingElement {
  public:
    using Terms = detail::TermVec<std::int64_t>;

    GroupRingElement() = default;
    explicit GroupRingElement(int dim) : dim_(dim) {}

    static GroupRingElement zero(int dim) { return GroupRingElement(dim); }

    static GroupRingElement delta(const GroupElement& g, std::int64_t c = 1) {
        GroupRingElement r(g.dim());
        if (c != 0) r.t_.push_back({g, c});
        return r;
    }

    static GroupRingElement of(int dim, Terms terms) {
        GroupRingElement r(dim);
        r.t_ = std::move(terms);
        detail::normalize_terms(r.t_);
        return r;
    }

    int dim() const noexcept { return dim_; }
    const Terms& terms() const noexcept { return t_; }
    bool is_zero() const noexcept { return t_.empty(); }

    std::int64_t coeff(const GroupElement& g) const {
        auto it = std::lower_bound(
            t_.begin(), t_.end(), g,
            [](const auto& p, const GroupElement& x) { return p.first < x; });
        if (it != t_.end() && it->first == g) return it->second;
        return 0;
    }

    FiniteSubset support() const {
        std::vector<GroupElement> s;
        s.reserve(t_.size());
        for (const auto& [g, c] : t_) s.push_back(g);
        return FiniteSubset::of(dim_, std::move(s));
    }

    std::int64_t norm_l1() const {
        std::int64_t n = 0;
        for (const auto& [g, c] : t_) n += std::abs(c);
        return n;
    }

    std::int64_t norm_linf() const {
        std::int64_t n = 0;
        for (const auto& [g, c] : t_) n = std::max(n, std::abs(c));
        return n;
    }

    GroupRingElement operator+(const GroupRingElement& o) const {
        Terms t = t_;
        t.insert(t.end(), o.t_.begin(), o.t_.end());
        return of(dim_, std::move(t));
    }
    GroupRingElement operator-(const GroupRingElement& o) const {
        Terms t = t_;
        for (const auto& [g, c] : o.t_) t.push_back({g, -c});
        return of(dim_, std::move(t));
    }
    GroupRingElement scaled(std::int64_t k) const {
        Terms t;
        if (k != 0)
            for (const auto& [g, c] : t_) t.push_back({g, c * k});
        return of(dim_, std::move(t));
    }

    // Ring product: (a b)_t = sum_s a_s b_{s^{-1} t}.
    GroupRingElement operator*(const GroupRingElement& o) const {
        std::unordered_map<GroupElement, std::int64_t, GroupElementHash> acc;
        for (const auto& [s, cs] : t_)
            for (const auto& [u, cu] : o.t_) acc[s.mul(u)] += cs * cu;
        Terms t;
        t.reserve(acc.size());
        for (auto& [g, c] : acc) t.push_back({g, c});
        return of(dim_, std::move(t));
    }

    // f* : coefficient at s moves to s^{-1}.
    GroupRingElement involution() const {
        Terms t;
        t.reserve(t_.size());
        for (const auto& [g, c] : t_) t.push_back({g.inv(), c});
        return of(dim_, std::move(t));
    }

    GroupRingElement translated(const GroupElement& s) const {  // s . v
        Terms t;
        t.reserve(t_.size());
        for (const auto& [g, c] : t_) t.push_back({s.mul(g), c});
        return of(dim_, std::move(t));
    }

    GroupRingElement restricted(const FiniteSubset& w) const {
        Terms t;
        for (const auto& [g, c] : t_)
            if (w.contains(g)) t.push_back({g, c});
        return of(dim_, std::move(t));
    }

    bool operator==(const GroupRingElement& o) const { return t_ == o.t_; }

  private:
    int dim_ = 1;
    Terms t_;
};

// Finitely supported real element with a certified l1 tail bound.
class L1Element {
  public:
    using Terms = detail::TermVec<double>;

    L1Element() = default;
    explicit L1Element(int dim) : dim_(dim) {}

    static L1Element of(int dim, Terms terms, double tail = 0.0) {
        L1Element r(dim);
        r.t_ = std::move(terms);
        r.tail_ = tail;
        detail::normalize_terms(r.t_);
        return r;
    }

    static L1Element from_ring(const GroupRingElement& a) {
        Terms t;
        t.reserve(a.terms().size());
        for (const auto& [g, c] : a.terms())
            t.push_back({g, static_cast<double>(c)});
        return of(a.dim(), std::move(t), 0.0);
    }

    static L1Element delta(const GroupElement& g, double c = 1.0) {
        L1Element r(g.dim());
        if (c != 0) r.t_.push_back({g, c});
        return r;
    }

    int dim() const noexcept { return dim_; }
    const Terms& terms() const noexcept { return t_; }
    double tail() const noexcept { return tail_; }
    void set_tail(double t) { tail_ = t; }

    double coeff(const GroupElement& g) const {
        auto it = std::lower_bound(
            t_.begin(), t_.end(), g,
            [](const auto& p, const GroupElement& x) { return p.first < x; });
        if (it != t_.end() && it->first == g) return it->second;
        return 0.0;
    }

    FiniteSubset support() const {
        std::vector<GroupElement> s;
        s.reserve(t_.size());
        for (const auto& [g, c] : t_) s.push_back(g);
        return FiniteSubset::of(dim_, std::move(s));
    }

    double stored_norm_l1() const {
        double n = 0;
        for (const auto& [g, c] : t_) n += std::abs(c);
        return n;
    }

    // [stored, stored + tail] brackets the true l1 norm.
    std::pair<double, double> norm_l1_interval() const {
        double s = stored_norm_l1();
        return {s, s + tail_};
    }

    // Stored mass lying outside W plus the tail.
    double mass_outside(const FiniteSubset& w) const {
        double m = 0;
        for (const auto& [g, c] : t_)
            if (!w.contains(g)) m += std::abs(c);
        return m + tail_;
    }

    L1Element restricted(const FiniteSubset& w) const {
        Terms t;
        for (const auto& [g, c] : t_)
            if (w.contains(g)) t.push_back({g, c});
        return of(dim_, std::move(t), 0.0);
    }

    L1Element operator+(const L1Element& o) const {
        Terms t = t_;
        t.insert(t.end(), o.t_.begin(), o.t_.end());
        double eps = std::numeric_limits<double>::epsilon();
        double round = eps * (stored_norm_l1() + o.stored_norm_l1());
        return of(dim_, std::move(t), tail_ + o.tail_ + round);
    }
    L1Element operator-(const L1Element& o) const {
        Terms t = t_;
        for (const auto& [g, c] : o.t_) t.push_back({g, -c});
        double eps = std::numeric_limits<double>::epsilon();
        double round = eps * (stored_norm_l1() + o.stored_norm_l1());
        return of(dim_, std::move(t), tail_ + o.tail_ + round);
    }

    bool operator==(const L1Element& o) const {
        return t_ == o.t_ && tail_ == o.tail_;
    }

  private:
    int dim_ = 1;
    Terms t_;
    double tail_ = 0.0;
};

// Convolution with tail propagation:
//   tail(ab) <= tail(a) ||b|| + ||a|| tail(b) + tail(a) tail(b) + roundoff.
// Accumulation order per output coefficient is fixed by the sorted term
// order, so results do not depend on scheduling.
inline L1Element convolve(const L1Element& a, const L1Element& b) {
    struct Slot {
        double sum = 0, abssum = 0;
        unsigned count = 0;
    };
    std::unordered_map<GroupElement, Slot, GroupElementHash> acc;
    for (const auto& [s, cs] : a.terms())
        for (const auto& [u, cu] : b.terms()) {
            Slot& sl = acc[s.mul(u)];
            double p = cs * cu;
            sl.sum += p;
            sl.abssum += std::abs(p);
            ++sl.count;
        }
    L1Element::Terms t;
    t.reserve(acc.size());
    double roundoff = 0;
    double eps = std::numeric_limits<double>::epsilon();
    for (auto& [g, sl] : acc) {
        t.push_back({g, sl.sum});
        roundoff += sl.abssum * static_cast<double>(sl.count + 1) * eps;
    }
    auto [na0, na1] = a.norm_l1_interval();
    auto [nb0, nb1] = b.norm_l1_interval();
    double tail = a.tail() * nb1 + na1 * b.tail() + roundoff;
    return L1Element::of(a.dim(), std::move(t), tail);
}

inline L1Element convolve(const GroupRingElement& a, const L1Element& b) {
    return convolve(L1Element::from_ring(a), b);
}
inline L1Element convolve(const L1Element& a, const GroupRingElement& b) {
    return convolve(a, L1Element::from_ring(b));
}
inline GroupRingElement convolve(const GroupRingElement& a,
                                 const GroupRingElement& b) {
    return a * b;
}

// Right action of the ring on configurations: (r_a x)_t = sum_s a_s x_{t s}.
// For integer configurations x this is exact.
inline GroupRingElement right_apply(const GroupRingElement& a,
                                    const GroupRingElement& x) {
    std::unordered_map<GroupElement, std::int64_t, GroupElementHash> acc;
    for (const auto& [w, cw] : x.terms())
        for (const auto& [s, cs] : a.terms())
            acc[w.mul(s.inv())] += cs * cw;  // t = w s^{-1}
    GroupRingElement::Terms t;
    t.reserve(acc.size());
    for (auto& [g, c] : acc) t.push_back({g, c});
    return GroupRingElement::of(a.dim(), std::move(t));
}

// ---------------------------------------------------------------------------
// Text form used in configs: "3*e - 1*x(1) - 1*x(-1)" on Z,
// "x(a,b)" on Z^2, and so on. Whitespace is free; "*" after the
// coefficient is optional.

inline std::string format_group_ring(const GroupRingElement& f) {
    if (f.is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [g, c] : f.terms()) {
        std::int64_t a = c;
        if (first) {
            if (a < 0) os << "-";
        } else {
            os << (a < 0 ? " - " : " + ");
        }
        first = false;
        os << std::abs(a) << "*";
        if (g.is_identity()) {
            os << "e";
        } else {
            os << "x(";
            for (int i = 0; i < g.dim(); ++i) {
                if (i) os << ",";
                os << g[i];
            }
            os << ")";
        }
    }
    return os.str();
}

inline GroupRingElement parse_group_ring(const std::string& text, int dim) {
    GroupRingElement::Terms terms;
    size_t i = 0;
    auto skip_ws = [&] { while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i; };
    auto parse_int = [&]() -> std::int64_t {
        skip_ws();
        size_t start = i;
        if (i < text.size() && (text[i] == '+' || text[i] == '-')) ++i;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
        if (i == start || (i == start + 1 && !std::isdigit(static_cast<unsigned char>(text[start]))))
            throw ConfigError("group ring parse: expected integer at offset " +
                              std::to_string(start) + " in '" + text + "'");
        return std::stoll(text.substr(start, i - start));
    };

    skip_ws();
    if (text.substr(i) == "0") return GroupRingElement::zero(dim);

    bool first = true;
    while (true) {
        skip_ws();
        if (i >= text.size()) break;
        std::int64_t sign = 1;
        if (text[i] == '+' || text[i] == '-') {
            sign = text[i] == '-' ? -1 : 1;
            ++i;
        } else if (!first) {
            throw ConfigError("group ring parse: expected '+' or '-' in '" +
                              text + "'");
        }
        first = false;
        skip_ws();
        std::int64_t coef = 1;
        bool star = false;
        if (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
            coef = parse_int();
            skip_ws();
            if (i < text.size() && text[i] == '*') { ++i; skip_ws(); star = true; }
        }
        GroupElement g = GroupElement::identity(dim);
        if (star && (i >= text.size() || (text[i] != 'e' && text[i] != 'x')))
            throw ConfigError("group ring parse: expected monomial after '*' in '" +
                              text + "'");
        if (i < text.size() && (text[i] == 'e' || text[i] == 'x')) {
            if (text[i] == 'e') {
                ++i;
            } else {
                ++i;
                skip_ws();
                if (i >= text.size() || text[i] != '(')
                    throw ConfigError("group ring parse: expected '(' in '" + text + "'");
                ++i;
                std::vector<std::int64_t> coords;
                while (true) {
                    coords.push_back(parse_int());
                    skip_ws();
                    if (i < text.size() && text[i] == ',') { ++i; continue; }
                    break;
                }
                if (i >= text.size() || text[i] != ')')
                    throw ConfigError("group ring parse: expected ')' in '" + text + "'");
                ++i;
                if (static_cast<int>(coords.size()) != dim)
                    throw ConfigError("group ring parse: monomial arity " +
                                      std::to_string(coords.size()) +
                                      " does not match dimension " +
                                      std::to_string(dim));
                g = GroupElement::of(coords);
            }
        }
        terms.push_back({g, sign * coef});
    }
    if (terms.empty())
        throw ConfigError("group ring parse: empty expression");
    return GroupRingElement::of(dim, std::move(terms));
}

}  // namespace periodica
