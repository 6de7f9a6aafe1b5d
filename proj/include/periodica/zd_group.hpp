#pragma once

// Z^d group layer: elements, finite subsets, Folner boxes, congruence
// subgroups and their fundamental domains.
//
// The enumeration order is part of the reproducibility contract: elements
// are ordered by word length (sup norm) first, then lexicographically by
// coordinates. Everything downstream (metric weights, tail windows, greedy
// sweeps) is defined relative to this order.

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <unordered_set>
#include <vector>

#include <gmpxx.h>

#include "periodica/errors.hpp"

namespace periodica {

inline constexpr int kMaxDim = 6;

class GroupElement {
  public:
    GroupElement() = default;

    static GroupElement identity(int dim) {
        GroupElement g;
        g.dim_ = check_dim(dim);
        return g;
    }

    static GroupElement of(std::span<const std::int64_t> coords) {
        GroupElement g;
        g.dim_ = check_dim(static_cast<int>(coords.size()));
        std::copy(coords.begin(), coords.end(), g.c_.begin());
        return g;
    }

    static GroupElement of(std::initializer_list<std::int64_t> coords) {
        return of(std::span<const std::int64_t>(coords.begin(), coords.size()));
    }

    int dim() const noexcept { return dim_; }
    std::int64_t operator[](int i) const { return c_[static_cast<size_t>(i)]; }
    std::int64_t& coord(int i) { return c_[static_cast<size_t>(i)]; }

    GroupElement mul(const GroupElement& o) const {
        require_same_dim(o);
        GroupElement r;
        r.dim_ = dim_;
        for (int i = 0; i < dim_; ++i) r.c_[size_t(i)] = c_[size_t(i)] + o.c_[size_t(i)];
        return r;
    }

    GroupElement inv() const {
        GroupElement r;
        r.dim_ = dim_;
        for (int i = 0; i < dim_; ++i) r.c_[size_t(i)] = -c_[size_t(i)];
        return r;
    }

    bool is_identity() const {
        for (int i = 0; i < dim_; ++i)
            if (c_[size_t(i)] != 0) return false;
        return true;
    }

    // Word length: sup norm of the coordinates.
    std::int64_t word_length() const {
        std::int64_t m = 0;
        for (int i = 0; i < dim_; ++i) m = std::max(m, std::abs(c_[size_t(i)]));
        return m;
    }

    bool operator==(const GroupElement& o) const {
        if (dim_ != o.dim_) return false;
        for (int i = 0; i < dim_; ++i)
            if (c_[size_t(i)] != o.c_[size_t(i)]) return false;
        return true;
    }
    bool operator!=(const GroupElement& o) const { return !(*this == o); }

    // Enumeration order: length, then lexicographic.
    bool operator<(const GroupElement& o) const {
        std::int64_t a = word_length(), b = o.word_length();
        if (a != b) return a < b;
        for (int i = 0; i < dim_; ++i)
            if (c_[size_t(i)] != o.c_[size_t(i)]) return c_[size_t(i)] < o.c_[size_t(i)];
        return false;
    }

    size_t hash() const noexcept {
        size_t h = 1469598103934665603ull;
        for (int i = 0; i < dim_; ++i) {
            h ^= static_cast<size_t>(c_[size_t(i)]) + 0x9e3779b97f4a7c15ull;
            h *= 1099511628211ull;
        }
        return h;
    }

  private:
    static int check_dim(int d) {
        if (d < 1 || d > kMaxDim)
            throw ConfigError("group dimension must be in [1, " +
                              std::to_string(kMaxDim) + "]");
        return d;
    }
    void require_same_dim(const GroupElement& o) const {
        if (dim_ != o.dim_) throw InternalError("mixed group dimensions");
    }

    std::array<std::int64_t, kMaxDim> c_{};
    int dim_ = 1;
};

struct GroupElementHash {
    size_t operator()(const GroupElement& g) const noexcept { return g.hash(); }
};

// Finite subset of Z^d held as a sorted (enumeration order) vector.
// Value type: all operations produce new sets.
class FiniteSubset {
  public:
    FiniteSubset() = default;
    explicit FiniteSubset(int dim) : dim_(dim) {}

    static FiniteSubset of(int dim, std::vector<GroupElement> elems) {
        FiniteSubset s(dim);
        s.v_ = std::move(elems);
        s.normalize();
        return s;
    }

    // Half-open box prod_i [lo_i, hi_i).
    static FiniteSubset box(std::span<const std::int64_t> lo,
                            std::span<const std::int64_t> hi) {
        int d = static_cast<int>(lo.size());
        if (hi.size() != lo.size()) throw InternalError("box corner dims differ");
        for (int i = 0; i < d; ++i)
            if (lo[size_t(i)] > hi[size_t(i)]) throw ConfigError("empty box range");
        FiniteSubset s(d);
        std::vector<std::int64_t> cur(lo.begin(), lo.end());
        while (true) {
            s.v_.push_back(GroupElement::of(cur));
            int i = 0;
            for (; i < d; ++i) {
                if (++cur[size_t(i)] < hi[size_t(i)]) break;
                cur[size_t(i)] = lo[size_t(i)];
            }
            if (i == d) break;
        }
        s.normalize();
        return s;
    }

    // [0, n)^d
    static FiniteSubset cube(int dim, std::int64_t n) {
        std::vector<std::int64_t> lo(size_t(dim), 0), hi(size_t(dim), n);
        return box(lo, hi);
    }

    // Closed ball of given word-length radius.
    static FiniteSubset ball(int dim, std::int64_t r) {
        std::vector<std::int64_t> lo(size_t(dim), -r), hi(size_t(dim), r + 1);
        return box(lo, hi);
    }

    int dim() const noexcept { return dim_; }
    size_t size() const noexcept { return v_.size(); }
    bool empty() const noexcept { return v_.empty(); }
    const std::vector<GroupElement>& elements() const noexcept { return v_; }
    auto begin() const { return v_.begin(); }
    auto end() const { return v_.end(); }

    bool contains(const GroupElement& g) const {
        return std::binary_search(v_.begin(), v_.end(), g);
    }

    FiniteSubset set_union(const FiniteSubset& o) const {
        FiniteSubset r(dim_);
        std::set_union(v_.begin(), v_.end(), o.v_.begin(), o.v_.end(),
                       std::back_inserter(r.v_));
        return r;
    }
    FiniteSubset set_intersection(const FiniteSubset& o) const {
        FiniteSubset r(dim_);
        std::set_intersection(v_.begin(), v_.end(), o.v_.begin(), o.v_.end(),
                              std::back_inserter(r.v_));
        return r;
    }
    FiniteSubset set_difference(const FiniteSubset& o) const {
        FiniteSubset r(dim_);
        std::set_difference(v_.begin(), v_.end(), o.v_.begin(), o.v_.end(),
                            std::back_inserter(r.v_));
        return r;
    }
    FiniteSubset symmetric_difference(const FiniteSubset& o) const {
        FiniteSubset r(dim_);
        std::set_symmetric_difference(v_.begin(), v_.end(), o.v_.begin(),
                                      o.v_.end(), std::back_inserter(r.v_));
        return r;
    }

    FiniteSubset translated_left(const GroupElement& g) const {  // gF
        FiniteSubset r(dim_);
        r.v_.reserve(v_.size());
        for (const auto& e : v_) r.v_.push_back(g.mul(e));
        r.normalize();
        return r;
    }
    FiniteSubset translated_right(const GroupElement& g) const {  // Fg
        FiniteSubset r(dim_);
        r.v_.reserve(v_.size());
        for (const auto& e : v_) r.v_.push_back(e.mul(g));
        r.normalize();
        return r;
    }

    FiniteSubset inverse() const {  // F^{-1}
        FiniteSubset r(dim_);
        r.v_.reserve(v_.size());
        for (const auto& e : v_) r.v_.push_back(e.inv());
        r.normalize();
        return r;
    }

    // Setwise product FK by exhaustive pairwise products with dedup.
    FiniteSubset product(const FiniteSubset& k) const {
        std::unordered_set<GroupElement, GroupElementHash> acc;
        acc.reserve(v_.size() * std::max<size_t>(k.size(), 1));
        for (const auto& a : v_)
            for (const auto& b : k.v_) acc.insert(a.mul(b));
        FiniteSubset r(dim_);
        r.v_.assign(acc.begin(), acc.end());
        r.normalize();
        return r;
    }

    // F eroded by K: {s : sK subset of F}.
    FiniteSubset eroded(const FiniteSubset& k) const {
        FiniteSubset r(dim_);
        for (const auto& s : v_) {
            bool all = true;
            for (const auto& t : k.v_) {
                if (!contains(s.mul(t))) { all = false; break; }
            }
            if (all) r.v_.push_back(s);
        }
        return r;  // already sorted
    }

    bool operator==(const FiniteSubset& o) const { return v_ == o.v_; }

  private:
    void normalize() {
        std::sort(v_.begin(), v_.end());
        v_.erase(std::unique(v_.begin(), v_.end()), v_.end());
    }

    int dim_ = 1;
    std::vector<GroupElement> v_;
};

// |F triangle KF| / |F| as an exact rational.
inline mpq_class folner_defect(const FiniteSubset& f, const FiniteSubset& k) {
    if (f.empty())
        throw ConfigError("folner_defect: F must be nonempty");
    FiniteSubset kf = k.product(f);
    FiniteSubset sym = f.symmetric_difference(kf);
    mpq_class q(static_cast<unsigned long>(sym.size()),
                static_cast<unsigned long>(f.size()));
    q.canonicalize();
    return q;
}

// Folner sequence of boxes [0,n)^d.
struct FolnerSequence {
    int dim = 1;
    FiniteSubset operator()(std::int64_t n) const {
        if (n < 1) throw ConfigError("Folner index must be >= 1");
        return FiniteSubset::cube(dim, n);
    }
};

// (nZ)^d inside Z^d.
class FiniteIndexSubgroup {
  public:
    FiniteIndexSubgroup(int dim, std::int64_t modulus)
        : dim_(dim), n_(modulus) {
        if (modulus < 1)
            throw ConfigError("congruence modulus must be >= 1");
    }

    int dim() const noexcept { return dim_; }
    std::int64_t modulus() const noexcept { return n_; }

    bool member(const GroupElement& g) const {
        for (int i = 0; i < dim_; ++i)
            if (g[i] % n_ != 0) return false;
        return true;
    }

    std::int64_t index() const {
        std::int64_t r = 1;
        for (int i = 0; i < dim_; ++i) {
            if (r > (std::int64_t(1) << 62) / n_)
                throw ConfigError("subgroup index overflows");
            r *= n_;
        }
        return r;
    }

    bool operator==(const FiniteIndexSubgroup& o) const {
        return dim_ == o.dim_ && n_ == o.n_;
    }

  private:
    int dim_;
    std::int64_t n_;
};

inline FiniteIndexSubgroup congruence_subgroup(int dim, std::int64_t n) {
    return FiniteIndexSubgroup(dim, n);
}

// Q = [0,n)^d; every g factors uniquely as g = s q with s in H, q in Q.
inline FiniteSubset fundamental_domain(const FiniteIndexSubgroup& h) {
    return FiniteSubset::cube(h.dim(), h.modulus());
}

struct CosetFactorization {
    GroupElement subgroup_part;  // s in H
    GroupElement domain_part;    // q in [0,n)^d
};

inline std::int64_t floor_mod(std::int64_t a, std::int64_t n) {
    std::int64_t r = a % n;
    return r < 0 ? r + n : r;
}

inline CosetFactorization coset_reduce(const GroupElement& g,
                                       const FiniteIndexSubgroup& h) {
    const std::int64_t n = h.modulus();
    GroupElement q = GroupElement::identity(g.dim());
    GroupElement s = GroupElement::identity(g.dim());
    for (int i = 0; i < g.dim(); ++i) {
        std::int64_t r = floor_mod(g[i], n);
        q.coord(i) = r;
        s.coord(i) = g[i] - r;
    }
    return {s, q};
}

// Minimal N such that G_n meets K^{-1}K only at the identity for every
// n in [N, horizon]; verified exhaustively up to the horizon.
inline std::int64_t subgroup_limit_threshold(
    const std::function<FiniteIndexSubgroup(std::int64_t)>& schedule,
    const FiniteSubset& k, std::int64_t horizon = 0) {
    FiniteSubset kk = k.inverse().product(k);
    std::int64_t max_len = 0;
    for (const auto& g : kk) max_len = std::max(max_len, g.word_length());
    if (horizon <= 0) horizon = max_len + 1;

    auto clean = [&](std::int64_t n) {
        FiniteIndexSubgroup h = schedule(n);
        for (const auto& g : kk)
            if (!g.is_identity() && h.member(g)) return false;
        return true;
    };

    std::int64_t last_bad = 0;
    for (std::int64_t n = 1; n <= horizon; ++n)
        if (!clean(n)) last_bad = n;
    if (last_bad == horizon)
        throw DomainError(ErrorCode::no_convergence,
                          "subgroup schedule still meets K^{-1}K at the horizon");
    return last_bad + 1;
}

// Deterministic enumeration s_0, s_1, ... ordered by (word length, lex).
class Enumeration {
  public:
    explicit Enumeration(int dim) : dim_(dim) {}

    int dim() const noexcept { return dim_; }

    // First `count` elements.
    std::vector<GroupElement> prefix(size_t count) const {
        std::vector<GroupElement> out;
        out.reserve(count);
        std::int64_t r = 0;
        while (out.size() < count) {
            auto sh = shell(r);
            for (auto& g : sh) {
                out.push_back(g);
                if (out.size() == count) break;
            }
            ++r;
        }
        return out;
    }

    // All elements of word length exactly r, in lex order.
    std::vector<GroupElement> shell(std::int64_t r) const {
        std::vector<GroupElement> out;
        if (r == 0) {
            out.push_back(GroupElement::identity(dim_));
            return out;
        }
        FiniteSubset b = FiniteSubset::ball(dim_, r);
        for (const auto& g : b)
            if (g.word_length() == r) out.push_back(g);
        std::sort(out.begin(), out.end(), [](const auto& a, const auto& b2) {
            for (int i = 0; i < a.dim(); ++i)
                if (a[i] != b2[i]) return a[i] < b2[i];
            return false;
        });
        return out;
    }

    size_t ball_size(std::int64_t r) const {
        size_t s = 1;
        for (int i = 0; i < dim_; ++i) s *= static_cast<size_t>(2 * r + 1);
        return s;
    }

    // Index of g in the enumeration.
    size_t index_of(const GroupElement& g) const {
        std::int64_t r = g.word_length();
        size_t base = r == 0 ? 0 : ball_size(r - 1);
        if (r == 0) return 0;
        auto sh = shell(r);
        for (size_t i = 0; i < sh.size(); ++i)
            if (sh[i] == g) return base + i;
        throw InternalError("element missing from its own shell");
    }

  private:
    int dim_;
};

}  // namespace periodica
