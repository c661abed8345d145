#pragma once

#include <algorithm>
#include <vector>

#include "idem/group.hpp"

namespace idem {

// Subset of a group, stored as a membership mask over element indices.
class ElementSet {
public:
    ElementSet() : g_(nullptr), size_(0) {}
    explicit ElementSet(const FiniteAbelianGroup& g) : g_(&g), mask_(g.order(), 0), size_(0) {}
    ElementSet(const FiniteAbelianGroup& g, const std::vector<int>& elems) : ElementSet(g) {
        for (int x : elems) insert(x);
    }

    static ElementSet full(const FiniteAbelianGroup& g) {
        ElementSet s(g);
        std::fill(s.mask_.begin(), s.mask_.end(), 1);
        s.size_ = g.order();
        return s;
    }
    static ElementSet singleton(const FiniteAbelianGroup& g, int x) {
        ElementSet s(g);
        s.insert(x);
        return s;
    }

    const FiniteAbelianGroup& group() const { return *g_; }
    bool empty() const { return size_ == 0; }
    int size() const { return size_; }
    bool contains(int x) const { return mask_[x] != 0; }
    double measure() const { return static_cast<double>(size_) / g_->order(); }
    Rational measure_exact() const { return Rational(size_, g_->order()); }

    void insert(int x) {
        if (!mask_[x]) {
            mask_[x] = 1;
            ++size_;
        }
    }
    void erase(int x) {
        if (mask_[x]) {
            mask_[x] = 0;
            --size_;
        }
    }

    std::vector<int> elements() const {
        std::vector<int> v;
        v.reserve(size_);
        for (int x = 0; x < static_cast<int>(mask_.size()); ++x)
            if (mask_[x]) v.push_back(x);
        return v;
    }

    bool operator==(const ElementSet& o) const { return mask_ == o.mask_; }
    bool subset_of(const ElementSet& o) const {
        for (size_t i = 0; i < mask_.size(); ++i)
            if (mask_[i] && !o.mask_[i]) return false;
        return true;
    }

    ElementSet negate() const {
        ElementSet r(*g_);
        for (int x = 0; x < g_->order(); ++x)
            if (mask_[x]) r.insert(g_->neg(x));
        return r;
    }
    bool is_symmetric() const { return *this == negate(); }

    ElementSet translate(int t) const {
        ElementSet r(*g_);
        for (int x = 0; x < g_->order(); ++x)
            if (mask_[x]) r.insert(g_->add(x, t));
        return r;
    }

    ElementSet unite(const ElementSet& o) const {
        ElementSet r(*g_);
        for (int x = 0; x < g_->order(); ++x)
            if (mask_[x] || o.mask_[x]) r.insert(x);
        return r;
    }
    ElementSet intersect(const ElementSet& o) const {
        ElementSet r(*g_);
        for (int x = 0; x < g_->order(); ++x)
            if (mask_[x] && o.mask_[x]) r.insert(x);
        return r;
    }

private:
    const FiniteAbelianGroup* g_;
    std::vector<char> mask_;
    int size_;
};

inline ElementSet sumset(const ElementSet& a, const ElementSet& b) {
    const FiniteAbelianGroup& g = a.group();
    if (g != b.group()) throw GroupMismatch("sumset over different groups");
    ElementSet r(g);
    auto bs = b.elements();
    for (int x = 0; x < g.order(); ++x) {
        if (!a.contains(x)) continue;
        for (int y : bs) r.insert(g.add(x, y));
    }
    return r;
}

inline ElementSet difference_set(const ElementSet& a, const ElementSet& b) {
    return sumset(a, b.negate());
}

// n-fold iterated sumset nX = X + ... + X; 0X = {0}.
inline ElementSet iterated_sumset(const ElementSet& x, int n) {
    ElementSet r = ElementSet::singleton(x.group(), 0);
    for (int i = 0; i < n; ++i) r = sumset(r, x);
    return r;
}

inline ElementSet subgroup_set(const FiniteAbelianGroup& g, const Subgroup& h) {
    return ElementSet(g, h.members);
}

// Interval {a, a+1, ..., a+len-1} in a cyclic group given by repeated addition
// of the first standard generator.
inline ElementSet interval_set(const FiniteAbelianGroup& g, int start, int len) {
    ElementSet s(g);
    std::vector<int> e(g.rank(), 0);
    e.back() = 1;
    int gen = g.index(e);
    int cur = g.scale(start, gen);
    for (int i = 0; i < len; ++i) {
        s.insert(cur);
        cur = g.add(cur, gen);
    }
    return s;
}

}  // namespace idem
