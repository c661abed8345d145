#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "idem/sets.hpp"

namespace idem {

struct CoverCertificate {
    ElementSet translates;  // X
    ElementSet covered;     // S
    ElementSet by;          // T

    bool verify() const {
        return covered.subset_of(sumset(translates, by));
    }
};

// Greedy max-coverage upper bound for C(S;T); ties broken by canonical
// element order.  Returns |X| and a verified certificate.
inline std::pair<long long, CoverCertificate> covering_number_greedy(const ElementSet& s,
                                                                     const ElementSet& t) {
    if (t.empty()) throw EmptyCoveringSet("covering by the empty set");
    const FiniteAbelianGroup& g = s.group();
    ElementSet left = s;
    ElementSet x(g);
    auto ts = t.elements();
    while (!left.empty()) {
        int best = -1, best_cov = -1;
        for (int cand = 0; cand < g.order(); ++cand) {
            int cov = 0;
            for (int e : ts)
                if (left.contains(g.add(cand, e))) ++cov;
            if (cov > best_cov) {
                best_cov = cov;
                best = cand;
            }
        }
        x.insert(best);
        for (int e : ts) left.erase(g.add(best, e));
    }
    return {x.size(), CoverCertificate{x, s, t}};
}

namespace detail {

struct CoverSearch {
    const FiniteAbelianGroup* g;
    std::vector<std::vector<int>> cover_of;   // per s-element: candidate translates
    std::vector<std::vector<int>> covers;     // per translate: covered s-elements (local ids)
    std::vector<int> s_elems;
    int t_size;
    long long best;
    std::vector<int> best_set, cur;
    long long nodes = 0, budget = 0;

    void run(std::vector<char>& uncovered, int left) {
        if (budget && ++nodes > budget)
            throw SearchBudgetExceeded("covering search budget exhausted");
        if (left == 0) {
            if (static_cast<long long>(cur.size()) < best) {
                best = cur.size();
                best_set = cur;
            }
            return;
        }
        long long lb = static_cast<long long>(cur.size()) + (left + t_size - 1) / t_size;
        if (lb >= best) return;
        // branch on the uncovered element with the fewest usable translates
        int pick = -1;
        size_t fewest = SIZE_MAX;
        for (size_t i = 0; i < s_elems.size(); ++i) {
            if (!uncovered[i]) continue;
            if (cover_of[i].size() < fewest) {
                fewest = cover_of[i].size();
                pick = static_cast<int>(i);
            }
        }
        for (int cand : cover_of[pick]) {
            std::vector<int> newly;
            for (int si : covers[cand])
                if (uncovered[si]) {
                    uncovered[si] = 0;
                    newly.push_back(si);
                }
            cur.push_back(cand);
            run(uncovered, left - static_cast<int>(newly.size()));
            cur.pop_back();
            for (int si : newly) uncovered[si] = 1;
        }
    }
};

}  // namespace detail

// Exact covering number C(S;T) = min{|X| : S subset X+T} by branch and bound,
// seeded with the greedy bound.
inline std::pair<long long, CoverCertificate> covering_number_exact(const ElementSet& s,
                                                                    const ElementSet& t,
                                                                    long long node_budget = 0) {
    if (t.empty()) throw EmptyCoveringSet("covering by the empty set");
    const FiniteAbelianGroup& g = s.group();
    if (s.empty()) return {0, CoverCertificate{ElementSet(g), s, t}};

    auto [greedy_n, greedy_cert] = covering_number_greedy(s, t);

    detail::CoverSearch cs;
    cs.g = &g;
    cs.s_elems = s.elements();
    cs.t_size = t.size();
    cs.best = greedy_n;
    cs.best_set = greedy_cert.translates.elements();
    cs.budget = node_budget;
    std::vector<int> local_id(g.order(), -1);
    for (size_t i = 0; i < cs.s_elems.size(); ++i) local_id[cs.s_elems[i]] = static_cast<int>(i);
    cs.cover_of.resize(cs.s_elems.size());
    cs.covers.resize(g.order());
    auto ts = t.elements();
    for (int cand = 0; cand < g.order(); ++cand) {
        for (int e : ts) {
            int y = g.add(cand, e);
            if (local_id[y] >= 0) cs.covers[cand].push_back(local_id[y]);
        }
        if (!cs.covers[cand].empty())
            for (int si : cs.covers[cand]) cs.cover_of[si].push_back(cand);
    }
    std::vector<char> uncovered(cs.s_elems.size(), 1);
    cs.run(uncovered, static_cast<int>(cs.s_elems.size()));

    CoverCertificate cert{ElementSet(g, cs.best_set), s, t};
    return {cs.best, cert};
}

// Ruzsa's covering construction: a maximal B-separated X inside A certifies
// A subset X + B - B with |X| <= m(A+B)/m(B).
inline CoverCertificate ruzsa_cover(const ElementSet& a, const ElementSet& b) {
    if (b.empty()) throw EmptyCoveringSet("Ruzsa cover by the empty set");
    const FiniteAbelianGroup& g = a.group();
    ElementSet x(g);
    std::vector<ElementSet> placed;  // translates x+B already chosen
    for (int cand : a.elements()) {
        ElementSet cb = b.translate(cand);
        bool disjoint = true;
        for (const auto& p : placed) {
            if (!cb.intersect(p).empty()) {
                disjoint = false;
                break;
            }
        }
        if (disjoint) {
            x.insert(cand);
            placed.push_back(cb);
        }
    }
    return CoverCertificate{x, a, difference_set(b, b)};
}

// Certified interval for the difference covering number C^Delta(S;T).  The
// lower bound is C(S;T); upper bounds come from C(S;V) over sets V containing
// 0 with V-V inside T (identity homomorphism route), plus any user-supplied
// homomorphisms via the pullback bound.
struct DiffCoverInterval {
    long long lower;
    long long upper;
};

inline ElementSet greedy_difference_root(const ElementSet& t) {
    // largest-first greedy V with V-V inside T
    const FiniteAbelianGroup& g = t.group();
    ElementSet v = ElementSet::singleton(g, 0);
    for (int cand : t.elements()) {
        if (v.contains(cand)) continue;
        bool ok = true;
        for (int w : v.elements()) {
            if (!t.contains(g.sub(cand, w)) || !t.contains(g.sub(w, cand))) {
                ok = false;
                break;
            }
        }
        if (ok && t.contains(g.neg(cand))) v.insert(cand);
    }
    return v;
}

struct HomCoverHint {
    const Homomorphism* phi;
    ElementSet u;  // in codomain
    ElementSet v;  // in codomain
};

inline DiffCoverInterval difference_covering_upper(const ElementSet& s, const ElementSet& t,
                                                   const std::vector<HomCoverHint>& hints = {}) {
    if (!t.contains(0)) throw ZeroNotInT("difference covering needs 0 in T");
    long long lower = covering_number_exact(s, t).first;
    ElementSet v = greedy_difference_root(t);
    long long upper = covering_number_exact(s, v).first;
    for (const auto& h : hints) {
        // requires S inside phi^{-1}(U) and phi^{-1}(V-V) inside T
        const FiniteAbelianGroup& g = s.group();
        bool applicable = true;
        for (int x : s.elements())
            if (!h.u.contains(h.phi->apply(x))) applicable = false;
        ElementSet vv = difference_set(h.v, h.v);
        for (int x = 0; x < g.order(); ++x)
            if (vv.contains(h.phi->apply(x)) && !t.contains(x)) applicable = false;
        if (!applicable) continue;
        upper = std::min(upper, covering_number_exact(h.u, h.v).first);
    }
    upper = std::max(upper, lower);
    return {lower, upper};
}

// Ruzsa-style reduction factor m(A+X)/m(X), with the composed upper
// bound factor * upper(C^Delta(X-X;B)).
struct RevisitedBound {
    double factor;
    DiffCoverInterval base;    // interval for C^Delta(X-X;B)
    double composed_upper;
};

inline RevisitedBound ruzsa_cover_revisited_bound(const ElementSet& a, const ElementSet& x,
                                                  const ElementSet& b) {
    if (x.empty()) throw EmptyCoveringSet("revisited Ruzsa needs X non-empty");
    if (!b.contains(0)) throw ZeroNotInT("revisited Ruzsa needs 0 in B");
    double factor = static_cast<double>(sumset(a, x).size()) / x.size();
    DiffCoverInterval base = difference_covering_upper(difference_set(x, x), b);
    return {factor, base, factor * static_cast<double>(base.upper)};
}

}  // namespace idem
