#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "idem/covering.hpp"
#include "idem/group.hpp"
#include "idem/sets.hpp"

namespace idem {

// Nested family (B_eta) generated by a frequency set and positive rational
// widths: B_eta = {x : ||gamma(x)|| < eta * delta(gamma) for all gamma}.
// Membership is exact rational arithmetic throughout; the per-element level
// t(x) = max ||gamma(x)||/delta(gamma) makes B_eta = {x : t(x) < eta}.
class BohrSystem {
public:
    BohrSystem() : g_(nullptr) {}

    BohrSystem(const FiniteAbelianGroup& g, std::vector<std::pair<int, Rational>> freqs)
        : g_(&g) {
        std::map<int, Rational> best;
        for (auto& [c, w] : freqs) {
            if (w <= 0) throw InputError("Bohr width must be positive");
            auto it = best.find(c);
            if (it == best.end() || w < it->second) best[c] = w;
        }
        freqs_.assign(best.begin(), best.end());
        levels_.assign(g.order(), Rational(0));
        for (const auto& [c, w] : freqs_)
            for (int x = 0; x < g.order(); ++x)
                levels_[x] = std::max(levels_[x], circle_norm(g.angle(c, x)) / w);
    }

    const FiniteAbelianGroup& group() const { return *g_; }
    const std::vector<std::pair<int, Rational>>& frequencies() const { return freqs_; }
    size_t rank() const { return freqs_.size(); }
    const Rational& level(int x) const { return levels_[x]; }

    // ||delta||_inf of the stored generator (0 for an empty frequency set).
    Rational width() const {
        Rational w(0);
        for (const auto& [c, d] : freqs_) w = std::max(w, d);
        return w;
    }

    ElementSet set_at(const Rational& eta) const {
        if (!(eta > 0 && eta <= 1)) throw EtaOutOfRange("eta must lie in (0,1]");
        ElementSet s(*g_);
        for (int x = 0; x < g_->order(); ++x)
            if (levels_[x] < eta) s.insert(x);
        return s;
    }

    BohrSystem dilate(const Rational& lambda) const {
        if (!(lambda > 0 && lambda <= 1)) throw LambdaOutOfRange("lambda must lie in (0,1]");
        BohrSystem b;
        b.g_ = g_;
        b.freqs_ = freqs_;
        for (auto& [c, w] : b.freqs_) w *= lambda;
        b.levels_ = levels_;
        for (auto& t : b.levels_) t /= lambda;
        return b;
    }

    BohrSystem meet(const BohrSystem& o) const {
        if (*g_ != *o.g_) throw GroupMismatch("meet of Bohr systems over different groups");
        std::map<int, Rational> best(freqs_.begin(), freqs_.end());
        for (const auto& [c, w] : o.freqs_) {
            auto it = best.find(c);
            if (it == best.end() || w < it->second) best[c] = w;
        }
        BohrSystem b;
        b.g_ = g_;
        b.freqs_.assign(best.begin(), best.end());
        b.levels_ = levels_;
        for (int x = 0; x < g_->order(); ++x) b.levels_[x] = std::max(levels_[x], o.levels_[x]);
        return b;
    }

    // Distinct values ||gamma(x)||/delta(gamma) clipped to (0,1]; B_eta is
    // constant between consecutive entries.
    std::vector<Rational> critical_radii() const {
        std::set<Rational> vals;
        for (const auto& [c, w] : freqs_)
            for (int x = 0; x < g_->order(); ++x) {
                Rational r = circle_norm(g_->angle(c, x)) / w;
                if (r > 0 && r <= 1) vals.insert(r);
            }
        return {vals.begin(), vals.end()};
    }

private:
    const FiniteAbelianGroup* g_;
    std::vector<std::pair<int, Rational>> freqs_;
    std::vector<Rational> levels_;
};

inline BohrSystem meet(const BohrSystem& a, const BohrSystem& b) { return a.meet(b); }
inline BohrSystem dilate(const BohrSystem& b, const Rational& lambda) { return b.dilate(lambda); }
inline ElementSet bohr_set(const BohrSystem& b, const Rational& eta) { return b.set_at(eta); }

// Constant system with B_eta = H for every eta: frequency set is every
// character annihilating H, width 1/|G|.
inline BohrSystem subgroup_to_bohr(const FiniteAbelianGroup& g, const Subgroup& h) {
    std::vector<std::pair<int, Rational>> freqs;
    Rational w(1, g.order());
    for (int c = 0; c < g.order(); ++c) {
        bool annihilates = true;
        for (int m : h.members)
            if (circle_norm(g.angle(c, m)) != 0) {
                annihilates = false;
                break;
            }
        if (annihilates) freqs.emplace_back(c, w);
    }
    return BohrSystem(g, std::move(freqs));
}

// Candidate eta values whose evaluation realizes the supremum over (0,1]:
// critical radii, their doubles, midpoints of consecutive values, and 1.
inline std::vector<Rational> eta_sweep_points(const BohrSystem& b) {
    std::set<Rational> pts;
    pts.insert(Rational(1));
    for (const Rational& r : b.critical_radii()) {
        pts.insert(r);
        Rational d = 2 * r;
        if (d <= 1) pts.insert(d);
    }
    std::vector<Rational> sorted(pts.begin(), pts.end());
    for (size_t i = 0; i + 1 < sorted.size(); ++i) pts.insert((sorted[i] + sorted[i + 1]) / 2);
    return {pts.begin(), pts.end()};
}

// dim* B = sup_eta log2 C(B_eta; B_{eta/2}), evaluated exactly over the finite
// sweep; identical (B_eta, B_{eta/2}) pairs are deduplicated by size (the
// family is nested, so sizes determine the sets).
inline double doubling_dimension(const BohrSystem& b, long long node_budget = 0) {
    long long worst = 1;
    std::set<std::pair<int, int>> seen;
    for (const Rational& eta : eta_sweep_points(b)) {
        ElementSet outer = b.set_at(eta);
        ElementSet inner = b.set_at(eta / 2);
        if (!seen.insert({outer.size(), inner.size()}).second) continue;
        worst = std::max(worst, covering_number_exact(outer, inner, node_budget).first);
    }
    return std::log2(static_cast<double>(worst));
}

// Certified interval [dim* B, 2 dim* B] containing the difference-covering
// dimension, which is not computable directly.
inline std::pair<double, double> dimension_interval(const BohrSystem& b,
                                                    long long node_budget = 0) {
    double d = doubling_dimension(b, node_budget);
    return {d, 2 * d};
}

struct GrowthCheckReport {
    bool width_ok;         // w(B) < 1/4 via the stored generator
    double dim_star;
    double log2_cover;     // log2 C(B_1; B_{1/8})
    bool sandwich_ok;      // dim* <= log2_cover <= 3 dim*  (within 1e-12)
};

inline GrowthCheckReport growth_check(const BohrSystem& b) {
    GrowthCheckReport r{};
    r.width_ok = b.width() < Rational(1, 4);
    r.dim_star = doubling_dimension(b);
    long long c = covering_number_exact(b.set_at(1), b.set_at(Rational(1, 8))).first;
    r.log2_cover = std::log2(static_cast<double>(c));
    r.sandwich_ok = r.width_ok && r.dim_star <= r.log2_cover + 1e-12 &&
                    r.log2_cover <= 3 * r.dim_star + 1e-12;
    return r;
}

}  // namespace idem
