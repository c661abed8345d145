#pragma once

#include <algorithm>
#include <complex>
#include <cstdint>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "idem/errors.hpp"
#include "idem/rational.hpp"

namespace idem {

// A finite Abelian group presented as Z/n_1 x ... x Z/n_k.  Elements are
// indices in [0, order) in mixed radix with the first coordinate most
// significant, so index order coincides with lexicographic coordinate order.
// Characters are indexed the same way: character c pairs with element x via
// the angle sum c_j * x_j / n_j (mod 1).
class FiniteAbelianGroup {
public:
    explicit FiniteAbelianGroup(std::vector<int> factors) : factors_(std::move(factors)) {
        if (factors_.empty()) factors_ = {1};
        order_ = 1;
        for (int n : factors_) {
            if (n < 1) throw InputError("cyclic factor must be >= 1");
            order_ *= n;
        }
        strides_.assign(factors_.size(), 1);
        for (int j = static_cast<int>(factors_.size()) - 2; j >= 0; --j)
            strides_[j] = strides_[j + 1] * factors_[j + 1];
        coords_.assign(static_cast<size_t>(order_) * factors_.size(), 0);
        for (int x = 0; x < order_; ++x) {
            int r = x;
            for (size_t j = 0; j < factors_.size(); ++j) {
                coords_[x * factors_.size() + j] = r / strides_[j];
                r %= strides_[j];
            }
        }
        roots_.resize(factors_.size());
        for (size_t j = 0; j < factors_.size(); ++j) {
            roots_[j].resize(factors_[j]);
            for (int t = 0; t < factors_[j]; ++t) {
                double a = 2.0 * M_PI * t / factors_[j];
                roots_[j][t] = {std::cos(a), std::sin(a)};
            }
        }
    }

    static FiniteAbelianGroup parse(const std::string& spec) {
        std::vector<int> fs;
        std::stringstream ss(spec);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (tok.empty()) continue;
            fs.push_back(std::stoi(tok));
        }
        if (fs.empty()) throw InputError("empty group spec");
        return FiniteAbelianGroup(fs);
    }

    int order() const { return order_; }
    const std::vector<int>& factors() const { return factors_; }
    size_t rank() const { return factors_.size(); }

    int coord(int x, size_t j) const { return coords_[x * factors_.size() + j]; }
    std::vector<int> coords(int x) const {
        std::vector<int> c(factors_.size());
        for (size_t j = 0; j < factors_.size(); ++j) c[j] = coord(x, j);
        return c;
    }
    int index(const std::vector<int>& c) const {
        if (c.size() != factors_.size()) throw InputError("coordinate arity mismatch");
        int x = 0;
        for (size_t j = 0; j < factors_.size(); ++j) {
            int r = c[j] % factors_[j];
            if (r < 0) r += factors_[j];
            x += r * strides_[j];
        }
        return x;
    }

    int add(int a, int b) const {
        int x = 0;
        for (size_t j = 0; j < factors_.size(); ++j) {
            int s = coord(a, j) + coord(b, j);
            if (s >= factors_[j]) s -= factors_[j];
            x += s * strides_[j];
        }
        return x;
    }
    int neg(int a) const {
        int x = 0;
        for (size_t j = 0; j < factors_.size(); ++j) {
            int c = coord(a, j);
            x += (c == 0 ? 0 : factors_[j] - c) * strides_[j];
        }
        return x;
    }
    int sub(int a, int b) const { return add(a, neg(b)); }
    int scale(long long n, int a) const {
        int x = 0;
        for (size_t j = 0; j < factors_.size(); ++j) {
            long long s = (n % factors_[j]) * coord(a, j) % factors_[j];
            if (s < 0) s += factors_[j];
            x += static_cast<int>(s) * strides_[j];
        }
        return x;
    }

    // Exact pairing angle of character c with element x, in [0,1).
    Rational angle(int c, int x) const {
        Rational a = 0;
        for (size_t j = 0; j < factors_.size(); ++j)
            a += Rational(coord(c, j) * static_cast<long long>(coord(x, j)), factors_[j]);
        return frac_mod1(a);
    }

    std::complex<double> character_value(int c, int x) const {
        std::complex<double> v{1.0, 0.0};
        for (size_t j = 0; j < factors_.size(); ++j) {
            long long t = static_cast<long long>(coord(c, j)) * coord(x, j) % factors_[j];
            v *= roots_[j][static_cast<int>(t)];
        }
        return v;
    }

    // Full row gamma_c(x) for x = 0..order-1.
    std::vector<std::complex<double>> character_row(int c) const {
        std::vector<std::complex<double>> row(order_);
        for (int x = 0; x < order_; ++x) row[x] = character_value(c, x);
        return row;
    }

    bool operator==(const FiniteAbelianGroup& o) const { return factors_ == o.factors_; }
    bool operator!=(const FiniteAbelianGroup& o) const { return !(*this == o); }

    std::string spec_string() const {
        std::string s;
        for (size_t j = 0; j < factors_.size(); ++j) {
            if (j) s += ",";
            s += std::to_string(factors_[j]);
        }
        return s;
    }

private:
    std::vector<int> factors_;
    std::vector<int> strides_;
    std::vector<int> coords_;
    std::vector<std::vector<std::complex<double>>> roots_;
    int order_;
};

// ||z|| = min{|theta| : z = exp(2 pi i theta)} for z given as the exact angle
// theta; the image lies in [0, 1/2].
inline Rational circle_norm(const Rational& theta) {
    Rational f = frac_mod1(theta);
    return std::min(f, Rational(1) - f);
}

struct Subgroup {
    std::vector<int> members;     // sorted; canonical form
    std::vector<int> generators;  // some generating set (minimal known)

    int order() const { return static_cast<int>(members.size()); }
    bool contains(int x) const {
        return std::binary_search(members.begin(), members.end(), x);
    }
    bool operator==(const Subgroup& o) const { return members == o.members; }
};

// Closure of a generating set under the group operation.
inline Subgroup subgroup_closure(const FiniteAbelianGroup& g, const std::vector<int>& gens) {
    std::vector<char> in(g.order(), 0);
    std::vector<int> queue{0};
    in[0] = 1;
    for (size_t h = 0; h < queue.size(); ++h) {
        for (int gen : gens) {
            int y = g.add(queue[h], gen);
            if (!in[y]) {
                in[y] = 1;
                queue.push_back(y);
            }
        }
    }
    Subgroup s;
    for (int x = 0; x < g.order(); ++x)
        if (in[x]) s.members.push_back(x);
    s.generators = gens;
    return s;
}

// All subgroups, grown incrementally: every subgroup arises from a smaller one
// by adjoining a single element, so a worklist over (subgroup, new element)
// pairs reaches all of them without touching the full power set.
inline std::vector<Subgroup> enumerate_subgroups(const FiniteAbelianGroup& g,
                                                 int order_limit = 256) {
    if (g.order() > order_limit)
        throw OrderLimitExceeded("group order " + std::to_string(g.order()) +
                                 " exceeds enumeration limit " + std::to_string(order_limit));
    std::vector<Subgroup> out;
    std::set<std::vector<int>> seen;
    Subgroup trivial;
    trivial.members = {0};
    out.push_back(trivial);
    seen.insert(trivial.members);
    for (size_t h = 0; h < out.size(); ++h) {
        Subgroup base = out[h];  // copy: out grows below
        for (int x = 1; x < g.order(); ++x) {
            if (base.contains(x)) continue;
            std::vector<int> gens = base.generators;
            gens.push_back(x);
            Subgroup ext = subgroup_closure(g, gens);
            if (seen.insert(ext.members).second) out.push_back(ext);
        }
    }
    std::sort(out.begin(), out.end(), [](const Subgroup& a, const Subgroup& b) {
        if (a.members.size() != b.members.size()) return a.members.size() < b.members.size();
        return a.members < b.members;
    });
    return out;
}

struct Coset {
    Subgroup subgroup;
    int representative = 0;  // canonical: least member index

    int size() const { return subgroup.order(); }
    std::vector<int> members(const FiniteAbelianGroup& g) const {
        std::vector<int> m;
        m.reserve(subgroup.members.size());
        for (int h : subgroup.members) m.push_back(g.add(representative, h));
        std::sort(m.begin(), m.end());
        return m;
    }
    bool contains(const FiniteAbelianGroup& g, int x) const {
        return subgroup.contains(g.sub(x, representative));
    }
};

inline Coset make_coset(const FiniteAbelianGroup& g, const Subgroup& h, int x) {
    Coset c;
    c.subgroup = h;
    int best = x;
    for (int m : h.members) best = std::min(best, g.add(x, m));
    c.representative = best;
    return c;
}

// All cosets of all subgroups, canonically ordered (subgroup order, then
// subgroup members, then representative).
inline std::vector<Coset> enumerate_cosets(const FiniteAbelianGroup& g,
                                           int order_limit = 256) {
    std::vector<Coset> out;
    for (const Subgroup& h : enumerate_subgroups(g, order_limit)) {
        std::vector<char> covered(g.order(), 0);
        for (int x = 0; x < g.order(); ++x) {
            if (covered[x]) continue;
            Coset c = make_coset(g, h, x);
            for (int m : c.members(g)) covered[m] = 1;
            out.push_back(c);
        }
    }
    return out;
}

struct Homomorphism {
    const FiniteAbelianGroup* domain;
    const FiniteAbelianGroup* codomain;
    std::vector<int> generator_images;  // image of e_j for each domain factor

    Homomorphism(const FiniteAbelianGroup& dom, const FiniteAbelianGroup& cod,
                 std::vector<int> images)
        : domain(&dom), codomain(&cod), generator_images(std::move(images)) {
        if (generator_images.size() != dom.rank())
            throw IllFormedHomomorphism("one generator image per domain factor required");
        for (size_t j = 0; j < dom.rank(); ++j) {
            if (cod.scale(dom.factors()[j], generator_images[j]) != 0)
                throw IllFormedHomomorphism(
                    "image order does not divide generator order at factor " +
                    std::to_string(j));
        }
    }

    int apply(int x) const {
        int y = 0;
        for (size_t j = 0; j < domain->rank(); ++j)
            y = codomain->add(y, codomain->scale(domain->coord(x, j), generator_images[j]));
        return y;
    }
};

inline int apply_homomorphism(const Homomorphism& phi, int x) { return phi.apply(x); }

}  // namespace idem
