#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "idem/group.hpp"
#include "idem/sets.hpp"

namespace idem {

using Complex = std::complex<double>;

// Complex-valued function on the group, one value per element in canonical
// element order.  The reference measure is always the Haar probability
// measure: integrals carry 1/|G|.
struct DenseFunction {
    const FiniteAbelianGroup* g;
    std::vector<Complex> values;

    DenseFunction() : g(nullptr) {}
    explicit DenseFunction(const FiniteAbelianGroup& grp)
        : g(&grp), values(grp.order(), Complex{0.0, 0.0}) {}

    int order() const { return g->order(); }
    Complex& operator[](int x) { return values[x]; }
    const Complex& operator[](int x) const { return values[x]; }

    double sup_norm() const {
        double m = 0;
        for (const auto& v : values) m = std::max(m, std::abs(v));
        return m;
    }
    double l1_haar() const {  // ||f||_{L1(m_G)}
        double s = 0;
        for (const auto& v : values) s += std::abs(v);
        return s / g->order();
    }
    // ||f||_{L_p(m_G)}, max-factored for stability at large p.
    double lp_haar(double p) const {
        double m = sup_norm();
        if (m == 0) return 0;
        double s = 0;
        for (const auto& v : values) s += std::pow(std::abs(v) / m, p);
        return m * std::pow(s / g->order(), 1.0 / p);
    }

    bool is_integer_valued(double tol = 1e-9) const {
        for (const auto& v : values) {
            if (std::abs(v.imag()) > tol) return false;
            if (std::abs(v.real() - std::round(v.real())) > tol) return false;
        }
        return true;
    }

    DenseFunction translate(int t) const {  // tau_t(f)(y) = f(y - t)
        DenseFunction r(*g);
        for (int y = 0; y < g->order(); ++y) r[y] = values[g->sub(y, t)];
        return r;
    }
};

inline DenseFunction indicator(const ElementSet& s) {
    DenseFunction f(s.group());
    for (int x = 0; x < s.group().order(); ++x)
        if (s.contains(x)) f[x] = 1.0;
    return f;
}

inline ElementSet support(const DenseFunction& f, double tol = 1e-9) {
    ElementSet s(*f.g);
    for (int x = 0; x < f.order(); ++x)
        if (std::abs(f[x]) > tol) s.insert(x);
    return s;
}

inline DenseFunction operator+(const DenseFunction& a, const DenseFunction& b) {
    if (*a.g != *b.g) throw GroupMismatch("function sum over different groups");
    DenseFunction r(*a.g);
    for (int x = 0; x < r.order(); ++x) r[x] = a[x] + b[x];
    return r;
}
inline DenseFunction operator-(const DenseFunction& a, const DenseFunction& b) {
    if (*a.g != *b.g) throw GroupMismatch("function difference over different groups");
    DenseFunction r(*a.g);
    for (int x = 0; x < r.order(); ++x) r[x] = a[x] - b[x];
    return r;
}
inline DenseFunction operator*(double c, const DenseFunction& a) {
    DenseFunction r(*a.g);
    for (int x = 0; x < r.order(); ++x) r[x] = c * a[x];
    return r;
}

struct Spectrum {
    const FiniteAbelianGroup* g;
    std::vector<Complex> coefficients;  // one per character, canonical order

    Spectrum() : g(nullptr) {}
    explicit Spectrum(const FiniteAbelianGroup& grp)
        : g(&grp), coefficients(grp.order(), Complex{0.0, 0.0}) {}

    Complex& operator[](int c) { return coefficients[c]; }
    const Complex& operator[](int c) const { return coefficients[c]; }

    double l1() const {
        double s = 0;
        for (const auto& v : coefficients) s += std::abs(v);
        return s;
    }
};

// f_hat(gamma) = (1/|G|) sum_x f(x) conj(gamma(x)).
inline Spectrum dft(const DenseFunction& f) {
    const FiniteAbelianGroup& g = *f.g;
    Spectrum F(g);
    for (int c = 0; c < g.order(); ++c) {
        auto row = g.character_row(c);
        Complex acc{0.0, 0.0};
        for (int x = 0; x < g.order(); ++x) acc += f[x] * std::conj(row[x]);
        F[c] = acc / static_cast<double>(g.order());
    }
    return F;
}

// f(x) = sum_gamma f_hat(gamma) gamma(x); exact inverse of dft.
inline DenseFunction idft(const Spectrum& F) {
    const FiniteAbelianGroup& g = *F.g;
    DenseFunction f(g);
    for (int c = 0; c < g.order(); ++c) {
        if (F[c] == Complex{0.0, 0.0}) continue;
        auto row = g.character_row(c);
        for (int x = 0; x < g.order(); ++x) f[x] += F[c] * row[x];
    }
    return f;
}

inline double wiener_norm(const DenseFunction& f) { return dft(f).l1(); }

// f*g(x) = (1/|G|) sum_y f(y) g(x-y).
inline DenseFunction convolve(const DenseFunction& f, const DenseFunction& h) {
    if (*f.g != *h.g) throw GroupMismatch("convolution over different groups");
    const FiniteAbelianGroup& g = *f.g;
    DenseFunction r(g);
    for (int x = 0; x < g.order(); ++x) {
        Complex acc{0.0, 0.0};
        for (int y = 0; y < g.order(); ++y) acc += f[y] * h[g.sub(x, y)];
        r[x] = acc / static_cast<double>(g.order());
    }
    return r;
}

inline DenseFunction tilde(const DenseFunction& f) {  // conj(f(-x))
    DenseFunction r(*f.g);
    for (int x = 0; x < f.order(); ++x) r[x] = std::conj(f[f.g->neg(x)]);
    return r;
}

inline Complex inner_haar(const DenseFunction& f, const DenseFunction& h) {
    Complex acc{0.0, 0.0};
    for (int x = 0; x < f.order(); ++x) acc += f[x] * std::conj(h[x]);
    return acc / static_cast<double>(f.order());
}

// Integer combination of coset indicators.
struct CosetTerm {
    Coset coset;
    long long coefficient;
};

struct CosetCombination {
    const FiniteAbelianGroup* g = nullptr;
    std::vector<CosetTerm> terms;

    long long l1_weight() const {
        long long w = 0;
        for (const auto& t : terms) w += std::llabs(t.coefficient);
        return w;
    }
};

// Exact integer synthesis sum_W z(W) 1_W.
inline std::vector<long long> synthesize_exact(const CosetCombination& z) {
    const FiniteAbelianGroup& g = *z.g;
    std::vector<long long> v(g.order(), 0);
    for (const auto& t : z.terms)
        for (int m : t.coset.members(g)) v[m] += t.coefficient;
    return v;
}

inline DenseFunction synthesize(const CosetCombination& z) {
    DenseFunction f(*z.g);
    auto v = synthesize_exact(z);
    for (int x = 0; x < f.order(); ++x) f[x] = static_cast<double>(v[x]);
    return f;
}

// Nearest-integer rounding f_Z with the achieved sup deviation; rejects inputs
// further than eps from integer-valued.
inline DenseFunction almost_round(const DenseFunction& f, double eps,
                                  double* achieved = nullptr) {
    if (!(eps < 0.5)) throw InputError("almost_round needs eps < 1/2");
    DenseFunction r(*f.g);
    double worst = 0;
    int worst_x = 0;
    for (int x = 0; x < f.order(); ++x) {
        double n = std::round(f[x].real());
        double dev = std::abs(f[x] - Complex{n, 0.0});
        if (dev > worst) {
            worst = dev;
            worst_x = x;
        }
        r[x] = n;
    }
    if (achieved) *achieved = worst;
    if (worst > eps)
        throw NotAlmostInteger("function is not " + std::to_string(eps) +
                                   "-almost integer-valued; worst deviation " +
                                   std::to_string(worst) + " at element " +
                                   std::to_string(worst_x),
                               worst_x, worst);
    return r;
}

}  // namespace idem
