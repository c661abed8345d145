#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "idem/bohr.hpp"
#include "idem/fourier.hpp"
#include "idem/sets.hpp"

namespace idem {

// Nonnegative measure on the group; mass per element.  Probability measures
// have total 1 up to 1e-12.
struct Measure {
    const FiniteAbelianGroup* g = nullptr;
    std::vector<double> mass;

    Measure() = default;
    explicit Measure(const FiniteAbelianGroup& grp) : g(&grp), mass(grp.order(), 0.0) {}

    double& operator[](int x) { return mass[x]; }
    double operator[](int x) const { return mass[x]; }
    double total() const {
        double s = 0;
        for (double m : mass) s += m;
        return s;
    }
    bool is_probability(double tol = 1e-12) const {
        for (double m : mass)
            if (m < -tol) return false;
        return std::abs(total() - 1.0) <= tol;
    }
    ElementSet support(double tol = 0.0) const {
        ElementSet s(*g);
        for (int x = 0; x < g->order(); ++x)
            if (mass[x] > tol) s.insert(x);
        return s;
    }
    double measure_of(const ElementSet& s) const {
        double m = 0;
        for (int x : s.elements()) m += mass[x];
        return m;
    }

    Measure translate(int t) const {  // tau_t(mu)({y}) = mu({y-t})
        Measure r(*g);
        for (int y = 0; y < g->order(); ++y) r[y] = mass[g->sub(y, t)];
        return r;
    }
    Measure tilde() const {
        Measure r(*g);
        for (int y = 0; y < g->order(); ++y) r[y] = mass[g->neg(y)];
        return r;
    }
};

inline Measure uniform_on(const ElementSet& s) {
    if (s.empty()) throw NullSet("uniform measure on the empty set");
    Measure m(s.group());
    double w = 1.0 / s.size();
    for (int x : s.elements()) m[x] = w;
    return m;
}

inline Measure haar(const FiniteAbelianGroup& g) {
    return uniform_on(ElementSet::full(g));
}

// Normalized restriction mu_S.
inline Measure restrict(const Measure& mu, const ElementSet& s) {
    double t = 0;
    for (int x : s.elements()) t += mu[x];
    if (t <= 0) throw NullSet("restriction to a mu-null set");
    Measure r(*mu.g);
    for (int x : s.elements()) r[x] = mu[x] / t;
    return r;
}

inline Measure convolve(const Measure& mu, const Measure& nu) {
    if (*mu.g != *nu.g) throw GroupMismatch("measure convolution over different groups");
    const FiniteAbelianGroup& g = *mu.g;
    Measure r(g);
    for (int x = 0; x < g.order(); ++x) {
        if (mu[x] == 0) continue;
        for (int y = 0; y < g.order(); ++y)
            if (nu[y] != 0) r[g.add(x, y)] += mu[x] * nu[y];
    }
    return r;
}

inline double total_variation(const Measure& a, const Measure& b) {
    double s = 0;
    for (int x = 0; x < a.g->order(); ++x) s += std::abs(a[x] - b[x]);
    return s;
}

// f * mu (x) = sum_y f(x-y) mu({y}); no Haar factor, measures integrate.
inline DenseFunction convolve(const DenseFunction& f, const Measure& mu) {
    if (*f.g != *mu.g) throw GroupMismatch("function-measure convolution over different groups");
    const FiniteAbelianGroup& g = *f.g;
    DenseFunction r(g);
    for (int y = 0; y < g.order(); ++y) {
        if (mu[y] == 0) continue;
        for (int x = 0; x < g.order(); ++x) r[x] += f[g.sub(x, y)] * mu[y];
    }
    return r;
}

// mu_hat(gamma) = integral of conj(gamma) d mu.
inline Complex measure_fourier(const Measure& mu, int c) {
    Complex acc{0.0, 0.0};
    for (int x = 0; x < mu.g->order(); ++x)
        if (mu[x] != 0) acc += mu[x] * std::conj(mu.g->character_value(c, x));
    return acc;
}

// ||h||_{L_p(mu)} = (sum |h|^p mu({y}))^{1/p}, max-factored for large p.
inline double lp_norm(const DenseFunction& h, const Measure& mu, double p) {
    double m = 0;
    for (int x = 0; x < h.order(); ++x)
        if (mu[x] > 0) m = std::max(m, std::abs(h[x]));
    if (m == 0) return 0;
    double s = 0;
    for (int x = 0; x < h.order(); ++x)
        if (mu[x] > 0) s += std::pow(std::abs(h[x]) / m, p) * mu[x];
    return m * std::pow(s, 1.0 / p);
}

// Envelope feasibility certificate for B-approximate invariance: with
// U_eta = sum_y max_{x in B_eta} tau_x(mu)({y}) and L_eta the min analogue,
// upper and lower witnesses exist at level eta iff U_eta <= 1+eta and
// L_eta >= 1-eta.
struct InvarianceCertificate {
    std::vector<Rational> etas;
    std::vector<double> upper_envelope_totals;
    std::vector<double> lower_envelope_totals;
    bool valid = false;
    double slack = 1e-9;
};

inline std::vector<Rational> default_eta_list() {
    return {Rational(1), Rational(1, 2), Rational(1, 4), Rational(1, 8)};
}

inline InvarianceCertificate is_approximately_invariant(
    const Measure& mu, const BohrSystem& b,
    const std::vector<Rational>& etas = default_eta_list()) {
    if (!mu.is_probability()) throw NotProbability("approximate invariance needs a probability measure");
    const FiniteAbelianGroup& g = *mu.g;
    InvarianceCertificate cert;
    cert.etas = etas;
    cert.valid = true;
    for (const Rational& eta : etas) {
        auto xs = b.set_at(eta).elements();
        double up = 0, low = 0;
        for (int y = 0; y < g.order(); ++y) {
            double hi = 0, lo = std::numeric_limits<double>::infinity();
            for (int x : xs) {
                double v = mu[g.sub(y, x)];
                hi = std::max(hi, v);
                lo = std::min(lo, v);
            }
            up += hi;
            low += lo;
        }
        cert.upper_envelope_totals.push_back(up);
        cert.lower_envelope_totals.push_back(low);
        double e = to_double(eta);
        if (up > 1 + e + cert.slack || low < 1 - e - cert.slack) cert.valid = false;
    }
    return cert;
}

// Explicit envelope witnesses at one eta; exist exactly when the certificate
// inequalities hold there.
inline std::pair<Measure, Measure> invariance_witnesses(const Measure& mu, const BohrSystem& b,
                                                        const Rational& eta) {
    const FiniteAbelianGroup& g = *mu.g;
    auto xs = b.set_at(eta).elements();
    Measure up(g), low(g);
    double ut = 0, lt = 0;
    for (int y = 0; y < g.order(); ++y) {
        double hi = 0, lo = std::numeric_limits<double>::infinity();
        for (int x : xs) {
            double v = mu[g.sub(y, x)];
            hi = std::max(hi, v);
            lo = std::min(lo, v);
        }
        up[y] = hi;
        low[y] = lo;
        ut += hi;
        lt += lo;
    }
    if (ut > 0)
        for (auto& m : up.mass) m /= ut;
    if (lt > 0)
        for (auto& m : low.mass) m /= lt;
    return {up, low};
}

struct InvariantMeasure {
    Rational lambda;   // dilation factor: mu is (lambda B)-approximately invariant
    Measure mu;
    Rational kappa;    // selected level: mu uniform on X + B_kappa
    InvarianceCertificate certificate;
};

// Constructive approximately invariant measure: lambda = 1/(24 log 2K)
// (dyadic floor), then a grid search for kappa in [1/4, 3/4] such that
// m(X+B_{kappa+delta})/m(X+B_{kappa-delta}) <= exp(delta/2lambda) for all
// grid delta in (0, lambda].  Output is uniform on X+B_kappa.
inline InvariantMeasure build_invariant_measure(const BohrSystem& b, const ElementSet& x,
                                                double k) {
    if (x.empty()) throw InputError("build_invariant_measure needs X non-empty");
    int grown = sumset(x, b.set_at(1)).size();
    if (static_cast<double>(grown) > k * x.size() + 1e-9)
        throw HypothesisViolated("m(X+B_1) <= K m(X) fails: " + std::to_string(grown) + " vs K*" +
                                 std::to_string(x.size()));
    double lambda_real = 1.0 / (24.0 * std::log(2.0 * k));
    if (!(lambda_real > 0))
        throw HypothesisViolated("K < 1/2 is impossible for non-empty X");
    Rational lambda = dyadic_floor(std::min(lambda_real, 1.0), 48);

    // measures m(X+B_t) form a step function of t; evaluate on the critical
    // grid plus interval midpoints
    std::set<Rational> grid{Rational(1, 4), Rational(1, 2), Rational(3, 4)};
    for (const Rational& r : b.critical_radii()) grid.insert(r);
    std::vector<Rational> gridv(grid.begin(), grid.end());
    for (size_t i = 0; i + 1 < gridv.size(); ++i) grid.insert((gridv[i] + gridv[i + 1]) / 2);

    auto grown_size = [&](const Rational& t) -> long long {
        Rational tc = std::min(std::max(t, Rational(1, 1000000)), Rational(1));
        return sumset(x, b.set_at(tc)).size();
    };

    // delta grid: the levels the envelope witnesses use (lambda * eta for the
    // dyadic eta list) plus every critical value below lambda
    std::vector<Rational> deltas{lambda, lambda / 2, lambda / 4, lambda / 8};
    for (const Rational& d : grid)
        if (d > 0 && d <= lambda) deltas.push_back(d);

    for (const Rational& kappa : grid) {
        if (kappa < Rational(1, 4) || kappa > Rational(3, 4)) continue;
        bool ok = true;
        for (const Rational& d : deltas) {
            double lhs = static_cast<double>(grown_size(kappa + d)) / grown_size(kappa - d);
            double rhs = std::exp(to_double(d / (2 * lambda)));
            if (lhs > rhs * (1 + 1e-12)) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        InvariantMeasure out;
        out.lambda = lambda;
        out.kappa = kappa;
        out.mu = uniform_on(sumset(x, b.set_at(kappa)));
        out.certificate = is_approximately_invariant(out.mu, b.dilate(lambda));
        if (!out.certificate.valid) continue;
        return out;
    }
    throw NoKappaFound("no kappa in [1/4,3/4] satisfies the growth condition on the grid");
}

// Corollary construction: X := B_{1/2}, B' := (1/2)B, K := C(B_{1/2};B_{1/4})^2;
// the returned lambda is half the inner construction's, and the measure is
// supported on B_1.
inline InvariantMeasure invariant_on_bohr(const BohrSystem& b, double d) {
    (void)d;  // dimension bound from the caller; only the analysis consumes it
    ElementSet x = b.set_at(Rational(1, 2));
    BohrSystem half = b.dilate(Rational(1, 2));
    long long c = covering_number_exact(x, b.set_at(Rational(1, 4))).first;
    double k = static_cast<double>(c) * c;
    double actual = static_cast<double>(sumset(x, half.set_at(1)).size()) / x.size();
    if (actual > k + 1e-9)
        throw InvariantBroken("covering bound K does not dominate the measured growth ratio");
    InvariantMeasure inner = build_invariant_measure(half, x, k);
    InvariantMeasure out;
    out.lambda = inner.lambda / 2;
    out.kappa = inner.kappa;
    out.mu = inner.mu;
    out.certificate = is_approximately_invariant(out.mu, b.dilate(out.lambda));
    return out;
}

// max over x in B_{eta/2} of ||mu - tau_x(mu)||; at most eta for certified mu.
inline double translation_stability(const Measure& mu, const BohrSystem& b, const Rational& eta) {
    double worst = 0;
    for (int x : b.set_at(eta / 2).elements())
        worst = std::max(worst, total_variation(mu, mu.translate(x)));
    return worst;
}

}  // namespace idem
