#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "idem/bohr.hpp"
#include "idem/config.hpp"
#include "idem/fourier.hpp"
#include "idem/measure.hpp"

namespace idem {

// |1 - gamma(x)| computed as 2 sin(pi ||gamma(x)||) from the exact angle;
// avoids cancellation near gamma(x) = 1.
inline double one_minus_char_dist(const FiniteAbelianGroup& g, int c, int x) {
    return 2.0 * std::sin(M_PI * to_double(circle_norm(g.angle(c, x))));
}

struct AnnihilatorSet {
    std::vector<int> characters;  // canonical order
    ElementSet source;
    double rho;

    bool contains(int c) const {
        return std::binary_search(characters.begin(), characters.end(), c);
    }
};

// N(S, rho) = {gamma : |1 - gamma(x)| < rho for all x in S}.
inline AnnihilatorSet annihilator(const ElementSet& s, double rho) {
    const FiniteAbelianGroup& g = s.group();
    AnnihilatorSet n;
    n.source = s;
    n.rho = rho;
    auto xs = s.elements();
    for (int c = 0; c < g.order(); ++c) {
        bool in = true;
        for (int x : xs)
            if (one_minus_char_dist(g, c, x) >= rho) {
                in = false;
                break;
            }
        if (in) n.characters.push_back(c);
    }
    return n;
}

struct ContainmentReport {
    std::vector<int> left;
    std::vector<int> right;
    bool contained;
};

inline bool subset_sorted(const std::vector<int>& a, const std::vector<int>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

// {gamma : |mu_hat(gamma)| > kappa} inside N(B_{kappa eta / 2}, eta) for a
// certified approximately invariant mu.
inline ContainmentReport majorising_annihilator_check(const Measure& mu, const BohrSystem& b,
                                                      double kappa, double eta) {
    const FiniteAbelianGroup& g = *mu.g;
    ContainmentReport r;
    for (int c = 0; c < g.order(); ++c)
        if (std::abs(measure_fourier(mu, c)) > kappa) r.left.push_back(c);
    Rational level = dyadic_floor(kappa * eta / 2, 48);
    if (level > 1) level = 1;
    r.right = annihilator(b.set_at(level), eta).characters;
    r.contained = subset_sorted(r.left, r.right);
    return r;
}

// X inside Bohr(N(X,eps), eps/(2 sqrt 2)); the width is rounded up so the
// strict containment survives the rational representation.
inline BohrSystem duality_embed_set(const ElementSet& x, double eps) {
    if (x.empty()) throw InputError("duality embedding needs a non-empty set");
    AnnihilatorSet n = annihilator(x, eps);
    Rational width = dyadic_ceil(eps / (2 * std::sqrt(2.0)), 48);
    std::vector<std::pair<int, Rational>> freqs;
    for (int c : n.characters) freqs.emplace_back(c, width);
    BohrSystem b(x.group(), std::move(freqs));
    if (!x.subset_of(b.set_at(1)))
        throw InvariantBroken("duality embedding failed: X not inside B_1");
    return b;
}

// Gamma inside N(Bohr(Gamma,delta)_1, 2 pi ||delta||_inf).
struct CharEmbedReport {
    double eps;
    bool contained;
};

inline CharEmbedReport duality_embed_chars(const BohrSystem& b) {
    if (b.frequencies().empty()) throw InputError("character embedding needs a non-empty set");
    double eps = 2 * M_PI * to_double(b.width());
    AnnihilatorSet n = annihilator(b.set_at(1), eps);
    bool ok = true;
    for (const auto& [c, w] : b.frequencies())
        if (!n.contains(c)) ok = false;
    return {eps, ok};
}

// Spectrum concentration of 1_{S+T}: characters with |hat| above
// (1-eps) m(S+T) annihilate T-T at radius 2 sqrt(2 eps K).
inline ContainmentReport sumset_spectrum_containment(const ElementSet& s, const ElementSet& t,
                                                     double eps, double k) {
    const FiniteAbelianGroup& g = s.group();
    ElementSet st = sumset(s, t);
    if (static_cast<double>(st.size()) > k * s.size() + 1e-9)
        throw HypothesisViolated("m(S+T) <= K m(S) fails");
    DenseFunction f = indicator(st);
    Spectrum F = dft(f);
    double threshold = (1 - eps) * st.measure();
    ContainmentReport r;
    for (int c = 0; c < g.order(); ++c)
        if (std::abs(F[c]) > threshold) r.left.push_back(c);
    r.right = annihilator(difference_set(t, t), 2 * std::sqrt(2 * eps * k)).characters;
    r.contained = subset_sorted(r.left, r.right);
    return r;
}

// Bohr system with the given frequency set and constant width 1/2; functions
// with spectrum supported there move slowly along it.
inline BohrSystem bohr_from_support(const FiniteAbelianGroup& g, const std::vector<int>& chars) {
    std::vector<std::pair<int, Rational>> freqs;
    for (int c : chars) freqs.emplace_back(c, Rational(1, 2));
    return BohrSystem(g, std::move(freqs));
}

// Measured max of ||tau_x f - f||_inf over x in B_{eps/pi}; at most
// eps ||f||_A when supp f_hat lies in the frequency set of B.
inline double support_invariance_deviation(const BohrSystem& b, const DenseFunction& f,
                                           double eps) {
    Rational level = dyadic_floor(eps / M_PI, 48);
    if (level > 1) level = 1;
    double worst = 0;
    for (int x : b.set_at(level).elements())
        worst = std::max(worst, (f.translate(x) - f).sup_norm());
    return worst;
}

struct SampledApproximant {
    std::vector<int> characters;        // distinct sampled characters
    std::vector<long long> counts;      // multiplicities, sum = l
    std::vector<Complex> weights;       // unit phases g_hat/|g_hat|
    double scale = 0;                   // ||g||_A
    long long l = 0;
    std::uint64_t seed = 0;

    DenseFunction synthesize(const FiniteAbelianGroup& g) const {
        DenseFunction f(g);
        for (size_t i = 0; i < characters.size(); ++i) {
            auto row = g.character_row(characters[i]);
            Complex w = weights[i] * (static_cast<double>(counts[i]) / l) * scale;
            for (int x = 0; x < g.order(); ++x) f[x] += w * row[x];
        }
        return f;
    }
};

struct CrootSisaskResult {
    BohrSystem b_prime;
    SampledApproximant approximant;
    double measured;    // max over x in B'_1 of ||tau_x g - g||_{L_p(mu)}
    double threshold;   // eps ||g||_A
    bool success;
    int attempts;
    long long l;
};

namespace detail {

// multinomial counts for l draws, by sequential binomial conditioning
inline std::vector<long long> multinomial_counts(const std::vector<double>& probs, long long l,
                                                 std::mt19937_64& rng) {
    std::vector<long long> counts(probs.size(), 0);
    double psum = 1.0;
    long long remaining = l;
    for (size_t i = 0; i + 1 < probs.size() && remaining > 0; ++i) {
        double q = std::clamp(probs[i] / psum, 0.0, 1.0);
        std::binomial_distribution<long long> bin(remaining, q);
        counts[i] = bin(rng);
        remaining -= counts[i];
        psum = std::max(psum - probs[i], 1e-300);
    }
    if (!probs.empty()) counts.back() += remaining;
    return counts;
}

}  // namespace detail

// Random spectral sparsification of g: l characters drawn with probability
// |g_hat|/||g||_A, verified against the measure mu over the meet system
// B' = B ^ (eps/2pi) Bohr(sampled support, 1/2).  Failure doubles l and
// resamples, up to max_attempts.
inline CrootSisaskResult croot_sisask_sample(const DenseFunction& g, const BohrSystem& b,
                                             const Measure& mu, double p, double eps,
                                             std::uint64_t seed,
                                             const Constants& consts = Constants()) {
    const FiniteAbelianGroup& grp = *g.g;
    Spectrum gh = dft(g);
    double norm_a = gh.l1();
    if (norm_a < 1e-14) throw ZeroFunction("croot_sisask_sample needs g not identically 0");

    std::vector<int> chars;
    std::vector<double> probs;
    std::vector<Complex> phases;
    for (int c = 0; c < grp.order(); ++c) {
        double w = std::abs(gh[c]);
        if (w == 0) continue;
        chars.push_back(c);
        probs.push_back(w / norm_a);
        phases.push_back(gh[c] / w);
    }

    std::mt19937_64 rng(seed);
    long long l = static_cast<long long>(std::ceil(consts.c_cs * p / (eps * eps)));
    CrootSisaskResult best{};
    for (int attempt = 1; attempt <= consts.cs_max_attempts; ++attempt, l *= 2) {
        auto counts = detail::multinomial_counts(probs, l, rng);
        SampledApproximant approx;
        approx.scale = norm_a;
        approx.l = l;
        approx.seed = seed;
        for (size_t i = 0; i < chars.size(); ++i) {
            if (counts[i] == 0) continue;
            approx.characters.push_back(chars[i]);
            approx.counts.push_back(counts[i]);
            approx.weights.push_back(phases[i]);
        }
        Rational dilation = dyadic_floor(eps / (2 * M_PI), 48);
        if (dilation > 1) dilation = 1;
        BohrSystem support = bohr_from_support(grp, approx.characters);
        BohrSystem b_prime = b.meet(support.dilate(dilation));

        double measured = 0;
        for (int x : b_prime.set_at(1).elements())
            measured = std::max(measured, lp_norm(g.translate(x) - g, mu, p));

        CrootSisaskResult res{std::move(b_prime), std::move(approx), measured,
                              eps * norm_a, measured <= eps * norm_a + 1e-12, attempt, l};
        if (res.success) return res;
        best = std::move(res);
    }
    return best;  // success = false after the retry budget
}

}  // namespace idem
