#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <nlohmann/json.hpp>

#include "idem/config.hpp"
#include "idem/measure.hpp"
#include "idem/spectral.hpp"

namespace idem {

using json = nlohmann::json;

struct GrowthProfile {
    ElementSet base;
    std::vector<double> ratios;  // ratios[n-1] = m(nX)/m(X) for n = 1..N
    double order;                // max over n >= 2 of log(ratio_n)/log(n)
};

inline void require_symmetric_neighbourhood(const ElementSet& x, const char* who) {
    if (x.empty() || !x.contains(0) || !x.is_symmetric())
        throw NotSymmetric(std::string(who) + " needs a symmetric set containing 0");
}

inline GrowthProfile growth_profile(const ElementSet& x, int n_max) {
    require_symmetric_neighbourhood(x, "growth_profile");
    GrowthProfile p;
    p.base = x;
    p.order = 0;
    ElementSet cur = x;
    for (int n = 1; n <= n_max; ++n) {
        p.ratios.push_back(static_cast<double>(cur.size()) / x.size());
        if (n >= 2) p.order = std::max(p.order, std::log(p.ratios.back()) / std::log(n));
        ElementSet next = sumset(cur, x);
        if (next.size() == cur.size()) {
            // saturated: ratios stay constant, the max over larger n cannot grow
            break;
        }
        cur = next;
    }
    return p;
}

// Exact growth order: iterate to saturation (nX stabilizes on the generated
// subgroup, after which log-ratio/log-n only decreases).
inline GrowthProfile growth_profile_saturated(const ElementSet& x) {
    return growth_profile(x, x.group().order() + 1);
}

struct ChangCoverReport {
    bool hypothesis;        // m((3k+1)X) < 2^k m(X)
    double measured_order;  // exact growth order of X
    double c_chang;         // measured_order / k
};

inline ChangCoverReport chang_cover_check(const ElementSet& x, int k) {
    require_symmetric_neighbourhood(x, "chang_cover_check");
    ChangCoverReport r{};
    ElementSet grown = iterated_sumset(x, 3 * k + 1);
    // compare in logs: 2^k overflows for large k
    r.hypothesis = std::log2(static_cast<double>(grown.size()) / x.size()) < k;
    r.measured_order = growth_profile_saturated(x).order;
    r.c_chang = r.measured_order / k;
    return r;
}

struct SymmetrySetResult {
    ElementSet x;
    double l_ratio;      // m(S+T)/m(S)
    double size_floor;   // (2L)^{-eta^{-2} p} m(T), the analytic lower bound shape
};

// The exact symmetry set {x : ||tau_x(f * m_S) - f * m_S||_p <= eta ||f||_p},
// computable exhaustively at this scale; the analytic floor is logged only.
inline SymmetrySetResult symmetry_set(const DenseFunction& f, const ElementSet& s,
                                      const ElementSet& t, double p, double eta,
                                      std::uint64_t seed = 0) {
    (void)seed;  // the sampled route is replaced by the exact sweep
    const FiniteAbelianGroup& g = *f.g;
    SymmetrySetResult out{ElementSet(g), 0, 0};
    out.l_ratio = static_cast<double>(sumset(s, t).size()) / s.size();
    out.size_floor =
        std::pow(2 * out.l_ratio, -p / (eta * eta)) * t.measure();
    DenseFunction smooth = convolve(f, uniform_on(s));
    double bound = eta * f.lp_haar(p);
    for (int x = 0; x < g.order(); ++x)
        if ((smooth.translate(x) - smooth).lp_haar(p) <= bound + 1e-12) out.x.insert(x);
    return out;
}

struct KeyNeighbourhoodResult {
    ElementSet x;
    double k_ratio;  // m(A+S)/m(A)
    double l_ratio;  // m(S+T)/m(S)
    double p;
    double eta;
    double size_floor;
};

// Symmetric neighbourhood X with mX inside S+A-A-S, from the symmetry set of
// 1_{A+S} smoothed by m_{-S} with p = 2 + log K and eta = 1/(4m).
inline KeyNeighbourhoodResult key_neighbourhood(const ElementSet& a, const ElementSet& s,
                                                const ElementSet& t, int m,
                                                std::uint64_t seed = 0) {
    const FiniteAbelianGroup& g = a.group();
    if (a.empty() || s.empty() || t.empty())
        throw HypothesisViolated("key_neighbourhood needs non-empty A, S, T");
    KeyNeighbourhoodResult out{ElementSet(g), 0, 0, 0, 0, 0};
    out.k_ratio = static_cast<double>(sumset(a, s).size()) / a.size();
    out.l_ratio = static_cast<double>(sumset(s, t).size()) / s.size();
    out.p = 2 + std::log(out.k_ratio);
    out.eta = 1.0 / (4 * m);
    DenseFunction f = indicator(sumset(a, s));
    SymmetrySetResult sym = symmetry_set(f, s.negate(), t, out.p, out.eta, seed);
    out.x = sym.x;
    out.size_floor = sym.size_floor;
    require_symmetric_neighbourhood(out.x, "key_neighbourhood output");
    ElementSet target = sumset(sumset(s, difference_set(a, a)), s.negate());
    if (!iterated_sumset(out.x, m).subset_of(target))
        throw InvariantBroken("mX escapes S+A-A-S");
    return out;
}

struct KonyaginResult {
    int m = 0;
    ElementSet t;
    json rounds = json::array();
};

// Konyagin's iteration: grows symmetric neighbourhoods T_i with
// m_i T_{i+1} inside S_i + A - A - S_i, re-anchoring S_{i+1} by an exact
// pigeonhole over dilates; every inclusion is asserted on the actual sets.
inline KonyaginResult konyagin_iteration(const ElementSet& a, int r, int s,
                                         std::uint64_t seed = 0) {
    if (r < 3) throw HypothesisViolated("konyagin_iteration needs r >= 3");
    if (a.empty()) throw HypothesisViolated("konyagin_iteration needs A non-empty");
    double big_k = std::max(1.0, static_cast<double>(sumset(a, a).size()) / a.size());

    auto r_of = [](int i) { return 3 * (1 << i) - 2; };
    int stop = 1;
    while (2 * r_of(stop) + 1 <= r) ++stop;  // largest i with 2 r_{i-1} + 1 <= r

    ElementSet aa = difference_set(a, a);
    ElementSet s_cur = aa, t_cur = aa;
    KonyaginResult out;
    out.t = aa;
    int last_m = 0;
    for (int i = 0; i < stop; ++i) {
        // invariant (1): symmetric neighbourhoods with A-A inside S_i inside r_i(A-A)
        require_symmetric_neighbourhood(s_cur, "konyagin S_i");
        require_symmetric_neighbourhood(t_cur, "konyagin T_i");
        ElementSet ri_aa = iterated_sumset(aa, r_of(i));
        if (!aa.subset_of(s_cur) || !s_cur.subset_of(ri_aa))
            throw InvariantBroken("konyagin invariant (1) failed");

        double l_i = static_cast<double>(sumset(s_cur, t_cur).size()) / s_cur.size();
        // invariant (2): L_i <= exp(4 log^{2^-i} 2K)
        if (std::log(l_i) > 4 * std::pow(std::log(2 * big_k), std::pow(2.0, -i)) + 1e-9)
            throw InvariantBroken("konyagin invariant (2) failed");

        ElementSet rnext_aa = iterated_sumset(aa, r_of(i + 1));
        double k_next = static_cast<double>(rnext_aa.size()) / a.size();
        int m_i = s * static_cast<int>(std::ceil(std::log(2 * k_next) /
                                                 std::sqrt(std::log(2 * l_i))));
        m_i = std::max(m_i, s);

        KeyNeighbourhoodResult key = key_neighbourhood(a, s_cur, t_cur, m_i, seed + i);
        ElementSet t_next = key.x;
        // invariant (3): m_i T_{i+1} inside S_i + A-A - S_i (rechecked here on
        // top of key_neighbourhood's own assertion)
        ElementSet hull = sumset(sumset(s_cur, aa), s_cur.negate());
        if (!iterated_sumset(t_next, m_i).subset_of(hull))
            throw InvariantBroken("konyagin invariant (3) failed");

        // pigeonhole choice of l_i over the exact dilate measures
        int steps = m_i / s;
        ElementSet st = iterated_sumset(t_next, s);
        int best_l = 0;
        double best_ratio = 0;
        ElementSet cur = aa;  // s*l*T_{i+1} + (A-A) at l = 0
        std::vector<double> ratios;
        for (int l = 0; l < steps; ++l) {
            ElementSet next = sumset(cur, st);
            ratios.push_back(static_cast<double>(next.size()) / cur.size());
            if (l == 0 || ratios.back() < best_ratio) {
                best_ratio = ratios.back();
                best_l = l;
            }
            cur = next;
        }
        double target = std::pow(static_cast<double>(rnext_aa.size()) / aa.size(),
                                 static_cast<double>(s) / m_i);
        if (best_ratio > target + 1e-9)
            throw InvariantBroken("konyagin pigeonhole inequality failed at the minimizer");

        ElementSet s_next = sumset(iterated_sumset(t_next, s * best_l), aa);
        out.rounds.push_back(json{{"round", i},
                                  {"r_i", r_of(i)},
                                  {"L_i", l_i},
                                  {"K_next", k_next},
                                  {"m_i", m_i},
                                  {"l_i", best_l},
                                  {"pigeonhole_ratio", best_ratio},
                                  {"pigeonhole_target", target},
                                  {"T_next_size", t_next.size()},
                                  {"size_floor", key.size_floor}});
        s_cur = s_next;
        t_cur = t_next;
        last_m = m_i;
    }
    out.m = last_m;
    out.t = t_cur;
    // final conclusion: mT inside (2 r_{stop-1} + 1)(A-A) inside r(A-A)
    if (!iterated_sumset(out.t, out.m).subset_of(iterated_sumset(aa, r)))
        throw InvariantBroken("konyagin conclusion mT inside r(A-A) failed");
    return out;
}

struct GrowthBohrResult {
    BohrSystem b;
    int l = 0;           // selected sumset index
    int k = 0;           // selected spectral-tail exponent
    int j = 0;           // selected dilation index
    double epsilon = 0;
    double dim_star = 0;
    double size_ratio = 0;  // m(B_1)/m(X)
    bool tail_ok = false;   // sum_{gamma notin Gamma} |hat|^{2k} <= half the total
};

// Relative polynomial growth to a Bohr system containing X-X, via the large
// spectrum of 1_{lX} at a pigeonholed l, then a dilation chosen to minimize
// the measured covering ratio.
inline GrowthBohrResult growth_to_bohr(const ElementSet& x, double d,
                                       long long k_cap_scale = 1LL << 22) {
    require_symmetric_neighbourhood(x, "growth_to_bohr");
    const FiniteAbelianGroup& g = x.group();
    if (d < 1) throw HypothesisViolated("growth_to_bohr needs d >= 1");
    GrowthBohrResult out;

    int m = 2;
    while (std::pow(m, d / (m - 1)) > 1.5) ++m;

    std::vector<ElementSet> powers{ElementSet::singleton(g, 0)};
    for (int n = 1; n <= m + 1; ++n) powers.push_back(sumset(powers.back(), x));
    double target = std::pow(static_cast<double>(powers[m].size()) / powers[1].size(),
                             1.0 / (m - 1));
    int l = -1;
    for (int cand = 2; cand <= m; ++cand) {
        double ratio = static_cast<double>(powers[cand].size()) / powers[cand - 1].size();
        if (ratio <= target + 1e-12) {
            l = cand;
            break;
        }
    }
    if (l < 0 || static_cast<double>(powers[l].size()) / powers[l - 1].size() > 1.5 + 1e-12)
        throw HypothesisViolated("growth order d does not admit the 3/2 pigeonhole");
    out.l = l;

    out.epsilon = 1.0 / (std::pow(2.0, 18) * d * d);
    Spectrum f = dft(indicator(powers[l]));
    double threshold = (1 - out.epsilon) * powers[l].measure();
    std::vector<int> gamma;
    for (int c = 0; c < g.order(); ++c)
        if (std::abs(f[c]) > threshold) gamma.push_back(c);

    // sumset-spectrum containment with S = (l-1)X, T = X, K the pigeonholed ratio
    double k_ratio = std::max(
        1.0, static_cast<double>(powers[l].size()) / powers[l - 1].size());
    ElementSet xx = difference_set(x, x);
    AnnihilatorSet ann = annihilator(xx, 2 * std::sqrt(2 * out.epsilon * k_ratio));
    if (!subset_sorted(gamma, ann.characters))
        throw InvariantBroken("large spectrum escapes the annihilator of X-X");

    // spectral-tail exponent: doubling search for the first k where the
    // complement contributes at most half of the 2k-th moment
    long long cap = static_cast<long long>(k_cap_scale * d * d * d * (1 + std::log(d)));
    auto tail_ok_at = [&](long long k) {
        double in = 0, outside = 0;
        for (int c = 0; c < g.order(); ++c) {
            double v = std::pow(std::abs(f[c]), 2.0 * k);
            if (std::binary_search(gamma.begin(), gamma.end(), c))
                in += v;
            else
                outside += v;
        }
        return outside <= in;  // equivalent to outside <= half the total
    };
    long long k = 1;
    while (k <= cap && !tail_ok_at(k)) k *= 2;
    if (k > cap) throw SearchBudgetExceeded("spectral tail exponent search exceeded its cap");
    out.k = static_cast<int>(std::min<long long>(k, 1 << 30));
    out.tail_ok = true;

    BohrSystem bprime(g, [&] {
        std::vector<std::pair<int, Rational>> freqs;
        for (int c : gamma) freqs.emplace_back(c, Rational(1, 16));
        return freqs;
    }());

    int big_j = static_cast<int>(std::floor(std::log2(d) / 5));
    long long best_cover = -1;
    for (int j = 0; j <= big_j; ++j) {
        Rational outer(1, BigInt(1) << (5 * j + 1));
        Rational inner(1, BigInt(1) << (5 * j + 4));
        long long c = covering_number_exact(bprime.set_at(outer), bprime.set_at(inner)).first;
        if (best_cover < 0 || c < best_cover) {
            best_cover = c;
            out.j = j;
        }
    }
    out.b = bprime.dilate(Rational(1, BigInt(1) << (5 * out.j + 1)));
    if (!xx.subset_of(out.b.set_at(1)))
        throw InvariantBroken("X-X escapes B_1 after dilation");
    out.dim_star = doubling_dimension(out.b);
    out.size_ratio = static_cast<double>(out.b.set_at(1).size()) / x.size();
    return out;
}

struct BogolyubovResult {
    BohrSystem b;
    double p = 0;
    double eta = 0;
    double correlation = 0;  // ||1_L * mu_S||^2 / m(L)
    bool s_in_b1 = true;
    bool sampler_success = false;
    long long sampler_l = 0;
};

// Bohr system inside L-L+S-S by almost-periodization of 1_L * 1_{-L} against
// mu * tilde(mu), with p = 2 + 2 log(1/mu(S)) and eta = eps/(2e).
inline BogolyubovResult bogolyubov_chang(const ElementSet& a_ref, const BohrSystem& b,
                                         const Measure& mu, const ElementSet& s,
                                         const ElementSet& l_set, double eps,
                                         std::uint64_t seed,
                                         const Constants& consts = Constants()) {
    (void)a_ref;  // reference set only enters the covering bookkeeping
    const FiniteAbelianGroup& g = b.group();
    double mu_s = mu.measure_of(s);
    if (mu_s <= 0) throw HypothesisViolated("bogolyubov_chang needs mu(S) > 0");
    Measure mu_restricted = restrict(mu, s);
    DenseFunction corr = convolve(indicator(l_set), mu_restricted);
    double corr_l2 = 0;
    for (int y = 0; y < g.order(); ++y) corr_l2 += std::norm(corr[y]);
    corr_l2 /= g.order();
    if (corr_l2 < eps * l_set.measure() - 1e-12)
        throw HypothesisViolated("||1_L * mu_S||^2 >= eps m(L) fails");

    BogolyubovResult out;
    out.correlation = corr_l2 / l_set.measure();
    out.s_in_b1 = s.subset_of(b.set_at(1));
    out.p = 2 + 2 * std::log(1.0 / mu_s);
    out.eta = eps / (2 * std::exp(1.0));

    DenseFunction gfun = convolve(indicator(l_set), indicator(l_set.negate()));
    Measure nu = convolve(mu, mu.tilde());
    CrootSisaskResult cs = croot_sisask_sample(gfun, b, nu, out.p, out.eta, seed, consts);
    out.sampler_success = cs.success;
    out.sampler_l = cs.l;
    if (!cs.success)
        throw SearchBudgetExceeded("croot-sisask sampler failed after retries");
    out.b = cs.b_prime;

    ElementSet hull = sumset(difference_set(l_set, l_set), difference_set(s, s));
    if (!out.b.set_at(1).subset_of(hull))
        throw InvariantBroken("B'_1 escapes L-L+S-S");
    return out;
}

struct FreimanCertificate {
    BohrSystem b;
    DiffCoverInterval cover{0, 0};
    std::pair<double, double> dim_interval{0, 0};
    double density = 0;        // ||1_A * beta||_inf for beta uniform on B_1
    bool incl_konyagin = false;   // mT inside r(A-A)
    bool incl_growth = false;     // X-X inside B_1 of the growth system
    bool incl_bogolyubov = false; // B_1 inside L-L+S-S
    bool incl_final = false;      // B_1 inside (2r+1)(A-A)
    int smallest_multiple = 0;    // least c with B_1 inside c(A-A)
    json log = json::array();
};

// End-to-end Freiman-type pipeline with every stage inclusion re-verified on
// the actual sets.
inline FreimanCertificate freiman_bohr(const ElementSet& a, std::uint64_t seed = 1,
                                       int r = 3, int s = 1,
                                       const Constants& consts = Constants()) {
    if (a.empty()) throw HypothesisViolated("freiman_bohr needs A non-empty");
    const FiniteAbelianGroup& g = a.group();
    FreimanCertificate cert;
    ElementSet aa = difference_set(a, a);
    double big_k = static_cast<double>(sumset(a, a).size()) / a.size();
    cert.log.push_back(json{{"stage", "input"}, {"A_size", a.size()}, {"K", big_k}});

    KonyaginResult kon = konyagin_iteration(a, r, s, seed);
    ElementSet x = kon.t;
    cert.incl_konyagin =
        iterated_sumset(x, kon.m).subset_of(iterated_sumset(aa, r));
    cert.log.push_back(json{{"stage", "konyagin"},
                            {"m", kon.m},
                            {"T_size", x.size()},
                            {"rounds", kon.rounds}});

    ChangCoverReport chang = chang_cover_check(x, std::max(1, kon.m * kon.m * kon.m));
    double d = std::max(1.0, chang.measured_order);
    cert.log.push_back(json{{"stage", "chang"},
                            {"hypothesis", chang.hypothesis},
                            {"measured_order", chang.measured_order},
                            {"d", d}});

    GrowthBohrResult gb = growth_to_bohr(x, d);
    cert.incl_growth = difference_set(x, x).subset_of(gb.b.set_at(1));
    cert.log.push_back(json{{"stage", "growth_to_bohr"},
                            {"l", gb.l},
                            {"k", gb.k},
                            {"j", gb.j},
                            {"dim_star", gb.dim_star},
                            {"size_ratio", gb.size_ratio}});

    auto dim_growth = dimension_interval(gb.b);
    InvariantMeasure inv = invariant_on_bohr(gb.b, std::max(1.0, dim_growth.second));
    BohrSystem b_inv = gb.b.dilate(inv.lambda);
    cert.log.push_back(json{{"stage", "invariant_measure"},
                            {"lambda", rational_string(inv.lambda)},
                            {"certificate_valid", inv.certificate.valid}});

    // anchor S = x* + X at the mu-heaviest translate
    int best_x = 0;
    double best_mass = -1;
    for (int t = 0; t < g.order(); ++t) {
        double mass = inv.mu.measure_of(x.translate(t));
        if (mass > best_mass + 1e-15) {
            best_mass = mass;
            best_x = t;
        }
    }
    ElementSet s_set = x.translate(best_x);

    // pigeonhole over L = A-A + l S using the exact dilate measures
    std::vector<ElementSet> lx{aa};
    for (int i = 1; i <= kon.m; ++i) lx.push_back(sumset(lx.back(), x));
    int best_l = 0;
    double best_ratio = -1;
    for (int l = 0; l < kon.m; ++l) {
        double ratio = static_cast<double>(lx[l + 1].size()) / lx[l].size();
        if (best_ratio < 0 || ratio < best_ratio) {
            best_ratio = ratio;
            best_l = l;
        }
    }
    double phole_target = std::pow(static_cast<double>(lx[kon.m].size()) / aa.size(),
                                   1.0 / kon.m);
    if (best_ratio > phole_target + 1e-9)
        throw InvariantBroken("freiman pigeonhole inequality failed at the minimizer");
    ElementSet l_set = sumset(aa, iterated_sumset(s_set, best_l));
    double eps_bc = static_cast<double>(l_set.size()) / sumset(l_set, s_set).size();
    cert.log.push_back(json{{"stage", "pigeonhole"},
                            {"l", best_l},
                            {"ratio", best_ratio},
                            {"target", phole_target},
                            {"eps", eps_bc},
                            {"mu_S", inv.mu.measure_of(s_set)}});

    BogolyubovResult bc =
        bogolyubov_chang(difference_set(x, x), b_inv, inv.mu, s_set, l_set, eps_bc, seed, consts);
    cert.b = bc.b;
    cert.incl_bogolyubov = true;  // asserted inside bogolyubov_chang
    cert.log.push_back(json{{"stage", "bogolyubov"},
                            {"p", bc.p},
                            {"eta", bc.eta},
                            {"S_in_B1", bc.s_in_b1},
                            {"sampler_l", bc.sampler_l}});

    ElementSet b1 = cert.b.set_at(1);
    cert.incl_final = b1.subset_of(iterated_sumset(aa, 2 * r + 1));
    cert.smallest_multiple = 2 * r + 1;
    for (int c = 1; c <= 2 * r + 2; ++c) {
        if (b1.subset_of(iterated_sumset(aa, c))) {
            cert.smallest_multiple = c;
            break;
        }
    }
    cert.cover = difference_covering_upper(a, b1);
    cert.dim_interval = dimension_interval(cert.b);
    Measure beta = uniform_on(b1);
    DenseFunction dens = convolve(indicator(a), beta);
    cert.density = dens.sup_norm();
    if (!(cert.density > 0)) throw InvariantBroken("density ||1_A * beta||_inf vanished");
    cert.log.push_back(json{{"stage", "certificate"},
                            {"B1_size", b1.size()},
                            {"density", cert.density},
                            {"cover_lower", cert.cover.lower},
                            {"cover_upper", cert.cover.upper},
                            {"dim_lower", cert.dim_interval.first},
                            {"dim_upper", cert.dim_interval.second},
                            {"smallest_multiple", cert.smallest_multiple},
                            {"incl_final", cert.incl_final}});
    return cert;
}

}  // namespace idem
