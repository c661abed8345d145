// Acceptance suite: every criterion prints one PASS/FAIL line (with its
// runtime against the stated budget) and the binary exits nonzero if any
// criterion fails.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <random>

#include "idem/connectivity.hpp"
#include "idem/continuity.hpp"
#include "idem/decompose.hpp"
#include "idem/freiman.hpp"
#include "idem/json_io.hpp"
#include "test_support.hpp"

using namespace idem;

namespace {

int failures = 0;

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
};

void report(const Criterion& c, bool ok, double seconds, const std::string& detail = "") {
    bool in_budget = seconds < c.budget_seconds;
    bool pass = ok && in_budget;
    if (!pass) ++failures;
    std::printf("%s %2d  %-28s (%.2fs < %.0fs)%s%s\n", pass ? "PASS" : "FAIL", c.id, c.name,
                seconds, c.budget_seconds, detail.empty() ? "" : "  ", detail.c_str());
    std::fflush(stdout);
}

template <typename F>
void run(const Criterion& c, F body) {
    auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    std::string detail;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(c, ok, dt, detail);
}

ElementSet random_set(const FiniteAbelianGroup& g, std::mt19937_64& rng, double density) {
    std::bernoulli_distribution coin(density);
    ElementSet s(g);
    for (int x = 0; x < g.order(); ++x)
        if (coin(rng)) s.insert(x);
    if (s.empty()) s.insert(static_cast<int>(rng() % g.order()));
    return s;
}

BohrSystem random_rank1(const FiniteAbelianGroup& g, std::mt19937_64& rng, int den_lo = 4,
                        int den_hi = 12) {
    std::uniform_int_distribution<int> pick_char(1, g.order() - 1);
    std::uniform_int_distribution<int> den(den_lo, den_hi);
    int d = den(rng);
    std::uniform_int_distribution<int> num(1, std::max(1, d / 3));
    return BohrSystem(g, {{pick_char(rng), Rational(num(rng), d)}});
}

}  // namespace

int main() {
    run({1, "subgroup-calibration", 5}, [](std::string& detail) {
        int count = 0;
        for (auto factors :
             std::vector<std::vector<int>>{{12}, {2, 4}, {3, 3}, {2, 2, 2}}) {
            FiniteAbelianGroup g(factors);
            for (const auto& h : enumerate_subgroups(g)) {
                if (std::abs(wiener_norm(indicator(subgroup_set(g, h))) - 1.0) > 1e-9)
                    return false;
                ++count;
            }
        }
        detail = std::to_string(count) + " subgroups";
        return true;
    });

    run({2, "synthesis-bound", 30}, [](std::string& detail) {
        FiniteAbelianGroup g({12});
        auto cosets = enumerate_cosets(g);
        std::mt19937_64 rng(20260809);
        std::uniform_int_distribution<int> pick(0, static_cast<int>(cosets.size()) - 1);
        std::uniform_int_distribution<int> coeff(-3, 3);
        std::uniform_int_distribution<int> nterms(1, 6);
        for (int t = 0; t < 500; ++t) {
            CosetCombination z;
            z.g = &g;
            std::set<int> used;
            int n = nterms(rng);
            for (int j = 0; j < n; ++j) {
                int i = pick(rng), c = coeff(rng);
                if (c == 0 || !used.insert(i).second) continue;
                z.terms.push_back({cosets[i], c});
            }
            if (wiener_norm(synthesize(z)) > static_cast<double>(z.l1_weight()) + 1e-9)
                return false;
        }
        detail = "500 combinations";
        return true;
    });

    run({3, "ap-tightness", 120}, [](std::string& detail) {
        double worst_ratio = 0;
        for (int p : {13, 17}) {
            FiniteAbelianGroup g({p});
            double prev_norm = 0;
            for (int len = 1; len < p; ++len) {
                DenseFunction f = indicator(interval_set(g, 0, len));
                long long w = oracle_min_l1(f, 17).combination.l1_weight();
                if (w != std::min<long long>(len, p - len + 1)) return false;
                if (p == 13 && idem_test::exhaustive_min_l1(g, integer_values(f)) != w)
                    return false;
                double norm = wiener_norm(f);
                if (2 * len <= p) {
                    if (norm <= prev_norm) return false;  // strict growth up to p/2
                    prev_norm = norm;
                    if (len >= 2) worst_ratio = std::max(worst_ratio, norm / std::log(len));
                }
            }
        }
        char buf[64];
        std::snprintf(buf, sizeof buf, "max norm/log L = %.3f", worst_ratio);
        detail = buf;
        return true;
    });

    run({4, "covering-lemma-suite", 120}, [](std::string& detail) {
        std::mt19937_64 rng(44);
        FiniteAbelianGroup g({24});
        int instances = 0;
        for (int t = 0; t < 150; ++t) {  // restrictions/extensions
            ElementSet s = random_set(g, rng, 0.3), u = s;
            ElementSet v = random_set(g, rng, 0.2), tt = v;
            for (int x = 0; x < 24; ++x) {
                if (std::bernoulli_distribution(0.2)(rng)) u.insert(x);
                if (std::bernoulli_distribution(0.2)(rng)) tt.insert(x);
            }
            if (covering_number_exact(s, tt).first > covering_number_exact(u, v).first)
                return false;
            ++instances;
        }
        FiniteAbelianGroup g4({4}), g3({3}), g43({4, 3});
        for (int t = 0; t < 50; ++t) {  // products
            ElementSet s = random_set(g4, rng, 0.5), tt = random_set(g4, rng, 0.4);
            ElementSet u = random_set(g3, rng, 0.5), v = random_set(g3, rng, 0.4);
            ElementSet su(g43), tv(g43);
            for (int a : s.elements())
                for (int b : u.elements()) su.insert(g43.index({a, b}));
            for (int a : tt.elements())
                for (int b : v.elements()) tv.insert(g43.index({a, b}));
            if (covering_number_exact(su, tv).first >
                covering_number_exact(s, tt).first * covering_number_exact(u, v).first)
                return false;
            ++instances;
        }
        for (int t = 0; t < 100; ++t) {  // compositions
            ElementSet s = random_set(g, rng, 0.35), tt = random_set(g, rng, 0.25),
                       u = random_set(g, rng, 0.25);
            if (covering_number_exact(s, u).first >
                covering_number_exact(s, tt).first * covering_number_exact(tt, u).first)
                return false;
            ++instances;
        }
        FiniteAbelianGroup dom({4, 2}), cod({4});
        Homomorphism phi(dom, cod, {1, 0});
        for (int t = 0; t < 50; ++t) {  // pullbacks
            ElementSet u = random_set(cod, rng, 0.6), v = random_set(cod, rng, 0.5);
            ElementSet pre_u(dom), pre_vv(dom);
            ElementSet vv = difference_set(v, v);
            for (int x = 0; x < dom.order(); ++x) {
                if (u.contains(phi.apply(x))) pre_u.insert(x);
                if (vv.contains(phi.apply(x))) pre_vv.insert(x);
            }
            if (covering_number_exact(pre_u, pre_vv).first >
                covering_number_exact(u, v).first)
                return false;
            ++instances;
        }
        for (int t = 0; t < 100; ++t) {  // sum bound (Lemma 2.2)
            ElementSet a = random_set(g, rng, 0.3), b = random_set(g, rng, 0.3);
            ElementSet s = random_set(g, rng, 0.3), tt = random_set(g, rng, 0.3);
            long long ca = covering_number_exact(a, b).first;
            long long cs = covering_number_exact(s, tt).first;
            if (sumset(a, s).size() > ca * cs * sumset(b, tt).size()) return false;
            ++instances;
        }
        for (int t = 0; t < 50; ++t) {  // Ruzsa covering bound
            ElementSet a = random_set(g, rng, 0.3), b = random_set(g, rng, 0.3);
            CoverCertificate cert = ruzsa_cover(a, b);
            if (!cert.verify()) return false;
            if (static_cast<double>(cert.translates.size()) >
                static_cast<double>(sumset(a, b).size()) / b.size() + 1e-12)
                return false;
            ++instances;
        }
        for (int t = 0; t < 50; ++t) {  // difference covering intervals
            ElementSet s = random_set(g, rng, 0.3);
            ElementSet tt = random_set(g, rng, 0.3);
            tt.insert(0);
            auto iv = difference_covering_upper(s, tt);
            if (iv.lower > iv.upper) return false;
            ElementSet ttt = difference_set(tt, tt);
            auto iv2 = difference_covering_upper(s, ttt);
            if (iv2.lower > covering_number_exact(s, tt).first) return false;
            if (iv2.lower > iv2.upper) return false;
            ++instances;
        }
        detail = std::to_string(instances) + " instances";
        return true;
    });

    run({5, "bohr-suite", 120}, [](std::string&) {
        std::mt19937_64 rng(55);
        // axioms over critical radii
        for (auto factors : std::vector<std::vector<int>>{{12}, {2, 4}, {64}, {8, 3}}) {
            FiniteAbelianGroup g(factors);
            for (int t = 0; t < 6; ++t) {
                BohrSystem b = random_rank1(g, rng);
                if (t % 2) b = b.meet(random_rank1(g, rng));
                ElementSet prev(g);
                bool first = true;
                for (const Rational& eta : eta_sweep_points(b)) {
                    ElementSet s = b.set_at(eta);
                    if (!s.contains(0) || !s.is_symmetric()) return false;
                    if (!first && !prev.subset_of(s)) return false;
                    prev = s;
                    first = false;
                }
                for (auto [e1, e2] : std::vector<std::pair<Rational, Rational>>{
                         {Rational(1, 2), Rational(1, 2)}, {Rational(1, 4), Rational(1, 2)}})
                    if (!sumset(b.set_at(e1), b.set_at(e2)).subset_of(b.set_at(e1 + e2)))
                        return false;
            }
        }
        // rank-1 doubling dimension bound
        double log2_3 = std::log2(3.0);
        for (int t = 0; t < 100; ++t) {
            FiniteAbelianGroup g(t % 2 ? std::vector<int>{24} : std::vector<int>{12});
            if (doubling_dimension(random_rank1(g, rng)) > log2_3 + 1e-12) return false;
        }
        // growth sandwich for 25 systems of width < 1/4
        for (int t = 0; t < 25; ++t) {
            FiniteAbelianGroup g(t % 2 ? std::vector<int>{32} : std::vector<int>{64});
            std::uniform_int_distribution<int> pick_char(1, g.order() - 1);
            std::vector<std::pair<int, Rational>> freqs{{pick_char(rng), Rational(1, 8)}};
            if (t % 3 == 0) freqs.emplace_back(pick_char(rng), Rational(1, 5));
            BohrSystem b(g, freqs);
            GrowthCheckReport r = growth_check(b);
            if (!r.width_ok || !r.sandwich_ok) return false;
        }
        // semilattice laws as set identities
        FiniteAbelianGroup g12({12});
        for (int t = 0; t < 10; ++t) {
            BohrSystem a = random_rank1(g12, rng), b = random_rank1(g12, rng),
                       c = random_rank1(g12, rng);
            BohrSystem l = a.meet(b).meet(c), r = a.meet(b.meet(c));
            for (const Rational& eta : eta_sweep_points(l))
                if (!(l.set_at(eta) == r.set_at(eta))) return false;
            BohrSystem ab = a.meet(b), ba = b.meet(a);
            for (const Rational& eta : eta_sweep_points(ab))
                if (!(ab.set_at(eta) == ba.set_at(eta))) return false;
            BohrSystem aa = a.meet(a);
            for (const Rational& eta : eta_sweep_points(a))
                if (!(aa.set_at(eta) == a.set_at(eta))) return false;
        }
        return true;
    });

    run({6, "invariant-measure", 120}, [](std::string& detail) {
        std::mt19937_64 rng(66);
        std::vector<int> orders{50, 55, 60, 64, 72, 80, 84, 90, 96, 100};
        for (size_t i = 0; i < orders.size(); ++i) {
            FiniteAbelianGroup g({orders[i]});
            BohrSystem b = i % 2 == 0
                               ? BohrSystem(g, {{1, Rational(1, 4 + static_cast<int>(i) % 3)}})
                               : BohrSystem(g, {{1, Rational(1, 4)},
                                                {2 + static_cast<int>(i), Rational(1, 5)}});
            ElementSet x = b.set_at(Rational(1, 2));
            double k = static_cast<double>(sumset(x, b.set_at(1)).size()) / x.size();
            InvariantMeasure out = build_invariant_measure(b, x, k);
            if (std::abs(to_double(out.lambda) - 1.0 / (24 * std::log(2 * k))) > 1e-9)
                return false;
            if (!out.certificate.valid) return false;
            BohrSystem lb = b.dilate(out.lambda);
            for (const Rational& eta :
                 {Rational(1), Rational(1, 2), Rational(1, 4), Rational(1, 8)})
                if (translation_stability(out.mu, lb, eta) > to_double(eta) + 1e-9)
                    return false;
        }
        detail = "10 instances";
        return true;
    });

    run({7, "croot-sisask-sampler", 120}, [](std::string& detail) {
        FiniteAbelianGroup g({24});
        BohrSystem b(g, {{1, Rational(1, 8)}});
        Measure mu = uniform_on(interval_set(g, -5, 11));
        if (!is_approximately_invariant(mu, b).valid) return false;
        std::mt19937_64 rng(777);
        std::uniform_real_distribution<double> coef(-1, 1);
        Spectrum F(g);
        for (int c = 0; c < 24; ++c) F[c] = {0.12 * coef(rng), 0.12 * coef(rng)};
        DenseFunction gfun = idft(F);
        int succ = 0;
        for (std::uint64_t seed = 1; seed <= 100; ++seed) {
            auto res = croot_sisask_sample(gfun, b, mu, 2.0, 0.5, seed);
            if (res.success && res.attempts == 1) {
                if (res.l != 512) return false;  // l = ceil(64 * 2 / 0.25)
                ++succ;
            }
        }
        detail = std::to_string(succ) + "/100 first-shot successes";
        return succ >= 95;
    });

    run({8, "chebyshev", 1}, [](std::string&) {
        for (int l = 0; l <= 12; ++l) {
            auto closed = chebyshev_coeffs(l);
            auto rec = chebyshev_recurrence(2 * l + 1);
            if (abs(closed.c[0]) != 2 * l + 1) return false;
            for (int j = 0; j <= l; ++j)
                if (closed.c[j] != rec[2 * j + 1]) return false;
        }
        return true;
    });

    run({9, "connectivity", 60}, [](std::string&) {
        for (auto factors : std::vector<std::vector<int>>{{12}, {3, 3}}) {
            FiniteAbelianGroup g(factors);
            for (const auto& h : enumerate_subgroups(g))
                if (!is_arithmetically_connected(subgroup_set(g, h), 2, 2).verdict)
                    return false;
            for (const auto& c : enumerate_cosets(g))
                if (!is_arithmetically_connected(ElementSet(g, c.members(g)), 3, 3).verdict)
                    return false;
        }
        // (m,1)-connected iff empty
        FiniteAbelianGroup g({12});
        for (int m : {2, 3}) {
            if (!is_arithmetically_connected(ElementSet(g), m, 1).verdict) return false;
            for (int probe = 0; probe < 5; ++probe) {
                ElementSet a(g, {probe, (probe * 5 + 1) % 12});
                if (is_arithmetically_connected(a, m, 1).verdict) return false;
            }
        }
        return true;
    });

    run({10, "freiman-pipeline", 300}, [](std::string& detail) {
        FiniteAbelianGroup g24({24});
        Subgroup h = enumerate_subgroups(g24)[4];
        FreimanCertificate c1 = freiman_bohr(subgroup_set(g24, h), 7);
        if (!(c1.incl_konyagin && c1.incl_growth && c1.incl_bogolyubov && c1.incl_final))
            return false;
        if (!(c1.density > 0)) return false;

        FiniteAbelianGroup g127({127});
        FreimanCertificate c2 = freiman_bohr(interval_set(g127, 0, 7), 7);
        if (!(c2.incl_konyagin && c2.incl_growth && c2.incl_bogolyubov && c2.incl_final))
            return false;
        if (!(c2.density > 0)) return false;
        char buf[96];
        std::snprintf(buf, sizeof buf, "densities %.3f / %.3f, B1 sizes %d / %d", c1.density,
                      c2.density, c1.b.set_at(1).size(), c2.b.set_at(1).size());
        detail = buf;
        return true;
    });

    // criteria 11 and 12 share one run
    {
        Criterion c11{11, "decomposition-end-to-end", 600};
        Criterion c12{12, "norm-drop", 600};
        auto t0 = std::chrono::steady_clock::now();
        bool ok11 = true, ok12 = true;
        std::string detail11, detail12;
        try {
            std::mt19937_64 rng(2026);
            std::vector<std::vector<int>> groups{{6}, {8}, {12}, {2, 4}, {16},
                                                 {9}, {2, 2, 2}, {15}, {2, 6}};
            int paper_rounds = 0, runs = 0, fallbacks = 0;
            while (runs < 50) {
                FiniteAbelianGroup g(groups[runs % groups.size()]);
                auto cosets = enumerate_cosets(g);
                std::uniform_int_distribution<int> pick(0, static_cast<int>(cosets.size()) - 1);
                std::uniform_int_distribution<int> coeff(-2, 2);
                CosetCombination comb;
                comb.g = &g;
                int nterms = 1 + static_cast<int>(rng() % 3);
                for (int j = 0; j < nterms; ++j) {
                    int c = coeff(rng);
                    if (c == 0) c = 1;
                    comb.terms.push_back({cosets[pick(rng)], c});
                }
                DenseFunction f = synthesize(comb);
                if (support(f, 0.5).empty()) continue;
                ++runs;
                double m = std::max(1.0, wiener_norm(f) + 1e-9);
                DecompositionResult r = decompose_paper(f, 0.0, m, 1234 + runs);
                if (!verify_decomposition(f, r).ok || r.residual_sup != 0.0) {
                    ok11 = false;
                    break;
                }
                long long oracle = oracle_min_l1(f).combination.l1_weight();
                if (r.combination.l1_weight() > 8 * oracle) {
                    ok11 = false;
                    break;
                }
                if (r.strategy != DecomposeStrategy::PAPER_PIPELINE) ++fallbacks;
                for (const auto& round : r.rounds) {
                    if (!round.contains("norm_after")) continue;
                    ++paper_rounds;
                    if (round["norm_after"].get<double>() >
                        round["norm_before"].get<double>() - 0.5 + 1e-6)
                        ok12 = false;
                }
            }
            if (paper_rounds == 0) ok12 = false;  // the property must not be vacuous
            detail12 = std::to_string(paper_rounds) + " successful rounds";

            // oracle equals the exhaustive minimum on every integer function
            // with sup norm <= 2 over groups of order <= 8 (orbit sweep under
            // weight-preserving symmetries, spot-checked below)
            long long reps = 0;
            if (ok11) {
                for (auto factors : std::vector<std::vector<int>>{
                         {1}, {2}, {3}, {4}, {2, 2}, {5}, {6}, {7}, {8}, {2, 4}, {2, 2, 2}}) {
                    FiniteAbelianGroup g(factors);
                    CosetDictionary dict(g);
                    idem_test::ExhaustiveMinL1 ex(dict);
                    bool all_equal = true;
                    reps += idem_test::sweep_function_orbits(
                        g, 2, [&](const std::vector<long long>& v) {
                            if (!all_equal) return;
                            DenseFunction f(g);
                            for (int x = 0; x < g.order(); ++x)
                                f[x] = static_cast<double>(v[x]);
                            long long wo = oracle_min_l1(f).combination.l1_weight();
                            if (wo != ex.min_weight(v)) all_equal = false;
                        });
                    if (!all_equal) {
                        ok11 = false;
                        break;
                    }
                }
            }
            // the sweep covers orbit representatives; the weight really is
            // orbit-invariant, checked on random transform pairs
            if (ok11) {
                FiniteAbelianGroup g({8});
                auto perms = idem_test::automorphism_perms(g);
                std::uniform_int_distribution<int> val(-2, 2);
                for (int t = 0; t < 20 && ok11; ++t) {
                    DenseFunction f(g), tf(g);
                    const auto& perm = perms[rng() % perms.size()];
                    int shift = static_cast<int>(rng() % 8);
                    int sign = rng() % 2 ? 1 : -1;
                    for (int x = 0; x < 8; ++x) f[x] = val(rng);
                    for (int x = 0; x < 8; ++x) tf[x] = static_cast<double>(sign) *
                                                        f[perm[g.add(x, shift)]];
                    if (oracle_min_l1(f).combination.l1_weight() !=
                        oracle_min_l1(tf).combination.l1_weight())
                        ok11 = false;
                }
            }
            detail11 = "50 pipelines (" + std::to_string(fallbacks) + " fallbacks), " +
                       std::to_string(reps) + " oracle-vs-exhaustive orbits";
        } catch (const std::exception& e) {
            ok11 = false;
            detail11 = std::string("exception: ") + e.what();
        }
        double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        report(c11, ok11, dt, detail11);
        report(c12, ok12, dt, detail12);
    }

    if (failures == 0) {
        std::printf("acceptance: all 12 criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d criterion(s) FAILED\n", failures);
    return 1;
}
