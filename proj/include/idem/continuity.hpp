#pragma once

#include <cmath>
#include <vector>

#include <nlohmann/json.hpp>

#include "idem/covering.hpp"
#include "idem/measure.hpp"
#include "idem/spectral.hpp"

namespace idem {

enum class ContinuityCase { SMOOTHED, SPECTRAL_MASS };

struct ContinuityOutcome {
    ContinuityCase kind = ContinuityCase::SMOOTHED;
    double measured_sup = 0;  // sup_x ||f - f*mu||_{L_p(tau_x nu)}
    // SPECTRAL_MASS payload
    double rho = 0;
    BohrSystem b_prime;            // dilated system carrying the witness
    Rational witness_level = 0;    // B'_{witness_level} feeds the annihilator
    std::vector<int> witness;      // characters with concentrated |f_hat| mass
    double witness_mass = 0;
    int inner_rounds = 0;
    nlohmann::json log = nlohmann::json::array();
};

// One pass of the iterative dichotomy: either the smoothed function is
// already L_p-close to f along every translate of nu, or a dilate of a
// sampled Bohr system pins a positive share of ||f||_A outside the
// annihilator of supp mu.
inline ContinuityOutcome continuity_step(const ElementSet& a, const BohrSystem& b,
                                         const Measure& nu,
                                         const InvarianceCertificate& nu_cert,
                                         const Measure& mu, const ElementSet& x_supp,
                                         const DenseFunction& f, double delta, double eta,
                                         double p, std::uint64_t seed,
                                         const Constants& consts = Constants()) {
    (void)a;
    const FiniteAbelianGroup& g = *f.g;
    if (!nu_cert.valid) throw CertificateMissing("nu lacks a valid invariance certificate");
    double norm_f = wiener_norm(f);

    ContinuityOutcome out;
    DenseFunction smoothed = convolve(f, mu);
    DenseFunction g0 = f - smoothed;
    int worst_x = 0;
    for (int t = 0; t < g.order(); ++t) {
        double v = lp_norm(g0, nu.translate(t), p);
        if (v > out.measured_sup) {
            out.measured_sup = v;
            worst_x = t;
        }
    }
    if (out.measured_sup <= delta * norm_f + 1e-12) {
        out.kind = ContinuityCase::SMOOTHED;
        return out;
    }
    // hypotheses and conclusion are translation invariant: run the iteration
    // against the worst translate of nu
    Measure nu_local = nu.translate(worst_x);

    double kappa = 1.0 / std::ceil(std::log2(8.0 / delta));
    int budget = static_cast<int>(std::ceil(1.0 / kappa)) + 1;

    DenseFunction g_cur = g0;
    BohrSystem last_system;     // lambda_i B^{(i)} for the most recent i
    Measure last_nu;            // nu^{(i)}
    bool have_last = false;
    int i = 0;
    while (true) {
        if (i > budget)
            throw IterationBudgetExceeded("continuity step exceeded kappa^{-1} + 1 rounds");
        double gnorm_nu = lp_norm(g_cur, nu_local, p);
        double gnorm_a = wiener_norm(g_cur);
        double delta_i = std::pow(1 - kappa, i) * delta;
        double eps_i = kappa * gnorm_nu / gnorm_a;

        CrootSisaskResult cs = croot_sisask_sample(g_cur, b, nu_local, p, eps_i, seed + 1000 * i, consts);
        if (!cs.success) {
            cs = croot_sisask_sample(g_cur, b, nu_local, p, eps_i, seed + 1000 * i + 7919, consts);
            if (!cs.success)
                throw SearchBudgetExceeded("croot-sisask failed twice inside continuity_step");
        }
        auto dim_cs = dimension_interval(cs.b_prime);
        InvariantMeasure inv = invariant_on_bohr(cs.b_prime, std::max(1.0, dim_cs.second));
        if (!inv.mu.support().subset_of(cs.b_prime.set_at(1)))
            throw InvariantBroken("smoothing measure escapes its Bohr set");

        DenseFunction g_next = convolve(g_cur, inv.mu);
        double step_dev = lp_norm(g_cur - g_next, nu_local, p);
        if (step_dev > kappa * gnorm_nu + 1e-9)
            throw InvariantBroken("smoothing moved g by more than kappa in L_p(nu)");
        double next_nu = lp_norm(g_next, nu_local, p);
        double delta_next = std::pow(1 - kappa, i + 1) * delta;
        if (next_nu <= delta_next * norm_f - 1e-9)
            throw InvariantBroken("monotone control ||g_{i+1}||_{L_p(nu)} > delta_{i+1}||f||_A failed");

        out.log.push_back(nlohmann::json{{"inner_round", i},
                                         {"eps_i", eps_i},
                                         {"delta_i", delta_i},
                                         {"g_norm_a", gnorm_a},
                                         {"g_norm_nu", gnorm_nu},
                                         {"sampler_l", cs.l}});

        last_system = cs.b_prime.dilate(inv.lambda);
        last_nu = inv.mu;
        have_last = true;
        g_cur = g_next;
        ++i;
        if (wiener_norm(g_cur) > std::pow(2.0, 1 - i) * norm_f) break;
    }

    // terminal index i has ||g_i||_A > 2^{1-i} ||f||_A; the witness lives on
    // the last constructed system
    if (!have_last) throw InvariantBroken("terminated before any smoothing round");
    out.kind = ContinuityCase::SPECTRAL_MASS;
    out.inner_rounds = i;
    out.rho = std::pow(2.0, -i - 1);
    out.b_prime = last_system;
    out.witness_level = dyadic_floor(std::min(1.0, std::pow(2.0, -7) * delta * eta), 60);

    AnnihilatorSet big = annihilator(out.b_prime.set_at(out.witness_level), eta);
    AnnihilatorSet small = annihilator(x_supp, std::pow(2.0, -5) * delta);
    Spectrum fh = dft(f);
    for (int c : big.characters) {
        if (small.contains(c)) continue;
        out.witness.push_back(c);
        out.witness_mass += std::abs(fh[c]);
    }
    if (out.witness_mass < out.rho * norm_f - 1e-9)
        throw InvariantBroken("spectral mass witness fell short of rho ||f||_A");
    return out;
}

struct ContinuityResult {
    BohrSystem b_prime;
    Measure mu;   // B'-approximately invariant
    Measure nu;   // supported on B'_kappa
    Rational kappa;
    double measured_sup = 0;
    int rounds = 0;
    nlohmann::json log = nlohmann::json::array();
};

// Outer iteration: construct invariant measures on a shrinking chain of Bohr
// systems until the smoothed function is L_p-close to f along every translate
// of nu.  Spectral-mass rounds are disjointly charged against ||f||_A, which
// caps the number of rounds.
inline ContinuityResult quantitative_continuity(const ElementSet& a, const BohrSystem& b,
                                                const DenseFunction& f, double delta,
                                                double kappa, double p, std::uint64_t seed,
                                                const Constants& consts = Constants()) {
    const FiniteAbelianGroup& g = *f.g;
    double norm_f = wiener_norm(f);
    Rational kappa_rat = dyadic_floor(std::min(kappa, 1.0), 48);
    int budget = static_cast<int>(std::ceil(consts.continuity_round_constant / delta));

    ContinuityResult res;
    res.kappa = kappa_rat;
    BohrSystem b_cur = b;
    Spectrum fh = dft(f);
    std::vector<char> claimed(g.order(), 0);  // witness characters across rounds
    double claimed_mass = 0;

    for (int round = 0;; ++round) {
        if (round >= budget)
            throw IterationBudgetExceeded("quantitative continuity exceeded its round budget");
        auto dim_cur = dimension_interval(b_cur);
        double d_cur = std::max(1.0, dim_cur.second);
        InvariantMeasure inv_mu = invariant_on_bohr(b_cur, d_cur);
        BohrSystem b_kl = b_cur.dilate(kappa_rat * inv_mu.lambda);
        InvariantMeasure inv_nu = invariant_on_bohr(b_kl, d_cur);
        if (!inv_nu.mu.support().subset_of(b_kl.set_at(1)))
            throw InvariantBroken("nu escapes B_{kappa lambda}");

        BohrSystem nu_system = b_kl.dilate(inv_nu.lambda);
        ContinuityOutcome step =
            continuity_step(a, nu_system, inv_nu.mu, inv_nu.certificate, inv_mu.mu,
                            b_cur.set_at(1), f, delta, std::pow(2.0, -5) * delta, p,
                            seed + 100000 * round, consts);

        auto cover = difference_covering_upper(a, b_cur.set_at(1));
        nlohmann::json entry{{"round", round},
                             {"case", step.kind == ContinuityCase::SMOOTHED ? "SMOOTHED"
                                                                            : "SPECTRAL_MASS"},
                             {"rho", step.rho},
                             {"dim_interval", {dim_cur.first, dim_cur.second}},
                             {"cover_interval", {cover.lower, cover.upper}},
                             {"measured_sup", step.measured_sup},
                             {"inner_log", step.log}};
        res.log.push_back(entry);

        if (step.kind == ContinuityCase::SMOOTHED) {
            res.b_prime = b_cur.dilate(inv_mu.lambda);
            res.mu = inv_mu.mu;
            res.nu = inv_nu.mu;
            res.measured_sup = step.measured_sup;
            res.rounds = round + 1;
            if (!res.nu.support().subset_of(res.b_prime.set_at(kappa_rat)))
                throw InvariantBroken("supp nu escapes B'_kappa");
            if (res.measured_sup > delta * norm_f + 1e-12)
                throw InvariantBroken("smoothed case failed its own verification");
            return res;
        }

        // spectral-mass accounting: witness sets stay disjoint and their
        // cumulative |f_hat| mass cannot exceed ||f||_A
        for (int c : step.witness) {
            if (claimed[c])
                throw InvariantBroken("witness characters repeated across rounds");
            claimed[c] = 1;
            claimed_mass += std::abs(fh[c]);
        }
        if (claimed_mass > norm_f + 1e-9)
            throw InvariantBroken("cumulative witness mass exceeds ||f||_A");

        BohrSystem b_next = step.b_prime.dilate(step.witness_level);
        if (!b_next.set_at(1).subset_of(b_cur.set_at(1)))
            throw InvariantBroken("Bohr chain is not nested");
        b_cur = b_next;
    }
}

}  // namespace idem
