#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "idem/bohr.hpp"
#include "idem/connectivity.hpp"
#include "idem/decompose.hpp"
#include "idem/fourier.hpp"
#include "idem/freiman.hpp"
#include "idem/measure.hpp"

namespace idem {

inline json group_to_json(const FiniteAbelianGroup& g) { return json(g.factors()); }

inline FiniteAbelianGroup group_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw InputError("group must be a non-empty integer array");
    std::vector<int> factors;
    for (const auto& v : j) {
        if (!v.is_number_integer()) throw InputError("group factors must be integers");
        factors.push_back(v.get<int>());
    }
    return FiniteAbelianGroup(factors);
}

inline json element_to_json(const FiniteAbelianGroup& g, int x) { return json(g.coords(x)); }

inline int element_from_json(const FiniteAbelianGroup& g, const json& j) {
    if (!j.is_array()) throw InputError("element must be a coordinate array");
    std::vector<int> coords;
    for (const auto& v : j) coords.push_back(v.get<int>());
    return g.index(coords);
}

inline json set_to_json(const ElementSet& s) {
    json arr = json::array();
    for (int x : s.elements()) arr.push_back(element_to_json(s.group(), x));
    return arr;
}

inline ElementSet set_from_json(const FiniteAbelianGroup& g, const json& j) {
    if (!j.is_array()) throw InputError("set must be an array of coordinate arrays");
    ElementSet s(g);
    for (const auto& e : j) s.insert(element_from_json(g, e));
    return s;
}

inline Complex complex_from_json(const json& v) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2) return {v[0].get<double>(), v[1].get<double>()};
    throw InputError("values must be numbers or [re, im] pairs");
}

inline json complex_to_json(const Complex& c) {
    if (c.imag() == 0.0) {
        if (c.real() == std::round(c.real()) && std::abs(c.real()) < 1e15)
            return json(static_cast<long long>(std::llround(c.real())));
        return json(c.real());
    }
    return json::array({c.real(), c.imag()});
}

inline json function_to_json(const DenseFunction& f) {
    json values = json::array();
    for (const auto& v : f.values) values.push_back(complex_to_json(v));
    return json{{"group", group_to_json(*f.g)}, {"values", values}};
}

inline DenseFunction function_from_json(const json& j, FiniteAbelianGroup& group_storage) {
    if (!j.contains("group") || !j.contains("values"))
        throw InputError("function needs \"group\" and \"values\"");
    group_storage = group_from_json(j["group"]);
    DenseFunction f(group_storage);
    const auto& vals = j["values"];
    if (!vals.is_array() || static_cast<int>(vals.size()) != group_storage.order())
        throw InputError("values length must equal the group order");
    for (int x = 0; x < group_storage.order(); ++x) f[x] = complex_from_json(vals[x]);
    return f;
}

inline json spectrum_to_json(const Spectrum& s) {
    json coeffs = json::array();
    for (const auto& v : s.coefficients) coeffs.push_back(complex_to_json(v));
    return json{{"group", group_to_json(*s.g)}, {"coefficients", coeffs}};
}

inline json bohr_to_json(const BohrSystem& b) {
    json chars = json::array(), widths = json::array();
    for (const auto& [c, w] : b.frequencies()) {
        chars.push_back(element_to_json(b.group(), c));
        widths.push_back(rational_string(w));
    }
    return json{{"characters", chars}, {"widths", widths}};
}

inline BohrSystem bohr_from_json(const FiniteAbelianGroup& g, const json& j) {
    if (!j.contains("characters") || !j.contains("widths"))
        throw InputError("bohr system needs \"characters\" and \"widths\"");
    const auto& chars = j["characters"];
    const auto& widths = j["widths"];
    if (chars.size() != widths.size())
        throw InputError("characters and widths must have the same length");
    std::vector<std::pair<int, Rational>> freqs;
    for (size_t i = 0; i < chars.size(); ++i) {
        Rational w = widths[i].is_string() ? parse_rational(widths[i].get<std::string>())
                                           : dyadic_floor(widths[i].get<double>(), 48);
        freqs.emplace_back(element_from_json(g, chars[i]), w);
    }
    return BohrSystem(g, std::move(freqs));
}

inline json measure_to_json(const Measure& m) {
    return json{{"group", group_to_json(*m.g)}, {"mass", m.mass}};
}

inline Measure measure_from_json(const json& j, FiniteAbelianGroup& group_storage) {
    if (!j.contains("group") || !j.contains("mass"))
        throw InputError("measure needs \"group\" and \"mass\"");
    group_storage = group_from_json(j["group"]);
    Measure m(group_storage);
    const auto& mass = j["mass"];
    if (static_cast<int>(mass.size()) != group_storage.order())
        throw InputError("mass length must equal the group order");
    for (int x = 0; x < group_storage.order(); ++x) m[x] = mass[x].get<double>();
    return m;
}

inline json certificate_to_json(const InvarianceCertificate& c) {
    json etas = json::array();
    for (const auto& e : c.etas) etas.push_back(rational_string(e));
    return json{{"etas", etas},
                {"upper_envelope_totals", c.upper_envelope_totals},
                {"lower_envelope_totals", c.lower_envelope_totals},
                {"valid", c.valid}};
}

inline json cover_certificate_to_json(const CoverCertificate& c) {
    return json{{"translates", set_to_json(c.translates)},
                {"size", c.translates.size()},
                {"verified", c.verify()}};
}

inline json connectivity_to_json(const ConnectivityVerdict& v) {
    json j{{"m", v.m},
           {"l", v.l},
           {"mode", v.mode == ConnectivityMode::EXHAUSTIVE ? "exhaustive" : "sampled"},
           {"trials", v.trials},
           {"seed", v.seed},
           {"inconclusive", v.inconclusive},
           {"verdict", v.verdict}};
    if (v.counterexample) j["counterexample"] = *v.counterexample;
    return j;
}

inline json decomposition_to_json(const DecompositionResult& r) {
    json terms = json::array();
    const FiniteAbelianGroup& g = *r.combination.g;
    for (const auto& t : r.combination.terms) {
        json gens = json::array();
        for (int gen : t.coset.subgroup.generators) gens.push_back(element_to_json(g, gen));
        terms.push_back(json{{"subgroup_generators", gens},
                             {"subgroup_order", t.coset.subgroup.order()},
                             {"coset_rep", element_to_json(g, t.coset.representative)},
                             {"coefficient", t.coefficient}});
    }
    return json{{"strategy", strategy_name(r.strategy)},
                {"terms", terms},
                {"l1", r.combination.l1_weight()},
                {"residual_sup", r.residual_sup},
                {"rounds", r.rounds}};
}

inline DecompositionResult decomposition_from_json(const FiniteAbelianGroup& g, const json& j) {
    DecompositionResult r;
    r.combination.g = &g;
    if (!j.contains("terms")) throw InputError("decomposition needs \"terms\"");
    for (const auto& t : j["terms"]) {
        std::vector<int> gens;
        for (const auto& ge : t["subgroup_generators"]) gens.push_back(element_from_json(g, ge));
        Subgroup h = subgroup_closure(g, gens);
        int rep = element_from_json(g, t["coset_rep"]);
        Coset c = make_coset(g, h, rep);
        r.combination.terms.push_back({c, t["coefficient"].get<long long>()});
    }
    if (j.contains("residual_sup")) r.residual_sup = j["residual_sup"].get<double>();
    std::string strat = j.value("strategy", "oracle");
    r.strategy = strat == "paper" ? DecomposeStrategy::PAPER_PIPELINE
                 : strat == "greedy" ? DecomposeStrategy::SUBGROUP_GREEDY
                                     : DecomposeStrategy::ORACLE;
    return r;
}

inline json freiman_certificate_to_json(const FreimanCertificate& c) {
    return json{{"bohr", bohr_to_json(c.b)},
                {"b1", set_to_json(c.b.set_at(1))},
                {"cover_interval", {c.cover.lower, c.cover.upper}},
                {"dim_interval", {c.dim_interval.first, c.dim_interval.second}},
                {"density", c.density},
                {"inclusions",
                 {{"konyagin", c.incl_konyagin},
                  {"growth", c.incl_growth},
                  {"bogolyubov", c.incl_bogolyubov},
                  {"final", c.incl_final}}},
                {"smallest_multiple", c.smallest_multiple},
                {"log", c.log}};
}

}  // namespace idem
