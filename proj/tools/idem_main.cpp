// idem: norms, Bohr machinery, structure pipelines and minimal-l1
// decompositions over finite Abelian groups, with JSON/CSV I/O.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "idem/config.hpp"
#include "idem/continuity.hpp"
#include "idem/json_io.hpp"

using namespace idem;

namespace {

struct RunConfig {
    std::string group_spec;
    std::string in_path;
    std::string out_path;
    std::string config_path;
    std::uint64_t seed = 0;
    std::string strategy = "oracle";
    double epsilon = 0.0;
    double p_norm = 2.0;
    int threads = 1;
    bool no_timestamp = false;
    Constants consts;

    json resolved() const {
        json j{{"group", group_spec},
               {"seed", seed},
               {"strategy", strategy},
               {"epsilon", epsilon},
               {"p_norm", p_norm},
               {"threads", threads},
               {"constants",
                {{"c_mel", consts.c_mel},
                 {"c_mel_prime", consts.c_mel_prime},
                 {"c_cs", consts.c_cs},
                 {"c3", consts.c3},
                 {"c2", consts.c2},
                 {"order_limit", consts.order_limit},
                 {"oracle_limit", consts.oracle_limit},
                 {"connectivity_budget", consts.connectivity_budget},
                 {"cs_max_attempts", consts.cs_max_attempts},
                 {"continuity_round_constant", consts.continuity_round_constant}}}};
        if (!no_timestamp) {
            auto now = std::chrono::system_clock::now().time_since_epoch();
            j["timestamp"] = std::chrono::duration_cast<std::chrono::seconds>(now).count();
        }
        return j;
    }
};

void apply_config_file(RunConfig& rc) {
    if (rc.config_path.empty()) return;
    std::ifstream in(rc.config_path);
    if (!in) throw InputError("cannot open config file " + rc.config_path);
    json j = json::parse(in);
    for (auto& [key, value] : j.items()) {
        if (key == "c_mel") rc.consts.c_mel = value.get<double>();
        else if (key == "c_mel_prime") rc.consts.c_mel_prime = value.get<double>();
        else if (key == "c_cs") rc.consts.c_cs = value.get<double>();
        else if (key == "c3") rc.consts.c3 = value.get<double>();
        else if (key == "c2") rc.consts.c2 = value.get<double>();
        else if (key == "order_limit") rc.consts.order_limit = value.get<int>();
        else if (key == "oracle_limit") rc.consts.oracle_limit = value.get<int>();
        else if (key == "connectivity_budget") rc.consts.connectivity_budget = value.get<long long>();
        else if (key == "cs_max_attempts") rc.consts.cs_max_attempts = value.get<int>();
        else if (key == "continuity_round_constant")
            rc.consts.continuity_round_constant = value.get<double>();
        else throw InputError("unknown config key: " + key);
    }
}

json read_json_input(const RunConfig& rc) {
    if (rc.in_path.empty()) throw InputError("--in is required for this command");
    std::ifstream in(rc.in_path);
    if (!in) throw InputError("cannot open input " + rc.in_path);
    return json::parse(in);
}

void emit(const RunConfig& rc, const json& payload) {
    json out = payload;
    out["config"] = rc.resolved();
    std::string text = out.dump(2) + "\n";
    if (rc.out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream of(rc.out_path);
        if (!of) throw InputError("cannot open output " + rc.out_path);
        of << text;
    }
}

void emit_text(const RunConfig& rc, const std::string& text) {
    if (rc.out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream of(rc.out_path);
        if (!of) throw InputError("cannot open output " + rc.out_path);
        of << text;
    }
}

int cmd_norm(const RunConfig& rc) {
    FiniteAbelianGroup g({1});
    DenseFunction f = function_from_json(read_json_input(rc), g);
    emit(rc, json{{"wiener_norm", wiener_norm(f)},
                  {"sup_norm", f.sup_norm()},
                  {"is_integer_valued", f.is_integer_valued()}});
    return 0;
}

int cmd_dft(const RunConfig& rc) {
    FiniteAbelianGroup g({1});
    DenseFunction f = function_from_json(read_json_input(rc), g);
    emit(rc, spectrum_to_json(dft(f)));
    return 0;
}

int cmd_bohr(const RunConfig& rc) {
    FiniteAbelianGroup g = FiniteAbelianGroup::parse(rc.group_spec);
    BohrSystem b = bohr_from_json(g, read_json_input(rc));
    json sets = json::object();
    for (const Rational& eta : {Rational(1), Rational(1, 2), Rational(1, 4), Rational(1, 8)})
        sets[rational_string(eta)] = set_to_json(b.set_at(eta));
    auto di = dimension_interval(b);
    emit(rc, json{{"rank", b.rank()},
                  {"width", rational_string(b.width())},
                  {"sets", sets},
                  {"doubling_dimension", di.first},
                  {"dimension_interval", {di.first, di.second}}});
    return 0;
}

int cmd_measure(const RunConfig& rc) {
    FiniteAbelianGroup g = FiniteAbelianGroup::parse(rc.group_spec);
    json in = read_json_input(rc);
    if (!in.contains("bohr")) throw InputError("measure needs a \"bohr\" system");
    BohrSystem b = bohr_from_json(g, in["bohr"]);
    InvariantMeasure m;
    if (in.contains("set")) {
        ElementSet x = set_from_json(g, in["set"]);
        double k = in.contains("K")
                       ? in["K"].get<double>()
                       : static_cast<double>(sumset(x, b.set_at(1)).size()) / x.size();
        m = build_invariant_measure(b, x, k);
    } else {
        double d = in.value("d", 1.0);
        m = invariant_on_bohr(b, d);
    }
    emit(rc, json{{"lambda", rational_string(m.lambda)},
                  {"kappa", rational_string(m.kappa)},
                  {"measure", measure_to_json(m.mu)},
                  {"certificate", certificate_to_json(m.certificate)}});
    return 0;
}

int cmd_pipeline(const RunConfig& rc, const std::string& stage, const std::string& log_path) {
    FiniteAbelianGroup g = FiniteAbelianGroup::parse(rc.group_spec);
    json in = read_json_input(rc);
    if (stage == "freiman") {
        ElementSet a = set_from_json(g, in.is_array() ? in : in.at("set"));
        FreimanCertificate cert = freiman_bohr(a, rc.seed, 3, 1, rc.consts);
        if (!log_path.empty()) {
            std::ofstream lf(log_path);
            for (const auto& entry : cert.log) lf << entry.dump() << "\n";
        }
        emit(rc, freiman_certificate_to_json(cert));
        bool ok = cert.incl_konyagin && cert.incl_growth && cert.incl_bogolyubov &&
                  cert.density > 0;
        return ok ? 0 : 1;
    }
    if (stage == "continuity") {
        ElementSet a = set_from_json(g, in.at("set"));
        BohrSystem b = bohr_from_json(g, in.at("bohr"));
        FiniteAbelianGroup gf({1});
        DenseFunction f = function_from_json(in.at("function"), gf);
        if (gf != g) throw InputError("function group differs from --group");
        DenseFunction fg(g);
        fg.values = f.values;
        double delta = in.value("delta", 0.5);
        double kappa = in.value("kappa", 0.25);
        ContinuityResult res =
            quantitative_continuity(a, b, fg, delta, kappa, rc.p_norm, rc.seed, rc.consts);
        if (!log_path.empty()) {
            std::ofstream lf(log_path);
            for (const auto& entry : res.log) lf << entry.dump() << "\n";
        }
        emit(rc, json{{"bohr", bohr_to_json(res.b_prime)},
                      {"kappa", rational_string(res.kappa)},
                      {"mu", measure_to_json(res.mu)},
                      {"nu", measure_to_json(res.nu)},
                      {"measured_sup", res.measured_sup},
                      {"rounds", res.rounds},
                      {"log", res.log}});
        bool ok = res.measured_sup <= delta * wiener_norm(fg) + 1e-12;
        return ok ? 0 : 1;
    }
    throw InputError("unknown pipeline stage: " + stage);
}

int cmd_connectivity(const RunConfig& rc, int m, int l, const std::string& mode,
                     long long trials) {
    FiniteAbelianGroup g = FiniteAbelianGroup::parse(rc.group_spec);
    ElementSet a = set_from_json(g, read_json_input(rc));
    ConnectivityMode cm =
        mode == "sampled" ? ConnectivityMode::SAMPLED : ConnectivityMode::EXHAUSTIVE;
    ConnectivityVerdict v = is_arithmetically_connected(a, m, l, cm, rc.seed,
                                                        rc.consts.connectivity_budget, trials);
    emit(rc, connectivity_to_json(v));
    return 0;
}

int cmd_decompose(const RunConfig& rc) {
    FiniteAbelianGroup g({1});
    DenseFunction f = function_from_json(read_json_input(rc), g);
    DecompositionResult r;
    double m = std::max(1.0, wiener_norm(f) + 1e-9);
    if (rc.strategy == "oracle")
        r = oracle_min_l1(almost_round(f, std::clamp(rc.epsilon, 1e-9, 0.49)),
                          rc.consts.oracle_limit);
    else if (rc.strategy == "greedy")
        r = subgroup_greedy(almost_round(f, std::clamp(rc.epsilon, 1e-9, 0.49)),
                            rc.consts.order_limit);
    else if (rc.strategy == "paper")
        r = decompose_paper(f, rc.epsilon, m, rc.seed, rc.consts);
    else
        throw InputError("unknown strategy " + rc.strategy);
    emit(rc, decomposition_to_json(r));
    return verify_decomposition(f, r, rc.epsilon).ok ? 0 : 1;
}

int cmd_verify(const RunConfig& rc, const std::string& result_path) {
    FiniteAbelianGroup g({1});
    DenseFunction f = function_from_json(read_json_input(rc), g);
    std::ifstream in(result_path);
    if (!in) throw InputError("cannot open result " + result_path);
    DecompositionResult r = decomposition_from_json(g, json::parse(in));
    VerifyResult v = verify_decomposition(f, r, rc.epsilon);
    emit(rc, json{{"ok", v.ok}, {"weight", v.weight}, {"first_mismatch", v.first_mismatch}});
    return v.ok ? 0 : 1;
}

std::string csv_field(double v) {
    std::ostringstream ss;
    ss.precision(12);
    ss << v;
    return ss.str();
}

int cmd_experiment_ap(const RunConfig& rc, const std::vector<int>& primes,
                      std::vector<int> lengths) {
    struct Row {
        int p, len;
        double norm;
        long long weight;
        std::string method;
        long long closed_form;
        double norm_over_log;
    };
    std::vector<std::pair<int, int>> jobs;
    for (int p : primes) {
        std::vector<int> ls = lengths;
        if (ls.empty())
            for (int len = 1; len < p; ++len) ls.push_back(len);
        for (int len : ls) {
            if (len < 1 || len >= p) throw InputError("need 1 <= L < p");
            jobs.emplace_back(p, len);
        }
    }
    std::vector<Row> rows(jobs.size());
    auto work = [&](size_t lo, size_t hi) {
        for (size_t i = lo; i < hi; ++i) {
            auto [p, len] = jobs[i];
            FiniteAbelianGroup g({p});
            DenseFunction f = indicator(interval_set(g, 0, len));
            Row row;
            row.p = p;
            row.len = len;
            row.norm = wiener_norm(f);
            if (p <= rc.consts.oracle_limit) {
                row.weight = oracle_min_l1(f, rc.consts.oracle_limit).combination.l1_weight();
                row.method = "oracle";
            } else {
                row.weight = subgroup_greedy(f).combination.l1_weight();
                row.method = "greedy";
            }
            row.closed_form = std::min<long long>(len, p - len + 1);
            row.norm_over_log = row.norm / std::log(static_cast<double>(len) + 1.0);
            rows[i] = row;
        }
    };
    int nthreads = std::max(1, rc.threads);
    if (nthreads == 1 || jobs.size() < 2) {
        work(0, jobs.size());
    } else {
        std::vector<std::thread> pool;
        size_t chunk = (jobs.size() + nthreads - 1) / nthreads;
        for (int t = 0; t < nthreads; ++t) {
            size_t lo = t * chunk, hi = std::min(jobs.size(), lo + chunk);
            if (lo < hi) pool.emplace_back(work, lo, hi);
        }
        for (auto& th : pool) th.join();
    }
    std::ostringstream csv;
    csv << "p,L,wiener_norm,min_l1,method,closed_form,norm_over_log\n";
    for (const auto& r : rows)
        csv << r.p << "," << r.len << "," << csv_field(r.norm) << "," << r.weight << ","
            << r.method << "," << r.closed_form << "," << csv_field(r.norm_over_log) << "\n";
    emit_text(rc, csv.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wiener-norm and coset-decomposition toolkit for finite Abelian groups"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    RunConfig rc;
    app.add_option("--group", rc.group_spec, "comma-separated cyclic orders, e.g. \"2,4\"");
    app.add_option("--in", rc.in_path, "input JSON path");
    app.add_option("--out", rc.out_path, "output path (stdout when omitted)");
    app.add_option("--seed", rc.seed, "64-bit seed for randomized subroutines");
    app.add_option("--strategy", rc.strategy, "oracle | paper | greedy");
    app.add_option("--epsilon", rc.epsilon, "almost-integrality tolerance");
    app.add_option("--p-norm", rc.p_norm, "L_p exponent for continuity runs");
    app.add_option("--threads", rc.threads, "threads for parallelizable sweeps");
    app.add_flag("--no-timestamp", rc.no_timestamp, "omit timestamps for byte-stable output");
    app.add_option("--config", rc.config_path, "JSON constants override");

    auto* norm = app.add_subcommand("norm", "Wiener algebra norm of a function");
    auto* dft_cmd = app.add_subcommand("dft", "Fourier transform of a function");
    auto* bohr = app.add_subcommand("bohr", "Bohr system sets, width and dimension");
    auto* measure = app.add_subcommand("measure", "approximately invariant measure");
    auto* pipeline = app.add_subcommand("pipeline", "freiman / continuity pipelines");
    std::string stage = "freiman", log_path;
    pipeline->add_option("--stage", stage, "freiman | continuity");
    pipeline->add_option("--log", log_path, "JSON-lines round log path");
    auto* connectivity = app.add_subcommand("connectivity", "arithmetic connectivity verdict");
    int conn_m = 2, conn_l = 2;
    long long conn_trials = 200;
    std::string conn_mode = "exhaustive";
    connectivity->add_option("--m", conn_m, "tuple length");
    connectivity->add_option("--l", conn_l, "coefficient budget");
    connectivity->add_option("--mode", conn_mode, "exhaustive | sampled");
    connectivity->add_option("--trials", conn_trials, "sampled tuple count");
    auto* decompose = app.add_subcommand("decompose", "integer coset decomposition");
    auto* experiment = app.add_subcommand("experiment-ap", "AP norm/weight table (CSV)");
    std::vector<int> primes{13, 17};
    std::vector<int> lengths;
    experiment->add_option("--primes", primes, "prime moduli");
    experiment->add_option("--lengths", lengths, "AP lengths (default: all L < p)");
    auto* verify = app.add_subcommand("verify", "check a decomposition result");
    std::string result_path;
    verify->add_option("--result", result_path, "decomposition JSON path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        apply_config_file(rc);
        if (norm->parsed()) return cmd_norm(rc);
        if (dft_cmd->parsed()) return cmd_dft(rc);
        if (bohr->parsed()) return cmd_bohr(rc);
        if (measure->parsed()) return cmd_measure(rc);
        if (pipeline->parsed()) return cmd_pipeline(rc, stage, log_path);
        if (connectivity->parsed())
            return cmd_connectivity(rc, conn_m, conn_l, conn_mode, conn_trials);
        if (decompose->parsed()) return cmd_decompose(rc);
        if (experiment->parsed()) return cmd_experiment_ap(rc, primes, lengths);
        if (verify->parsed()) return cmd_verify(rc, result_path);
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
