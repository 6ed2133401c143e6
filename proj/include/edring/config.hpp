#ifndef EDRING_CONFIG_HPP
#define EDRING_CONFIG_HPP

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "edring/relations.hpp"

namespace edring {

using json = nlohmann::json;

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline const std::set<std::string>& known_checks() {
    static const std::set<std::string> k = {
        "key_lemma",     "relation_I",       "relation_II", "corollary_cngap",
        "thm_main",      "zero_energy",      "incompressibility",
        "gram_blocks",   "weerasinghe",      "iterated_sum"};
    return k;
}

// One runnable configuration: model + filling + which checks at which n.
struct Scenario {
    std::string name;
    HamiltonianSpec spec;
    std::optional<FillingSpec> filling;
    int n_min = 0;
    int n_max = 0;
    std::vector<std::string> checks;
    SolverOpts solver;
    RelationTols tols;
    std::string digest;  // hash of the canonicalized config

    std::optional<json> sweep;  // {"axis": "L"|"F"|..., "values": [...]}
};

namespace detail {

inline double parse_number(const json& v, const char* what) {
    // decimal strings are accepted where exactness of the text matters
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        try {
            std::size_t pos = 0;
            double d = std::stod(v.get<std::string>(), &pos);
            if (pos == v.get<std::string>().size()) return d;
        } catch (...) {
        }
    }
    throw config_error(std::string("expected a number for ") + what);
}

inline cplx parse_complex(const json& v, const char* what) {
    if (v.is_array()) {
        if (v.size() != 2) throw config_error(std::string(what) + ": [re, im] expected");
        return cplx(parse_number(v[0], what), parse_number(v[1], what));
    }
    return cplx(parse_number(v, what), 0.0);
}

inline std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

}  // namespace detail

inline Statistics parse_statistics(const std::string& s) {
    if (s == "fermion") return Statistics::fermion;
    if (s == "boson") return Statistics::boson;
    throw config_error("statistics must be \"fermion\" or \"boson\"");
}

inline HamiltonianSpec parse_hamiltonian(const json& j) {
    HamiltonianSpec spec;
    if (!j.contains("L") || !j.contains("statistics"))
        throw config_error("model needs \"L\" and \"statistics\"");
    spec.L = j.at("L").get<int>();
    spec.statistics = parse_statistics(j.at("statistics").get<std::string>());
    spec.mu = j.contains("mu") ? detail::parse_number(j.at("mu"), "mu") : 0.0;
    if (j.contains("symmetrize")) spec.symmetrize = j.at("symmetrize").get<bool>();
    if (j.contains("pseudopotential")) {
        const json& pj = j.at("pseudopotential");
        PseudopotentialSpec pp;
        pp.L = spec.L;
        pp.statistics = spec.statistics;
        if (!pj.contains("F")) throw config_error("pseudopotential needs an \"F\" table");
        for (const auto& [key, val] : pj.at("F").items()) {
            int two_k = 0;
            try {
                two_k = std::stoi(key);
            } catch (...) {
                throw config_error("F table keys must be integers (the value 2k)");
            }
            pp.F[two_k] = detail::parse_complex(val, "F value");
        }
        try {
            pp.validate();
        } catch (const std::exception& e) {
            throw config_error(e.what());
        }
        spec.pseudopotential = pp;
    }
    if (j.contains("terms")) {
        for (const json& tj : j.at("terms")) {
            MBodyTerm t;
            t.m = tj.at("m").get<int>();
            for (const json& ej : tj.at("entries")) {
                MBodyEntry e;
                e.x = ej.at("x").get<std::vector<int>>();
                e.y = ej.at("y").get<std::vector<int>>();
                if (static_cast<int>(e.x.size()) != t.m ||
                    static_cast<int>(e.y.size()) != t.m)
                    throw config_error("term entry arity does not match m");
                for (int s : e.x)
                    if (s < 1 || s > spec.L) throw config_error("site index out of [1, L]");
                for (int s : e.y)
                    if (s < 1 || s > spec.L) throw config_error("site index out of [1, L]");
                e.w = detail::parse_complex(ej.at("w"), "term coefficient");
                t.entries.push_back(std::move(e));
            }
            spec.terms.push_back(std::move(t));
        }
    }
    if (spec.terms.empty() && !spec.pseudopotential && spec.mu == 0.0)
        throw config_error("model has neither terms nor a pseudopotential");
    return spec;
}

inline Scenario parse_scenario(const json& j) {
    Scenario sc;
    sc.name = j.value("name", "scenario");
    if (!j.contains("model")) throw config_error("config needs a \"model\" object");
    sc.spec = parse_hamiltonian(j.at("model"));
    if (j.contains("filling")) {
        FillingSpec f;
        f.p = j.at("filling").at("p").get<int>();
        f.q = j.at("filling").at("q").get<int>();
        if (f.p < 1 || f.q <= f.p) throw config_error("filling needs 1 <= p < q");
        if (std::gcd(f.p, f.q) != 1) throw config_error("filling p, q must be coprime");
        sc.filling = f;
    }
    if (j.contains("n_range")) {
        const json& r = j.at("n_range");
        sc.n_min = r.at(0).get<int>();
        sc.n_max = r.at(1).get<int>();
        if (sc.n_min < 0 || sc.n_max < sc.n_min) throw config_error("bad n_range");
    } else if (sc.filling) {
        sc.n_min = 0;
        sc.n_max = sc.filling->n_q(sc.spec.L) + 1;
    } else {
        throw config_error("config needs \"n_range\" (or a filling to derive it)");
    }
    if (j.contains("checks")) {
        for (const json& c : j.at("checks")) {
            std::string name = c.get<std::string>();
            if (!known_checks().count(name))
                throw config_error("unknown check name: " + name);
            sc.checks.push_back(name);
        }
    } else {
        sc.checks = {"key_lemma", "relation_I", "relation_II", "corollary_cngap"};
        if (sc.filling) {
            sc.checks.push_back("thm_main");
            sc.checks.push_back("zero_energy");
            sc.checks.push_back("incompressibility");
        }
    }
    if (j.contains("solver")) {
        const json& s = j.at("solver");
        sc.solver.dense_crossover = s.value("dense_crossover", sc.solver.dense_crossover);
        sc.solver.max_iterations = s.value("max_iterations", sc.solver.max_iterations);
        sc.solver.max_restarts = s.value("max_restarts", sc.solver.max_restarts);
        sc.solver.seed = s.value("seed", sc.solver.seed);
        sc.solver.use_blocking = s.value("use_blocking", sc.solver.use_blocking);
        if (s.contains("residual_tol"))
            sc.solver.residual_tol = detail::parse_number(s.at("residual_tol"), "residual_tol");
    }
    if (j.contains("tolerances")) {
        const json& t = j.at("tolerances");
        if (t.contains("slack"))
            sc.tols.slack_rel = detail::parse_number(t.at("slack"), "tolerances.slack");
        if (t.contains("kernel"))
            sc.solver.kernel_rel_tol = detail::parse_number(t.at("kernel"), "tolerances.kernel");
        if (t.contains("degeneracy_abs"))
            sc.solver.degeneracy_abs_tol =
                detail::parse_number(t.at("degeneracy_abs"), "tolerances.degeneracy_abs");
        if (t.contains("degeneracy_rel"))
            sc.solver.degeneracy_rel_tol =
                detail::parse_number(t.at("degeneracy_rel"), "tolerances.degeneracy_rel");
    }
    if (j.contains("sweep")) sc.sweep = j.at("sweep");
    sc.digest = detail::fnv1a_hex(j.dump());
    return sc;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw config_error(std::string("config parse error: ") + e.what());
    }
    return parse_scenario(j);
}

}  // namespace edring

#endif
