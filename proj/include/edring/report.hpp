#ifndef EDRING_REPORT_HPP
#define EDRING_REPORT_HPP

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "edring/config.hpp"
#include "edring/relations.hpp"

namespace edring {

// Everything run-dependent (timestamps, versions) lives under "metadata";
// the rest of the document is a deterministic function of config + code.
inline json run_metadata(const Scenario& sc) {
    json m;
    m["scenario"] = sc.name;
    m["config_digest"] = sc.digest;
    m["library"] = "edring";
    m["version"] = "1.0.0";
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    m["generated_at"] = buf;
    return m;
}

inline json to_json(const SpectralSummary& s) {
    json j;
    j["n"] = s.n;
    j["E0"] = s.E0;
    if (s.E1)
        j["E1"] = *s.E1;
    else
        j["E1"] = nullptr;
    j["q_n"] = s.q_n;
    j["kernel_dim"] = s.kernel_dim;
    j["low_values"] = s.low_values;
    j["scale"] = s.scale;
    j["method"] = s.method;
    return j;
}

inline json to_json(const GapReport& g) {
    json j;
    j["n0"] = g.n0;
    if (g.neutral_gap)
        j["neutral_gap"] = *g.neutral_gap;
    else
        j["neutral_gap"] = nullptr;
    j["delta_plus"] = g.delta_plus;
    j["delta_minus"] = g.delta_minus;
    j["charge_gap"] = g.charge_gap;
    return j;
}

inline json to_json(const RelationReport& r) {
    json j;
    j["relation_id"] = r.relation_id;
    j["L"] = r.L;
    j["n"] = r.n;
    j["lhs"] = r.lhs;
    j["rhs"] = r.rhs;
    j["slack"] = r.slack;
    j["pass"] = r.pass;
    j["label"] = r.label;
    j["detail"] = r.detail;
    j["scale"] = r.scale;
    return j;
}

inline json to_json(const GramReport& g, bool include_matrix = false) {
    json j;
    j["n"] = g.n;
    j["norm_gram"] = g.norm_gram;
    j["max_offblock"] = g.max_offblock;
    json blocks = json::array();
    for (const auto& b : g.blocks) {
        json bj;
        bj["gamma"] = b.gamma;
        bj["trace_F"] = b.trace_F;
        bj["min_eig_F"] = b.min_eig_F;
        blocks.push_back(bj);
    }
    j["blocks"] = blocks;
    if (include_matrix) {
        json rows = json::array();
        for (int r = 0; r < g.gram.rows(); ++r) {
            json row = json::array();
            for (int c = 0; c < g.gram.cols(); ++c)
                row.push_back({std::real(g.gram(r, c)), std::imag(g.gram(r, c))});
            rows.push_back(row);
        }
        j["matrix"] = rows;
    }
    return j;
}

inline json to_json(const IteratedGapSum& s) {
    json j;
    j["sum"] = s.sum;
    json terms = json::array();
    for (std::size_t i = 0; i < s.per_k.size(); ++i) {
        json t;
        t["k"] = s.per_k[i].first;
        t["term"] = s.per_k[i].second;
        t["norm_F"] = s.norms_F[i];
        terms.push_back(t);
    }
    j["terms"] = terms;
    return j;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline std::string csv_spectra(const std::vector<SpectralSummary>& rows) {
    std::ostringstream os;
    os.precision(17);
    os << "n,E0,E1,q_n,kernel_dim,method\n";
    for (const auto& s : rows) {
        os << s.n << ',' << s.E0 << ',';
        if (s.E1) os << *s.E1;
        os << ',' << s.q_n << ',' << s.kernel_dim << ',' << s.method << '\n';
    }
    return os.str();
}

inline std::string csv_relations(const std::vector<RelationReport>& rows) {
    std::ostringstream os;
    os.precision(17);
    os << "relation_id,L,n,lhs,rhs,slack,pass,label\n";
    for (const auto& r : rows)
        os << r.relation_id << ',' << r.L << ',' << r.n << ',' << r.lhs << ',' << r.rhs
           << ',' << r.slack << ',' << (r.pass ? "true" : "false") << ',' << r.label
           << '\n';
    return os.str();
}

inline std::string csv_gaps(const std::vector<GapReport>& rows) {
    std::ostringstream os;
    os.precision(17);
    os << "n0,neutral_gap,delta_plus,delta_minus,charge_gap\n";
    for (const auto& g : rows) {
        os << g.n0 << ',';
        if (g.neutral_gap) os << *g.neutral_gap;
        os << ',' << g.delta_plus << ',' << g.delta_minus << ',' << g.charge_gap << '\n';
    }
    return os.str();
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write output file: " + path);
    out << text;
}

inline void write_json(const std::string& path, const json& j) {
    write_text(path, j.dump(2) + "\n");
}

}  // namespace edring

#endif
