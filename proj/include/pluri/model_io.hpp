#pragma once

// Model ingestion from JSON and canonical re-serialization. Schema:
//   {"backend": "graph"|"toric",
//    "graph": {"vertices": N, "edges": [[i, j, w], ...], "omega": [...]},
//    "toric": {"n": 1|2, "grid": N, "Q": [[...]], "psi": [...]},
//    "arithmetic": "rational"|"float"}
// Rationals are serialized as "p/q" strings; plain numbers are accepted too.

#include "pluri/graph_model.hpp"
#include "pluri/toric_model.hpp"

#include <json.hpp>

#include <fstream>
#include <memory>
#include <string>
#include <variant>

namespace pluri {

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& m) : std::runtime_error(m) {}
};

inline Rat json_rat(const nlohmann::json& j) {
    if (j.is_string()) return Rat::parse(j.get<std::string>());
    if (j.is_number_integer()) return Rat(j.get<long long>());
    if (j.is_number_float()) return Rat::from_double(j.get<double>());
    throw ParseError("expected a number or \"p/q\" string");
}

struct LoadedModel {
    std::string backend;      // "graph" | "toric"
    std::string arithmetic;   // "rational" | "float"
    // graph payload
    std::shared_ptr<GraphModel<Rat>> graph_exact;
    std::shared_ptr<GraphModel<double>> graph_float;
    Vec<Rat> omega_exact;
    Vec<double> omega_float;
    // toric payload
    std::shared_ptr<ToricModel> toric;
    ToricForm toric_omega;

    bool is_graph() const { return backend == "graph"; }
    bool exact() const { return arithmetic == "rational"; }
};

inline LoadedModel parse_model(const nlohmann::json& j) {
    LoadedModel out;
    if (!j.contains("backend")) throw ParseError("model: missing \"backend\"");
    out.backend = j.at("backend").get<std::string>();
    out.arithmetic = j.value("arithmetic", out.backend == "graph" ? "rational" : "float");

    if (out.backend == "graph") {
        if (!j.contains("graph")) throw ParseError("model: missing \"graph\" section");
        const auto& g = j.at("graph");
        GraphTopology t;
        t.vertex_count = g.at("vertices").get<int>();
        for (const auto& e : g.at("edges")) {
            if (!e.is_array() || e.size() != 3) throw ParseError("graph edge must be [i,j,w]");
            t.edges.push_back({e[0].get<int>(), e[1].get<int>(), json_rat(e[2])});
        }
        Vec<Rat> omega(t.vertex_count, Rat(1));
        if (g.contains("omega")) {
            const auto& om = g.at("omega");
            if (static_cast<int>(om.size()) != t.vertex_count)
                throw ParseError("graph omega length mismatch");
            for (int v = 0; v < t.vertex_count; ++v) omega[v] = json_rat(om[v]);
        }
        if (out.arithmetic == "rational") {
            out.graph_exact = std::make_shared<GraphModel<Rat>>(t);
            out.omega_exact = omega;
        } else if (out.arithmetic == "float") {
            out.graph_float = std::make_shared<GraphModel<double>>(t);
            out.omega_float.resize(t.vertex_count);
            for (int v = 0; v < t.vertex_count; ++v) out.omega_float[v] = omega[v].to_double();
        } else {
            throw ParseError("unknown arithmetic mode: " + out.arithmetic);
        }
        return out;
    }
    if (out.backend == "toric") {
        if (out.arithmetic == "rational")
            throw ModelError("toric backend runs in float arithmetic (cell areas mix "
                             "incommensurable slopes); use \"arithmetic\": \"float\"");
        if (!j.contains("toric")) throw ParseError("model: missing \"toric\" section");
        const auto& t = j.at("toric");
        int n = t.at("n").get<int>();
        int N = t.at("grid").get<int>();
        out.toric = std::make_shared<ToricModel>(n, N);
        const auto& Q = t.at("Q");
        if (static_cast<int>(Q.size()) != n) throw ParseError("toric Q must be n x n");
        ToricForm omega = out.toric->zero_form();
        for (int i = 0; i < n; ++i) {
            if (static_cast<int>(Q[i].size()) != n) throw ParseError("toric Q must be n x n");
            for (int k = 0; k < n; ++k) omega.Q[i * n + k] = json_rat(Q[i][k]).to_double();
        }
        if (omega.Q.size() == 4 && omega.Q[1] != omega.Q[2])
            throw ParseError("toric Q must be symmetric");
        if (t.contains("psi")) {
            const auto& psi = t.at("psi");
            if (static_cast<int>(psi.size()) != out.toric->carrier_size())
                throw ParseError("toric psi length mismatch");
            for (int v = 0; v < out.toric->carrier_size(); ++v)
                omega.psi[v] = json_rat(psi[v]).to_double();
        }
        out.toric_omega = omega;
        if (!out.toric->in_cone(omega))
            throw ModelError("toric omega is not in the positive cone");
        return out;
    }
    throw ParseError("unknown backend: " + out.backend);
}

inline LoadedModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open model file: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("JSON parse error: ") + e.what());
    }
    return parse_model(j);
}

// canonical serialization (sorted keys via nlohmann object ordering)
inline nlohmann::json model_to_json(const LoadedModel& m) {
    nlohmann::json j;
    j["backend"] = m.backend;
    j["arithmetic"] = m.arithmetic;
    if (m.is_graph()) {
        nlohmann::json g;
        const GraphTopology& t =
            m.exact() ? m.graph_exact->topology() : m.graph_float->topology();
        g["vertices"] = t.vertex_count;
        nlohmann::json edges = nlohmann::json::array();
        for (const auto& e : t.edges)
            edges.push_back({e.i, e.j, e.w.to_string()});
        g["edges"] = edges;
        nlohmann::json om = nlohmann::json::array();
        if (m.exact())
            for (const auto& x : m.omega_exact) om.push_back(x.to_string());
        else
            for (double x : m.omega_float) om.push_back(Rat::from_double(x).to_string());
        g["omega"] = om;
        j["graph"] = g;
    } else {
        nlohmann::json t;
        int n = m.toric->dim_n();
        t["n"] = n;
        t["grid"] = m.toric->resolution();
        nlohmann::json Q = nlohmann::json::array();
        for (int i = 0; i < n; ++i) {
            nlohmann::json row = nlohmann::json::array();
            for (int k = 0; k < n; ++k)
                row.push_back(Rat::from_double(m.toric_omega.Q[i * n + k]).to_string());
            Q.push_back(row);
        }
        t["Q"] = Q;
        nlohmann::json psi = nlohmann::json::array();
        for (double x : m.toric_omega.psi) psi.push_back(Rat::from_double(x).to_string());
        t["psi"] = psi;
        j["toric"] = t;
    }
    return j;
}

inline size_t canonical_hash(const nlohmann::json& j) {
    std::string s = j.dump();
    size_t h = 1469598103934665603ull;
    for (char c : s) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ull;
    return h;
}

}  // namespace pluri
