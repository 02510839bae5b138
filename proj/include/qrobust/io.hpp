// Copyright 2026 The qrobust Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// System description files (JSON) and report serialisation.
//
// A system file is either explicit:
//
//   {"modes": 1, "M1": [[[0, 0]]], "M2": [[0]], "N1": [[2.2360679]], "N2": [[0]],
//    "gamma": 1, "delta1": 0, "delta2": 0,
//    "perturbation": {"type": "quadratic", "E1": [[1]], "E2": [[0]],
//                     "Delta1": [[0]], "Delta2": [[[0, 1]]]}}
//
// or a named template, currently only the optical parametric amplifier:
//
//   {"template": "opa", "coupling": {"kappa": 5}, "gamma": 1}
//
// Matrices are arrays of rows; an entry is a real number or [re, im].
// A polynomial perturbation lists its coefficients sparsely:
//
//   {"type": "polynomial", "E1": [[1]], "E2": [[0]], "degree_cap": 8,
//    "coeffs": [{"k": 2, "l": 0, "value": [1, 0]}, {"k": 0, "l": 2, "value": [1, 0]}]}

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "qrobust/model.hpp"
#include "qrobust/sbr_analysis.hpp"

namespace qrs {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

struct SystemDescription {
    LinearNominalSystem system;
    Perturbation perturbation;
    json document;  // after template expansion
};

namespace io_detail {

[[noreturn]] inline void fail(const std::string& where, const std::string& what) {
    throw ParseError(where + ": " + what);
}

inline cplx parse_complex(const json& j, const std::string& where) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    fail(where, "expected a number or a [re, im] pair");
}

inline CMat parse_matrix(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) fail(where, "expected a non-empty array of rows");
    const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
    if (cols == 0) fail(where + "/0", "expected a non-empty row");
    CMat M(static_cast<Index>(j.size()), static_cast<Index>(cols));
    for (std::size_t r = 0; r < j.size(); ++r) {
        const std::string rw = where + "/" + std::to_string(r);
        if (!j[r].is_array() || j[r].size() != cols) fail(rw, "rows must all have " + std::to_string(cols) + " entries");
        for (std::size_t c = 0; c < cols; ++c)
            M(static_cast<Index>(r), static_cast<Index>(c)) = parse_complex(j[r][c], rw + "/" + std::to_string(c));
    }
    return M;
}

inline const json& field(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) fail(where, std::string("missing key \"") + key + "\"");
    return obj.at(key);
}

inline double number(const json& obj, const char* key, const std::string& where, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_number()) fail(where + "/" + key, "expected a number");
    return obj.at(key).get<double>();
}

inline json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline json expand_template(const json& doc) {
    const std::string name = doc.at("template").get<std::string>();
    if (name != "opa") fail("/template", "unknown template \"" + name + "\" (known: opa)");
    const double kappa = number(field(doc, "coupling", ""), "kappa", "/coupling", std::nan(""));
    if (!(kappa >= 0.0)) fail("/coupling/kappa", "kappa must be a non-negative number");
    json out = doc;
    out["modes"] = 1;
    out["M1"] = json::array({json::array({0.0})});
    out["M2"] = json::array({json::array({0.0})});
    out["N1"] = json::array({json::array({std::sqrt(kappa)})});
    out["N2"] = json::array({json::array({0.0})});
    if (!out.contains("gamma")) out["gamma"] = 1.0;
    if (!out.contains("perturbation")) {
        out["perturbation"] = {{"type", "quadratic"},
                               {"E1", json::array({json::array({1.0})})},
                               {"E2", json::array({json::array({0.0})})},
                               {"Delta1", json::array({json::array({0.0})})},
                               {"Delta2", json::array({json::array({complex_json({0.0, 1.0})})})}};
    }
    return out;
}

inline std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

}  // namespace io_detail

/// Builds system and perturbation from an already-parsed document.
inline SystemDescription system_from_json(const json& input) {
    using namespace io_detail;
    if (!input.is_object()) fail("/", "top level must be an object");
    const json doc = input.contains("template") ? expand_template(input) : input;

    SystemDescription out;
    out.document = doc;
    auto& s = out.system;
    s.M1 = parse_matrix(field(doc, "M1", "/"), "/M1");
    s.M2 = parse_matrix(field(doc, "M2", "/"), "/M2");
    s.N1 = parse_matrix(field(doc, "N1", "/"), "/N1");
    s.N2 = parse_matrix(field(doc, "N2", "/"), "/N2");
    if (doc.contains("modes")) {
        if (!doc["modes"].is_number_integer() || doc["modes"].get<long>() != s.M1.rows())
            fail("/modes", "must equal the dimension of M1 (" + std::to_string(s.M1.rows()) + ")");
    }

    const double gamma = number(doc, "gamma", "", 1.0);
    const double delta1 = number(doc, "delta1", "", 0.0);
    const double delta2 = number(doc, "delta2", "", 0.0);

    const json& p = field(doc, "perturbation", "/");
    const json& type = field(p, "type", "/perturbation");
    if (!type.is_string()) fail("/perturbation/type", "expected a string");
    if (type == "quadratic") {
        QuadraticPerturbation q;
        q.E1 = parse_matrix(field(p, "E1", "/perturbation"), "/perturbation/E1");
        q.E2 = parse_matrix(field(p, "E2", "/perturbation"), "/perturbation/E2");
        q.Delta1 = parse_matrix(field(p, "Delta1", "/perturbation"), "/perturbation/Delta1");
        q.Delta2 = parse_matrix(field(p, "Delta2", "/perturbation"), "/perturbation/Delta2");
        q.gamma = gamma;
        out.perturbation = q;
    } else if (type == "polynomial") {
        PolynomialPerturbation q;
        q.E1row = parse_matrix(field(p, "E1", "/perturbation"), "/perturbation/E1");
        q.E2row = parse_matrix(field(p, "E2", "/perturbation"), "/perturbation/E2");
        q.gamma = gamma;
        q.delta1 = delta1;
        q.delta2 = delta2;
        if (p.contains("degree_cap")) {
            if (!p["degree_cap"].is_number_integer() || p["degree_cap"].get<int>() < 0)
                fail("/perturbation/degree_cap", "expected a non-negative integer");
            q.degree_cap = p["degree_cap"].get<int>();
        }
        const json& coeffs = field(p, "coeffs", "/perturbation");
        if (!coeffs.is_array()) fail("/perturbation/coeffs", "expected an array");
        int top = 0;
        for (const auto& c : coeffs) {
            if (!c.is_object() || !c.contains("k") || !c.contains("l") || !c["k"].is_number_integer() ||
                !c["l"].is_number_integer() || c["k"].get<int>() < 0 || c["l"].get<int>() < 0)
                fail("/perturbation/coeffs", "each entry needs non-negative integers k and l");
            top = std::max({top, c["k"].get<int>(), c["l"].get<int>()});
        }
        if (top > q.degree_cap)
            fail("/perturbation/coeffs", "power " + std::to_string(top) + " exceeds degree_cap " +
                                             std::to_string(q.degree_cap));
        q.coeffs = CMat::Zero(top + 1, top + 1);
        for (std::size_t i = 0; i < coeffs.size(); ++i)
            q.coeffs(coeffs[i]["k"].get<int>(), coeffs[i]["l"].get<int>()) +=
                parse_complex(field(coeffs[i], "value", "/perturbation/coeffs/" + std::to_string(i)),
                              "/perturbation/coeffs/" + std::to_string(i) + "/value");
        out.perturbation = q;
    } else {
        fail("/perturbation/type", "expected \"quadratic\" or \"polynomial\"");
    }
    return out;
}

/// Parses JSON text; syntax errors report line and column.
inline json parse_document(const std::string& text, const std::string& origin = "<input>") {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = io_detail::line_column(text, e.byte == 0 ? 0 : e.byte - 1);
        throw ParseError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
    }
}

inline json load_document(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_document(ss.str(), path);
}

inline SystemDescription load_system(const std::string& path) {
    const json doc = load_document(path);
    try {
        return system_from_json(doc);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

/// Sets the number at a dotted path ("coupling.kappa", "N1.0.0") in a copy of doc.
inline json with_parameter(const json& doc, const std::string& dotted, double value) {
    json out = doc;
    json* node = &out;
    std::stringstream ss(dotted);
    std::string key;
    std::vector<std::string> parts;
    while (std::getline(ss, key, '.')) parts.push_back(key);
    if (parts.empty()) throw ParseError("empty parameter path");
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const std::string& k = parts[i];
        const bool last = i + 1 == parts.size();
        if (node->is_array()) {
            std::size_t idx = 0;
            try {
                idx = std::stoul(k);
            } catch (const std::exception&) {
                throw ParseError("parameter path " + dotted + ": \"" + k + "\" is not an array index");
            }
            if (idx >= node->size()) throw ParseError("parameter path " + dotted + ": index " + k + " out of range");
            node = &(*node)[idx];
        } else if (node->is_object()) {
            if (!node->contains(k) && !last) throw ParseError("parameter path " + dotted + ": missing key " + k);
            node = &(*node)[k];
        } else {
            throw ParseError("parameter path " + dotted + ": cannot descend into a scalar at " + k);
        }
    }
    if (!node->is_null() && !node->is_number())
        throw ParseError("parameter path " + dotted + " does not address a number");
    *node = value;
    return out;
}

/// Rounds to the 1e-15 grid so reports are byte-stable; non-finite values map to null.
inline ordered_json fixed_number(double x) {
    if (!std::isfinite(x)) return nullptr;
    if (std::abs(x) < 1e3) {
        x = std::round(x * 1e15) / 1e15;
        if (x == 0.0) x = 0.0;  // drop negative zero
    }
    return x;
}

inline ordered_json matrix_json(const CMat& M) {
    ordered_json rows = ordered_json::array();
    for (Index r = 0; r < M.rows(); ++r) {
        ordered_json row = ordered_json::array();
        for (Index c = 0; c < M.cols(); ++c)
            row.push_back(ordered_json::array({fixed_number(M(r, c).real()), fixed_number(M(r, c).imag())}));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline ordered_json certificate_json(const StabilityCertificate& c) {
    ordered_json j;
    j["verdict"] = c.verdict();
    j["reason"] = to_string(c.reason);
    j["detail"] = c.detail;
    j["gamma"] = fixed_number(c.gamma);
    j["hinf_norm"] = fixed_number(c.hinf_norm);
    j["gamma_margin"] = fixed_number(c.gamma_margin);
    j["F"] = matrix_json(c.F);
    j["P"] = c.P ? matrix_json(c.P->full()) : ordered_json(nullptr);
    j["c"] = fixed_number(c.c);
    j["lambda_tilde"] = fixed_number(c.lambda_tilde);
    j["mu"] = c.mu ? ordered_json::array({fixed_number(c.mu->real()), fixed_number(c.mu->imag())})
                   : ordered_json(nullptr);
    j["lambda"] = fixed_number(c.lambda);
    j["c1"] = fixed_number(c.c1);
    j["c2"] = fixed_number(c.c2);
    j["c3"] = fixed_number(c.c3);
    ordered_json diag;
    diag["spectral_abscissa"] = fixed_number(c.abscissa);
    diag["hinf_iterations"] = c.hinf_iterations;
    diag["epsilon"] = fixed_number(c.epsilon);
    diag["qmi_method"] = c.qmi_method;
    ordered_json ev = ordered_json::array();
    for (Index i = 0; i < c.residual_eigenvalues.size(); ++i) ev.push_back(fixed_number(c.residual_eigenvalues(i)));
    diag["residual_eigenvalues"] = ev;
    j["diagnostics"] = diag;
    return j;
}

/// Fixed 17-significant-digit CSV field.
inline std::string csv_number(double x) {
    if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot write");
    out << text;
}

}  // namespace qrs
