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

// Request-level driver behind the qrobust command-line tool.
//
// Exit codes: 0 when the analysis certifies stability (or every oracle check
// passes), 2 when the analysis completes with a negative answer, 1 on error.

#include <algorithm>
#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "qrobust/fock_oracle.hpp"
#include "qrobust/io.hpp"
#include "qrobust/moment_sim.hpp"
#include "qrobust/sbr_analysis.hpp"

namespace qrs {

enum class Mode { Theorem3, Theorem4, OracleVerify, Sweep, Simulate };

inline const char* to_string(Mode m) {
    switch (m) {
        case Mode::Theorem3: return "theorem3";
        case Mode::Theorem4: return "theorem4";
        case Mode::OracleVerify: return "oracle_verify";
        case Mode::Sweep: return "sweep";
        case Mode::Simulate: return "simulate";
    }
    return "?";
}

inline std::optional<Mode> parse_mode(const std::string& s) {
    for (const Mode m : {Mode::Theorem3, Mode::Theorem4, Mode::OracleVerify, Mode::Sweep, Mode::Simulate})
        if (s == to_string(m)) return m;
    return std::nullopt;
}

struct SweepSpec {
    std::string path;
    double start = 0.0;
    double stop = 0.0;
    int count = 2;

    /// Parses "path:lo:hi:n".
    static SweepSpec parse(const std::string& text) {
        const auto c3 = text.rfind(':');
        const auto c2 = c3 == std::string::npos || c3 == 0 ? std::string::npos : text.rfind(':', c3 - 1);
        const auto c1 = c2 == std::string::npos || c2 == 0 ? std::string::npos : text.rfind(':', c2 - 1);
        if (c1 == std::string::npos || c1 == 0)
            throw ParseError("--sweep expects param:lo:hi:n, got \"" + text + "\"");
        SweepSpec s;
        s.path = text.substr(0, c1);
        try {
            std::size_t used = 0;
            const std::string lo = text.substr(c1 + 1, c2 - c1 - 1);
            const std::string hi = text.substr(c2 + 1, c3 - c2 - 1);
            const std::string n = text.substr(c3 + 1);
            s.start = std::stod(lo, &used);
            if (used != lo.size()) throw std::invalid_argument(lo);
            s.stop = std::stod(hi, &used);
            if (used != hi.size()) throw std::invalid_argument(hi);
            s.count = std::stoi(n, &used);
            if (used != n.size()) throw std::invalid_argument(n);
        } catch (const std::logic_error&) {
            throw ParseError("--sweep expects param:lo:hi:n with numeric bounds, got \"" + text + "\"");
        }
        return s;
    }

    [[nodiscard]] std::vector<double> values() const {
        std::vector<double> v(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = start + (stop - start) * i / (count - 1);
        return v;
    }
};

struct AnalysisRequest {
    std::string system_file;
    Mode mode = Mode::Theorem3;
    std::optional<SweepSpec> sweep;
    std::string output_dir = ".";
    std::optional<double> gamma;
    std::optional<int> cutoff;
    std::optional<int> guard;
    double simulate_horizon = 10.0;
    int simulate_points = 201;
    double oracle_horizon = 5.0;
    int oracle_points = 101;
};

struct RunOutcome {
    int exit_code = 1;
    std::string summary;
    std::vector<std::string> files;
};

namespace cli_detail {

inline void check_request(const AnalysisRequest& r) {
    if ((r.mode == Mode::Sweep) != r.sweep.has_value())
        throw PreconditionError("a sweep specification is required for mode sweep and only allowed there");
    if (r.sweep && r.sweep->count < 2) throw PreconditionError("sweep count must be at least 2");
    if (r.gamma && !(*r.gamma > 0.0)) throw PreconditionError("--gamma must be positive");
}

inline SystemDescription load(const AnalysisRequest& r, std::optional<json> doc = std::nullopt) {
    json d = doc ? *doc : load_document(r.system_file);
    if (r.gamma) d["gamma"] = *r.gamma;
    try {
        return system_from_json(d);
    } catch (const ParseError& e) {
        throw ParseError(r.system_file + ": " + e.what());
    }
}

inline FockSpace fock_space(const AnalysisRequest& r, Index modes) {
    FockSpace s = FockSpace::with_defaults(static_cast<int>(modes));
    if (r.cutoff) s.cutoff = *r.cutoff;
    if (r.guard) s.guard = *r.guard;
    s.check();
    return s;
}

inline std::string out_path(const AnalysisRequest& r, const std::string& name) {
    return (std::filesystem::path(r.output_dir) / name).string();
}

inline ordered_json check_json(const CheckResult& c) {
    ordered_json j;
    j["name"] = c.name;
    j["value"] = fixed_number(c.value);
    j["threshold"] = fixed_number(c.threshold);
    j["pass"] = c.pass;
    j["cutoff"] = c.cutoff;
    j["guard"] = c.guard;
    return j;
}

inline RunOutcome certify(const AnalysisRequest& r, const SystemDescription& sd, bool polynomial) {
    const bool is_poly = std::holds_alternative<PolynomialPerturbation>(sd.perturbation);
    if (is_poly != polynomial)
        throw PreconditionError(std::string("mode ") + (polynomial ? "theorem4" : "theorem3") + " needs a " +
                                (polynomial ? "polynomial" : "quadratic") + " perturbation");
    const auto cert = analyze(sd.system, sd.perturbation);
    RunOutcome out;
    out.files.push_back(out_path(r, "certificate.json"));
    write_text(out.files.back(), certificate_json(cert).dump(2) + "\n");
    out.summary = cert.verdict();
    out.exit_code = cert.stable() ? 0 : 2;
    return out;
}

inline RunOutcome sweep(const AnalysisRequest& r) {
    const json base = load_document(r.system_file);
    const auto values = r.sweep->values();

    struct Row {
        std::string verdict = "Error";
        std::string detail;
        double hinf = std::nan("");
        double margin = std::nan("");
        double c = std::nan("");
        double lambda = std::nan("");
        double c1 = std::nan(""), c2 = std::nan(""), c3 = std::nan("");
        bool error = false;
    };
    auto eval = [&](double v) {
        Row row;
        try {
            const auto sd = load(r, with_parameter(base, r.sweep->path, v));
            const auto cert = analyze(sd.system, sd.perturbation);
            row.verdict = cert.verdict();
            row.detail = cert.detail;
            row.hinf = cert.hinf_norm;
            row.margin = cert.gamma_margin;
            if (cert.stable()) {
                row.c = cert.c;
                row.lambda = cert.lambda;
                row.c1 = cert.c1;
                row.c2 = cert.c2;
                row.c3 = cert.c3;
            }
        } catch (const std::exception& e) {
            row.error = true;
            row.detail = e.what();
        }
        return row;
    };

    std::vector<Row> rows(values.size());
    const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    for (std::size_t begin = 0; begin < values.size(); begin += workers) {
        std::vector<std::future<Row>> batch;
        const std::size_t end = std::min(values.size(), begin + workers);
        for (std::size_t i = begin; i < end; ++i) batch.push_back(std::async(std::launch::async, eval, values[i]));
        for (std::size_t i = begin; i < end; ++i) rows[i] = batch[i - begin].get();
    }

    std::string csv = r.sweep->path + ",verdict,hinf_norm,gamma_margin,c,lambda,c1,c2,c3,detail\n";
    int stable = 0, errors = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Row& w = rows[i];
        std::string detail = w.detail;
        std::replace(detail.begin(), detail.end(), '"', '\'');
        csv += csv_number(values[i]) + "," + w.verdict + "," + csv_number(w.hinf) + "," + csv_number(w.margin) +
               "," + csv_number(w.c) + "," + csv_number(w.lambda) + "," + csv_number(w.c1) + "," +
               csv_number(w.c2) + "," + csv_number(w.c3) + ",\"" + detail + "\"\n";
        stable += w.verdict == "RobustlyMeanSquareStable";
        errors += w.error;
    }
    RunOutcome out;
    out.files.push_back(out_path(r, "sweep.csv"));
    write_text(out.files.back(), csv);
    out.summary = std::to_string(rows.size()) + " points, " + std::to_string(stable) + " certified, " +
                  std::to_string(errors) + " errors";
    out.exit_code = errors > 0 ? 1 : 0;
    return out;
}

inline RunOutcome simulate(const AnalysisRequest& r, const SystemDescription& sd) {
    const auto* q = std::get_if<QuadraticPerturbation>(&sd.perturbation);
    if (!q) throw PreconditionError("mode simulate needs a quadratic perturbation (closed second-moment equations)");
    const auto cert = check_theorem3(sd.system, *q);
    const CMat Fcl = closed_loop_F(sd.system, *q);
    std::optional<FockSpace> space;
    if (r.cutoff || r.guard) space = fock_space(r, sd.system.modes());
    const auto noise = calibrate_noise(sd.system, *q, space);
    std::optional<CertificateConstants> k;
    if (cert.stable()) k = CertificateConstants{cert.c, cert.lambda_tilde, cert.lambda, cert.c1, cert.c2, cert.c3};
    const auto traj = simulate_moments(Fcl, noise.G, vacuum_second_moment(sd.system.modes()),
                                       uniform_grid(0.0, r.simulate_horizon, r.simulate_points), k);

    std::string csv = "t,tr_Q,bound\n";
    bool under = true;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const double b = traj.bound.empty() ? std::nan("") : traj.bound[i];
        if (!traj.bound.empty() && traj.trace[i] > b * (1.0 + 1e-6)) under = false;
        csv += csv_number(traj.times[i]) + "," + csv_number(traj.trace[i]) + "," + csv_number(b) + "\n";
    }
    RunOutcome out;
    out.files.push_back(out_path(r, "trajectory.csv"));
    write_text(out.files.back(), csv);
    const double abscissa = spectral_abscissa(Fcl);
    const bool decays = abscissa < -kTolHurwitz;
    out.summary = std::string("closed-loop abscissa ") + std::to_string(abscissa) + (decays ? ", moments converge" : ", moments diverge") +
                  "; certificate " + cert.verdict();
    if (!under) {
        out.summary += "; trajectory exceeds the certified bound";
        out.exit_code = 1;
    } else {
        out.exit_code = decays ? 0 : 2;
    }
    return out;
}

inline RunOutcome oracle_verify(const AnalysisRequest& r, const SystemDescription& sd) {
    const FockSpace space = fock_space(r, sd.system.modes());
    const auto cert = analyze(sd.system, sd.perturbation);
    const auto d = assemble_doubled(sd.system, sd.perturbation);
    const Index n = sd.system.modes();

    ordered_json report;
    report["system"] = r.system_file;
    report["verdict"] = cert.verdict();
    report["cutoff"] = space.cutoff;
    report["guard"] = space.guard;
    ordered_json checks = ordered_json::array();
    ordered_json skipped = ordered_json::array();
    bool all_pass = true;
    auto add = [&](const CheckResult& c) {
        checks.push_back(check_json(c));
        all_pass = all_pass && c.pass;
    };

    const StructuredP P = cert.P ? *cert.P : StructuredP{CMat::Identity(n, n), CMat::Zero(n, n)};
    if (!cert.P) skipped.push_back("certificate-dependent checks (no P): linear identities use P = I");
    for (const auto& c : verify_linear_identities(P.full(), d.M, d.N, space)) add(c);

    const auto hs = build_hamiltonians(sd.system, sd.perturbation, P, space);
    const auto ops = build_mode_operators(space);
    if (const auto* q = std::get_if<QuadraticPerturbation>(&sd.perturbation)) {
        const auto ch = quadratic_w1_channels(*q, ops);
        add(verify_decomposition_W1(hs.V, hs.H2, ch.w, ch.z));
        add(verify_sector1(ch.w, ch.z, q->gamma, 0.0));
        if (cert.stable())
            add(verify_dissipation(hs.V, hs.H1, hs.L, ch.z, q->gamma, cert.c, cert.lambda_tilde,
                                   DissipationVariant::T1));
    } else {
        const auto& p = std::get<PolynomialPerturbation>(sd.perturbation);
        const auto w2 = verify_decomposition_W2(hs.V, P, p.coeffs, d.E);
        add(w2.decomposition);
        report["mu_measured"] = ordered_json::array({fixed_number(w2.mu.measured.real()), fixed_number(w2.mu.measured.imag())});
        add(w2.mu.result);
        const auto sb = check_sector_bounds(p, space);
        add(sb.first);
        add(sb.second);
        if (cert.stable()) {
            const auto z = linear_forms(d.E, ops);
            add(verify_dissipation(hs.V, hs.H1, hs.L, z, p.gamma, cert.c, cert.lambda_tilde,
                                   DissipationVariant::T2));
        }
    }

    RunOutcome out;
    if (cert.stable()) {
        const auto grid = uniform_grid(0.0, r.oracle_horizon, r.oracle_points);
        std::vector<int> vac(static_cast<std::size_t>(n), 0);
        const auto mt = simulate_master_equation(hs.H1 + hs.H2, hs.L, fock_state(space, vac), grid, {hs.V});
        const auto& v = mt.expectations.front();
        std::string csv = "t,V,bound,leakage\n";
        double worst = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double b = std::exp(-cert.c * grid[i]) * v.front() + cert.lambda / cert.c;
            worst = std::max(worst, v[i] - b - 1e-6 * std::max(1.0, v.front()) - mt.leakage[i] * spectral_norm(hs.V.matrix()));
            csv += csv_number(grid[i]) + "," + csv_number(v[i]) + "," + csv_number(b) + "," + csv_number(mt.leakage[i]) + "\n";
        }
        out.files.push_back(out_path(r, "trajectory.csv"));
        write_text(out.files.back(), csv);
        add({"<V(t)> <= exp(-ct)<V(0)> + lambda/c", worst, 0.0, worst <= 0.0, space.cutoff, space.guard});
        report["trajectory_trusted"] = mt.trusted;
    } else {
        skipped.push_back("decay trajectory (no certificate)");
    }
    report["checks"] = checks;
    report["skipped"] = skipped;
    report["all_pass"] = all_pass;
    out.files.push_back(out_path(r, "oracle_report.json"));
    write_text(out.files.back(), report.dump(2) + "\n");
    out.summary = std::string(all_pass ? "all " : "some ") + std::to_string(checks.size()) + " oracle checks " +
                  (all_pass ? "pass" : "fail");
    out.exit_code = all_pass ? 0 : 2;
    return out;
}

}  // namespace cli_detail

/// Runs one request. Errors are reported on `err` and map to exit code 1.
inline RunOutcome run(const AnalysisRequest& request, std::ostream& err = std::cerr) {
    try {
        cli_detail::check_request(request);
        std::filesystem::create_directories(request.output_dir);
        if (request.mode == Mode::Sweep) return cli_detail::sweep(request);
        const auto sd = cli_detail::load(request);
        switch (request.mode) {
            case Mode::Theorem3: return cli_detail::certify(request, sd, false);
            case Mode::Theorem4: return cli_detail::certify(request, sd, true);
            case Mode::Simulate: return cli_detail::simulate(request, sd);
            case Mode::OracleVerify: return cli_detail::oracle_verify(request, sd);
            case Mode::Sweep: break;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
    }
    return {1, "error", {}};
}

}  // namespace qrs
