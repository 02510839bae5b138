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

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qrobust/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Robust mean-square stability certificates for open quantum systems"};
    std::string system, mode = "theorem3", sweep, out = ".";
    std::optional<double> gamma;
    std::optional<int> cutoff, guard;
    app.add_option("--system", system, "system description (JSON)")->required();
    app.add_option("--mode", mode, "theorem3 | theorem4 | oracle_verify | sweep | simulate");
    app.add_option("--sweep", sweep, "param:lo:hi:n, dotted parameter path into the system file");
    app.add_option("--out", out, "output directory");
    app.add_option("--gamma", gamma, "override the perturbation gain bound");
    app.add_option("--cutoff", cutoff, "Fock levels per mode for oracle work");
    app.add_option("--guard", guard, "guard levels excluded from compressed checks");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    qrs::AnalysisRequest req;
    req.system_file = system;
    req.output_dir = out;
    req.gamma = gamma;
    req.cutoff = cutoff;
    req.guard = guard;
    const auto m = qrs::parse_mode(mode);
    if (!m) {
        std::cerr << "error: unknown mode \"" << mode << "\"\n";
        return 1;
    }
    req.mode = *m;
    try {
        if (!sweep.empty()) req.sweep = qrs::SweepSpec::parse(sweep);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    const auto result = qrs::run(req);
    if (result.exit_code != 1 || result.summary != "error") {
        std::cout << result.summary << "\n";
        for (const auto& f : result.files) std::cout << "wrote " << f << "\n";
    }
    return result.exit_code;
}
