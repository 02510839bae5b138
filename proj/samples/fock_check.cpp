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

// Builds V = x^H P x from a certificate and checks the commutator and
// dissipation identities behind it on a truncated Fock space.

#include <cstdio>

#include "qrobust/qrobust.hpp"

int main(int argc, char** argv) {
    using namespace qrs;
    const std::string file = argc > 1 ? argv[1] : "data/opa.json";
    const auto sd = load_system(file);
    const auto cert = analyze(sd.system, sd.perturbation);
    std::printf("%s: %s\n", file.c_str(), cert.verdict().c_str());
    if (!cert.P) return 2;

    const FockSpace space = FockSpace::with_defaults(static_cast<int>(sd.system.modes()));
    const auto d = assemble_doubled(sd.system, sd.perturbation);
    for (const auto& r : verify_linear_identities(cert.P->full(), d.M, d.N, space))
        std::printf("  %-70s %.3g %s\n", r.name.c_str(), r.value, r.pass ? "ok" : "FAILED");

    if (const auto* q = std::get_if<QuadraticPerturbation>(&sd.perturbation)) {
        const auto h = build_hamiltonians(sd.system, sd.perturbation, cert.P, space);
        const auto z = quadratic_w1_channels(*q, build_mode_operators(space)).z;
        const auto r = verify_dissipation(h.V, h.H1, h.L, z, q->gamma, cert.c, cert.lambda_tilde,
                                          DissipationVariant::T1);
        std::printf("  %-70s %.3g %s\n", r.name.c_str(), r.value, r.pass ? "ok" : "FAILED");
    }
    return 0;
}
