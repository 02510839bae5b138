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

// Scans the amplifier coupling and prints where the quadratic test starts
// to certify robust mean-square stability, with the certificate constants.

#include <cstdio>

#include "qrobust/qrobust.hpp"

int main() {
    using namespace qrs;
    QuadraticPerturbation pert;
    pert.E1 = CMat::Identity(1, 1);
    pert.E2 = CMat::Zero(1, 1);
    pert.Delta1 = CMat::Zero(1, 1);
    pert.Delta2 = CMat::Constant(1, 1, kI);
    pert.gamma = 1.0;

    std::printf("%6s  %10s  %-32s %10s %10s\n", "kappa", "hinf", "verdict", "c", "c3");
    for (double kappa = 3.0; kappa <= 6.0 + 1e-9; kappa += 0.25) {
        LinearNominalSystem sys{CMat::Zero(1, 1), CMat::Zero(1, 1), CMat::Constant(1, 1, std::sqrt(kappa)),
                                CMat::Zero(1, 1)};
        const auto cert = check_theorem3(sys, pert);
        std::printf("%6.2f  %10.6f  %-32s %10.4g %10.4g\n", kappa, cert.hinf_norm, cert.verdict().c_str(), cert.c,
                    cert.c3);
    }
}
