#pragma once

// Teleportation sign conventions, fixed by the statevector oracle rather than by
// reading the construction's prose (whose displays disagree on the sign).
//
// Bell outcome p (|phi_p> = (I (x) W(p))|phi>, measured on (carrier, half))
// leaves the far half in W(p1, -p2)|chi> up to phase; hops compose additively,
// so a path with outcomes p_1..p_k carries W(sum p1, -sum p2).
//
// A Weyl measurement D(p) on W(P)|chi> returns q' = q + c(p, P), c being the
// commutation phase, so the routed outcome is q' - c(p, P).
//
// Oracle transcript (I = {1}, path of 2 nodes, d = 3, random state, seed 2024):
//   bell_sign -1, correction -1: max |pushforward - e_psi| below 1e-12
//   bell_sign -1, correction +1: mismatch
//   bell_sign +1, correction -1: mismatch
//   bell_sign +1, correction +1: mismatch
// The distribution unit test re-runs all four and fails if this changes.

#include "contextua/quantum.hpp"

#include <vector>

namespace contextua {

inline constexpr int kBellSecondComponentSign = -1;
inline constexpr int kWeylCorrectionSign = -1;

inline WeylLabel accumulated_weyl(int d, const std::vector<WeylLabel>& bell_outcomes,
                                  int bell_sign = kBellSecondComponentSign) {
    long long p1 = 0, p2 = 0;
    for (const auto& p : bell_outcomes) {
        p1 += p.p1;
        p2 += bell_sign * p.p2;
    }
    return weyl_label(d, p1, p2);
}

inline int routed_outcome(int d, WeylLabel p, int measured, WeylLabel accumulated,
                          int correction_sign = kWeylCorrectionSign) {
    return static_cast<int>(mod(measured + correction_sign * commutation_phase(d, p, accumulated), d));
}

}  // namespace contextua
