#pragma once

namespace rmoe {

/// Event counters shared by the M-step solvers. All fields are additive;
/// pass the same instance through a whole fit to accumulate.
struct SolverDiag {
    int nr_failures = 0;        // 1-D Newton gave up (no bracket either)
    int clamp_events = 0;       // MM exponent clamped at +/-700
    int sigma_floor_hits = 0;   // sigma update hit the floor
    int empty_components = 0;   // responsibility mass below threshold
    int pn_backtrack_failures = 0;
    int skipped_coordinates = 0; // zero-denominator coordinate skips

    void merge(const SolverDiag& o) {
        nr_failures += o.nr_failures;
        clamp_events += o.clamp_events;
        sigma_floor_hits += o.sigma_floor_hits;
        empty_components += o.empty_components;
        pn_backtrack_failures += o.pn_backtrack_failures;
        skipped_coordinates += o.skipped_coordinates;
    }
};

} // namespace rmoe
