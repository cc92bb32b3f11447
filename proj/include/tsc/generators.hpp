#pragma once

#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "tsc/errors.hpp"
#include "tsc/expr.hpp"
#include "tsc/random.hpp"
#include "tsc/time_scale.hpp"

namespace tsc {

/// Random canonical scale: 1-8 segments with endpoints on the 0.125 grid in
/// [lo_cell, hi_cell] x 0.125 (default [-10, 10]), each segment collapsed to
/// an isolated point with probability 0.4 (except when that would leave a
/// single-point scale). Grid endpoints keep every jump exactly representable.
inline TimeScale random_scale(Rng& rng, long lo_cell = -80, long hi_cell = 80) {
    if (hi_cell - lo_cell < 16)
        throw InvalidArgument("lattice window too small for 8 segments");
    const int nseg = static_cast<int>(rng.uniform_int(1, 8));
    std::set<long> grid; // indices on the 0.125 lattice
    while (static_cast<int>(grid.size()) < 2 * nseg)
        grid.insert(rng.uniform_int(lo_cell, hi_cell));
    std::vector<long> idx(grid.begin(), grid.end());
    std::vector<Segment> segs;
    for (int i = 0; i < nseg; ++i) {
        const double lo = static_cast<double>(idx[2 * i]) * 0.125;
        const double hi = static_cast<double>(idx[2 * i + 1]) * 0.125;
        const bool collapse = rng.bernoulli(0.4) && nseg > 1;
        segs.push_back(collapse ? Segment{lo, lo} : Segment{lo, hi});
    }
    return TimeScale::canonicalize(std::move(segs));
}

/// Random purely discrete scale of n points spanning [lo, hi], with every
/// gap at least (hi-lo)/(4n) so difference quotients stay well conditioned.
inline TimeScale random_discrete_scale(Rng& rng, int n, double lo, double hi) {
    if (n < 2) throw InvalidArgument("need at least two points");
    const long cells = 4L * n;
    std::set<long> idx{0, cells};
    while (static_cast<int>(idx.size()) < n) idx.insert(rng.uniform_int(1, cells - 1));
    std::vector<Segment> segs;
    for (long k : idx) {
        const double t = lo + (hi - lo) * static_cast<double>(k) /
                                  static_cast<double>(cells);
        segs.push_back({t, t});
    }
    return TimeScale::canonicalize(std::move(segs));
}

/// Finite stage of the middle-thirds construction on [lo, hi]: level 0 is
/// the full segment, each level removes the open middle third of every
/// segment. Handy as a scale with many dense and scattered points at once.
inline TimeScale ternary_scale(int level, double lo = 0.0, double hi = 1.0) {
    if (level < 0) throw InvalidArgument("level must be nonnegative");
    std::vector<Segment> segs{{lo, hi}};
    for (int k = 0; k < level; ++k) {
        std::vector<Segment> next;
        for (const Segment& s : segs) {
            const double third = (s.hi - s.lo) / 3.0;
            next.push_back({s.lo, s.lo + third});
            next.push_back({s.hi - third, s.hi});
        }
        segs = std::move(next);
    }
    return TimeScale::canonicalize(std::move(segs));
}

/// Random cubic with coefficients on the 0.25 grid in [-2, 2]; never the
/// zero polynomial.
inline Expr random_polynomial(Rng& rng) {
    for (;;) {
        const double c0 = static_cast<double>(rng.uniform_int(-8, 8)) * 0.25;
        const double c1 = static_cast<double>(rng.uniform_int(-8, 8)) * 0.25;
        const double c2 = static_cast<double>(rng.uniform_int(-8, 8)) * 0.25;
        const double c3 = static_cast<double>(rng.uniform_int(-8, 8)) * 0.25;
        if (c0 == 0.0 && c1 == 0.0 && c2 == 0.0 && c3 == 0.0) continue;
        char buf[128];
        std::snprintf(buf, sizeof buf, "%.17g + %.17g*t + %.17g*t^2 + %.17g*t^3",
                      c0, c1, c2, c3);
        return Expr::parse(buf, {"t"});
    }
}

} // namespace tsc
