#pragma once

#include <string>
#include <vector>

namespace tsc {

/// Outcome of one machine-checked identity. The invariant
/// passed == (max_residual <= tolerance) holds for every report the library
/// produces; structural identities use tolerance 0 and exact residuals.
struct IdentityReport {
    std::string identity_name;
    std::string scale_id;
    long points_checked = 0;
    double max_residual = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

inline IdentityReport make_report(std::string name, std::string scale_id,
                                  long points, double max_residual,
                                  double tolerance) {
    IdentityReport r;
    r.identity_name = std::move(name);
    r.scale_id = std::move(scale_id);
    r.points_checked = points;
    r.max_residual = max_residual;
    r.tolerance = tolerance;
    r.passed = max_residual <= tolerance;
    return r;
}

} // namespace tsc
