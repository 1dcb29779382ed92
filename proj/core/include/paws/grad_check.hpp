#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "paws/tape.hpp"

namespace paws::ad {

/// Builds a scalar loss from parameter nodes. Must be deterministic: grad_check
/// evaluates it repeatedly and throws DeterminismError if two evaluations of
/// the unperturbed loss disagree bitwise.
using GraphBuilder = std::function<Var(Tape&, const std::vector<Var>&)>;

struct GradCheckParamReport {
    double max_rel_err = 0.0;
    std::size_t worst_entry = 0;  // flat index into the parameter
    double analytic_at_worst = 0.0;
    double numeric_at_worst = 0.0;
};

struct GradCheckReport {
    std::vector<GradCheckParamReport> per_param;
    double max_rel_err = 0.0;

    bool within(double tol) const { return max_rel_err <= tol; }
    // Indices of parameters whose max relative error exceeds tol.
    std::vector<std::size_t> flagged(double tol) const;
};

/// Relative error with an absolute floor: |a - n| / max(|a|, |n|, 1e-3).
/// Entries below the floor are assessed on the absolute scale, which keeps
/// central-difference noise (~1e-8 for h = 1e-5) well under a 1e-4 tolerance
/// while still flagging any real rule error.
double relative_error(double analytic, double numeric);

/// Compare analytic gradients (one backward pass) against central finite
/// differences (loss(p + h e) - loss(p - h e)) / 2h for every entry of every
/// parameter.
GradCheckReport grad_check(const GraphBuilder& build, const std::vector<Matrix>& params, double h,
                           double tol);

}  // namespace paws::ad
