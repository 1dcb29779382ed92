#include "paws/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "paws/errors.hpp"

namespace paws::ad {

std::vector<std::size_t> GradCheckReport::flagged(double tol) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < per_param.size(); ++i) {
        if (per_param[i].max_rel_err > tol) out.push_back(i);
    }
    return out;
}

double relative_error(double analytic, double numeric) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-3});
    return std::abs(analytic - numeric) / denom;
}

namespace {

double evaluate(const GraphBuilder& build, const std::vector<Matrix>& params) {
    Tape tape;
    std::vector<Var> leaves;
    leaves.reserve(params.size());
    for (const Matrix& p : params) leaves.push_back(tape.constant(p));
    Var loss = build(tape, leaves);
    const Matrix& v = loss.value();
    if (v.rows() != 1 || v.cols() != 1) {
        throw ShapeError("grad_check: builder must produce a 1x1 loss, got " + shape_string(v));
    }
    return v(0, 0);
}

}  // namespace

GradCheckReport grad_check(const GraphBuilder& build, const std::vector<Matrix>& params, double h,
                           double tol) {
    (void)tol;  // reports carry raw errors; callers decide what to flag
    const double base = evaluate(build, params);
    const double again = evaluate(build, params);
    if (base != again) {
        throw DeterminismError("grad_check: two evaluations of the builder disagree (" +
                               std::to_string(base) + " vs " + std::to_string(again) + ")");
    }

    // Analytic pass.
    Tape tape;
    std::vector<Var> leaves;
    leaves.reserve(params.size());
    for (const Matrix& p : params) leaves.push_back(tape.leaf(p, /*requires_grad=*/true));
    Var loss = build(tape, leaves);
    tape.backward(loss);

    GradCheckReport report;
    report.per_param.resize(params.size());
    std::vector<Matrix> work = params;
    for (std::size_t p = 0; p < params.size(); ++p) {
        const Matrix& analytic = leaves[p].grad();
        GradCheckParamReport& pr = report.per_param[p];
        auto entries = work[p].data();
        for (std::size_t e = 0; e < entries.size(); ++e) {
            const double saved = entries[e];
            entries[e] = saved + h;
            const double up = evaluate(build, work);
            entries[e] = saved - h;
            const double down = evaluate(build, work);
            entries[e] = saved;
            const double numeric = (up - down) / (2.0 * h);
            const double a = analytic.data()[e];
            const double err = relative_error(a, numeric);
            if (err >= pr.max_rel_err) {
                pr.max_rel_err = err;
                pr.worst_entry = e;
                pr.analytic_at_worst = a;
                pr.numeric_at_worst = numeric;
            }
        }
        report.max_rel_err = std::max(report.max_rel_err, pr.max_rel_err);
    }
    return report;
}

}  // namespace paws::ad
