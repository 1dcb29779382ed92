#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "paws/matrix.hpp"

namespace paws::ad {

class Tape;

/// Lightweight handle to a node on a Tape. Valid while the tape lives; copies
/// alias the same node.
class Var {
   public:
    Var() = default;

    const Matrix& value() const;
    /// Accumulated gradient, same shape as value. Zero until backward() runs.
    const Matrix& grad() const;
    bool requires_grad() const;
    std::size_t rows() const { return value().rows(); }
    std::size_t cols() const { return value().cols(); }
    bool valid() const { return tape_ != nullptr; }
    Tape& tape() const;

   private:
    friend class Tape;
    friend class GradSink;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}
    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

/// Routes backward contributions from one node to its parents during a
/// backward pass. Contributions into nodes with requires_grad == false are
/// dropped, which is what enforces every stop-gradient in the library.
class GradSink {
   public:
    // True when the parent participates in gradient flow; lets an op skip
    // computing a contribution nobody will read.
    bool needs(Var parent) const;
    void add(Var parent, Matrix contribution);

   private:
    friend class Tape;
    explicit GradSink(Tape* tape) : tape_(tape) {}
    Tape* tape_;
};

/// Dynamic (define-by-run) reverse-mode tape over Matrix values. Nodes are
/// recorded in execution order; replaying the record backwards visits every
/// node after all of its consumers, so one O(n) sweep computes all adjoints.
///
/// Single-threaded: a tape and its Vars belong to one thread for the duration
/// of a forward+backward pass. Matrix values read out of it may be shared
/// freely afterwards.
class Tape {
   public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// New input node. Parameters use requires_grad = true; data and targets
    /// enter as constants and are invisible to backward().
    Var leaf(Matrix value, bool requires_grad = false);
    Var constant(Matrix value) { return leaf(std::move(value), false); }

    using BackwardFn = std::function<void(const Matrix& upstream, GradSink& sink)>;

    /// Record a node with an explicit local-gradient rule. All built-in ops
    /// are built on this; it is public so tests can install deliberately
    /// wrong rules as negative controls.
    Var make_node(Matrix value, const std::vector<Var>& parents, BackwardFn backward);

    /// Accumulate d(loss)/d(node) into every requires_grad node reachable
    /// from loss. Accumulates: calling twice without zeroing doubles the
    /// stored gradients. Throws ShapeError unless loss is 1x1.
    void backward(Var loss);

    void zero_gradients();

    std::size_t node_count() const { return slots_.size(); }
    /// Number of nodes visited by the most recent backward() sweep.
    std::size_t last_backward_visits() const { return last_visits_; }

   private:
    friend class Var;
    friend class GradSink;

    struct Slot {
        Matrix value;
        Matrix grad;
        bool requires_grad = false;
        BackwardFn backward;  // empty for leaves and stop-gradient nodes
    };

    void check_owns(Var v, const char* what) const;

    std::vector<Slot> slots_;
    std::vector<Matrix> adjoints_;  // scratch, alive only inside backward()
    std::size_t last_visits_ = 0;
};

// ---------------------------------------------------------------------------
// Ops. Each returns a new node whose backward implements the standard local
// gradient rule; every one of them is covered by grad_check in the tests.
// ---------------------------------------------------------------------------

Var matmul(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var subtract(Var a, Var b);
Var hadamard(Var a, Var b);
Var scale(Var a, double c);
// Add a constant matrix; gradient passes through unchanged.
Var add_constant(Var a, const Matrix& c);
// Broadcast-add a [1 x c] row vector to every row of a [n x c] node.
Var add_rowvec(Var a, Var row);
// Elementwise natural log of max(x, floor); gradient is 1/x above the floor
// and 0 inside the clamped region. floor = 0 gives the plain log.
Var log(Var a, double floor = 0.0);
Var exp(Var a);
// Elementwise x^c for strictly positive entries.
Var pow(Var a, double exponent);
Var relu(Var a);
Var concat_rows(Var a, Var b);
// Mean of each row: [n x c] -> [n x 1].
Var row_mean(Var a);
// Mean over rows per column: [n x c] -> [1 x c].
Var mean_of_rows(Var a);
// Mean of all entries -> [1 x 1].
Var mean_all(Var a);
Var sum_all(Var a);

/// Each row divided by max(l2norm(row), epsilon). Rows with norm below
/// epsilon map to row/epsilon and contribute zero gradient (degenerate guard
/// region; the function is not differentiable there).
Var row_l2_normalize(Var a, double epsilon = 1e-12);

/// Row-wise softmax with temperature tau > 0, stabilized by max subtraction.
Var softmax_rows(Var a, double temperature);

/// Mean over rows of H(target_i, pred_i) with H(a,b) = -sum_k a_k log(max(b_k, floor)).
/// The target is a plain Matrix, not a node: no gradient can flow into it,
/// which realizes the stop-gradient on sharpened targets by construction.
/// Requires every target row to sum to 1 within 1e-9.
Var cross_entropy_rows(const Matrix& target, Var pred, double floor = 1e-12);

/// Differentiable sharpening: row k of the output is x_k^(1/T) / sum_j x_j^(1/T),
/// computed as exp(log(max(x,1e-12))/T) for stability. Used only where the
/// mean-entropy regularizer needs gradients through the sharpening; targets
/// use the detached Matrix-level sharpen instead.
Var sharpen_rows(Var a, double temperature);

}  // namespace paws::ad
