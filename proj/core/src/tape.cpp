#include "paws/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace paws::ad {

const Matrix& Var::value() const {
    tape_->check_owns(*this, "Var::value");
    return tape_->slots_[id_].value;
}

const Matrix& Var::grad() const {
    tape_->check_owns(*this, "Var::grad");
    return tape_->slots_[id_].grad;
}

bool Var::requires_grad() const {
    tape_->check_owns(*this, "Var::requires_grad");
    return tape_->slots_[id_].requires_grad;
}

Tape& Var::tape() const {
    if (tape_ == nullptr) throw Error("Var::tape: default-constructed Var");
    return *tape_;
}

bool GradSink::needs(Var parent) const {
    return tape_->slots_[parent.id_].requires_grad;
}

void GradSink::add(Var parent, Matrix contribution) {
    Tape::Slot& slot = tape_->slots_[parent.id_];
    if (!slot.requires_grad) return;
    require_same_shape(slot.value, contribution, "GradSink::add");
    Matrix& adj = tape_->adjoints_[parent.id_];
    if (adj.empty()) {
        adj = std::move(contribution);
    } else {
        add_in_place(adj, contribution);
    }
}

void Tape::check_owns(Var v, const char* what) const {
    if (v.tape_ != this || v.id_ >= slots_.size()) {
        throw Error(std::string(what) + ": Var does not belong to this tape");
    }
}

Var Tape::leaf(Matrix value, bool requires_grad) {
    Slot slot;
    slot.grad = Matrix(value.rows(), value.cols());
    slot.value = std::move(value);
    slot.requires_grad = requires_grad;
    slots_.push_back(std::move(slot));
    return Var(this, slots_.size() - 1);
}

Var Tape::make_node(Matrix value, const std::vector<Var>& parents, BackwardFn backward) {
    bool requires_grad = false;
    for (Var p : parents) {
        check_owns(p, "make_node");
        requires_grad = requires_grad || slots_[p.id_].requires_grad;
    }
    Slot slot;
    slot.grad = Matrix(value.rows(), value.cols());
    slot.value = std::move(value);
    slot.requires_grad = requires_grad;
    if (requires_grad) slot.backward = std::move(backward);
    slots_.push_back(std::move(slot));
    return Var(this, slots_.size() - 1);
}

void Tape::backward(Var loss) {
    check_owns(loss, "backward");
    const Matrix& lv = slots_[loss.id_].value;
    if (lv.rows() != 1 || lv.cols() != 1) {
        throw ShapeError("backward: loss must be 1x1, got " + shape_string(lv));
    }
    adjoints_.assign(slots_.size(), Matrix{});
    Matrix seed(1, 1);
    seed(0, 0) = 1.0;
    adjoints_[loss.id_] = std::move(seed);

    last_visits_ = 0;
    GradSink sink(this);
    for (std::size_t i = loss.id_ + 1; i-- > 0;) {
        if (adjoints_[i].empty()) continue;
        ++last_visits_;
        Slot& slot = slots_[i];
        if (slot.backward) slot.backward(adjoints_[i], sink);
    }
    for (std::size_t i = 0; i < slots_.size(); ++i) {
        if (slots_[i].requires_grad && !adjoints_[i].empty()) {
            add_in_place(slots_[i].grad, adjoints_[i]);
        }
    }
    adjoints_.clear();
}

void Tape::zero_gradients() {
    for (Slot& slot : slots_) fill(slot.grad, 0.0);
}

// ---------------------------------------------------------------------------
// Ops
// ---------------------------------------------------------------------------

Var matmul(Var a, Var b) {
    Matrix value = paws::matmul(a.value(), b.value());
    return a.tape().make_node(std::move(value), {a, b}, [a, b](const Matrix& g, GradSink& sink) {
        if (sink.needs(a)) sink.add(a, matmul_nt(g, b.value()));
        if (sink.needs(b)) sink.add(b, matmul_tn(a.value(), g));
    });
}

Var transpose(Var a) {
    return a.tape().make_node(paws::transpose(a.value()), {a},
                              [a](const Matrix& g, GradSink& sink) { sink.add(a, paws::transpose(g)); });
}

Var add(Var a, Var b) {
    return a.tape().make_node(paws::add(a.value(), b.value()), {a, b},
                              [a, b](const Matrix& g, GradSink& sink) {
                                  sink.add(a, g);
                                  sink.add(b, g);
                              });
}

Var subtract(Var a, Var b) {
    return a.tape().make_node(paws::subtract(a.value(), b.value()), {a, b},
                              [a, b](const Matrix& g, GradSink& sink) {
                                  sink.add(a, g);
                                  sink.add(b, paws::scale(g, -1.0));
                              });
}

Var hadamard(Var a, Var b) {
    return a.tape().make_node(paws::hadamard(a.value(), b.value()), {a, b},
                              [a, b](const Matrix& g, GradSink& sink) {
                                  if (sink.needs(a)) sink.add(a, paws::hadamard(g, b.value()));
                                  if (sink.needs(b)) sink.add(b, paws::hadamard(g, a.value()));
                              });
}

Var scale(Var a, double c) {
    return a.tape().make_node(paws::scale(a.value(), c), {a},
                              [a, c](const Matrix& g, GradSink& sink) { sink.add(a, paws::scale(g, c)); });
}

Var add_constant(Var a, const Matrix& c) {
    return a.tape().make_node(paws::add(a.value(), c), {a},
                              [a](const Matrix& g, GradSink& sink) { sink.add(a, g); });
}

Var add_rowvec(Var a, Var row) {
    const Matrix& av = a.value();
    const Matrix& rv = row.value();
    if (rv.rows() != 1 || rv.cols() != av.cols()) {
        throw ShapeError("add_rowvec: expected [1x" + std::to_string(av.cols()) + "] row, got " +
                         shape_string(rv));
    }
    Matrix value = av;
    for (std::size_t i = 0; i < value.rows(); ++i) {
        double* r = value.row_ptr(i);
        for (std::size_t j = 0; j < value.cols(); ++j) r[j] += rv(0, j);
    }
    return a.tape().make_node(std::move(value), {a, row}, [a, row](const Matrix& g, GradSink& sink) {
        sink.add(a, g);
        if (sink.needs(row)) {
            Matrix dr(1, g.cols());
            for (std::size_t i = 0; i < g.rows(); ++i) {
                const double* r = g.row_ptr(i);
                for (std::size_t j = 0; j < g.cols(); ++j) dr(0, j) += r[j];
            }
            sink.add(row, std::move(dr));
        }
    });
}

Var log(Var a, double floor) {
    const Matrix& av = a.value();
    Matrix value = av;
    for (double& v : value.data()) v = std::log(std::max(v, floor));
    return a.tape().make_node(std::move(value), {a}, [a, floor](const Matrix& g, GradSink& sink) {
        const Matrix& x = a.value();
        Matrix dx = g;
        auto d = dx.data();
        auto xs = x.data();
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = xs[i] > floor ? d[i] / xs[i] : 0.0;
        sink.add(a, std::move(dx));
    });
}

Var exp(Var a) {
    Matrix value = a.value();
    for (double& v : value.data()) v = std::exp(v);
    Matrix captured = value;
    return a.tape().make_node(std::move(value), {a},
                              [a, captured = std::move(captured)](const Matrix& g, GradSink& sink) {
                                  sink.add(a, paws::hadamard(g, captured));
                              });
}

Var pow(Var a, double exponent) {
    Matrix value = a.value();
    for (double& v : value.data()) v = std::pow(v, exponent);
    return a.tape().make_node(std::move(value), {a}, [a, exponent](const Matrix& g, GradSink& sink) {
        const Matrix& x = a.value();
        Matrix dx = g;
        auto d = dx.data();
        auto xs = x.data();
        for (std::size_t i = 0; i < d.size(); ++i) d[i] *= exponent * std::pow(xs[i], exponent - 1.0);
        sink.add(a, std::move(dx));
    });
}

Var relu(Var a) {
    Matrix value = a.value();
    for (double& v : value.data()) v = v > 0.0 ? v : 0.0;
    return a.tape().make_node(std::move(value), {a}, [a](const Matrix& g, GradSink& sink) {
        const Matrix& x = a.value();
        Matrix dx = g;
        auto d = dx.data();
        auto xs = x.data();
        for (std::size_t i = 0; i < d.size(); ++i) {
            if (xs[i] <= 0.0) d[i] = 0.0;
        }
        sink.add(a, std::move(dx));
    });
}

Var concat_rows(Var a, Var b) {
    const Matrix& av = a.value();
    const Matrix& bv = b.value();
    if (av.cols() != bv.cols()) {
        throw ShapeError("concat_rows: column counts differ, " + shape_string(av) + " vs " +
                         shape_string(bv));
    }
    Matrix value(av.rows() + bv.rows(), av.cols());
    std::copy(av.data().begin(), av.data().end(), value.data().begin());
    std::copy(bv.data().begin(), bv.data().end(), value.data().begin() + av.size());
    return a.tape().make_node(std::move(value), {a, b}, [a, b](const Matrix& g, GradSink& sink) {
        const std::size_t top = a.value().rows();
        if (sink.needs(a)) {
            Matrix da(top, g.cols());
            std::copy(g.data().begin(), g.data().begin() + da.size(), da.data().begin());
            sink.add(a, std::move(da));
        }
        if (sink.needs(b)) {
            Matrix db(g.rows() - top, g.cols());
            std::copy(g.data().begin() + top * g.cols(), g.data().end(), db.data().begin());
            sink.add(b, std::move(db));
        }
    });
}

Var row_mean(Var a) {
    const Matrix& av = a.value();
    Matrix value(av.rows(), 1);
    for (std::size_t i = 0; i < av.rows(); ++i) {
        double s = 0.0;
        const double* r = av.row_ptr(i);
        for (std::size_t j = 0; j < av.cols(); ++j) s += r[j];
        value(i, 0) = s / static_cast<double>(av.cols());
    }
    return a.tape().make_node(std::move(value), {a}, [a](const Matrix& g, GradSink& sink) {
        const std::size_t cols = a.value().cols();
        Matrix dx(g.rows(), cols);
        for (std::size_t i = 0; i < g.rows(); ++i) {
            const double v = g(i, 0) / static_cast<double>(cols);
            double* r = dx.row_ptr(i);
            for (std::size_t j = 0; j < cols; ++j) r[j] = v;
        }
        sink.add(a, std::move(dx));
    });
}

Var mean_of_rows(Var a) {
    return a.tape().make_node(paws::mean_of_rows(a.value()), {a},
                              [a](const Matrix& g, GradSink& sink) {
                                  const std::size_t rows = a.value().rows();
                                  Matrix dx(rows, g.cols());
                                  const double inv = 1.0 / static_cast<double>(rows);
                                  for (std::size_t i = 0; i < rows; ++i) {
                                      double* r = dx.row_ptr(i);
                                      for (std::size_t j = 0; j < g.cols(); ++j) r[j] = g(0, j) * inv;
                                  }
                                  sink.add(a, std::move(dx));
                              });
}

Var mean_all(Var a) {
    Matrix value(1, 1);
    value(0, 0) = paws::mean(a.value());
    return a.tape().make_node(std::move(value), {a}, [a](const Matrix& g, GradSink& sink) {
        const Matrix& x = a.value();
        Matrix dx(x.rows(), x.cols(), g(0, 0) / static_cast<double>(x.size()));
        sink.add(a, std::move(dx));
    });
}

Var sum_all(Var a) {
    Matrix value(1, 1);
    value(0, 0) = paws::sum(a.value());
    return a.tape().make_node(std::move(value), {a}, [a](const Matrix& g, GradSink& sink) {
        const Matrix& x = a.value();
        sink.add(a, Matrix(x.rows(), x.cols(), g(0, 0)));
    });
}

Var row_l2_normalize(Var a, double epsilon) {
    const Matrix& av = a.value();
    Matrix value(av.rows(), av.cols());
    std::vector<double> norms(av.rows());
    for (std::size_t i = 0; i < av.rows(); ++i) {
        double s = 0.0;
        const double* r = av.row_ptr(i);
        for (std::size_t j = 0; j < av.cols(); ++j) s += r[j] * r[j];
        const double norm = std::sqrt(s);
        norms[i] = norm;
        const double denom = std::max(norm, epsilon);
        double* o = value.row_ptr(i);
        for (std::size_t j = 0; j < av.cols(); ++j) o[j] = r[j] / denom;
    }
    Matrix normalized = value;
    return a.tape().make_node(
        std::move(value), {a},
        [a, epsilon, norms = std::move(norms), normalized = std::move(normalized)](const Matrix& g,
                                                                                   GradSink& sink) {
            Matrix dx(g.rows(), g.cols());
            for (std::size_t i = 0; i < g.rows(); ++i) {
                if (norms[i] <= epsilon) continue;  // guard region, treated as constant
                const double* gi = g.row_ptr(i);
                const double* yi = normalized.row_ptr(i);
                double dot = 0.0;
                for (std::size_t j = 0; j < g.cols(); ++j) dot += gi[j] * yi[j];
                double* di = dx.row_ptr(i);
                for (std::size_t j = 0; j < g.cols(); ++j) di[j] = (gi[j] - yi[j] * dot) / norms[i];
            }
            sink.add(a, std::move(dx));
        });
}

Var softmax_rows(Var a, double temperature) {
    Matrix value = paws::softmax_rows(a.value(), temperature);
    Matrix captured = value;
    return a.tape().make_node(
        std::move(value), {a},
        [a, temperature, captured = std::move(captured)](const Matrix& g, GradSink& sink) {
            Matrix dx(g.rows(), g.cols());
            for (std::size_t i = 0; i < g.rows(); ++i) {
                const double* gi = g.row_ptr(i);
                const double* yi = captured.row_ptr(i);
                double dot = 0.0;
                for (std::size_t j = 0; j < g.cols(); ++j) dot += gi[j] * yi[j];
                double* di = dx.row_ptr(i);
                for (std::size_t j = 0; j < g.cols(); ++j) {
                    di[j] = yi[j] * (gi[j] - dot) / temperature;
                }
            }
            sink.add(a, std::move(dx));
        });
}

Var cross_entropy_rows(const Matrix& target, Var pred, double floor) {
    const Matrix& pv = pred.value();
    require_same_shape(target, pv, "cross_entropy_rows");
    for (std::size_t i = 0; i < target.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < target.cols(); ++j) s += target(i, j);
        if (std::abs(s - 1.0) > 1e-9) {
            throw ValidationError("cross_entropy_rows: target row " + std::to_string(i) +
                                  " sums to " + std::to_string(s) + ", expected 1");
        }
    }
    const double inv_n = 1.0 / static_cast<double>(pv.rows());
    double total = 0.0;
    for (std::size_t i = 0; i < pv.rows(); ++i) {
        const double* ti = target.row_ptr(i);
        const double* pi = pv.row_ptr(i);
        for (std::size_t j = 0; j < pv.cols(); ++j) {
            total -= ti[j] * std::log(std::max(pi[j], floor));
        }
    }
    Matrix value(1, 1);
    value(0, 0) = total * inv_n;
    Matrix target_copy = target;
    return pred.tape().make_node(
        std::move(value), {pred},
        [pred, floor, inv_n, target_copy = std::move(target_copy)](const Matrix& g, GradSink& sink) {
            const Matrix& p = pred.value();
            Matrix dp(p.rows(), p.cols());
            const double g0 = g(0, 0);
            for (std::size_t i = 0; i < p.rows(); ++i) {
                const double* ti = target_copy.row_ptr(i);
                const double* pi = p.row_ptr(i);
                double* di = dp.row_ptr(i);
                for (std::size_t j = 0; j < p.cols(); ++j) {
                    di[j] = pi[j] > floor ? -g0 * inv_n * ti[j] / pi[j] : 0.0;
                }
            }
            sink.add(pred, std::move(dp));
        });
}

Var sharpen_rows(Var a, double temperature) {
    if (temperature <= 0.0) {
        throw DomainError("sharpen_rows: temperature must be positive, got " +
                          std::to_string(temperature));
    }
    constexpr double kFloor = 1e-12;
    const Matrix& av = a.value();
    const double c = 1.0 / temperature;
    Matrix value(av.rows(), av.cols());
    for (std::size_t i = 0; i < av.rows(); ++i) {
        const double* r = av.row_ptr(i);
        double any_positive = 0.0;
        for (std::size_t j = 0; j < av.cols(); ++j) any_positive = std::max(any_positive, r[j]);
        if (any_positive <= 0.0) {
            throw ValidationError("sharpen_rows: row " + std::to_string(i) + " is all zero");
        }
        double s = 0.0;
        double* o = value.row_ptr(i);
        for (std::size_t j = 0; j < av.cols(); ++j) {
            o[j] = std::exp(c * std::log(std::max(r[j], kFloor)));
            s += o[j];
        }
        for (std::size_t j = 0; j < av.cols(); ++j) o[j] /= s;
    }
    Matrix normalized = value;
    return a.tape().make_node(
        std::move(value), {a},
        [a, c, normalized = std::move(normalized)](const Matrix& g, GradSink& sink) {
            const Matrix& x = a.value();
            Matrix dx(g.rows(), g.cols());
            for (std::size_t i = 0; i < g.rows(); ++i) {
                const double* gi = g.row_ptr(i);
                const double* yi = normalized.row_ptr(i);
                const double* xi = x.row_ptr(i);
                double dot = 0.0;
                for (std::size_t j = 0; j < g.cols(); ++j) dot += gi[j] * yi[j];
                double* di = dx.row_ptr(i);
                for (std::size_t j = 0; j < g.cols(); ++j) {
                    // d/dx_j of u_j/S with u = x^c: (c u_j / (x_j S)) (g_j - <g,y>)
                    di[j] = xi[j] > kFloor ? c * yi[j] / xi[j] * (gi[j] - dot) : 0.0;
                }
            }
            sink.add(a, std::move(dx));
        });
}

}  // namespace paws::ad
