#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

// Finite-value guards on op outputs; enabled in test/debug builds.
#ifndef RED_CHECK_FINITE
#ifdef NDEBUG
#define RED_CHECK_FINITE 0
#else
#define RED_CHECK_FINITE 1
#endif
#endif

namespace red {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape& s) {
    std::size_t n = 1;
    for (auto d : s) n *= d;
    return n;
}

inline std::string shape_str(const Shape& s) {
    std::string out = "(";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(s[i]);
    }
    return out + ")";
}

// Architecture-level failures (kernel larger than input, collapsed lengths).
// `stage` is 1-based when the failure belongs to a specific network stage.
class invalid_architecture_error : public std::invalid_argument {
public:
    explicit invalid_architecture_error(const std::string& msg, int stage = 0)
        : std::invalid_argument(msg), stage_(stage) {}
    int stage() const { return stage_; }

private:
    int stage_;
};

class Tensor;
using TensorPtr = std::shared_ptr<Tensor>;

// A dense row-major real tensor that doubles as a reverse-mode tape node.
// Op outputs record their parents and a backward function; calling
// backward() on a scalar output propagates gradients to every leaf with
// requires_grad set.
class Tensor {
public:
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;  // same length as data when requires_grad
    bool requires_grad = false;

    std::vector<TensorPtr> parents;
    std::function<void()> backward_fn;

    Tensor() = default;
    Tensor(Shape s, bool rg) : shape(std::move(s)), data(shape_size(shape), 0.0), requires_grad(rg) {
        if (rg) grad.assign(data.size(), 0.0);
    }

    static TensorPtr create(Shape s, bool requires_grad = false) {
        return std::make_shared<Tensor>(std::move(s), requires_grad);
    }

    static TensorPtr from(Shape s, std::vector<double> values, bool requires_grad = false) {
        auto t = create(std::move(s), requires_grad);
        if (values.size() != t->data.size())
            throw std::invalid_argument("tensor data length " + std::to_string(values.size()) +
                                        " does not match shape " + shape_str(t->shape));
        t->data = std::move(values);
        return t;
    }

    static TensorPtr scalar(double v, bool requires_grad = false) {
        auto t = create(Shape{1}, requires_grad);
        t->data[0] = v;
        return t;
    }

    static TensorPtr full(Shape s, double v) {
        auto t = create(std::move(s));
        std::fill(t->data.begin(), t->data.end(), v);
        return t;
    }

    std::size_t size() const { return data.size(); }
    std::size_t rank() const { return shape.size(); }
    std::size_t dim(std::size_t i) const { return shape.at(i); }

    double item() const {
        if (data.size() != 1) throw std::runtime_error("item() requires a scalar tensor");
        return data[0];
    }

    void set_requires_grad(bool rg) {
        requires_grad = rg;
        if (rg && grad.size() != data.size()) grad.assign(data.size(), 0.0);
        if (!rg) grad.clear();
    }

    void zero_grad() {
        if (requires_grad) std::fill(grad.begin(), grad.end(), 0.0);
    }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }

    // Reverse sweep from this scalar node through the recorded tape.
    void backward() {
        if (!requires_grad) throw std::runtime_error("backward() on a tensor that does not require grad");
        if (data.size() != 1) throw std::runtime_error("backward() requires a scalar output");
        std::fill(grad.begin(), grad.end(), 0.0);
        grad[0] = 1.0;

        // Iterative post-order DFS; graphs are DAGs built per forward pass.
        std::vector<Tensor*> order;
        std::unordered_set<Tensor*> visited;
        std::vector<std::pair<Tensor*, std::size_t>> stack;
        stack.emplace_back(this, 0);
        visited.insert(this);
        while (!stack.empty()) {
            auto& [node, next] = stack.back();
            if (next < node->parents.size()) {
                Tensor* p = node->parents[next++].get();
                if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
            } else {
                order.push_back(node);
                stack.pop_back();
            }
        }
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            if ((*it)->backward_fn) (*it)->backward_fn();
        }
    }
};

inline void check_finite(const Tensor& t, const char* op) {
#if RED_CHECK_FINITE
    if (!t.all_finite()) throw std::runtime_error(std::string(op) + " produced a non-finite value");
#else
    (void)t;
    (void)op;
#endif
}

}  // namespace red
