#pragma once

#include <functional>
#include <memory>
#include <string>
#include <unordered_set>
#include <vector>

#include "lpfno/core/errors.hpp"
#include "lpfno/core/tensor.hpp"

// Reverse-mode automatic differentiation over real tensors. A forward pass
// builds a fresh acyclic graph of GradNodes; backward() walks it once in
// reverse topological order, so every local rule fires exactly once per node.
// Complex arithmetic never appears in the graph: the spectral layers are
// single fat nodes whose backward rules handle the complex math internally.

namespace lpfno::autodiff {

template <typename T>
struct GradNode {
    Tensor<T> value;
    Tensor<T> accumulated_grad;  // empty until something flows back
    bool requires_grad = false;
    std::vector<std::shared_ptr<GradNode>> parents;
    // Pulls this node's accumulated gradient and pushes contributions into the
    // parents. Must not capture an owning reference to its own node.
    std::function<void(GradNode&)> backward_fn;

    Tensor<T>& grad() {
        if (accumulated_grad.empty() && !value.empty())
            accumulated_grad = Tensor<T>(value.shape());
        return accumulated_grad;
    }
};

/// Shared handle to a graph node; ops take and return these by value.
template <typename T>
class Var {
public:
    Var() = default;
    explicit Var(std::shared_ptr<GradNode<T>> n) : node_(std::move(n)) {}

    static Var leaf(Tensor<T> value, bool requires_grad) {
        auto n = std::make_shared<GradNode<T>>();
        n->value = std::move(value);
        n->requires_grad = requires_grad;
        return Var(std::move(n));
    }

    bool valid() const { return node_ != nullptr; }
    GradNode<T>& node() const { return *node_; }
    const std::shared_ptr<GradNode<T>>& ptr() const { return node_; }
    const Tensor<T>& value() const { return node_->value; }
    Tensor<T>& mutable_value() { return node_->value; }
    const Tensor<T>& grad() const { return node_->accumulated_grad; }
    bool requires_grad() const { return node_->requires_grad; }

    void zero_grad() {
        if (!node_->accumulated_grad.empty()) node_->accumulated_grad.fill(T(0));
    }

private:
    std::shared_ptr<GradNode<T>> node_;
};

template <typename T>
Var<T> constant(Tensor<T> value) {
    return Var<T>::leaf(std::move(value), false);
}

template <typename T>
Var<T> parameter(Tensor<T> value) {
    return Var<T>::leaf(std::move(value), true);
}

namespace detail {

/// Child-node factory; requires_grad is inherited from any parent.
template <typename T>
Var<T> make_op(Tensor<T> value, std::vector<std::shared_ptr<GradNode<T>>> parents,
               std::function<void(GradNode<T>&)> backward_fn) {
    auto n = std::make_shared<GradNode<T>>();
    n->value = std::move(value);
    for (const auto& p : parents) n->requires_grad = n->requires_grad || p->requires_grad;
    if (n->requires_grad) {
        n->parents = std::move(parents);
        n->backward_fn = std::move(backward_fn);
    }
    return Var<T>(std::move(n));
}

}  // namespace detail

/// Reverse-mode sweep from a scalar root. Seeds d(root)/d(root) = 1 and fires
/// each reachable backward rule once.
template <typename T>
void backward(const Var<T>& root) {
    GradNode<T>& r = root.node();
    if (r.value.size() != 1)
        throw InvalidArgument("backward needs a scalar root, got shape " +
                              shape_str(r.value.shape()));
    if (!r.requires_grad) return;
    r.grad().fill(T(1));

    // iterative post-order DFS, then replay reversed
    std::vector<GradNode<T>*> order;
    std::unordered_set<GradNode<T>*> visited;
    std::vector<std::pair<GradNode<T>*, std::size_t>> stack{{&r, 0}};
    visited.insert(&r);
    while (!stack.empty()) {
        auto& [node, next_child] = stack.back();
        if (next_child < node->parents.size()) {
            GradNode<T>* p = node->parents[next_child++].get();
            if (p->requires_grad && visited.insert(p).second) stack.push_back({p, 0});
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        if ((*it)->backward_fn) (*it)->backward_fn(**it);
}

/// A trainable tensor with the name it is registered and serialized under.
template <typename T>
struct NamedParam {
    std::string name;
    Var<T> var;
};

}  // namespace lpfno::autodiff
