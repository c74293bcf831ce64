#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "haze/core/tensor.hpp"

namespace haze {

struct Node;
using NodeRef = std::shared_ptr<Node>;

struct Node {
    Tensor value;
    Tensor grad;  // allocated on first accumulation
    bool requires_grad = false;
    uint64_t seq = 0;
    std::vector<NodeRef> inputs;
    std::function<void(Node&)> backward_fn;

    Tensor& ensure_grad() {
        if (!grad.defined()) grad = Tensor(value.shape());
        return grad;
    }
};

// Reverse-mode autodiff handle. Copies share the underlying node.
class Var {
  public:
    Var() = default;
    explicit Var(NodeRef n) : node_(std::move(n)) {}
    explicit Var(Tensor value, bool requires_grad = false);

    bool defined() const { return node_ != nullptr; }
    const Tensor& val() const { return node_->value; }
    Tensor& mutable_val() { return node_->value; }
    Tensor& grad() const { return node_->ensure_grad(); }
    bool has_grad() const { return node_ && node_->grad.defined(); }
    bool requires_grad() const { return node_ && node_->requires_grad; }
    const NodeRef& node() const { return node_; }

    const std::vector<int64_t>& shape() const { return node_->value.shape(); }
    int64_t dim(int i) const { return node_->value.dim(i); }
    int64_t numel() const { return node_->value.numel(); }

    // Reverse pass from a scalar. Accumulates into .grad of every
    // reachable node with requires_grad set.
    void backward() const;

    void zero_grad() const {
        if (node_ && node_->grad.defined()) node_->grad.fill(0.0);
    }

    Var detach() const;

  private:
    NodeRef node_;
};

// Grad-mode switch. With grad disabled, ops produce graph-free results.
bool grad_enabled();

struct NoGradGuard {
    NoGradGuard();
    ~NoGradGuard();
    bool previous;
};

// Analytic multiply-accumulate counter. While active, conv/linear ops skip
// their arithmetic and only track shapes, so a full-size forward pass is
// cheap to account.
struct MacCounter {
    static bool active();
    static void add(int64_t macs);
    static int64_t total();
};

struct MacCountGuard {
    MacCountGuard();
    ~MacCountGuard();
};

// Builds an op node. Inputs and the backward closure are dropped when no
// graph is required.
Var make_op(Tensor out, std::vector<Var> inputs, std::function<void(Node&)> backward_fn);

// Accumulates g into v's grad if v tracks gradients.
void accumulate_grad(const NodeRef& n, const Tensor& g);

}  // namespace haze
