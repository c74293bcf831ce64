#include "haze/core/var.hpp"

#include <algorithm>
#include <atomic>
#include <unordered_set>

#include "haze/core/errors.hpp"

namespace haze {

namespace {
thread_local bool t_grad_enabled = true;
thread_local bool t_mac_active = false;
thread_local int64_t t_mac_total = 0;
std::atomic<uint64_t> g_seq{1};
}  // namespace

bool grad_enabled() { return t_grad_enabled; }

NoGradGuard::NoGradGuard() : previous(t_grad_enabled) { t_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { t_grad_enabled = previous; }

bool MacCounter::active() { return t_mac_active; }
void MacCounter::add(int64_t macs) { t_mac_total += macs; }
int64_t MacCounter::total() { return t_mac_total; }

MacCountGuard::MacCountGuard() {
    t_mac_active = true;
    t_mac_total = 0;
}
MacCountGuard::~MacCountGuard() { t_mac_active = false; }

Var::Var(Tensor value, bool requires_grad) {
    node_ = std::make_shared<Node>();
    node_->value = std::move(value);
    node_->requires_grad = requires_grad && t_grad_enabled;
    node_->seq = g_seq.fetch_add(1, std::memory_order_relaxed);
}

Var make_op(Tensor out, std::vector<Var> inputs, std::function<void(Node&)> backward_fn) {
    auto n = std::make_shared<Node>();
    n->value = std::move(out);
    n->seq = g_seq.fetch_add(1, std::memory_order_relaxed);
    bool rg = false;
    if (t_grad_enabled) {
        for (const Var& v : inputs)
            if (v.defined() && v.requires_grad()) rg = true;
    }
    n->requires_grad = rg;
    if (rg) {
        n->inputs.reserve(inputs.size());
        for (const Var& v : inputs)
            if (v.defined()) n->inputs.push_back(v.node());
        n->backward_fn = std::move(backward_fn);
    }
    return Var(n);
}

void accumulate_grad(const NodeRef& n, const Tensor& g) {
    if (!n || !n->requires_grad) return;
    Tensor& dst = n->ensure_grad();
    if (!dst.same_shape(g)) throw NumericError("gradient shape mismatch");
    double* d = dst.data();
    const double* s = g.data();
    const int64_t count = g.numel();
    for (int64_t i = 0; i < count; ++i) d[i] += s[i];
}

void Var::backward() const {
    if (!node_) throw InvalidInput("backward() on undefined Var");
    if (node_->value.numel() != 1) throw InvalidInput("backward() requires a scalar value");
    if (!node_->requires_grad) return;

    // Topological order by creation sequence; the graph is a DAG built in
    // forward order, so descending seq is a valid reverse order.
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<Node*> stack{node_.get()};
    while (!stack.empty()) {
        Node* n = stack.back();
        stack.pop_back();
        if (!seen.insert(n).second) continue;
        order.push_back(n);
        for (const NodeRef& in : n->inputs)
            if (in && in->requires_grad) stack.push_back(in.get());
    }
    std::sort(order.begin(), order.end(), [](Node* a, Node* b) { return a->seq > b->seq; });

    node_->ensure_grad().fill(0.0);
    node_->grad(0) = 1.0;
    for (Node* n : order)
        if (n->backward_fn) n->backward_fn(*n);
}

Var Var::detach() const {
    Var v(node_->value, false);
    return v;
}

}  // namespace haze
